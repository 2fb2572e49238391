//! Adaptive Simpson quadrature for the piecewise-smooth angular integrands
//! of isotropic hyperplane measures.

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `abs_floor` bounds the absolute tolerance from below so that integrands
/// vanishing on most of the interval terminate.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // A coarse 16-panel pass sets the tolerance scale and keeps narrow
    // features from being missed by the first Simpson estimate.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let xs: Vec<f64> = (0..=2 * PANELS).map(|i| a + 0.5 * h * i as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let coarse: f64 = (0..PANELS)
        .map(|p| h / 6.0 * (fs[2 * p] + 4.0 * fs[2 * p + 1] + fs[2 * p + 2]))
        .sum();
    let scale = coarse.abs().max(
        (0..PANELS)
            .map(|p| h / 6.0 * (fs[2 * p].abs() + 4.0 * fs[2 * p + 1].abs() + fs[2 * p + 2].abs()))
            .sum(),
    );
    let tol = (rel_tol * scale).max(abs_floor) / PANELS as f64;
    (0..PANELS)
        .map(|p| {
            let (x0, x2) = (xs[2 * p], xs[2 * p + 2]);
            let (f0, f1, f2) = (fs[2 * p], fs[2 * p + 1], fs[2 * p + 2]);
            let whole = (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2);
            step(&mut f, x0, x2, f0, f1, f2, whole, tol, MAX_DEPTH)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integrand() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-10, 0.0);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kinked_integrand() {
        let v = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-10, 0.0);
        assert!((v - 0.29).abs() < 1e-9, "{v}");
    }

    #[test]
    fn narrow_support() {
        let v = integrate(|x: f64| (0.01 - (x - 0.5).abs()).max(0.0), 0.0, 1.0, 1e-8, 1e-14);
        assert!((v - 1e-4).abs() < 1e-11, "{v}");
    }
}
