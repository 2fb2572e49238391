//! Small statistical toolbox: moments, confidence intervals, rank
//! correlation, least squares and goodness-of-fit tests.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Two-sided 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    assert_eq!(n, ys.len());
    if n < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1) as f64
}

/// `E|X|^p` estimated by the sample average.
pub fn abs_moment(xs: &[f64], p: f64) -> f64 {
    mean(&xs.iter().map(|x| x.abs().powf(p)).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Normal-approximation 95% interval for the mean.
pub fn mean_ci(xs: &[f64]) -> Interval {
    let m = mean(xs);
    let half = if xs.len() < 2 {
        0.0
    } else {
        Z_95 * std_dev(xs) / (xs.len() as f64).sqrt()
    };
    Interval { lo: m - half, hi: m + half }
}

/// Empirical quantile with linear interpolation; `sorted` must be sorted.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Percentile interval from bootstrap replicates.
pub fn percentile_interval(mut reps: Vec<f64>, level: f64) -> Interval {
    reps.retain(|x| x.is_finite());
    reps.sort_by(f64::total_cmp);
    let a = 0.5 * (1.0 - level);
    Interval {
        lo: quantile_sorted(&reps, a),
        hi: quantile_sorted(&reps, 1.0 - a),
    }
}

/// Resampled index vector of length `n` (with replacement).
pub fn bootstrap_indices<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Average ranks (1-based), ties share their mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation. NaN if either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let c = covariance(&rx, &ry);
    c / (variance(&rx) * variance(&ry)).sqrt()
}

/// Kolmogorov survival function `Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestOutcome {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let s = ne.sqrt();
    TestOutcome {
        statistic: d,
        p_value: kolmogorov_q((s + 0.12 + 0.11 / s) * d),
    }
}

/// One-sample KS test against `Uniform[lo, hi]`.
pub fn ks_uniform(xs: &[f64], lo: f64, hi: f64) -> TestOutcome {
    let mut u: Vec<f64> = xs.iter().map(|x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max);
    let s = n.sqrt();
    TestOutcome {
        statistic: d,
        p_value: kolmogorov_q((s + 0.12 + 0.11 / s) * d),
    }
}

/// Pearson chi-square goodness of fit of counts against probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> TestOutcome {
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (observed.len() - 1) as f64;
    let p = ChiSquared::new(dof).map(|c| c.sf(stat)).unwrap_or(f64::NAN);
    TestOutcome {
        statistic: stat,
        p_value: p,
    }
}
