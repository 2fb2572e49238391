//! Absolute regularity (beta-mixing) on finite partition spaces, the
//! Yoshihara–Heinrich inequality and its covariance corollary, and empirical
//! lower-bound estimates of beta for STIT.

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::geometry::{CuboidRegion, Dim, Vector};
use crate::measure::HyperplaneMeasure;
use crate::rng::{run_replicates, stream, RESAMPLING_STREAM};
use crate::stats;
use crate::stit::{simulate_with_rng, SimulationConfig, StitError};

/// Allowed deviation of the total mass from 1.
pub const MASS_TOL: f64 = 1e-12;

/// Slack for the inequality audits.
pub const AUDIT_SLACK: f64 = 1e-9;

pub const BOOTSTRAP_RESAMPLES: usize = 200;

pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixingError {
    #[error("invalid joint distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("need at least {MIN_REPLICATES} replicates, got {0}")]
    InsufficientSamples(usize),
    #[error("decay fit is degenerate: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Simulation(#[from] StitError),
}

/// Joint law `P(A_r ∩ B_s)` of two finite partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPartitionDistribution {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl JointPartitionDistribution {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, MixingError> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(MixingError::InvalidDistribution("empty matrix".into()));
        }
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(MixingError::InvalidDistribution("ragged matrix".into()));
        }
        let data: Vec<f64> = matrix.into_iter().flatten().collect();
        if data.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(MixingError::InvalidDistribution("entries must be finite and nonnegative".into()));
        }
        let total: f64 = data.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(MixingError::InvalidDistribution(format!("entries sum to {total}, not 1")));
        }
        Ok(JointPartitionDistribution { rows, cols, data })
    }

    /// Normalised contingency table.
    pub fn from_counts(counts: &[Vec<u64>]) -> Result<Self, MixingError> {
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(MixingError::InvalidDistribution("no observations".into()));
        }
        let m = counts
            .iter()
            .map(|r| r.iter().map(|&c| c as f64 / total as f64).collect())
            .collect();
        let mut j = Self::new_unchecked_total(m)?;
        // rounding can leave the sum a few ulps away from 1
        let s: f64 = j.data.iter().sum();
        j.data.iter_mut().for_each(|x| *x /= s);
        Ok(j)
    }

    fn new_unchecked_total(matrix: Vec<Vec<f64>>) -> Result<Self, MixingError> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || matrix.iter().any(|r| r.len() != cols) {
            return Err(MixingError::InvalidDistribution("bad shape".into()));
        }
        Ok(JointPartitionDistribution { rows, cols, data: matrix.into_iter().flatten().collect() })
    }

    /// Product of two marginals.
    pub fn independent(p: &[f64], q: &[f64]) -> Result<Self, MixingError> {
        Self::new(p.iter().map(|a| q.iter().map(|b| a * b).collect()).collect())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.data[r * self.cols + s]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|s| (0..self.rows).map(|r| self.get(r, s)).sum())
            .collect()
    }

    /// `J - p q^T`.
    pub fn deviation(&self) -> Vec<f64> {
        let (p, q) = (self.row_sums(), self.col_sums());
        let mut d = Vec::with_capacity(self.data.len());
        for r in 0..self.rows {
            for s in 0..self.cols {
                d.push(self.get(r, s) - p[r] * q[s]);
            }
        }
        d
    }

    /// Merge atoms: row `r` goes to group `row_group[r]`, likewise columns.
    pub fn coarsen(&self, row_group: &[usize], col_group: &[usize]) -> Self {
        let gr = row_group.iter().max().map_or(0, |m| m + 1);
        let gc = col_group.iter().max().map_or(0, |m| m + 1);
        let mut m = vec![vec![0.0; gc]; gr];
        for r in 0..self.rows {
            for s in 0..self.cols {
                m[row_group[r]][col_group[s]] += self.get(r, s);
            }
        }
        JointPartitionDistribution { rows: gr, cols: gc, data: m.into_iter().flatten().collect() }
    }
}

/// `(1/2) sum |P(A_r ∩ B_s) - P(A_r) P(B_s)|`.
pub fn beta_exact(j: &JointPartitionDistribution) -> f64 {
    0.5 * j.deviation().iter().map(|d| d.abs()).sum::<f64>()
}

/// Largest `|P(C) - (P_A ⊗ P_B)(C)|` over sets of atom pairs, which is the
/// sum of the positive deviations.
pub fn beta_variational(j: &JointPartitionDistribution) -> f64 {
    j.deviation().iter().map(|d| d.max(0.0)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub beta: f64,
    pub pass: bool,
}

/// Yoshihara–Heinrich: `∫|h| d|P_{A⊗B} - P_A⊗P_B| <= 2 max(‖h‖_{1+δ}) β^{δ/(1+δ)}`
/// with the two norms taken under the joint law and the product law.
pub fn yoshihara_check(
    j: &JointPartitionDistribution,
    h: &[Vec<f64>],
    delta: f64,
) -> Result<InequalityReport, MixingError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(MixingError::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    let (rows, cols) = j.shape();
    if h.len() != rows || h.iter().any(|r| r.len() != cols) {
        return Err(MixingError::InvalidDistribution("h does not match the atom grid".into()));
    }
    if h.iter().flatten().any(|x| !x.is_finite()) {
        return Err(MixingError::InvalidParams("h must be finite".into()));
    }
    let (p, q) = (j.row_sums(), j.col_sums());
    let dev = j.deviation();
    let e = 1.0 + delta;
    let (mut lhs, mut joint, mut product) = (0.0, 0.0, 0.0);
    for r in 0..rows {
        for s in 0..cols {
            let a = h[r][s].abs();
            lhs += a * dev[r * cols + s].abs();
            joint += a.powf(e) * j.get(r, s);
            product += a.powf(e) * p[r] * q[s];
        }
    }
    let beta = beta_exact(j);
    let rhs = 2.0 * joint.powf(1.0 / e).max(product.powf(1.0 / e)) * beta.powf(delta / e);
    Ok(InequalityReport { lhs, rhs, beta, pass: lhs <= rhs + AUDIT_SLACK })
}

/// `|Cov(X, Z)| <= 2 ‖X‖_{2+δ} ‖Z‖_{2+δ} β(σ(X), σ(Z))^{δ/(2+δ)}` for `X`
/// constant on row atoms and `Z` constant on column atoms. `β` is taken on
/// the partitions generated by the values of `X` and `Z`.
pub fn covariance_bound_check(
    x: &[f64],
    z: &[f64],
    j: &JointPartitionDistribution,
    delta: f64,
) -> Result<InequalityReport, MixingError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(MixingError::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    let (rows, cols) = j.shape();
    if x.len() != rows || z.len() != cols {
        return Err(MixingError::InvalidDistribution("X or Z does not match the atoms".into()));
    }
    if x.iter().chain(z).any(|v| !v.is_finite()) {
        return Err(MixingError::InvalidParams("X and Z must be finite".into()));
    }
    let (p, q) = (j.row_sums(), j.col_sums());
    let mut exz = 0.0;
    for r in 0..rows {
        for s in 0..cols {
            exz += x[r] * z[s] * j.get(r, s);
        }
    }
    let ex: f64 = x.iter().zip(&p).map(|(v, w)| v * w).sum();
    let ez: f64 = z.iter().zip(&q).map(|(v, w)| v * w).sum();
    let cov = exz - ex * ez;
    let e = 2.0 + delta;
    let nx: f64 = x.iter().zip(&p).map(|(v, w)| v.abs().powf(e) * w).sum::<f64>().powf(1.0 / e);
    let nz: f64 = z.iter().zip(&q).map(|(v, w)| v.abs().powf(e) * w).sum::<f64>().powf(1.0 / e);
    let beta = beta_exact(&j.coarsen(&value_groups(x), &value_groups(z)));
    let rhs = 2.0 * nx * nz * beta.powf(delta / e);
    Ok(InequalityReport { lhs: cov.abs(), rhs, beta, pass: cov.abs() <= rhs + AUDIT_SLACK })
}

/// Group label per entry, equal values sharing a label.
fn value_groups(v: &[f64]) -> Vec<usize> {
    let mut distinct: Vec<f64> = Vec::new();
    v.iter()
        .map(|x| match distinct.iter().position(|d| d == x) {
            Some(i) => i,
            None => {
                distinct.push(*x);
                distinct.len() - 1
            }
        })
        .collect()
}

/// Moment and mixing exponents of the variance bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentParams {
    pub delta: f64,
    pub theta: f64,
    pub kappa: f64,
}

impl Default for MomentParams {
    fn default() -> Self {
        MomentParams { delta: 2.0, theta: 0.9, kappa: 0.25 }
    }
}

impl MomentParams {
    pub fn new(delta: f64, theta: f64, kappa: f64) -> Result<Self, MixingError> {
        let p = MomentParams { delta, theta, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MixingError> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(MixingError::InvalidParams(format!("delta = {} must be positive", self.delta)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(MixingError::InvalidParams(format!("theta = {} not in (0,1)", self.theta)));
        }
        if !(self.kappa > 0.0 && self.kappa < 0.5) {
            return Err(MixingError::InvalidParams(format!("kappa = {} not in (0,1/2)", self.kappa)));
        }
        Ok(())
    }

    /// `θδ/(2+δ)`, the variance decay exponent.
    pub fn decay_exponent(&self) -> f64 {
        self.theta * self.delta / (2.0 + self.delta)
    }

    /// `ρ = 1 - θδ/(2+δ)`.
    pub fn rho(&self) -> f64 {
        1.0 - self.decay_exponent()
    }
}

/// Empirical beta with its bootstrap standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaEstimate {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub n_samples: usize,
    /// `(m, k)`: number of inner and outer probes.
    pub pattern_dims: (usize, usize),
    pub stderr: f64,
}

/// Probe families for [`empirical_beta`].
#[derive(Clone, Debug)]
pub struct BetaProbes {
    pub inner: Vec<CuboidRegion>,
    pub outer: Vec<CuboidRegion>,
}

impl BetaProbes {
    /// Two halves of `[-a,a]^l` inside; outside, unit-width slabs just
    /// beyond `[-b,b]^l` on the positive side of the first two axes.
    pub fn default_layout(dim: Dim, a: f64, b: f64) -> Result<Self, MixingError> {
        if !(a > 0.0 && b > a) {
            return Err(MixingError::InvalidParams(format!("need 0 < a < b, got a={a}, b={b}")));
        }
        let mk = |lo: Vector, hi: Vector| {
            CuboidRegion::new(dim, lo, hi).map_err(|e| MixingError::InvalidParams(e.to_string()))
        };
        let l = dim.get();
        let fill = |v: f64| {
            let mut x = Vector::ZERO;
            for r in 0..l {
                x.0[r] = v;
            }
            x
        };
        let (lo, hi) = (fill(-a), fill(a));
        let mut mid_hi = hi;
        mid_hi.0[0] = 0.0;
        let mut mid_lo = lo;
        mid_lo.0[0] = 0.0;
        let inner = vec![mk(lo, mid_hi)?, mk(mid_lo, hi)?];
        let gap = OUTER_GAP * b;
        let outer = (0..2)
            .map(|r| {
                let (mut olo, mut ohi) = (fill(-0.5), fill(0.5));
                olo.0[r] = b + gap;
                ohi.0[r] = b + gap + 1.0;
                mk(olo, ohi)
            })
            .collect::<Result<_, _>>()?;
        Ok(BetaProbes { inner, outer })
    }

    pub fn validate(&self, a: f64, b: f64) -> Result<(), MixingError> {
        if !(a > 0.0 && b > a) {
            return Err(MixingError::InvalidParams(format!("need 0 < a < b, got a={a}, b={b}")));
        }
        if self.inner.is_empty() || self.outer.is_empty() {
            return Err(MixingError::InvalidParams("need at least one probe on each side".into()));
        }
        if self.inner.len() + self.outer.len() > 16 {
            return Err(MixingError::InvalidParams("at most 16 probes in total".into()));
        }
        let dim = self.inner[0].dim();
        if self.inner.iter().chain(&self.outer).any(|p| p.dim() != dim) {
            return Err(MixingError::InvalidParams("probe dimensions differ".into()));
        }
        let inner_box = CuboidRegion::centered_cube(dim, a).expect("a > 0");
        if let Some(p) = self.inner.iter().find(|p| !p.is_within(&inner_box)) {
            return Err(MixingError::InvalidParams(format!(
                "inner probe {:?}..{:?} is not inside [-a,a]^l",
                p.lower().coords(dim),
                p.upper().coords(dim)
            )));
        }
        let outer_box = CuboidRegion::centered_cube(dim, b).expect("b > 0");
        if let Some(p) = self.outer.iter().find(|p| p.intersects_closed(&outer_box)) {
            return Err(MixingError::InvalidParams(format!(
                "outer probe {:?}..{:?} meets [-b,b]^l",
                p.lower().coords(dim),
                p.upper().coords(dim)
            )));
        }
        Ok(())
    }

    /// Cube `[-R, R]^l` strictly containing all probes.
    pub fn window(&self) -> CuboidRegion {
        let dim = self.inner[0].dim();
        let r = self
            .inner
            .iter()
            .chain(&self.outer)
            .flat_map(|p| (0..dim.get()).flat_map(move |i| [p.lower()[i].abs(), p.upper()[i].abs()]))
            .fold(0.0, f64::max);
        CuboidRegion::centered_cube(dim, r + WINDOW_MARGIN).expect("r >= 0")
    }
}

/// Relative gap between `[-b,b]^l` and the default outer probes.
const OUTER_GAP: f64 = 0.01;

/// Distance between the outermost probe and the simulation window.
const WINDOW_MARGIN: f64 = 0.1;

/// Hit/miss bit patterns of the probes over `n` independent runs; bit `i` is
/// set when `∂y` meets probe `i`.
pub fn probe_patterns(
    measure: &HyperplaneMeasure,
    t: f64,
    window: &CuboidRegion,
    probes: &BetaProbes,
    n: usize,
    seed: u64,
) -> Result<Vec<(u32, u32)>, MixingError> {
    let cfg = SimulationConfig::in_cuboid(window, t, measure.clone(), seed);
    let pattern = |ps: &[CuboidRegion], y: &crate::stit::Tessellation| {
        ps.iter().enumerate().fold(0u32, |acc, (i, p)| {
            if y.facets().any(|f| f.meets_cuboid(p)) {
                acc | (1 << i)
            } else {
                acc
            }
        })
    };
    run_replicates(seed, n, |_, rng| {
        let y = simulate_with_rng(&cfg, rng)?;
        Ok((pattern(&probes.inner, &y), pattern(&probes.outer, &y)))
    })
    .into_iter()
    .collect()
}

fn pattern_table(patterns: &[(u32, u32)], m: usize, k: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; 1 << k]; 1 << m];
    for &(i, o) in patterns {
        t[i as usize][o as usize] += 1;
    }
    t
}

/// Plug-in beta of the empirical pattern table.
pub fn beta_of_patterns(patterns: &[(u32, u32)], m: usize, k: usize) -> f64 {
    if patterns.is_empty() {
        return 0.0;
    }
    let j = JointPartitionDistribution::from_counts(&pattern_table(patterns, m, k))
        .expect("nonempty table");
    beta_exact(&j).clamp(0.0, 1.0)
}

/// Bootstrap standard error of [`beta_of_patterns`].
pub fn bootstrap_stderr(patterns: &[(u32, u32)], m: usize, k: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, RESAMPLING_STREAM);
    let reps: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let resample: Vec<(u32, u32)> = stats::bootstrap_indices(&mut rng, patterns.len())
                .into_iter()
                .map(|i| patterns[i])
                .collect();
            beta_of_patterns(&resample, m, k)
        })
        .collect();
    stats::std_dev(&reps)
}

/// Estimates after shuffling the outer patterns across replicates, which
/// destroys any dependence. Used to calibrate the plug-in bias.
pub fn permutation_null(patterns: &[(u32, u32)], m: usize, k: usize, shuffles: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, RESAMPLING_STREAM + 1);
    let mut outer: Vec<u32> = patterns.iter().map(|p| p.1).collect();
    (0..shuffles)
        .map(|_| {
            outer.shuffle(&mut rng);
            let mixed: Vec<(u32, u32)> = patterns.iter().zip(&outer).map(|(p, o)| (p.0, *o)).collect();
            beta_of_patterns(&mixed, m, k)
        })
        .collect()
}

/// Empirical lower bound for `β(a, b)` from finitely many probes.
#[derive(Clone, Debug)]
pub struct BetaExperiment {
    pub measure: HyperplaneMeasure,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub probes: BetaProbes,
    pub replicates: usize,
    pub seed: u64,
}

impl BetaExperiment {
    pub fn with_default_probes(measure: HyperplaneMeasure, t: f64, a: f64, b: f64, replicates: usize, seed: u64) -> Result<Self, MixingError> {
        let probes = BetaProbes::default_layout(measure.dim(), a, b)?;
        Ok(BetaExperiment { measure, t, a, b, probes, replicates, seed })
    }

    pub fn validate(&self) -> Result<(), MixingError> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(MixingError::InvalidParams(format!("t = {} must be positive", self.t)));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(MixingError::InsufficientSamples(self.replicates));
        }
        self.probes.validate(self.a, self.b)?;
        if self.probes.inner[0].dim() != self.measure.dim() {
            return Err(MixingError::InvalidParams("probe and measure dimensions differ".into()));
        }
        Ok(())
    }

    pub fn patterns(&self) -> Result<Vec<(u32, u32)>, MixingError> {
        self.validate()?;
        probe_patterns(&self.measure, self.t, &self.probes.window(), &self.probes, self.replicates, self.seed)
    }
}

pub fn empirical_beta(exp: &BetaExperiment) -> Result<BetaEstimate, MixingError> {
    let patterns = exp.patterns()?;
    Ok(estimate_from_patterns(exp, &patterns))
}

pub fn estimate_from_patterns(exp: &BetaExperiment, patterns: &[(u32, u32)]) -> BetaEstimate {
    let (m, k) = (exp.probes.inner.len(), exp.probes.outer.len());
    BetaEstimate {
        a: exp.a,
        b: exp.b,
        value: beta_of_patterns(patterns, m, k),
        n_samples: patterns.len(),
        pattern_dims: (m, k),
        stderr: bootstrap_stderr(patterns, m, k, exp.seed),
    }
}

/// Power-law envelope `χ̂ b^{-θ̂}` over a series of estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub chi: f64,
    pub theta: f64,
    /// Least-squares slope before clamping.
    pub raw_slope: f64,
    /// The slope left `(-1, 0)` and `θ̂` was clamped.
    pub at_boundary: bool,
    /// `ln value - ln(χ̂ b^{-θ̂})` per used point; all `<= 0`.
    pub residuals: Vec<f64>,
}

const THETA_EDGE: f64 = 1e-6;

pub fn fit_decay(estimates: &[BetaEstimate]) -> Result<DecayFit, MixingError> {
    if estimates.len() < 3 {
        return Err(MixingError::InvalidParams("need at least 3 estimates".into()));
    }
    if estimates.windows(2).any(|w| !(w[1].b > w[0].b)) {
        return Err(MixingError::InvalidParams("b must be strictly increasing".into()));
    }
    if estimates.iter().any(|e| e.a != estimates[0].a) {
        return Err(MixingError::InvalidParams("estimates must share a".into()));
    }
    if estimates.iter().all(|e| e.value <= e.stderr) {
        return Err(MixingError::DegenerateFit("indistinguishable from zero".into()));
    }
    let used: Vec<&BetaEstimate> = estimates.iter().filter(|e| e.value > 0.0).collect();
    if used.len() < 2 {
        return Err(MixingError::DegenerateFit("fewer than two positive estimates".into()));
    }
    let xs: Vec<f64> = used.iter().map(|e| e.b.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|e| e.value.ln()).collect();
    let (slope, _) = stats::ols(&xs, &ys);
    let theta = (-slope).clamp(THETA_EDGE, 1.0 - THETA_EDGE);
    let at_boundary = theta != -slope;
    let chi = used
        .iter()
        .map(|e| e.value * e.b.powf(theta))
        .fold(0.0, f64::max);
    let residuals = used
        .iter()
        .map(|e| e.value.ln() - (chi.ln() - theta * e.b.ln()))
        .collect();
    Ok(DecayFit { chi, theta, raw_slope: slope, at_boundary, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coin() -> JointPartitionDistribution {
        JointPartitionDistribution::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap()
    }

    #[test]
    fn beta_examples() {
        let ind = JointPartitionDistribution::independent(&[0.2, 0.3, 0.5], &[0.6, 0.4]).unwrap();
        assert!(beta_exact(&ind) < 1e-15);
        assert!(beta_variational(&ind) < 1e-15);
        assert_eq!(beta_exact(&coin()), 0.5);
        assert_eq!(beta_variational(&coin()), 0.5);
    }

    #[test]
    fn invalid_matrices() {
        assert!(JointPartitionDistribution::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(JointPartitionDistribution::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(JointPartitionDistribution::new(vec![vec![0.5], vec![0.25, 0.25]]).is_err());
        assert!(JointPartitionDistribution::new(vec![]).is_err());
    }

    #[test]
    fn yoshihara_examples() {
        let ind = JointPartitionDistribution::independent(&[0.5, 0.5], &[0.3, 0.7]).unwrap();
        let h = vec![vec![1.0, -2.0], vec![3.0, 0.5]];
        let r = yoshihara_check(&ind, &h, 1.0).unwrap();
        assert!(r.lhs < 1e-15 && r.rhs < 1e-7 && r.pass);
        let ones = vec![vec![1.0; 2]; 2];
        let r = yoshihara_check(&coin(), &ones, 0.5).unwrap();
        assert_relative_eq!(r.lhs, 2.0 * 0.5);
        assert!(r.pass);
    }

    #[test]
    fn covariance_examples() {
        let r = covariance_bound_check(&[-1.0, 1.0], &[-1.0, 1.0], &coin(), 2.0).unwrap();
        assert_relative_eq!(r.lhs, 1.0);
        assert_relative_eq!(r.rhs, 2.0 * 0.5f64.sqrt(), max_relative = 1e-15);
        assert!(r.pass);
        let ind = JointPartitionDistribution::independent(&[0.5, 0.5], &[0.3, 0.7]).unwrap();
        let r = covariance_bound_check(&[1.0, 4.0], &[2.0, -1.0], &ind, 1.0).unwrap();
        assert!(r.lhs < 1e-15 && r.pass);
    }

    #[test]
    fn params() {
        let p = MomentParams::new(2.0, 0.5, 0.25).unwrap();
        assert_eq!(p.decay_exponent(), 0.25);
        assert_eq!(p.rho(), 0.75);
        assert!(MomentParams::new(2.0, 1.0, 0.25).is_err());
        assert!(MomentParams::new(2.0, 0.5, 0.5).is_err());
    }

    fn est(b: f64, value: f64, stderr: f64) -> BetaEstimate {
        BetaEstimate { a: 0.5, b, value, n_samples: 1000, pattern_dims: (2, 2), stderr }
    }

    #[test]
    fn fit_exact_power_law() {
        let es: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|&b| est(b, 2.0 * b.powf(-0.5), 0.0)).collect();
        let fit = fit_decay(&es).unwrap();
        assert!((fit.theta - 0.5).abs() < 1e-6);
        assert!((fit.chi - 2.0).abs() < 1e-6);
        assert!(fit.residuals.iter().all(|r| *r <= 1e-12));
    }

    #[test]
    fn fit_degenerate_cases() {
        let flat: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&b| est(b, 0.3, 0.01)).collect();
        let fit = fit_decay(&flat).unwrap();
        assert!(fit.at_boundary && fit.theta <= 1e-6);
        let zero: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&b| est(b, 0.001, 0.01)).collect();
        assert!(matches!(fit_decay(&zero), Err(MixingError::DegenerateFit(_))));
    }

    #[test]
    fn probe_layout_checks() {
        let p = BetaProbes::default_layout(Dim::Two, 0.5, 2.0).unwrap();
        p.validate(0.5, 2.0).unwrap();
        assert!(p.validate(0.5, 3.5).is_err());
        assert!(p.validate(0.25, 2.0).is_err());
        let w = p.window();
        assert!(p.inner.iter().chain(&p.outer).all(|q| q.is_within(&w)));
        let m = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let e = BetaExperiment::with_default_probes(m, 1.0, 0.5, 2.0, 50, 1).unwrap();
        assert_eq!(e.validate(), Err(MixingError::InsufficientSamples(50)));
    }

    #[test]
    fn identical_probes_give_the_marginal_value() {
        // the same probe on both sides: beta = 2 p (1 - p) for hit rate p
        let m = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let probe = CuboidRegion::centered_cube(Dim::Two, 0.25).unwrap();
        let probes = BetaProbes { inner: vec![probe], outer: vec![probe] };
        let window = CuboidRegion::centered_cube(Dim::Two, 0.5).unwrap();
        let pats = probe_patterns(&m, 1.0, &window, &probes, 2000, 3).unwrap();
        let p = pats.iter().filter(|x| x.0 == 1).count() as f64 / pats.len() as f64;
        let value = beta_of_patterns(&pats, 1, 1);
        let se = bootstrap_stderr(&pats, 1, 1, 3);
        assert!(pats.iter().all(|x| x.0 == x.1));
        assert!((value - 2.0 * p * (1.0 - p)).abs() <= 1e-12 + se);
    }

    #[test]
    fn shuffled_patterns_look_independent() {
        let m = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let exp = BetaExperiment::with_default_probes(m, 1.0, 0.5, 1.0, 1000, 11).unwrap();
        let pats = exp.patterns().unwrap();
        let null = permutation_null(&pats, 2, 2, 50, 11);
        let est = estimate_from_patterns(&exp, &pats);
        let mean_null = stats::mean(&null);
        // the plug-in bias at N=1000 with 16 cells is a few hundredths
        assert!(mean_null < 0.06, "null mean {mean_null}");
        assert!(est.value >= 0.0 && est.value <= 1.0);
    }
}
