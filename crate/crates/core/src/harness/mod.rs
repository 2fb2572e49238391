//! Monte Carlo experiments on growing windows `W_n = [-n, n[^l`.
//!
//! Each replicate simulates once in the window of the largest level and
//! evaluates the functional on every `W_n` inside it. By the consistency
//! property the restriction to a smaller window has the law of a direct
//! simulation there, so per-level marginals are exact; levels of one
//! replicate are correlated, which is what the ergodic trajectories need.

use thiserror::Error;

use crate::functionals::{CuboidGrid, FunctionalError, FunctionalKind, FunctionalSpec};
use crate::geometry::{ConvexPolytope, CuboidRegion, Dim};
use crate::measure::HyperplaneMeasure;
use crate::mixing::{MixingError, MomentParams};
use crate::rng::{run_replicates, stream, RESAMPLING_STREAM};
use crate::stats::{self, Interval, TestOutcome};
use crate::stit::{simulate_with_rng, SimulationConfig, StitError, Tessellation};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Simulation(#[from] StitError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Mixing(#[from] MixingError),
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub measure: HyperplaneMeasure,
    pub t: f64,
    pub functional: FunctionalSpec,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    /// Buffer between `[-n, n]^l` and the simulation window.
    pub margin: f64,
    pub seed: u64,
}

impl ExperimentPlan {
    /// Plan with the default margin for the functional: 1 when window
    /// artefacts would be counted, otherwise 0.
    pub fn new(
        measure: HyperplaneMeasure,
        t: f64,
        functional: FunctionalSpec,
        n_values: Vec<usize>,
        replicates: usize,
        seed: u64,
    ) -> Self {
        let margin = Self::default_margin(&functional);
        ExperimentPlan { measure, t, functional, n_values, replicates, margin, seed }
    }

    pub fn default_margin(f: &FunctionalSpec) -> f64 {
        if f.needs_margin() {
            1.0
        } else {
            0.0
        }
    }

    pub fn dim(&self) -> Dim {
        self.measure.dim()
    }

    /// Spread estimates need two replicates; plain evaluation needs one.
    fn require_spread(&self) -> Result<(), HarnessError> {
        if self.replicates < 2 {
            return Err(HarnessError::InvalidPlan(format!(
                "need at least 2 replicates, got {}",
                self.replicates
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidPlan(m));
        if self.replicates == 0 {
            return bad("need at least 1 replicate".into());
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad("n values must be positive and nonempty".into());
        }
        if self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n values must be strictly increasing".into());
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return bad(format!("margin must be nonnegative, got {}", self.margin));
        }
        if self.functional.needs_margin() && self.margin <= 0.0 {
            return bad(format!("{} needs a positive margin", self.functional));
        }
        if !self.functional.applies_to(self.dim()) {
            return bad(format!("{} is not defined in dimension {}", self.functional, self.dim()));
        }
        if self.measure.direction_rank() != self.dim().get() {
            return bad("hyperplane normals do not span the space".into());
        }
        Ok(())
    }

    pub fn largest_n(&self) -> usize {
        *self.n_values.last().expect("validated")
    }

    /// Simulation window for level `n`.
    pub fn window(&self, n: usize) -> CuboidRegion {
        CuboidRegion::centered_cube(self.dim(), n as f64 + self.margin).expect("n > 0")
    }

    /// `W_n = [-n, n[^l`.
    pub fn region(&self, n: usize) -> CuboidRegion {
        CuboidRegion::centered_cube(self.dim(), n as f64).expect("n > 0")
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        SimulationConfig::in_cuboid(&self.window(self.largest_n()), self.t, self.measure.clone(), self.seed)
    }

    /// Runs `f` on the tessellation of each replicate, in replicate order.
    pub fn map_replicates<T, F>(&self, f: F) -> Result<Vec<T>, HarnessError>
    where
        T: Send,
        F: Fn(&Tessellation) -> Result<T, HarnessError> + Sync + Send,
    {
        self.validate()?;
        let cfg = self.simulation_config();
        run_replicates(self.seed, self.replicates, |i, rng| {
            let y = simulate_with_rng(&cfg.clone().with_stream(i), rng)?;
            f(&y)
        })
        .into_iter()
        .collect()
    }

    /// Raw values `X(W_n)` as `[replicate][level]`.
    pub fn sample(&self) -> Result<Vec<Vec<f64>>, HarnessError> {
        let regions: Vec<CuboidRegion> = self.n_values.iter().map(|&n| self.region(n)).collect();
        self.map_replicates(|y| {
            regions
                .iter()
                .map(|v| Ok(self.functional.evaluate(y, v)?))
                .collect()
        })
    }

    /// Normalised values `(2n)^{-l} X(W_n)` as `[replicate][level]`.
    pub fn sample_normalized(&self) -> Result<Vec<Vec<f64>>, HarnessError> {
        let l = self.dim().get() as i32;
        let raw = self.sample()?;
        Ok(raw
            .into_iter()
            .map(|row| {
                row.iter()
                    .zip(&self.n_values)
                    .map(|(x, &n)| x / (2.0 * n as f64).powi(l))
                    .collect()
            })
            .collect())
    }
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityEstimate {
    pub n: usize,
    pub mean: f64,
    pub ci: Interval,
}

/// Mean of `(2n)^{-l} X(W_n)` with a normal 95% interval.
pub fn estimate_density(plan: &ExperimentPlan, n: usize) -> Result<DensityEstimate, HarnessError> {
    plan.require_spread()?;
    let single = ExperimentPlan { n_values: vec![n], ..plan.clone() };
    let xs = column(&single.sample_normalized()?, 0);
    Ok(DensityEstimate { n, mean: stats::mean(&xs), ci: stats::mean_ci(&xs) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSummary {
    pub n: usize,
    pub mean: f64,
    pub mean_ci: Interval,
    pub variance: f64,
    /// Normal-theory interval for the variance, `var ± z sd(var)`.
    pub variance_ci_normal: Interval,
    pub variance_ci_bootstrap: Interval,
    /// `E|x|^{2+δ}` of the normalised values.
    pub moment: f64,
    /// Moment estimate from the second half of the replicates exceeds
    /// twice that of the first half.
    pub unstable_moment: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub levels: Vec<LevelSummary>,
    /// Log-log slope of variance against `n`; `None` when degenerate.
    pub slope: Option<f64>,
    pub slope_ci: Option<Interval>,
    /// `-θδ/(2+δ)`.
    pub theorem_exponent: f64,
    /// Slope is at most the theorem exponent.
    pub consistent_with_theorem: Option<bool>,
    pub degenerate: bool,
}

impl ScanResult {
    pub fn unstable_moments(&self) -> bool {
        self.levels.iter().any(|l| l.unstable_moment)
    }
}

fn loglog_slope(ns: &[usize], vars: &[f64]) -> Option<f64> {
    if vars.iter().any(|v| !(*v > 0.0)) || ns.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = vars.iter().map(|v| v.ln()).collect();
    Some(stats::ols(&xs, &ys).0)
}

/// Variances of the normalised functional across levels, with the fitted
/// decay rate.
pub fn variance_scan(plan: &ExperimentPlan, params: &MomentParams) -> Result<ScanResult, HarnessError> {
    params.validate()?;
    plan.require_spread()?;
    if plan.functional.kind() != FunctionalKind::Additive {
        return Err(HarnessError::InvalidPlan(format!("{} is not additive", plan.functional)));
    }
    let rows = plan.sample_normalized()?;
    Ok(scan_from_samples(&plan.n_values, &rows, params, plan.seed))
}

/// The analysis half of [`variance_scan`], on precomputed normalised
/// samples `[replicate][level]`.
pub fn scan_from_samples(ns: &[usize], rows: &[Vec<f64>], params: &MomentParams, seed: u64) -> ScanResult {
    let mut rng = stream(seed, RESAMPLING_STREAM);
    let n_rep = rows.len();
    let boots: Vec<Vec<usize>> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| stats::bootstrap_indices(&mut rng, n_rep))
        .collect();
    let p = 2.0 + params.delta;
    let levels: Vec<LevelSummary> = ns
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let xs = column(rows, j);
            let var = stats::variance(&xs);
            let m = stats::mean(&xs);
            // fourth central moment gives the standard error of the variance
            let m4 = stats::mean(&xs.iter().map(|x| (x - m).powi(4)).collect::<Vec<_>>());
            let nf = n_rep as f64;
            let se_var = ((m4 - var * var * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt();
            let boot_vars: Vec<f64> = boots
                .iter()
                .map(|idx| stats::variance(&idx.iter().map(|&i| xs[i]).collect::<Vec<_>>()))
                .collect();
            let half = n_rep / 2;
            let first = stats::abs_moment(&xs[..half], p);
            let second = stats::abs_moment(&xs[half..], p);
            LevelSummary {
                n,
                mean: m,
                mean_ci: stats::mean_ci(&xs),
                variance: var,
                variance_ci_normal: Interval { lo: (var - stats::Z_95 * se_var).max(0.0), hi: var + stats::Z_95 * se_var },
                variance_ci_bootstrap: widen(stats::percentile_interval(boot_vars, 0.95), var),
                moment: stats::abs_moment(&xs, p),
                unstable_moment: second > 2.0 * first && first > 0.0,
            }
        })
        .collect();
    let vars: Vec<f64> = levels.iter().map(|l| l.variance).collect();
    let slope = loglog_slope(ns, &vars);
    let slope_ci = slope.map(|_| {
        let reps: Vec<f64> = boots
            .iter()
            .filter_map(|idx| {
                let v: Vec<f64> = (0..ns.len())
                    .map(|j| stats::variance(&idx.iter().map(|&i| rows[i][j]).collect::<Vec<_>>()))
                    .collect();
                loglog_slope(ns, &v)
            })
            .collect();
        stats::percentile_interval(reps, 0.95)
    });
    let exponent = -params.decay_exponent();
    ScanResult {
        levels,
        slope,
        slope_ci: slope_ci.zip(slope).map(|(ci, s)| widen(ci, s)),
        theorem_exponent: exponent,
        consistent_with_theorem: slope.map(|s| s <= exponent),
        degenerate: slope.is_none(),
    }
}

/// Makes sure a percentile interval contains the point estimate.
fn widen(ci: Interval, x: f64) -> Interval {
    Interval { lo: ci.lo.min(x), hi: ci.hi.max(x) }
}

/// Explicit variance bound for `(2n)^{-l} X(W_n)`:
/// `3^l/(2n)^l Var(X_1) + 2^l m^{2/(2+δ)} χ (2n-κ)^{-θδ/(2+δ)}`.
pub fn variance_upper_bound(
    params: &MomentParams,
    dim: Dim,
    n: u64,
    var_x1: f64,
    moment: f64,
    chi: f64,
) -> Result<f64, HarnessError> {
    params.validate()?;
    if n == 0 {
        return Err(HarnessError::InvalidPlan("n must be positive".into()));
    }
    if !(var_x1 >= 0.0 && moment >= 0.0 && var_x1.is_finite() && moment.is_finite()) {
        return Err(HarnessError::InvalidPlan("variance and moment must be finite and nonnegative".into()));
    }
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(HarnessError::InvalidPlan("chi must be positive".into()));
    }
    let l = dim.get() as i32;
    let two_n = 2.0 * n as f64;
    let e = 2.0 + params.delta;
    Ok(3f64.powi(l) / two_n.powi(l) * var_x1
        + 2f64.powi(l) * moment.powf(2.0 / e) * chi * (two_n - params.kappa).powf(-params.decay_exponent()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShellSummary {
    /// Maximum-metric distance between grid cells.
    pub k: u64,
    /// Shell size in `Z^l`.
    pub shell_size: u64,
    /// Ordered pairs in the grid at this distance.
    pub pairs: usize,
    pub mean_abs_cov: f64,
    /// Fraction of pairs with `|Ĉov| < 2 stderr`.
    pub fraction_insignificant: f64,
    /// Envelope `2 m^{2/(2+δ)} (χ (k-κ)^{-θ})^{δ/(2+δ)}`, for `k >= 2`.
    pub envelope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShellAudit {
    pub diagonal_variances: Vec<f64>,
    /// All diagonal variance intervals share a common point (Bonferroni
    /// adjusted 95% intervals).
    pub diagonal_consistent: bool,
    pub shells: Vec<ShellSummary>,
    /// Spearman correlation of mean |Ĉov| against `k`.
    pub trend: f64,
}

/// Covariances of grid values `X_i` grouped by distance.
///
/// `values` is `[replicate][cell]` in [`CuboidGrid::indices`] order. The
/// absolute envelope needs the non-computable `χ` and is only reported.
pub fn shell_covariance_audit(
    values: &[Vec<f64>],
    grid: &CuboidGrid,
    params: &MomentParams,
    chi: f64,
) -> Result<ShellAudit, HarnessError> {
    params.validate()?;
    let idx = grid.indices();
    if values.len() < 3 || values.iter().any(|r| r.len() != idx.len()) {
        return Err(HarnessError::InvalidPlan("need at least 3 replicates of a full grid".into()));
    }
    let cols: Vec<Vec<f64>> = (0..idx.len()).map(|j| column(values, j)).collect();
    let centred: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let m = stats::mean(c);
            c.iter().map(|x| x - m).collect()
        })
        .collect();
    let nrep = values.len() as f64;
    let diagonal_variances: Vec<f64> = cols.iter().map(|c| stats::variance(c)).collect();
    let z = stats::normal_quantile(1.0 - 0.025 / idx.len() as f64);
    let var_cis: Vec<Interval> = centred
        .iter()
        .zip(&diagonal_variances)
        .map(|(c, &v)| {
            let sq: Vec<f64> = c.iter().map(|x| x * x).collect();
            let half = z * stats::std_dev(&sq) / nrep.sqrt();
            Interval { lo: v - half, hi: v + half }
        })
        .collect();
    let diagonal_consistent = var_cis.iter().map(|c| c.lo).fold(f64::MIN, f64::max)
        <= var_cis.iter().map(|c| c.hi).fold(f64::MAX, f64::min);
    let moment = stats::mean(&cols.iter().map(|c| stats::abs_moment(c, 2.0 + params.delta)).collect::<Vec<_>>());
    let kmax = 2 * grid.n() as u64 - 1;
    let mut shells = Vec::new();
    for k in 1..=kmax {
        let (mut pairs, mut sum, mut small) = (0usize, 0.0, 0usize);
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                if CuboidGrid::distance(&idx[a], &idx[b]) != k {
                    continue;
                }
                let prod: Vec<f64> = centred[a].iter().zip(&centred[b]).map(|(x, y)| x * y).collect();
                let cov = prod.iter().sum::<f64>() / (nrep - 1.0);
                let se = stats::std_dev(&prod) / nrep.sqrt();
                pairs += 1;
                sum += cov.abs();
                if cov.abs() < 2.0 * se {
                    small += 1;
                }
            }
        }
        if pairs == 0 {
            continue;
        }
        let e = 2.0 + params.delta;
        shells.push(ShellSummary {
            k,
            shell_size: CuboidGrid::shell_count(grid.dim(), k),
            pairs,
            mean_abs_cov: sum / pairs as f64,
            fraction_insignificant: small as f64 / pairs as f64,
            envelope: (k >= 2).then(|| {
                2.0 * moment.powf(2.0 / e) * (chi * (k as f64 - params.kappa).powf(-params.theta)).powf(params.delta / e)
            }),
        });
    }
    let ks: Vec<f64> = shells.iter().map(|s| s.k as f64).collect();
    let covs: Vec<f64> = shells.iter().map(|s| s.mean_abs_cov).collect();
    let trend = if shells.len() >= 2 { stats::spearman(&ks, &covs) } else { f64::NAN };
    Ok(ShellAudit { diagonal_variances, diagonal_consistent, shells, trend })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicTrace {
    pub n_values: Vec<usize>,
    /// `(2n)^{-l} X(W_n)` per replicate path, `[replicate][level]`. For a
    /// superadditive functional these are values of `-X`.
    pub normalized: Vec<Vec<f64>>,
    pub negated: bool,
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
    /// Mean at the largest level.
    pub gamma_hat: f64,
    /// `E|(2n)^{-l} X - γ̂|` per level.
    pub l1_deviation: Vec<f64>,
    /// Spearman correlation of the L1 deviations against `n`.
    pub l1_trend: f64,
}

impl ErgodicTrace {
    /// `|f̄(n_j) - f̄(n_{j-1})|` for consecutive levels.
    pub fn successive_differences(&self) -> Vec<f64> {
        self.means.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }
}

/// Normalised trajectories across growing windows and the limit estimate.
pub fn ergodic_scan(plan: &ExperimentPlan) -> Result<ErgodicTrace, HarnessError> {
    plan.require_spread()?;
    let negated = plan.functional.kind() == FunctionalKind::Superadditive;
    let mut rows = plan.sample_normalized()?;
    if negated {
        rows.iter_mut().flatten().for_each(|x| *x = -*x);
    }
    Ok(trace_from_samples(&plan.n_values, rows, negated))
}

pub fn trace_from_samples(ns: &[usize], rows: Vec<Vec<f64>>, negated: bool) -> ErgodicTrace {
    let cols: Vec<Vec<f64>> = (0..ns.len()).map(|j| column(&rows, j)).collect();
    let means: Vec<f64> = cols.iter().map(|c| stats::mean(c)).collect();
    let std_devs: Vec<f64> = cols.iter().map(|c| stats::std_dev(c)).collect();
    let gamma_hat = *means.last().expect("at least one level");
    let l1_deviation: Vec<f64> = cols
        .iter()
        .map(|c| stats::mean(&c.iter().map(|x| (x - gamma_hat).abs()).collect::<Vec<_>>()))
        .collect();
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let l1_trend = if ns.len() >= 2 { stats::spearman(&nf, &l1_deviation) } else { f64::NAN };
    ErgodicTrace {
        n_values: ns.to_vec(),
        normalized: rows,
        negated,
        means,
        std_devs,
        gamma_hat,
        l1_deviation,
        l1_trend,
    }
}

/// Two-sample check of `(Y ∧ W)_t ∧ W' = (Y ∧ W')_t` in law via
/// `boundary_mass` on `W'`.
#[derive(Clone, Debug)]
pub struct ConsistencyTest {
    pub measure: HyperplaneMeasure,
    /// Time of the runs in the large window.
    pub t: f64,
    /// Time of the direct runs in `W'`; equal to `t` unless used as a
    /// negative control.
    pub t_direct: f64,
    pub window: CuboidRegion,
    pub sub_window: CuboidRegion,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub restricted: Vec<f64>,
    pub direct: Vec<f64>,
    pub outcome: TestOutcome,
}

pub fn consistency_test(c: &ConsistencyTest) -> Result<ConsistencyReport, HarnessError> {
    if c.replicates < 2 {
        return Err(HarnessError::InvalidPlan("need at least 2 replicates".into()));
    }
    if !c.sub_window.is_within(&c.window) {
        return Err(HarnessError::Simulation(StitError::WindowNotContained));
    }
    let big = SimulationConfig::in_cuboid(&c.window, c.t, c.measure.clone(), c.seed);
    let small = SimulationConfig::in_cuboid(&c.sub_window, c.t_direct, c.measure.clone(), c.seed);
    big.validate()?;
    small.validate()?;
    let sub = ConvexPolytope::cuboid(&c.sub_window);
    let n = c.replicates;
    let values: Vec<Result<f64, HarnessError>> = run_replicates(c.seed, 2 * n, |i, rng| {
        let y = if (i as usize) < n {
            simulate_with_rng(&big, rng)?.restrict(&sub)?
        } else {
            simulate_with_rng(&small, rng)?
        };
        Ok(crate::functionals::boundary_mass(&y, &c.sub_window)?)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_, _>>()?;
    let (restricted, direct) = values.split_at(n);
    Ok(ConsistencyReport {
        outcome: stats::ks_two_sample(restricted, direct),
        restricted: restricted.to_vec(),
        direct: direct.to_vec(),
    })
}
