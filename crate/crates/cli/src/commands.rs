//! One function per subcommand. Each writes its CSV files and a
//! `summary.json`, and returns whether its checks passed.

use anyhow::{bail, Context as _, Result};
use serde_json::{json, Map, Value};
use stit_core::functionals::{evaluate_on_grid, CuboidGrid, FunctionalKind, FunctionalSpec};
use stit_core::geometry::ConvexPolytope;
use stit_core::harness::{self, ExperimentPlan};
use stit_core::measure::{DirectionalDistribution, HyperplaneMeasure};
use stit_core::mixing::{self, BetaEstimate, BetaExperiment, BetaProbes, MixingError};
use stit_core::stats;
use stit_core::stit::{simulate as run_simulation, write_tessellation, SimulationConfig};
use stit_core::svg::render_svg;

use crate::config::RunConfig;
use crate::output::{real, OutDir};

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a OutDir,
    pub command: &'static str,
}

/// Relative tolerance for real-valued additivity checks.
const ADDITIVITY_TOL: f64 = 1e-9;

impl Context<'_> {
    fn summary(&self, replicates: usize, estimates: Value, checks: Map<String, Value>) -> Result<bool> {
        let passed = checks.values().all(|v| v.as_bool() == Some(true));
        let v = json!({
            "command": self.command,
            "plan_hash": self.cfg.plan_hash(self.command),
            "seed": self.cfg.seed,
            "replicates": replicates,
            "config": serde_json::to_value(self.cfg)?,
            "estimates": estimates,
            "checks": Value::Object(checks),
            "passed": passed,
        });
        self.out.json("summary.json", &v)?;
        Ok(passed)
    }
}

fn measure_label(m: &HyperplaneMeasure) -> String {
    match m.directional() {
        DirectionalDistribution::Isotropic { mass } => format!("isotropic:{}", real(*mass)),
        DirectionalDistribution::Discrete(a) => format!("discrete:{}", a.len()),
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

pub fn simulate(ctx: &Context) -> Result<bool> {
    let cfg = ctx.cfg;
    cfg.check_t()?;
    let measure = cfg.measure()?;
    let window = cfg.simulation_window()?;
    let reps = cfg.replicates_for(cfg.simulate.replicates, 1);
    if reps == 0 {
        bail!("replicates: must be at least 1");
    }
    let base = SimulationConfig::new(ConvexPolytope::cuboid(&window), cfg.t, measure, cfg.seed);
    base.validate().context("simulate")?;
    let mut rows = Vec::new();
    for i in 0..reps {
        let y = run_simulation(&base.clone().with_stream(i as u64))?;
        let stem = if reps == 1 { "tessellation".to_string() } else { format!("tessellation_{i:04}") };
        let mut buf = Vec::new();
        write_tessellation(&y, &mut buf)?;
        ctx.out.text(&format!("{stem}.txt"), std::str::from_utf8(&buf)?)?;
        if cfg.simulate.svg {
            if let Some(svg) = render_svg(&y) {
                ctx.out.text(&format!("{stem}.svg"), &svg)?;
            }
        }
        rows.push(vec![
            i.to_string(),
            cfg.seed.to_string(),
            real(cfg.t),
            y.cell_count().to_string(),
            y.events().len().to_string(),
            real(y.holding_rate()),
        ]);
    }
    ctx.out.csv("simulate.csv", &["replicate", "seed", "t", "cells", "events", "holding_rate"], &rows)?;
    ctx.summary(reps, json!({ "files": reps }), Map::new())
}

pub fn functionals(ctx: &Context) -> Result<bool> {
    let cfg = ctx.cfg;
    let fc = &cfg.functionals;
    let dim = cfg.dim()?;
    let specs: Vec<FunctionalSpec> = fc
        .functionals
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse().with_context(|| format!("functionals.functionals[{i}]")))
        .collect::<Result<_>>()?;
    for s in &specs {
        if !s.applies_to(dim) {
            bail!("functionals.functionals: {s} is not defined in dimension {dim}");
        }
    }
    let default_margin = specs.iter().map(ExperimentPlan::default_margin).fold(0.0, f64::max);
    let margin = fc.margin.unwrap_or(default_margin);
    if let Some(s) = specs.iter().find(|s| s.needs_margin() && margin <= 0.0) {
        bail!("functionals.margin: {s} needs a positive margin");
    }
    let reps = cfg.replicates_for(fc.replicates, 10);
    let plan = ExperimentPlan {
        measure: cfg.measure()?,
        t: cfg.t,
        functional: FunctionalSpec::Zero,
        n_values: vec![fc.n],
        replicates: reps,
        margin,
        seed: cfg.seed,
    };
    plan.validate().context("functionals")?;
    let grid = CuboidGrid::new(dim, fc.n)?;
    let union = plan.region(fc.n);
    let labels: Vec<String> = grid
        .indices()
        .iter()
        .map(|i| i.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"))
        .collect();
    let per_cube = fc.per_cube;
    // [replicate][functional] -> (union value, cube values)
    let values: Vec<Vec<(f64, Vec<f64>)>> = plan.map_replicates(|y| {
        specs
            .iter()
            .map(|s| {
                let whole = s.evaluate(y, &union)?;
                let parts = if per_cube { evaluate_on_grid(y, s, &grid)? } else { Vec::new() };
                Ok((whole, parts))
            })
            .collect()
    })?;
    let mut rows = Vec::new();
    let mut checks = Map::new();
    for (j, s) in specs.iter().enumerate() {
        let mut ok = true;
        for (r, rep) in values.iter().enumerate() {
            let (whole, parts) = &rep[j];
            let row = |region: &str, v: f64| {
                vec![
                    r.to_string(),
                    cfg.seed.to_string(),
                    real(cfg.t),
                    fc.n.to_string(),
                    region.to_string(),
                    s.name().to_string(),
                    s.params(),
                    real(v),
                ]
            };
            rows.push(row("union", *whole));
            for (label, v) in labels.iter().zip(parts) {
                rows.push(row(label, *v));
            }
            if per_cube {
                let sum: f64 = parts.iter().sum();
                ok &= match s.kind() {
                    FunctionalKind::Additive if s.is_integer_valued() => sum == *whole,
                    FunctionalKind::Additive => (sum - whole).abs() <= ADDITIVITY_TOL * whole.abs().max(1.0),
                    FunctionalKind::Subadditive => *whole <= sum + 1e-12,
                    FunctionalKind::Superadditive => *whole >= sum - 1e-12,
                };
            }
        }
        if per_cube {
            checks.insert(format!("{s} {}", s.kind()), json!(ok));
        }
    }
    ctx.out.csv(
        "functionals.csv",
        &["replicate", "seed", "t", "n", "region", "functional", "params", "value"],
        &rows,
    )?;
    let est: Map<String, Value> = specs
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let xs: Vec<f64> = values.iter().map(|r| r[j].0).collect();
            (s.to_string(), json!({ "mean_union": stats::mean(&xs) }))
        })
        .collect();
    ctx.summary(reps, Value::Object(est), checks)
}

fn scan_plan<D>(cfg: &RunConfig, sc: &crate::config::ScanConfig<D>, section: &str, fallback: usize) -> Result<ExperimentPlan> {
    cfg.check_t()?;
    let functional = sc.functional(section)?;
    let mut plan = ExperimentPlan::new(
        cfg.measure()?,
        cfg.t,
        functional,
        sc.n_values.clone(),
        cfg.replicates_for(sc.replicates, fallback),
        cfg.seed,
    );
    if let Some(m) = sc.margin {
        plan.margin = m;
    }
    plan.validate().with_context(|| section.to_string())?;
    Ok(plan)
}

fn plan_columns(plan: &ExperimentPlan) -> Vec<String> {
    vec![
        plan.seed.to_string(),
        real(plan.t),
        measure_label(&plan.measure),
        plan.functional.to_string(),
        real(plan.margin),
        plan.replicates.to_string(),
    ]
}

const PLAN_HEADER: [&str; 6] = ["seed", "t", "measure", "functional", "margin", "replicates"];

pub fn variance_scan(ctx: &Context) -> Result<bool> {
    let sc = &ctx.cfg.variance_scan;
    let plan = scan_plan(ctx.cfg, sc, "variance_scan", 200)?;
    let params = sc.params("variance_scan")?;
    if plan.functional.kind() != FunctionalKind::Additive {
        bail!("variance_scan.functional: {} is not additive", plan.functional);
    }
    let res = harness::variance_scan(&plan, &params)?;
    let rows: Vec<Vec<String>> = res
        .levels
        .iter()
        .map(|l| {
            let mut r = plan_columns(&plan);
            r.extend([
                l.n.to_string(),
                real(l.mean),
                real(l.mean_ci.lo),
                real(l.mean_ci.hi),
                real(l.variance),
                real(l.variance_ci_normal.lo),
                real(l.variance_ci_normal.hi),
                real(l.variance_ci_bootstrap.lo),
                real(l.variance_ci_bootstrap.hi),
                real(l.moment),
                l.unstable_moment.to_string(),
            ]);
            r
        })
        .collect();
    let mut header = PLAN_HEADER.to_vec();
    header.extend([
        "n", "mean", "mean_lo", "mean_hi", "variance", "var_lo_normal", "var_hi_normal", "var_lo_boot", "var_hi_boot",
        "moment", "unstable_moment",
    ]);
    ctx.out.csv("variance_scan.csv", &header, &rows)?;
    if res.unstable_moments() {
        eprintln!("warning: the (2+delta)-moment estimate is unstable across replicates");
    }
    let mut checks = Map::new();
    checks.insert("slope_within_theorem_bound".into(), json!(res.consistent_with_theorem == Some(true)));
    let est = json!({
        "slope": opt(res.slope),
        "slope_ci": res.slope_ci.map(|c| json!([c.lo, c.hi])),
        "theorem_exponent": res.theorem_exponent,
        "degenerate": res.degenerate,
        "unstable_moments": res.unstable_moments(),
        "variances": res.levels.iter().map(|l| l.variance).collect::<Vec<_>>(),
    });
    ctx.summary(plan.replicates, est, checks)
}

pub fn ergodic_scan(ctx: &Context) -> Result<bool> {
    let sc = &ctx.cfg.ergodic_scan;
    let plan = scan_plan(ctx.cfg, sc, "ergodic_scan", 200)?;
    let tr = harness::ergodic_scan(&plan)?;
    let mut header = PLAN_HEADER.to_vec();
    header.extend(["n", "mean", "std_dev", "l1_deviation", "gamma_hat", "negated"]);
    let rows: Vec<Vec<String>> = (0..tr.n_values.len())
        .map(|j| {
            let mut r = plan_columns(&plan);
            r.extend([
                tr.n_values[j].to_string(),
                real(tr.means[j]),
                real(tr.std_devs[j]),
                real(tr.l1_deviation[j]),
                real(tr.gamma_hat),
                tr.negated.to_string(),
            ]);
            r
        })
        .collect();
    ctx.out.csv("ergodic_scan.csv", &header, &rows)?;
    let traj: Vec<Vec<String>> = tr
        .normalized
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .zip(&tr.n_values)
                .map(move |(v, n)| vec![i.to_string(), n.to_string(), real(*v)])
        })
        .collect();
    ctx.out.csv("trajectories.csv", &["replicate", "n", "value"], &traj)?;
    let mut checks = Map::new();
    checks.insert("l1_deviation_nonincreasing_trend".into(), json!(tr.l1_trend <= 0.0 || tr.l1_deviation.iter().all(|d| *d == 0.0)));
    if !tr.negated {
        checks.insert("gamma_nonnegative".into(), json!(tr.gamma_hat >= 0.0));
    }
    let est = json!({
        "gamma_hat": tr.gamma_hat,
        "means": tr.means,
        "successive_differences": tr.successive_differences(),
        "l1_trend": opt(tr.l1_trend.is_finite().then_some(tr.l1_trend)),
    });
    ctx.summary(plan.replicates, est, checks)
}

pub fn beta(ctx: &Context) -> Result<bool> {
    let cfg = ctx.cfg;
    let bc = &cfg.beta;
    cfg.check_t()?;
    let measure = cfg.measure()?;
    let dim = measure.dim();
    let reps = cfg.replicates_for(bc.replicates, 5000);
    if bc.b_values.is_empty() {
        bail!("beta.b_values: empty");
    }
    if bc.b_values.windows(2).any(|w| w[1] <= w[0]) {
        bail!("beta.b_values: must be strictly increasing");
    }
    let custom = match (&bc.inner, &bc.outer) {
        (Some(i), Some(o)) => Some(BetaProbes {
            inner: i.iter().enumerate().map(|(k, b)| cfg.cuboid(b, &format!("beta.inner[{k}]"))).collect::<Result<_>>()?,
            outer: o.iter().enumerate().map(|(k, b)| cfg.cuboid(b, &format!("beta.outer[{k}]"))).collect::<Result<_>>()?,
        }),
        (None, None) => None,
        _ => bail!("beta: give both `inner` and `outer` probes or neither"),
    };
    // validate every level before simulating anything
    let mut experiments = Vec::new();
    for (j, &b) in bc.b_values.iter().enumerate() {
        let probes = match &custom {
            Some(p) => p.clone(),
            None => BetaProbes::default_layout(dim, bc.a, b).with_context(|| format!("beta.b_values[{j}]"))?,
        };
        let exp = BetaExperiment {
            measure: measure.clone(),
            t: cfg.t,
            a: bc.a,
            b,
            probes,
            replicates: reps,
            seed: cfg.seed.wrapping_add(j as u64),
        };
        exp.validate().with_context(|| format!("beta at b = {b}"))?;
        experiments.push(exp);
    }
    let mut estimates: Vec<BetaEstimate> = Vec::new();
    let mut nulls = Vec::new();
    for exp in &experiments {
        let pats = exp.patterns()?;
        let e = mixing::estimate_from_patterns(exp, &pats);
        nulls.push(stats::mean(&mixing::permutation_null(&pats, e.pattern_dims.0, e.pattern_dims.1, 50, exp.seed)));
        estimates.push(e);
    }
    let all_zero = estimates.iter().all(|e| e.value <= 2.0 * e.stderr);
    let fit = if estimates.len() >= 3 { Some(mixing::fit_decay(&estimates)) } else { None };
    let (chi, theta) = match &fit {
        Some(Ok(f)) => (Some(f.chi), Some(f.theta)),
        _ => (None, None),
    };
    let rows: Vec<Vec<String>> = estimates
        .iter()
        .zip(&nulls)
        .map(|(e, null)| {
            vec![
                real(e.a),
                real(e.b),
                e.pattern_dims.0.to_string(),
                e.pattern_dims.1.to_string(),
                e.n_samples.to_string(),
                real(e.value),
                real(e.stderr),
                real(*null),
                chi.map_or(String::new(), real),
                theta.map_or(String::new(), real),
            ]
        })
        .collect();
    ctx.out.csv(
        "beta.csv",
        &["a", "b", "m", "k", "N", "value", "stderr", "null_mean", "chi", "theta"],
        &rows,
    )?;
    let bs: Vec<f64> = estimates.iter().map(|e| e.b).collect();
    let vs: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let rho = if bs.len() >= 2 { stats::spearman(&bs, &vs) } else { f64::NAN };
    let mut checks = Map::new();
    checks.insert("decreasing_trend_or_zero".into(), json!(all_zero || rho < 0.0));
    let fit_json = match &fit {
        Some(Ok(f)) => json!({ "chi": f.chi, "theta": f.theta, "raw_slope": f.raw_slope, "at_boundary": f.at_boundary }),
        Some(Err(MixingError::DegenerateFit(why))) => json!({ "degenerate": why }),
        Some(Err(e)) => json!({ "error": e.to_string() }),
        None => Value::Null,
    };
    let est = json!({
        "values": vs,
        "stderrs": estimates.iter().map(|e| e.stderr).collect::<Vec<_>>(),
        "spearman": opt(rho.is_finite().then_some(rho)),
        "indistinguishable_from_zero": all_zero,
        "fit": fit_json,
    });
    ctx.summary(reps, est, checks)
}

pub fn check_assumptions(ctx: &Context) -> Result<bool> {
    let cfg = ctx.cfg;
    let ac = &cfg.check_assumptions;
    let measure = cfg.measure()?;
    let rep = measure.check_assumptions(ac.a, ac.b).context("check_assumptions")?;
    let rows: Vec<Vec<String>> = rep
        .separator_masses
        .iter()
        .enumerate()
        .map(|(r, m)| {
            vec![
                rep.dim.get().to_string(),
                real(rep.a),
                real(rep.b),
                rep.direction_rank.to_string(),
                rep.spanning.to_string(),
                (r + 1).to_string(),
                real(*m),
                (*m > 0.0).to_string(),
            ]
        })
        .collect();
    ctx.out.csv(
        "assumptions.csv",
        &["dim", "a", "b", "direction_rank", "spanning", "facet", "separator_mass", "positive"],
        &rows,
    )?;
    let mut checks = Map::new();
    checks.insert("spanning".into(), json!(rep.spanning));
    checks.insert("separators_positive".into(), json!(rep.separators_positive));
    let est = json!({ "direction_rank": rep.direction_rank, "separator_masses": rep.separator_masses });
    ctx.summary(0, est, checks)
}
