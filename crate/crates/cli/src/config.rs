//! Run configuration: one TOML file, every field optional.

use std::marker::PhantomData;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stit_core::functionals::FunctionalSpec;
use stit_core::geometry::{CuboidRegion, Dim, Vector};
use stit_core::measure::HyperplaneMeasure;
use stit_core::mixing::MomentParams;

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default)]
    pub seed: u64,
    /// Fallback replicate count for every command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default)]
    pub measure: MeasureConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub functionals: FunctionalsConfig,
    #[serde(default)]
    pub variance_scan: ScanConfig<VarianceDefaults>,
    #[serde(default)]
    pub ergodic_scan: ScanConfig<ErgodicDefaults>,
    #[serde(default)]
    pub beta: BetaConfig,
    #[serde(default)]
    pub check_assumptions: AssumptionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureConfig {
    Isotropic {
        #[serde(default = "one")]
        mass: f64,
    },
    Discrete {
        atoms: Vec<AtomConfig>,
    },
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig::Isotropic { mass: 1.0 }
    }
}

/// A direction atom, given either as a planar normal angle (radians) or as
/// a normal vector.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    pub weight: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Defaults to `[-1, 1]^l`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<BoxConfig>,
    #[serde(default = "yes")]
    pub svg: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
}

fn yes() -> bool {
    true
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { window: None, svg: true, replicates: None }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalsConfig {
    #[serde(default = "FunctionalsConfig::default_list")]
    pub functionals: Vec<String>,
    /// Region `[-n, n[^l`, also split into its unit cubes.
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default = "yes")]
    pub per_cube: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
}

impl FunctionalsConfig {
    fn default_list() -> Vec<String> {
        vec!["boundary_mass".into(), "vertex_count".into(), "power:0.5".into()]
    }
}

impl Default for FunctionalsConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

/// Per-command defaults for a scan section.
pub trait ScanDefaults {
    const FUNCTIONAL: &'static str;
    const N_VALUES: &'static [usize];
}

#[derive(Clone, Copy, Debug)]
pub struct VarianceDefaults;

impl ScanDefaults for VarianceDefaults {
    const FUNCTIONAL: &'static str = "boundary_mass";
    const N_VALUES: &'static [usize] = &[1, 2, 4, 8];
}

#[derive(Clone, Copy, Debug)]
pub struct ErgodicDefaults;

impl ScanDefaults for ErgodicDefaults {
    const FUNCTIONAL: &'static str = "power:0.5";
    const N_VALUES: &'static [usize] = &[1, 2, 4, 8, 16];
}

fn default_functional<D: ScanDefaults>() -> String {
    D::FUNCTIONAL.to_string()
}

fn default_n_values<D: ScanDefaults>() -> Vec<usize> {
    D::N_VALUES.to_vec()
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, bound = "D: ScanDefaults")]
pub struct ScanConfig<D> {
    #[serde(default = "default_functional::<D>")]
    pub functional: String,
    #[serde(default = "default_n_values::<D>")]
    pub n_values: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default = "delta")]
    pub delta: f64,
    #[serde(default = "theta")]
    pub theta: f64,
    #[serde(default = "kappa")]
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip)]
    defaults: PhantomData<D>,
}

fn delta() -> f64 {
    2.0
}
fn theta() -> f64 {
    0.9
}
fn kappa() -> f64 {
    0.25
}

impl<D: ScanDefaults> Default for ScanConfig<D> {
    fn default() -> Self {
        ScanConfig {
            functional: default_functional::<D>(),
            n_values: default_n_values::<D>(),
            margin: None,
            delta: delta(),
            theta: theta(),
            kappa: kappa(),
            replicates: None,
            defaults: PhantomData,
        }
    }
}

impl<D> ScanConfig<D> {
    pub fn params(&self, section: &str) -> Result<MomentParams> {
        MomentParams::new(self.delta, self.theta, self.kappa).with_context(|| format!("{section}: delta/theta/kappa"))
    }

    pub fn functional(&self, section: &str) -> Result<FunctionalSpec> {
        self.functional
            .parse()
            .with_context(|| format!("{section}.functional"))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BetaConfig {
    #[serde(default = "BetaConfig::a")]
    pub a: f64,
    #[serde(default = "BetaConfig::b_values")]
    pub b_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Custom probes; both sides must be given together.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Vec<BoxConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<Vec<BoxConfig>>,
}

impl BetaConfig {
    fn a() -> f64 {
        0.5
    }
    fn b_values() -> Vec<f64> {
        vec![1.0, 2.0, 4.0, 8.0]
    }
}

impl Default for BetaConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionConfig {
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "AssumptionConfig::b")]
    pub b: f64,
}

impl AssumptionConfig {
    fn b() -> f64 {
        4.0
    }
}

impl Default for AssumptionConfig {
    fn default() -> Self {
        AssumptionConfig { a: 1.0, b: 4.0 }
    }
}

impl RunConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        // toml errors carry the line and column
        Ok(toml::from_str(text)?)
    }

    pub fn dim(&self) -> Result<Dim> {
        Dim::from_usize(self.dim).context("dim: must be 2 or 3")
    }

    pub fn check_t(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            bail!("t: must be positive, got {}", self.t);
        }
        Ok(())
    }

    pub fn measure(&self) -> Result<HyperplaneMeasure> {
        let dim = self.dim()?;
        match &self.measure {
            MeasureConfig::Isotropic { mass } => {
                HyperplaneMeasure::isotropic(dim, *mass).context("measure.mass")
            }
            MeasureConfig::Discrete { atoms } => {
                let mut out = Vec::with_capacity(atoms.len());
                for (i, a) in atoms.iter().enumerate() {
                    let u = match (a.angle, &a.direction) {
                        (Some(phi), None) if dim == Dim::Two => Vector::from_angle(phi),
                        (None, Some(d)) if d.len() == dim.get() => {
                            Vector::from_slice(d).with_context(|| format!("measure.atoms[{i}].direction"))?
                        }
                        _ => bail!(
                            "measure.atoms[{i}]: give either `angle` (planar only) or a `direction` with {} coordinates",
                            dim.get()
                        ),
                    };
                    out.push((u, a.weight));
                }
                HyperplaneMeasure::discrete(dim, out).context("measure.atoms")
            }
        }
    }

    pub fn cuboid(&self, b: &BoxConfig, field: &str) -> Result<CuboidRegion> {
        let dim = self.dim()?;
        if b.lower.len() != dim.get() || b.upper.len() != dim.get() {
            bail!("{field}: lower and upper need {} coordinates", dim.get());
        }
        let lo = Vector::from_slice(&b.lower).with_context(|| format!("{field}.lower"))?;
        let hi = Vector::from_slice(&b.upper).with_context(|| format!("{field}.upper"))?;
        CuboidRegion::new(dim, lo, hi).with_context(|| field.to_string())
    }

    pub fn simulation_window(&self) -> Result<CuboidRegion> {
        match &self.simulate.window {
            Some(b) => self.cuboid(b, "simulate.window"),
            None => Ok(CuboidRegion::centered_cube(self.dim()?, 1.0)?),
        }
    }

    /// Replicates for a section: the section value, then the top-level one,
    /// then `fallback`.
    pub fn replicates_for(&self, section: Option<usize>, fallback: usize) -> usize {
        section.or(self.replicates).unwrap_or(fallback)
    }

    /// Hex SHA-256 of the effective configuration and command.
    pub fn plan_hash(&self, command: &str) -> String {
        use sha2::{Digest, Sha256};
        let text = toml::to_string(self).expect("serialisable");
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(text.as_bytes());
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.dim, 2);
        assert_eq!(c.t, 1.0);
        assert_eq!(c.variance_scan.n_values, vec![1, 2, 4, 8]);
        assert_eq!(c.ergodic_scan.n_values, vec![1, 2, 4, 8, 16]);
        assert!(c.measure().is_ok());
    }

    #[test]
    fn discrete_measure_and_errors() {
        let c = RunConfig::parse(
            "[measure]\nkind = \"discrete\"\natoms = [{ angle = 0.0, weight = 1.0 }, { direction = [0.0, 1.0], weight = 2.0 }]\n",
        )
        .unwrap();
        c.measure().unwrap();
        let err = RunConfig::parse("dim = 2\nbogus = 1\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 2"), "{err:#}");
        let c = RunConfig::parse("dim = 3\n[measure]\nkind = \"discrete\"\natoms = [{ angle = 0.0, weight = 1.0 }]\n").unwrap();
        assert!(format!("{:#}", c.measure().unwrap_err()).contains("measure.atoms[0]"));
    }

    #[test]
    fn hash_depends_on_content() {
        let a = RunConfig::parse("seed = 1").unwrap();
        let b = RunConfig::parse("seed = 2").unwrap();
        assert_ne!(a.plan_hash("beta"), b.plan_hash("beta"));
        assert_eq!(a.plan_hash("beta"), a.clone().plan_hash("beta"));
        assert_ne!(a.plan_hash("beta"), a.plan_hash("simulate"));
    }

    #[test]
    fn partial_scan_section_keeps_command_defaults() {
        let c = RunConfig::parse("[ergodic_scan]\nreplicates = 5\n[variance_scan]\nfunctional = \"vertex_count\"\n").unwrap();
        assert_eq!(c.ergodic_scan.functional, "power:0.5");
        assert_eq!(c.ergodic_scan.n_values, vec![1, 2, 4, 8, 16]);
        assert_eq!(c.variance_scan.n_values, vec![1, 2, 4, 8]);
        let err = RunConfig::parse("[beta]\na = \"x\"\n").unwrap_err().to_string();
        assert!(err.contains('a'), "{err}");
    }

    #[test]
    fn example_config_spells_out_the_defaults() {
        let c = RunConfig::parse(include_str!("../example.toml")).unwrap();
        let d = RunConfig::default();
        assert_eq!(c.plan_hash("beta"), RunConfig { simulate: c.simulate.clone(), ..d }.plan_hash("beta"));
    }
}
