//! wasm-bindgen bindings for the static demo in `www/`.
//!
//! The wrappers are thin. The work happens in the plain functions below,
//! which also compile and test natively.

use stit_core::functionals::boundary_mass;
use stit_core::geometry::{CuboidRegion, Dim};
use stit_core::harness::variance_upper_bound;
use stit_core::measure::HyperplaneMeasure;
use stit_core::mixing::{beta_exact, JointPartitionDistribution, MomentParams};
use stit_core::stit::{simulate, SimulationConfig};
use wasm_bindgen::prelude::*;

/// A planar run, flattened for JavaScript.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct PlanarRun {
    segments: Vec<f64>,
    cells: usize,
    edge_length: f64,
}

#[wasm_bindgen]
impl PlanarRun {
    /// `[x1, y1, x2, y2, ...]`, one quadruple per facet.
    pub fn segments(&self) -> Vec<f64> {
        self.segments.clone()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Total facet length inside the window.
    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }
}

/// Isotropic planar STIT in `[-half, half]^2` with unit directional mass.
pub fn run_planar(t: f64, half: f64, seed: u64) -> Result<PlanarRun, String> {
    let w = CuboidRegion::centered_cube(Dim::Two, half).map_err(|e| e.to_string())?;
    let m = HyperplaneMeasure::isotropic(Dim::Two, 1.0).map_err(|e| e.to_string())?;
    let y = simulate(&SimulationConfig::in_cuboid(&w, t, m, seed)).map_err(|e| e.to_string())?;
    let segments = y
        .facets()
        .flat_map(|f| {
            let p = f.points();
            [p[0][0], p[0][1], p[1][0], p[1][1]]
        })
        .collect();
    Ok(PlanarRun { segments, cells: y.cell_count(), edge_length: boundary_mass(&y, &w).map_err(|e| e.to_string())? })
}

/// Beta of a joint table given row by row; weights are normalised.
pub fn beta_of_table(weights: &[f64], rows: usize) -> Result<f64, String> {
    if rows == 0 || weights.is_empty() || !weights.len().is_multiple_of(rows) {
        return Err(format!("{} entries do not fill {rows} rows", weights.len()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err("weights must be finite and nonnegative".into());
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err("weights sum to zero".into());
    }
    let cols = weights.len() / rows;
    let m = (0..rows).map(|r| weights[r * cols..(r + 1) * cols].iter().map(|w| w / total).collect()).collect();
    let j = JointPartitionDistribution::new(m).map_err(|e| e.to_string())?;
    Ok(beta_exact(&j))
}

/// Planar variance bound with unit moments and `chi = 1`, for `n = 1..=n_max`.
pub fn bound_curve(delta: f64, theta: f64, kappa: f64, n_max: u64) -> Result<Vec<f64>, String> {
    let p = MomentParams::new(delta, theta, kappa).map_err(|e| e.to_string())?;
    (1..=n_max)
        .map(|n| variance_upper_bound(&p, Dim::Two, n, 1.0, 1.0, 1.0).map_err(|e| e.to_string()))
        .collect()
}

#[wasm_bindgen]
pub fn simulate_planar(t: f64, half: f64, seed: u32) -> Result<PlanarRun, JsError> {
    run_planar(t, half, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn beta_matrix(weights: Vec<f64>, rows: usize) -> Result<f64, JsError> {
    beta_of_table(&weights, rows).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn variance_bound_curve(delta: f64, theta: f64, kappa: f64, n_max: u32) -> Result<Vec<f64>, JsError> {
    bound_curve(delta, theta, kappa, n_max as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_run_is_consistent() {
        let r = run_planar(3.0, 1.0, 7).unwrap();
        assert_eq!(r.segments.len() % 4, 0);
        assert_eq!(r.segments.len() / 4 + 1, r.cells);
        let len: f64 = r.segments.chunks(4).map(|s| (s[2] - s[0]).hypot(s[3] - s[1])).sum();
        assert!((len - r.edge_length).abs() <= 1e-9 * len.max(1.0));
        assert!(run_planar(-1.0, 1.0, 0).is_err());
    }

    #[test]
    fn beta_table_examples() {
        // perfectly dependent fair bits
        assert!((beta_of_table(&[1.0, 0.0, 0.0, 1.0], 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(beta_of_table(&[1.0, 1.0, 1.0, 1.0], 2).unwrap().abs() < 1e-15);
        assert!(beta_of_table(&[1.0, 2.0, 3.0], 2).is_err());
        assert!(beta_of_table(&[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn bound_curve_decreases() {
        let c = bound_curve(2.0, 0.5, 0.25, 50).unwrap();
        assert!((c[0] - (2.25 + 4.0 * 1.75f64.powf(-0.25))).abs() < 1e-9);
        assert!(c.windows(2).all(|w| w[1] < w[0]));
        assert!(bound_curve(2.0, 1.5, 0.25, 5).is_err());
    }
}
