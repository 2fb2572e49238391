//! Translation-invariant hyperplane measures.
//!
//! A measure is stored as a directional distribution on the canonical
//! hemisphere of unit normals, times Lebesgue measure on the signed
//! distance. The mass of the hyperplanes hitting a convex body `P` is then
//! the breadth integral `int width_u(P) directional(du)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use thiserror::Error;

use crate::geometry::{ConvexPolytope, CuboidRegion, Dim, Hyperplane, Vector};
use crate::quadrature::integrate;

/// Relative tolerance of the angular quadratures.
pub const QUADRATURE_REL_TOL: f64 = 1e-8;

/// Cap on rejection-sampling iterations for one hyperplane.
pub const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("no hyperplane accepted after {0} proposals; the measure or cell is inconsistent")]
    ProbableMeasureBug(usize),
    #[error("cell has zero hitting mass")]
    ZeroHittingMass,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionAtom {
    /// Unit normal in the canonical hemisphere.
    pub direction: Vector,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DirectionalDistribution {
    Discrete(Vec<DirectionAtom>),
    /// Total mass spread uniformly over the hemisphere of normals.
    Isotropic { mass: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperplaneMeasure {
    dim: Dim,
    directional: DirectionalDistribution,
}

/// Hyperplanes weakly separating facet `r` of `[-a,a]^l` from facet `r` of
/// `[-b,b]^l`. Facets `1..=l` sit at `x_r = +a` (resp. `+b`), facets
/// `l+1..=2l` are their mirror images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatorClass {
    pub a: f64,
    pub b: f64,
    pub r: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub dim: Dim,
    pub a: f64,
    pub b: f64,
    /// Rank of the set of normal directions in the support.
    pub direction_rank: usize,
    /// Normals span the space, so no line is parallel to every hyperplane.
    pub spanning: bool,
    /// Separator masses for facets `r = 1..=2l`.
    pub separator_masses: Vec<f64>,
    pub separators_positive: bool,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.spanning && self.separators_positive
    }
}

impl HyperplaneMeasure {
    /// Discrete directional part: `(normal, weight)` atoms. Normals are
    /// normalised and moved into the canonical hemisphere.
    pub fn discrete(dim: Dim, atoms: Vec<(Vector, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::Invalid("no direction atoms".into()));
        }
        let mut out: Vec<DirectionAtom> = Vec::with_capacity(atoms.len());
        for (u, w) in atoms {
            if !(w > 0.0 && w.is_finite()) {
                return Err(MeasureError::Invalid(format!("weight {w} must be positive")));
            }
            if (dim.get()..3).any(|r| u[r] != 0.0) {
                return Err(MeasureError::Invalid("direction has too many coordinates".into()));
            }
            let u = u
                .normalized()
                .ok_or_else(|| MeasureError::Invalid("zero direction".into()))?
                .canonical_hemisphere()
                .0;
            if out.iter().any(|a| a.direction.max_abs_diff(&u) < 1e-12) {
                return Err(MeasureError::Invalid("duplicate direction".into()));
            }
            out.push(DirectionAtom {
                direction: u,
                weight: w,
            });
        }
        Ok(HyperplaneMeasure {
            dim,
            directional: DirectionalDistribution::Discrete(out),
        })
    }

    /// Planar discrete measure from `(angle, weight)` pairs, angle of the
    /// normal in radians.
    pub fn discrete_angles(atoms: &[(f64, f64)]) -> Result<Self, MeasureError> {
        HyperplaneMeasure::discrete(
            Dim::Two,
            atoms.iter().map(|&(phi, w)| (Vector::from_angle(phi), w)).collect(),
        )
    }

    pub fn isotropic(dim: Dim, mass: f64) -> Result<Self, MeasureError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(MeasureError::Invalid(format!("mass {mass} must be positive")));
        }
        Ok(HyperplaneMeasure {
            dim,
            directional: DirectionalDistribution::Isotropic { mass },
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn directional(&self) -> &DirectionalDistribution {
        &self.directional
    }

    pub fn total_directional_mass(&self) -> f64 {
        match &self.directional {
            DirectionalDistribution::Discrete(atoms) => atoms.iter().map(|a| a.weight).sum(),
            DirectionalDistribution::Isotropic { mass } => *mass,
        }
    }

    /// `Lambda([P])`. Exact sum for discrete measures; for the isotropic
    /// measure the mean width comes from the Cauchy/edge formula.
    pub fn hitting_mass(&self, p: &ConvexPolytope) -> f64 {
        match &self.directional {
            DirectionalDistribution::Discrete(atoms) => {
                atoms.iter().map(|a| a.weight * p.width(&a.direction)).sum()
            }
            DirectionalDistribution::Isotropic { mass } => mass * p.mean_width(),
        }
    }

    /// `Lambda([P])` by numerical integration of the width over directions.
    pub fn hitting_mass_quadrature(&self, p: &ConvexPolytope) -> f64 {
        self.integrate_directional(|u| p.width(&u))
    }

    /// `int g(u) directional(du)` for an even function `g` of the normal.
    pub fn integrate_directional<G: Fn(Vector) -> f64>(&self, g: G) -> f64 {
        match &self.directional {
            DirectionalDistribution::Discrete(atoms) => {
                atoms.iter().map(|a| a.weight * g(a.direction)).sum()
            }
            DirectionalDistribution::Isotropic { mass } => match self.dim {
                Dim::Two => {
                    let v = integrate(
                        |phi| g(Vector::from_angle(phi)),
                        -0.5 * PI,
                        0.5 * PI,
                        QUADRATURE_REL_TOL,
                        1e-300,
                    );
                    mass * v / PI
                }
                Dim::Three => {
                    // Upper half sphere, z = cos(theta), area element dz dphi.
                    let v = integrate(
                        |z| {
                            let rho = (1.0 - z * z).max(0.0).sqrt();
                            integrate(
                                |phi| g(Vector::new3(rho * phi.cos(), rho * phi.sin(), z)),
                                0.0,
                                2.0 * PI,
                                0.1 * QUADRATURE_REL_TOL,
                                1e-300,
                            )
                        },
                        0.0,
                        1.0,
                        QUADRATURE_REL_TOL,
                        1e-300,
                    );
                    mass * v / (2.0 * PI)
                }
            },
        }
    }

    /// Draws a hyperplane from `Lambda` restricted to `[P]` and normalised.
    ///
    /// The normal is chosen with density proportional to `width_u(P)`, then
    /// the offset uniformly over the extent of `P` in that direction.
    pub fn sample_hitting<R: Rng + ?Sized>(
        &self,
        p: &ConvexPolytope,
        rng: &mut R,
    ) -> Result<Hyperplane, MeasureError> {
        let u = match &self.directional {
            DirectionalDistribution::Discrete(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.weight * p.width(&a.direction)).sum();
                if !(total > 0.0) {
                    return Err(MeasureError::ZeroHittingMass);
                }
                let mut x = rng.random::<f64>() * total;
                let mut chosen = atoms[atoms.len() - 1].direction;
                for a in atoms {
                    let w = a.weight * p.width(&a.direction);
                    if x < w {
                        chosen = a.direction;
                        break;
                    }
                    x -= w;
                }
                chosen
            }
            DirectionalDistribution::Isotropic { .. } => {
                let envelope = p.diameter();
                if !(envelope > 0.0) {
                    return Err(MeasureError::ZeroHittingMass);
                }
                let mut accepted = None;
                for _ in 0..MAX_REJECTIONS {
                    let u = self.uniform_direction(rng);
                    if rng.random::<f64>() * envelope < p.width(&u) {
                        accepted = Some(u);
                        break;
                    }
                }
                accepted.ok_or(MeasureError::ProbableMeasureBug(MAX_REJECTIONS))?
            }
        };
        let (lo, hi) = p.extent(&u);
        let s = lo + (hi - lo) * rng.random::<f64>();
        Ok(Hyperplane::new(u, s).expect("unit normal, finite offset"))
    }

    fn uniform_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match self.dim {
            Dim::Two => {
                let phi = PI * (rng.random::<f64>() - 0.5);
                Vector::from_angle(phi).canonical_hemisphere().0
            }
            Dim::Three => {
                let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
                Vector::new3(x, y, z).canonical_hemisphere().0
            }
        }
    }

    /// `Lambda(G_r(a, b))`.
    pub fn separator_mass(&self, s: &SeparatorClass) -> f64 {
        let (inner, outer) = separator_facets(self.dim, s);
        self.integrate_directional(|u| separation_gap(&inner, &outer, &u))
    }

    /// Rank of the normals in the support.
    pub fn direction_rank(&self) -> usize {
        match &self.directional {
            DirectionalDistribution::Isotropic { .. } => self.dim.get(),
            DirectionalDistribution::Discrete(atoms) => {
                let rows: Vec<Vector> = atoms.iter().map(|a| a.direction).collect();
                rank(&rows, self.dim.get())
            }
        }
    }

    pub fn check_assumptions(&self, a: f64, b: f64) -> Result<AssumptionReport, MeasureError> {
        if !(0.0 < a && a < b && b.is_finite()) {
            return Err(MeasureError::Invalid(format!("need 0 < a < b, got a={a}, b={b}")));
        }
        let rank = self.direction_rank();
        let masses: Vec<f64> = (1..=2 * self.dim.get())
            .map(|r| self.separator_mass(&SeparatorClass { a, b, r }))
            .collect();
        Ok(AssumptionReport {
            dim: self.dim,
            a,
            b,
            direction_rank: rank,
            spanning: rank == self.dim.get(),
            separators_positive: masses.iter().all(|m| *m > 0.0),
            separator_masses: masses,
        })
    }
}

/// Vertex sets of facet `r` of `[-a,a]^l` and of `[-b,b]^l`.
pub fn separator_facets(dim: Dim, s: &SeparatorClass) -> (Vec<Vector>, Vec<Vector>) {
    let l = dim.get();
    assert!((1..=2 * l).contains(&s.r), "facet index {} outside 1..={}", s.r, 2 * l);
    let (axis, sign) = if s.r <= l { (s.r - 1, 1.0) } else { (s.r - l - 1, -1.0) };
    let facet = |h: f64| -> Vec<Vector> {
        CuboidRegion::centered_cube(dim, h)
            .expect("positive half side")
            .corners()
            .into_iter()
            .filter(|c| c[axis] == sign * h)
            .collect()
    };
    (facet(s.a), facet(s.b))
}

/// Length of the set of offsets `s` for which `<x,u> = s` weakly separates
/// the two point sets (either orientation).
pub fn separation_gap(inner: &[Vector], outer: &[Vector], u: &Vector) -> f64 {
    let ext = |pts: &[Vector]| {
        pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let x = p.dot(u);
            (lo.min(x), hi.max(x))
        })
    };
    let (ilo, ihi) = ext(inner);
    let (olo, ohi) = ext(outer);
    (olo - ihi).max(ilo - ohi).max(0.0)
}

fn rank(rows: &[Vector], d: usize) -> usize {
    let mut m: Vec<[f64; 3]> = rows.iter().map(|v| v.0).collect();
    let mut rank = 0;
    for col in 0..d {
        let pivot = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()));
        let Some(p) = pivot else { break };
        if m[p][col].abs() < 1e-9 {
            continue;
        }
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank {
                let f = m[i][col] / m[rank][col];
                for c in 0..3 {
                    m[i][c] -= f * m[rank][c];
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn axes2() -> HyperplaneMeasure {
        HyperplaneMeasure::discrete(Dim::Two, vec![(Vector::axis(0), 1.0), (Vector::axis(1), 1.0)])
            .unwrap()
    }

    fn rect(w: f64, h: f64) -> ConvexPolytope {
        ConvexPolytope::cuboid(
            &CuboidRegion::new(Dim::Two, Vector::ZERO, Vector::new2(w, h)).unwrap(),
        )
    }

    #[test]
    fn hitting_mass_examples() {
        assert_eq!(axes2().hitting_mass(&rect(1.0, 1.0)), 2.0);
        assert_eq!(axes2().hitting_mass(&rect(0.5, 0.25)), 0.75);
        let iso = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        assert_relative_eq!(iso.hitting_mass(&rect(1.0, 1.0)), 4.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn cauchy_formula_agrees_with_quadrature() {
        let iso = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let sq = rect(1.0, 1.0);
        assert_relative_eq!(iso.hitting_mass_quadrature(&sq), 4.0 / PI, max_relative = 1e-8);
        let tri = ConvexPolytope::polygon(vec![
            Vector::new2(0.0, 0.0),
            Vector::new2(2.0, 0.3),
            Vector::new2(0.7, 1.1),
        ])
        .unwrap();
        assert_relative_eq!(
            iso.hitting_mass_quadrature(&tri),
            iso.hitting_mass(&tri),
            max_relative = 1e-8
        );
    }

    #[test]
    fn edge_formula_agrees_with_quadrature_in_space() {
        let iso = HyperplaneMeasure::isotropic(Dim::Three, 2.0).unwrap();
        let cube = ConvexPolytope::cuboid(&CuboidRegion::unit(Dim::Three));
        let cut = cube
            .clip(&crate::geometry::Halfspace::new(
                Vector::new3(1.0, 2.0, 0.5).normalized().unwrap(),
                1.2,
            ))
            .unwrap();
        for p in [&cube, &cut] {
            assert_relative_eq!(
                iso.hitting_mass_quadrature(p),
                iso.hitting_mass(p),
                max_relative = 1e-7
            );
        }
        assert_relative_eq!(iso.hitting_mass(&cube), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn separator_masses() {
        let s = SeparatorClass { a: 1.0, b: 2.0, r: 1 };
        assert_eq!(axes2().separator_mass(&s), 1.0);
        let diag = HyperplaneMeasure::discrete(Dim::Two, vec![(Vector::new2(1.0, 1.0), 1.0)]).unwrap();
        assert_eq!(diag.separator_mass(&s), 0.0);
        for r in 1..=4 {
            assert_relative_eq!(axes2().separator_mass(&SeparatorClass { a: 0.3, b: 0.7, r }), 0.4, epsilon = 1e-15);
        }
    }

    #[test]
    fn assumption_checks() {
        let rep = axes2().check_assumptions(0.5, 1.5).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.direction_rank, 2);
        let single = HyperplaneMeasure::discrete(Dim::Two, vec![(Vector::axis(0), 1.0)]).unwrap();
        let rep = single.check_assumptions(0.5, 1.5).unwrap();
        assert!(!rep.spanning);
        assert!(!rep.passed());
        let iso = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let rep = iso.check_assumptions(1.0, 4.0).unwrap();
        assert!(rep.passed());
        assert!(rep.separator_masses.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-8));
        assert!(axes2().check_assumptions(2.0, 1.0).is_err());
    }

    #[test]
    fn sampled_hyperplanes_always_hit() {
        let iso = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let iso3 = HyperplaneMeasure::isotropic(Dim::Three, 1.0).unwrap();
        let tri = ConvexPolytope::polygon(vec![
            Vector::new2(0.0, 0.0),
            Vector::new2(3.0, 0.1),
            Vector::new2(0.2, 0.4),
        ])
        .unwrap();
        let cube = ConvexPolytope::cuboid(&CuboidRegion::unit(Dim::Three));
        let mut rng = stream(11, 0);
        for _ in 0..10_000 {
            assert!(tri.hits(&iso.sample_hitting(&tri, &mut rng).unwrap()));
            assert!(tri.hits(&axes2().sample_hitting(&tri, &mut rng).unwrap()));
            assert!(cube.hits(&iso3.sample_hitting(&cube, &mut rng).unwrap()));
        }
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(HyperplaneMeasure::isotropic(Dim::Two, 0.0).is_err());
        assert!(HyperplaneMeasure::discrete(Dim::Two, vec![]).is_err());
        assert!(HyperplaneMeasure::discrete(
            Dim::Two,
            vec![(Vector::axis(0), 1.0), (-Vector::axis(0), 2.0)]
        )
        .is_err());
        assert!(HyperplaneMeasure::discrete(Dim::Two, vec![(Vector::axis(2), 1.0)]).is_err());
    }
}
