//! Translation-invariant functionals `X(V, y)` on half-open cuboids.
//!
//! The window boundary is never part of `∂y` here: the functionals describe
//! the stationary tessellation, so anything created by the window frame is
//! ignored.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{ConvexPolytope, CuboidRegion, Dim, Vector};
use crate::stit::Tessellation;

/// Tolerance for merging coincident face reference points.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("region is not covered by the simulation window")]
    RegionNotCovered,
    #[error("region and tessellation dimensions differ")]
    DimensionMismatch,
    #[error("{0} is not defined in dimension {1}")]
    NotApplicable(&'static str, Dim),
    #[error("invalid functional: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalKind {
    Additive,
    Subadditive,
    Superadditive,
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionalKind::Additive => "additive",
            FunctionalKind::Subadditive => "subadditive",
            FunctionalKind::Superadditive => "superadditive",
        })
    }
}

/// What to add up over cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellFeature {
    Count,
    Volume,
    BoundaryMeasure,
    Diameter,
    /// Number of k-faces.
    FaceCount(usize),
}

impl CellFeature {
    pub fn of(&self, p: &ConvexPolytope) -> f64 {
        match *self {
            CellFeature::Count => 1.0,
            CellFeature::Volume => p.volume(),
            CellFeature::BoundaryMeasure => p.boundary_measure(),
            CellFeature::Diameter => p.diameter(),
            CellFeature::FaceCount(k) => p.face_counts().get(k).copied().unwrap_or(0) as f64,
        }
    }
}

impl fmt::Display for CellFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellFeature::Count => f.write_str("count"),
            CellFeature::Volume => f.write_str("volume"),
            CellFeature::BoundaryMeasure => f.write_str("boundary"),
            CellFeature::Diameter => f.write_str("diameter"),
            CellFeature::FaceCount(k) => write!(f, "faces{k}"),
        }
    }
}

impl FromStr for CellFeature {
    type Err = FunctionalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "count" => CellFeature::Count,
            "volume" => CellFeature::Volume,
            "boundary" => CellFeature::BoundaryMeasure,
            "diameter" => CellFeature::Diameter,
            _ => match s.strip_prefix("faces").map(str::parse) {
                Some(Ok(k)) if k < 3 => CellFeature::FaceCount(k),
                _ => return Err(FunctionalError::Invalid(format!("unknown cell feature `{s}`"))),
            },
        })
    }
}

/// A functional together with its parameters.
///
/// Text form (used by config files): `vertex_count`, `boundary_mass`,
/// `segment_centers`, `kface:<k>`, `contained:<feature>`,
/// `visible:<feature>`, `power:<alpha>`, `zero`. Features are `count`,
/// `volume`, `boundary`, `diameter`, `faces<k>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FunctionalSpec {
    VertexCount,
    BoundaryMass,
    SegmentCenterCount,
    KFaceReferenceCount(usize),
    ContainedCellSum(CellFeature),
    VisibleCellSum(CellFeature),
    /// `boundary_mass^alpha`, `0 < alpha < 1`.
    Power(f64),
    Zero,
}

impl FunctionalSpec {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionalSpec::VertexCount => "vertex_count",
            FunctionalSpec::BoundaryMass => "boundary_mass",
            FunctionalSpec::SegmentCenterCount => "segment_centers",
            FunctionalSpec::KFaceReferenceCount(_) => "kface",
            FunctionalSpec::ContainedCellSum(_) => "contained",
            FunctionalSpec::VisibleCellSum(_) => "visible",
            FunctionalSpec::Power(_) => "power",
            FunctionalSpec::Zero => "zero",
        }
    }

    /// Parameter string, empty when there is none.
    pub fn params(&self) -> String {
        match self {
            FunctionalSpec::KFaceReferenceCount(k) => k.to_string(),
            FunctionalSpec::ContainedCellSum(f) | FunctionalSpec::VisibleCellSum(f) => f.to_string(),
            FunctionalSpec::Power(a) => a.to_string(),
            _ => String::new(),
        }
    }

    /// Additivity class. This is what the property tests check, not an
    /// assumption used anywhere in the evaluation.
    pub fn kind(&self) -> FunctionalKind {
        match self {
            FunctionalSpec::VertexCount
            | FunctionalSpec::BoundaryMass
            | FunctionalSpec::SegmentCenterCount
            | FunctionalSpec::KFaceReferenceCount(_)
            | FunctionalSpec::Zero
            | FunctionalSpec::VisibleCellSum(CellFeature::Volume) => FunctionalKind::Additive,
            FunctionalSpec::ContainedCellSum(_) => FunctionalKind::Superadditive,
            FunctionalSpec::VisibleCellSum(_) | FunctionalSpec::Power(_) => FunctionalKind::Subadditive,
        }
    }

    /// Whether values are integers (and additivity can be checked exactly).
    pub fn is_integer_valued(&self) -> bool {
        matches!(
            self,
            FunctionalSpec::VertexCount
                | FunctionalSpec::SegmentCenterCount
                | FunctionalSpec::KFaceReferenceCount(_)
                | FunctionalSpec::Zero
                | FunctionalSpec::ContainedCellSum(CellFeature::Count | CellFeature::FaceCount(_))
                | FunctionalSpec::VisibleCellSum(CellFeature::Count | CellFeature::FaceCount(_))
        )
    }

    /// Functionals that count window artefacts near `∂W` need a buffer.
    pub fn needs_margin(&self) -> bool {
        !matches!(
            self,
            FunctionalSpec::BoundaryMass | FunctionalSpec::Power(_) | FunctionalSpec::Zero
        )
    }

    pub fn applies_to(&self, dim: Dim) -> bool {
        match self {
            FunctionalSpec::SegmentCenterCount => dim == Dim::Two,
            FunctionalSpec::KFaceReferenceCount(k) => *k < dim.get(),
            FunctionalSpec::ContainedCellSum(CellFeature::FaceCount(k))
            | FunctionalSpec::VisibleCellSum(CellFeature::FaceCount(k)) => *k < dim.get(),
            _ => true,
        }
    }

    pub fn evaluate(&self, y: &Tessellation, v: &CuboidRegion) -> Result<f64, FunctionalError> {
        if !self.applies_to(y.dim()) {
            return Err(FunctionalError::NotApplicable(self.name(), y.dim()));
        }
        Ok(match *self {
            FunctionalSpec::VertexCount => vertex_count(y, v)? as f64,
            FunctionalSpec::BoundaryMass => boundary_mass(y, v)?,
            FunctionalSpec::SegmentCenterCount => segment_center_count(y, v)?.counted as f64,
            FunctionalSpec::KFaceReferenceCount(k) => kface_reference_count(y, v, k)? as f64,
            FunctionalSpec::ContainedCellSum(f) => contained_cell_sum(y, v, f)?,
            FunctionalSpec::VisibleCellSum(f) => visible_cell_sum(y, v, f)?,
            FunctionalSpec::Power(a) => power_functional(y, v, a)?,
            FunctionalSpec::Zero => {
                check_region(y, v)?;
                0.0
            }
        })
    }
}

impl fmt::Display for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.params();
        if p.is_empty() {
            f.write_str(self.name())
        } else {
            write!(f, "{}:{}", self.name(), p)
        }
    }
}

impl FromStr for FunctionalSpec {
    type Err = FunctionalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let bad = || FunctionalError::Invalid(format!("cannot parse functional `{s}`"));
        let spec = match (head, arg) {
            ("vertex_count", None) => FunctionalSpec::VertexCount,
            ("boundary_mass", None) => FunctionalSpec::BoundaryMass,
            ("segment_centers", None) => FunctionalSpec::SegmentCenterCount,
            ("zero", None) => FunctionalSpec::Zero,
            ("kface", Some(k)) => FunctionalSpec::KFaceReferenceCount(k.parse().map_err(|_| bad())?),
            ("contained", Some(f)) => FunctionalSpec::ContainedCellSum(f.parse()?),
            ("visible", Some(f)) => FunctionalSpec::VisibleCellSum(f.parse()?),
            ("power", Some(a)) => {
                let a: f64 = a.parse().map_err(|_| bad())?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(FunctionalError::Invalid(format!("power exponent {a} not in (0,1)")));
                }
                FunctionalSpec::Power(a)
            }
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

fn check_region(y: &Tessellation, v: &CuboidRegion) -> Result<(), FunctionalError> {
    if v.dim() != y.dim() {
        return Err(FunctionalError::DimensionMismatch);
    }
    if v.corners().iter().all(|c| y.window().contains_point(c)) {
        Ok(())
    } else {
        Err(FunctionalError::RegionNotCovered)
    }
}

/// Internal vertices in `v`.
///
/// Every vertex of the tessellation is born when a dividing hyperplane cuts
/// an edge of the dying cell, so it is a vertex of exactly one facet. Facet
/// vertices on `∂W` are window artefacts and skipped.
pub fn vertex_count(y: &Tessellation, v: &CuboidRegion) -> Result<usize, FunctionalError> {
    check_region(y, v)?;
    let w = y.window();
    Ok(y
        .facets()
        .flat_map(|f| f.points())
        .filter(|p| v.contains(p) && !w.on_boundary(p))
        .count())
}

/// `(l-1)`-volume of `∂y ∩ V`.
pub fn boundary_mass(y: &Tessellation, v: &CuboidRegion) -> Result<f64, FunctionalError> {
    check_region(y, v)?;
    Ok(y.facets()
        .filter(|f| f.meets_cuboid(v))
        .map(|f| f.clip_to_cuboid(v).measure())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentCenters {
    /// Uncensored segments with midpoint in `V`.
    pub counted: usize,
    /// Censored segments with midpoint in `V`, reported but not counted.
    pub censored: usize,
}

/// Midpoints of maximal segments (planar only). Each split chord is taken as
/// one maximal segment, which holds almost surely.
pub fn segment_center_count(y: &Tessellation, v: &CuboidRegion) -> Result<SegmentCenters, FunctionalError> {
    if y.dim() != Dim::Two {
        return Err(FunctionalError::NotApplicable("segment_centers", y.dim()));
    }
    check_region(y, v)?;
    let mut out = SegmentCenters { counted: 0, censored: 0 };
    for e in y.events() {
        if v.contains(&e.facet.centroid()) {
            if e.censored {
                out.censored += 1;
            } else {
                out.counted += 1;
            }
        }
    }
    Ok(out)
}

/// Reference point of a face: centre of its smallest enclosing ball.
pub fn reference_point(face: &[Vector]) -> Vector {
    match face {
        [] => Vector::ZERO,
        [p] => *p,
        [a, b] => (*a + *b) * 0.5,
        _ => enclosing_center(face),
    }
}

/// Distinct `k`-faces of surviving cells whose reference point lies in `v`.
/// Faces inside `∂W` are excluded; faces shared by neighbouring cells are
/// merged when their reference points agree within [`DEDUP_TOL`].
pub fn kface_reference_count(y: &Tessellation, v: &CuboidRegion, k: usize) -> Result<usize, FunctionalError> {
    if k >= y.dim().get() {
        return Err(FunctionalError::NotApplicable("kface", y.dim()));
    }
    check_region(y, v)?;
    let w = y.window();
    let mut refs: Vec<Vector> = y
        .cells()
        .iter()
        .filter(|c| c.polytope.hits_closed_cuboid(v))
        .flat_map(|c| c.polytope.faces_of_dim(k))
        .filter(|f| {
            let mid = f.iter().fold(Vector::ZERO, |a, p| a + *p) / f.len() as f64;
            !w.on_boundary(&mid)
        })
        .map(|f| reference_point(&f))
        .filter(|r| v.contains(r))
        .collect();
    refs.sort_by(|a, b| a.lex_cmp(b));
    let mut kept: Vec<Vector> = Vec::with_capacity(refs.len());
    for r in refs {
        let dup = kept
            .iter()
            .rev()
            .take_while(|q| r[0] - q[0] <= DEDUP_TOL)
            .any(|q| q.max_abs_diff(&r) <= DEDUP_TOL);
        if !dup {
            kept.push(r);
        }
    }
    Ok(kept.len())
}

/// Sum of `feature` over cells lying completely in `v`.
pub fn contained_cell_sum(y: &Tessellation, v: &CuboidRegion, feature: CellFeature) -> Result<f64, FunctionalError> {
    check_region(y, v)?;
    Ok(y.cells()
        .iter()
        .filter(|c| c.polytope.contained_in(v))
        .map(|c| feature.of(&c.polytope))
        .sum())
}

/// Sum of `feature` over the cells of `y ∧ closure(v)`.
pub fn visible_cell_sum(y: &Tessellation, v: &CuboidRegion, feature: CellFeature) -> Result<f64, FunctionalError> {
    check_region(y, v)?;
    Ok(y.cells()
        .iter()
        .filter(|c| c.polytope.hits_closed_cuboid(v))
        .filter_map(|c| c.polytope.clip_to_cuboid(v))
        .map(|p| feature.of(&p))
        .sum())
}

/// `boundary_mass(y, v)^alpha`.
pub fn power_functional(y: &Tessellation, v: &CuboidRegion, alpha: f64) -> Result<f64, FunctionalError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FunctionalError::Invalid(format!("power exponent {alpha} not in (0,1)")));
    }
    Ok(boundary_mass(y, v)?.powf(alpha))
}

/// The `(2n)^l` half-open unit cubes of `[-n, n[^l`, shifted by `origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct CuboidGrid {
    dim: Dim,
    n: usize,
    origin: Vector,
}

impl CuboidGrid {
    pub fn new(dim: Dim, n: usize) -> Result<Self, FunctionalError> {
        if n == 0 {
            return Err(FunctionalError::Invalid("grid size n must be at least 1".into()));
        }
        Ok(CuboidGrid { dim, n, origin: Vector::ZERO })
    }

    pub fn translate(&self, a: Vector) -> CuboidGrid {
        CuboidGrid { origin: self.origin + a, ..self.clone() }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        (2 * self.n).pow(self.dim.get() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer labels in lexicographic order, each coordinate in `-n..n`.
    pub fn indices(&self) -> Vec<Vec<i64>> {
        let n = self.n as i64;
        let mut out = vec![vec![]];
        for _ in 0..self.dim.get() {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-n..n).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn cube(&self, index: &[i64]) -> CuboidRegion {
        let mut lo = self.origin;
        for (r, &i) in index.iter().enumerate() {
            lo.0[r] += i as f64;
        }
        let mut hi = lo;
        for r in 0..self.dim.get() {
            hi.0[r] += 1.0;
        }
        CuboidRegion::new(self.dim, lo, hi).expect("unit cube")
    }

    pub fn cubes(&self) -> Vec<CuboidRegion> {
        self.indices().iter().map(|i| self.cube(i)).collect()
    }

    /// `[-n, n[^l` shifted by the origin.
    pub fn union(&self) -> CuboidRegion {
        CuboidRegion::centered_cube(self.dim, self.n as f64)
            .expect("n >= 1")
            .translate(self.origin)
    }

    /// Maximum metric between grid labels.
    pub fn distance(i: &[i64], j: &[i64]) -> u64 {
        i.iter().zip(j).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0)
    }

    /// Labels at maximum distance exactly `k` from a fixed label in `Z^l`.
    pub fn shell_count(dim: Dim, k: u64) -> u64 {
        let l = dim.get() as u32;
        if k == 0 {
            1
        } else {
            (2 * k + 1).pow(l) - (2 * k - 1).pow(l)
        }
    }
}

/// Per-cube values `X_i` in the order of [`CuboidGrid::indices`].
pub fn evaluate_on_grid(y: &Tessellation, x: &FunctionalSpec, grid: &CuboidGrid) -> Result<Vec<f64>, FunctionalError> {
    grid.cubes().iter().map(|c| x.evaluate(y, c)).collect()
}

/// Smallest enclosing circle of a planar polygon in space.
fn enclosing_center(face: &[Vector]) -> Vector {
    let c0 = face[0];
    let mut normal = Vector::ZERO;
    for i in 0..face.len() {
        normal += (face[i] - c0).cross(&(face[(i + 1) % face.len()] - c0));
    }
    let Some(normal) = normal.normalized() else {
        return face.iter().fold(Vector::ZERO, |a, p| a + *p) / face.len() as f64;
    };
    let (e1, e2) = crate::geometry::plane_basis(normal);
    let pts: Vec<[f64; 2]> = face
        .iter()
        .map(|p| [(*p - c0).dot(&e1), (*p - c0).dot(&e2)])
        .collect();
    let ([x, y], _) = min_circle(&pts);
    c0 + e1 * x + e2 * y
}

type Circle = ([f64; 2], f64);

fn inside(c: &Circle, p: &[f64; 2]) -> bool {
    let d = ((p[0] - c.0[0]).powi(2) + (p[1] - c.0[1]).powi(2)).sqrt();
    d <= c.1 * (1.0 + 1e-12) + 1e-15
}

fn circle2(a: &[f64; 2], b: &[f64; 2]) -> Circle {
    let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    (c, ((a[0] - c[0]).powi(2) + (a[1] - c[1]).powi(2)).sqrt())
}

fn circle3(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> Circle {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-300 {
        // collinear: the widest pair decides
        let cands = [circle2(a, b), circle2(a, c), circle2(b, c)];
        return cands.into_iter().max_by(|p, q| p.1.total_cmp(&q.1)).unwrap();
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ([a[0] + ux, a[1] + uy], (ux * ux + uy * uy).sqrt())
}

/// Incremental construction; polygons here have few vertices, so the
/// worst-case cubic cost does not matter and no shuffling is needed.
fn min_circle(p: &[[f64; 2]]) -> Circle {
    let mut c: Circle = (p[0], 0.0);
    for i in 1..p.len() {
        if inside(&c, &p[i]) {
            continue;
        }
        c = (p[i], 0.0);
        for j in 0..i {
            if inside(&c, &p[j]) {
                continue;
            }
            c = circle2(&p[i], &p[j]);
            for k in 0..j {
                if !inside(&c, &p[k]) {
                    c = circle3(&p[i], &p[j], &p[k]);
                }
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Hyperplane;
    use crate::measure::HyperplaneMeasure;
    use crate::stit::{simulate, ReplaySplit, SimulationConfig};
    use approx::assert_relative_eq;

    fn axes2() -> HyperplaneMeasure {
        HyperplaneMeasure::discrete(Dim::Two, vec![(Vector::axis(0), 1.0), (Vector::axis(1), 1.0)]).unwrap()
    }

    fn square(lo: (f64, f64), hi: (f64, f64)) -> CuboidRegion {
        CuboidRegion::new(Dim::Two, Vector::new2(lo.0, lo.1), Vector::new2(hi.0, hi.1)).unwrap()
    }

    fn split(time: f64, cell_id: u64, axis: usize, at: f64) -> ReplaySplit {
        ReplaySplit {
            time,
            cell_id,
            hyperplane: Hyperplane::new(Vector::axis(axis), at).unwrap(),
        }
    }

    fn replay(window: CuboidRegion, splits: &[ReplaySplit]) -> Tessellation {
        Tessellation::replay(ConvexPolytope::cuboid(&window), axes2(), 1.0, splits).unwrap()
    }

    fn unit() -> CuboidRegion {
        CuboidRegion::unit(Dim::Two)
    }

    #[test]
    fn single_split_examples() {
        let y = replay(unit(), &[split(0.5, 1, 0, 0.5)]);
        assert_eq!(vertex_count(&y, &unit()).unwrap(), 0);
        assert_eq!(boundary_mass(&y, &unit()).unwrap(), 1.0);
        assert_eq!(boundary_mass(&y, &square((0.0, 0.0), (1.0, 0.25))).unwrap(), 0.25);
        assert_eq!(
            segment_center_count(&y, &unit()).unwrap(),
            SegmentCenters { counted: 0, censored: 1 }
        );
        assert_eq!(kface_reference_count(&y, &unit(), 1).unwrap(), 1);
        assert_eq!(visible_cell_sum(&y, &unit(), CellFeature::Count).unwrap(), 2.0);
        let halves = [square((0.0, 0.0), (1.0, 0.5)), square((0.0, 0.5), (1.0, 1.0))];
        let parts: f64 = halves
            .iter()
            .map(|h| visible_cell_sum(&y, h, CellFeature::Count).unwrap())
            .sum();
        assert_eq!(parts, 4.0);
    }

    #[test]
    fn unsplit_square_has_no_faces() {
        let y = replay(unit(), &[]);
        for k in 0..2 {
            assert_eq!(kface_reference_count(&y, &unit(), k).unwrap(), 0);
        }
    }

    #[test]
    fn two_event_genealogy() {
        // x = 0.5 first, then the left cell (id 2) by y = 0.5
        let y = replay(unit(), &[split(0.3, 1, 0, 0.5), split(0.6, 2, 1, 0.5)]);
        assert_eq!(vertex_count(&y, &unit()).unwrap(), 1);
        assert_eq!(kface_reference_count(&y, &unit(), 0).unwrap(), 1);
        // the second chord touches the frame at x = 0, so it is censored
        assert_eq!(segment_center_count(&y, &unit()).unwrap().counted, 0);

        // inside a larger window, the third chord is strictly interior
        let w = CuboidRegion::centered_cube(Dim::Two, 2.0).unwrap();
        let y = replay(
            w,
            &[split(0.1, 1, 0, 0.0), split(0.2, 3, 0, 1.0), split(0.3, 4, 1, 0.5)],
        );
        let v = square((-1.0, -1.0), (1.5, 1.5));
        let s = segment_center_count(&y, &v).unwrap();
        assert_eq!(s.counted, 1);
        let mid = y.events()[2].facet.centroid();
        assert!(mid.max_abs_diff(&Vector::new2(0.5, 0.5)) < 1e-15);
        assert_eq!(vertex_count(&y, &v).unwrap(), 2);
    }

    #[test]
    fn power_examples() {
        let y = replay(unit(), &[]);
        assert_eq!(power_functional(&y, &unit(), 0.5).unwrap(), 0.0);
        let w = CuboidRegion::centered_cube(Dim::Two, 1.0).unwrap();
        let y = replay(w, &[split(0.5, 1, 0, 0.0)]);
        let top = square((-1.0, 0.0), (1.0, 1.0));
        let bottom = square((-1.0, -1.0), (1.0, 0.0));
        let union = power_functional(&y, &w, 0.5).unwrap();
        assert_relative_eq!(union, 2f64.sqrt());
        let parts = power_functional(&y, &top, 0.5).unwrap() + power_functional(&y, &bottom, 0.5).unwrap();
        assert!(union <= parts);
    }

    #[test]
    fn region_checks() {
        let y = replay(unit(), &[]);
        let big = CuboidRegion::centered_cube(Dim::Two, 1.0).unwrap();
        assert_eq!(boundary_mass(&y, &big), Err(FunctionalError::RegionNotCovered));
        let cube = CuboidRegion::unit(Dim::Three);
        assert_eq!(vertex_count(&y, &cube), Err(FunctionalError::DimensionMismatch));
    }

    #[test]
    fn grid_shells_and_layout() {
        let g = CuboidGrid::new(Dim::Two, 1).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.cubes().len(), 4);
        assert_eq!(CuboidGrid::shell_count(Dim::Two, 1), 8);
        assert_eq!(CuboidGrid::shell_count(Dim::Two, 2), 16);
        assert_eq!(CuboidGrid::shell_count(Dim::Three, 1), 26);
        let g = CuboidGrid::new(Dim::Two, 3).unwrap();
        let idx = g.indices();
        let origin = vec![0, 0];
        for k in 1..3 {
            let c = idx.iter().filter(|j| CuboidGrid::distance(&origin, j) == k).count() as u64;
            assert_eq!(c, CuboidGrid::shell_count(Dim::Two, k));
        }
        let vol: f64 = g.cubes().iter().map(|c| c.volume()).sum();
        assert_eq!(vol, g.union().volume());
    }

    #[test]
    fn grid_sum_matches_union() {
        let iso = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let w = ConvexPolytope::cuboid(&CuboidRegion::centered_cube(Dim::Two, 2.0).unwrap());
        let g = CuboidGrid::new(Dim::Two, 1).unwrap();
        for seed in 0..20 {
            let y = simulate(&SimulationConfig::new(w.clone(), 2.0, iso.clone(), seed)).unwrap();
            for spec in [
                FunctionalSpec::VertexCount,
                FunctionalSpec::SegmentCenterCount,
                FunctionalSpec::KFaceReferenceCount(0),
                FunctionalSpec::KFaceReferenceCount(1),
            ] {
                let parts: f64 = evaluate_on_grid(&y, &spec, &g).unwrap().iter().sum();
                assert_eq!(parts, spec.evaluate(&y, &g.union()).unwrap(), "{spec}");
            }
            let parts: f64 = evaluate_on_grid(&y, &FunctionalSpec::BoundaryMass, &g).unwrap().iter().sum();
            assert_relative_eq!(parts, boundary_mass(&y, &g.union()).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn contained_volume_bounded_by_region() {
        let iso = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let v = CuboidRegion::centered_cube(Dim::Two, 1.0).unwrap();
        let y = simulate(&SimulationConfig::in_cuboid(&v, 3.0, iso, 4)).unwrap();
        let c = contained_cell_sum(&y, &v, CellFeature::Volume).unwrap();
        assert!(c <= v.volume());
        let tiny = CuboidRegion::centered_cube(Dim::Two, 1e-3).unwrap();
        let y = replay(v, &[]);
        assert_eq!(contained_cell_sum(&y, &tiny, CellFeature::Count).unwrap(), 0.0);
    }

    #[test]
    fn visible_volume_is_coverage() {
        let iso = HyperplaneMeasure::isotropic(Dim::Three, 1.0).unwrap();
        let w = CuboidRegion::centered_cube(Dim::Three, 1.0).unwrap();
        let y = simulate(&SimulationConfig::in_cuboid(&w, 3.0, iso, 2)).unwrap();
        let v = CuboidRegion::new(Dim::Three, Vector::new3(-0.5, -0.2, 0.0), Vector::new3(0.5, 0.7, 0.9)).unwrap();
        assert_relative_eq!(
            visible_cell_sum(&y, &v, CellFeature::Volume).unwrap(),
            v.volume(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn spec_text_round_trip() {
        for s in ["vertex_count", "boundary_mass", "segment_centers", "kface:1", "contained:volume", "visible:faces0", "power:0.5", "zero"] {
            let f: FunctionalSpec = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("power:1.5".parse::<FunctionalSpec>().is_err());
        assert!("bogus".parse::<FunctionalSpec>().is_err());
    }

    #[test]
    fn enclosing_circle_of_square_face() {
        let face = vec![
            Vector::new3(0.0, 0.0, 1.0),
            Vector::new3(1.0, 0.0, 1.0),
            Vector::new3(1.0, 1.0, 1.0),
            Vector::new3(0.0, 1.0, 1.0),
        ];
        let c = reference_point(&face);
        assert!(c.max_abs_diff(&Vector::new3(0.5, 0.5, 1.0)) < 1e-12);
        // obtuse triangle: centre is the midpoint of the long side
        let tri = vec![Vector::new3(0.0, 0.0, 0.0), Vector::new3(4.0, 0.0, 0.0), Vector::new3(2.0, 0.5, 0.0)];
        assert!(reference_point(&tri).max_abs_diff(&Vector::new3(2.0, 0.0, 0.0)) < 1e-12);
    }
}
