use super::facet::cut;
use super::polyhedron::Polyhedron;
use super::{
    CuboidRegion, Dim, Facet, GeometryError, Halfspace, Hyperplane, Vector,
    DEGENERATE_VOLUME_FRACTION, PREDICATE_TOL,
};

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    /// Counter-clockwise vertex ring.
    Polygon(Vec<Vector>),
    Polyhedron(Polyhedron),
}

/// A bounded convex cell with nonempty interior.
///
/// Keeps the halfspaces it was cut from (possibly redundant ones included)
/// next to a vertex representation that is always exact for the cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolytope {
    dim: Dim,
    halfspaces: Vec<Halfspace>,
    shape: Shape,
    volume: f64,
    diameter: f64,
}

/// Result of dividing a cell by a hyperplane `<x,u> = s`.
#[derive(Clone, Debug)]
pub struct SplitOutcome {
    /// Part in `<x,u> <= s`.
    pub lower: ConvexPolytope,
    /// Part in `<x,u> >= s`.
    pub upper: ConvexPolytope,
    pub facet: Facet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicFeatures {
    pub volume: f64,
    pub boundary_measure: f64,
    pub diameter: f64,
    /// Number of k-faces for `k = 0..l-1`.
    pub face_counts: Vec<usize>,
}

impl ConvexPolytope {
    pub fn cuboid(v: &CuboidRegion) -> Self {
        let shape = match v.dim() {
            Dim::Two => {
                let (lo, hi) = (v.lower(), v.upper());
                Shape::Polygon(vec![
                    lo,
                    Vector::new2(hi[0], lo[1]),
                    hi,
                    Vector::new2(lo[0], hi[1]),
                ])
            }
            Dim::Three => Shape::Polyhedron(Polyhedron::cuboid(v.lower(), v.upper())),
        };
        ConvexPolytope::assemble(v.dim(), v.halfspaces(), shape)
    }

    /// Convex polygon from its vertices in either cyclic orientation.
    pub fn polygon(vertices: Vec<Vector>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Degenerate("polygon needs at least 3 vertices"));
        }
        if vertices.iter().any(|v| !v.is_finite() || v[2] != 0.0) {
            return Err(GeometryError::NonFinite);
        }
        let mut ring = vertices;
        if signed_area(&ring) < 0.0 {
            ring.reverse();
        }
        let n = ring.len();
        for i in 0..n {
            let (a, b, c) = (ring[i], ring[(i + 1) % n], ring[(i + 2) % n]);
            if (b - a).perp_dot(&(c - b)) <= 0.0 {
                return Err(GeometryError::Degenerate("polygon is not strictly convex"));
            }
        }
        let halfspaces = (0..n)
            .map(|i| {
                let (a, b) = (ring[i], ring[(i + 1) % n]);
                let e = b - a;
                let normal = Vector::new2(e[1], -e[0]).normalized().expect("nonzero edge");
                Halfspace::new(normal, normal.dot(&a))
            })
            .collect();
        Ok(ConvexPolytope::assemble(Dim::Two, halfspaces, Shape::Polygon(ring)))
    }

    fn assemble(dim: Dim, halfspaces: Vec<Halfspace>, shape: Shape) -> Self {
        let (volume, verts) = match &shape {
            Shape::Polygon(r) => (signed_area(r), r.as_slice()),
            Shape::Polyhedron(p) => (p.volume(), p.vertices.as_slice()),
        };
        let diameter = diameter_of(verts);
        ConvexPolytope {
            dim,
            halfspaces,
            shape,
            volume,
            diameter,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vector] {
        match &self.shape {
            Shape::Polygon(r) => r,
            Shape::Polyhedron(p) => &p.vertices,
        }
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn eps(&self) -> f64 {
        PREDICATE_TOL * self.diameter
    }

    /// Perimeter in the plane, surface area in space.
    pub fn boundary_measure(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(r) => perimeter(r),
            Shape::Polyhedron(p) => p.surface_area(),
        }
    }

    /// Width averaged over uniformly distributed directions.
    pub fn mean_width(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(r) => perimeter(r) / std::f64::consts::PI,
            Shape::Polyhedron(p) => p.mean_width(),
        }
    }

    /// `h(P, u) = max_v <v, u>`.
    pub fn support_value(&self, u: &Vector) -> f64 {
        self.vertices()
            .iter()
            .map(|v| v.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(min_v <v,u>, max_v <v,u>)`.
    #[inline]
    pub fn extent(&self, u: &Vector) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in self.vertices() {
            let x = v.dot(u);
            lo = lo.min(x);
            hi = hi.max(x);
        }
        (lo, hi)
    }

    pub fn width(&self, u: &Vector) -> f64 {
        let (lo, hi) = self.extent(u);
        hi - lo
    }

    /// Whether the hyperplane meets the cell; tangency counts.
    pub fn hits(&self, h: &Hyperplane) -> bool {
        let (lo, hi) = self.extent(&h.normal());
        let tol = self.eps();
        lo - h.offset() <= tol && hi - h.offset() >= -tol
    }

    /// Bounding-box overlap with the closed cuboid `v`; a cheap prefilter.
    pub fn hits_closed_cuboid(&self, v: &CuboidRegion) -> bool {
        (0..self.dim().get()).all(|r| {
            let (lo, hi) = self.extent(&Vector::axis(r));
            hi >= v.lower()[r] && lo <= v.upper()[r]
        })
    }

    /// Every vertex satisfies the half-open membership rule of `v`.
    pub fn contained_in(&self, v: &CuboidRegion) -> bool {
        self.vertices().iter().all(|x| v.contains(x))
    }

    /// Whether `x` lies on the boundary, up to the predicate tolerance.
    pub fn on_boundary(&self, x: &Vector) -> bool {
        let tol = self.eps();
        self.halfspaces
            .iter()
            .any(|h| h.signed_distance(x).abs() <= tol)
    }

    /// Whether the polytope `other` lies inside `self` (tolerant).
    pub fn contains_polytope(&self, other: &ConvexPolytope) -> bool {
        let tol = self.eps();
        other
            .vertices()
            .iter()
            .all(|x| self.halfspaces.iter().all(|h| h.signed_distance(x) <= tol))
    }

    pub fn contains_point(&self, x: &Vector) -> bool {
        let tol = self.eps();
        self.halfspaces.iter().all(|h| h.signed_distance(x) <= tol)
    }

    /// Intersection with a halfspace, None if it has no interior.
    pub fn clip(&self, h: &Halfspace) -> Option<ConvexPolytope> {
        self.clip_with_cap(h).0
    }

    fn clip_with_cap(&self, h: &Halfspace) -> (Option<ConvexPolytope>, Vec<Vector>) {
        let eps = self.eps();
        let (shape, cap) = match &self.shape {
            Shape::Polygon(r) => {
                let (ring, cap) = clip_ring(r, h, eps);
                (ring.map(Shape::Polygon), cap)
            }
            Shape::Polyhedron(p) => {
                let (poly, cap) = p.clip(h, eps);
                (poly.map(Shape::Polyhedron), cap)
            }
        };
        let clipped = shape.and_then(|s| {
            let mut hs = self.halfspaces.clone();
            hs.push(*h);
            let p = ConvexPolytope::assemble(self.dim, hs, s);
            (p.volume > 0.0).then_some(p)
        });
        (clipped, cap)
    }

    /// Intersection with the closure of a cuboid.
    pub fn clip_to_cuboid(&self, v: &CuboidRegion) -> Option<ConvexPolytope> {
        let mut cur = self.clone();
        for h in v.halfspaces() {
            let (lo, hi) = cur.extent(&h.normal);
            if hi <= h.offset {
                continue;
            }
            if lo >= h.offset {
                return None;
            }
            cur = cur.clip(&h)?;
        }
        Some(cur)
    }

    /// Divides the cell by `h` into its two closed sides and the dividing
    /// facet.
    pub fn split(&self, h: &Hyperplane) -> Result<SplitOutcome, GeometryError> {
        let (lower, cap) = self.clip_with_cap(&h.lower_halfspace());
        let (upper, _) = self.clip_with_cap(&h.upper_halfspace());
        let (mut lower, mut upper) = match (lower, upper) {
            (Some(l), Some(u)) => (l, u),
            _ => return Err(GeometryError::DegenerateSplit { fraction: 0.0 }),
        };
        // Cut points are rounded off the parent's edges, which costs about
        // ulp(|x|) * edge length in area; on tiny cells far from the origin that
        // is visible at 1e-9 relative. The larger child takes the remainder so
        // volume is conserved exactly, at the same absolute accuracy.
        if lower.volume <= upper.volume {
            upper.volume = self.volume - lower.volume;
        } else {
            lower.volume = self.volume - upper.volume;
        }
        let fraction = lower.volume.min(upper.volume) / self.volume;
        if fraction < DEGENERATE_VOLUME_FRACTION {
            return Err(GeometryError::DegenerateSplit { fraction });
        }
        let facet = match self.dim {
            Dim::Two => {
                let tangent = Vector::new2(-h.normal()[1], h.normal()[0]);
                let lo = cap.iter().min_by(|a, b| a.dot(&tangent).total_cmp(&b.dot(&tangent)));
                let hi = cap.iter().max_by(|a, b| a.dot(&tangent).total_cmp(&b.dot(&tangent)));
                match (lo, hi) {
                    (Some(a), Some(b)) => Facet::segment(*a, *b),
                    _ => return Err(GeometryError::DegenerateSplit { fraction }),
                }
            }
            Dim::Three => {
                if cap.len() < 3 {
                    return Err(GeometryError::DegenerateSplit { fraction });
                }
                Facet::polygon(cap)
            }
        };
        Ok(SplitOutcome {
            lower,
            upper,
            facet,
        })
    }

    pub fn translate(&self, a: Vector) -> ConvexPolytope {
        let shape = match &self.shape {
            Shape::Polygon(r) => Shape::Polygon(r.iter().map(|v| *v + a).collect()),
            Shape::Polyhedron(p) => Shape::Polyhedron(p.translate(a)),
        };
        ConvexPolytope {
            dim: self.dim,
            halfspaces: self.halfspaces.iter().map(|h| h.translate(a)).collect(),
            shape,
            volume: self.volume,
            diameter: self.diameter,
        }
    }

    /// Vertex sets of the k-dimensional faces, `k = 0..l-1`.
    pub fn faces_of_dim(&self, k: usize) -> Vec<Vec<Vector>> {
        match (&self.shape, k) {
            (Shape::Polygon(r), 0) | (Shape::Polyhedron(Polyhedron { vertices: r, .. }), 0) => {
                r.iter().map(|v| vec![*v]).collect()
            }
            (Shape::Polygon(r), 1) => {
                let n = r.len();
                (0..n).map(|i| vec![r[i], r[(i + 1) % n]]).collect()
            }
            (Shape::Polyhedron(p), 1) => p
                .edges()
                .into_iter()
                .map(|((a, b), _)| vec![p.vertices[a], p.vertices[b]])
                .collect(),
            (Shape::Polyhedron(p), 2) => p
                .faces
                .iter()
                .map(|f| f.loop_.iter().map(|&i| p.vertices[i]).collect())
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn face_counts(&self) -> Vec<usize> {
        match &self.shape {
            Shape::Polygon(r) => vec![r.len(), r.len()],
            Shape::Polyhedron(p) => vec![p.vertices.len(), p.edges().len(), p.faces.len()],
        }
    }

    pub fn intrinsic_features(&self) -> IntrinsicFeatures {
        IntrinsicFeatures {
            volume: self.volume,
            boundary_measure: self.boundary_measure(),
            diameter: self.diameter,
            face_counts: self.face_counts(),
        }
    }

    pub fn centroid(&self) -> Vector {
        let vs = self.vertices();
        vs.iter().fold(Vector::ZERO, |a, v| a + *v) / vs.len() as f64
    }
}

fn signed_area(ring: &[Vector]) -> f64 {
    let n = ring.len();
    let o = ring[0];
    let mut acc = 0.0;
    for i in 1..n.saturating_sub(1) {
        acc += (ring[i] - o).perp_dot(&(ring[i + 1] - o));
    }
    0.5 * acc
}

fn perimeter(ring: &[Vector]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].distance(&ring[(i + 1) % n])).sum()
}

fn diameter_of(vs: &[Vector]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in vs.iter().enumerate() {
        for b in &vs[i + 1..] {
            best = best.max((*a - *b).norm_squared());
        }
    }
    best.sqrt()
}

/// Sutherland-Hodgman step for a convex ring. Vertices within `eps` of the
/// line are kept as they are; the returned cap lists the ring points lying
/// on the line.
fn clip_ring(ring: &[Vector], h: &Halfspace, eps: f64) -> (Option<Vec<Vector>>, Vec<Vector>) {
    let d: Vec<f64> = ring.iter().map(|v| h.signed_distance(v)).collect();
    let inside = |x: f64| x < -eps;
    let outside = |x: f64| x > eps;
    if !d.iter().any(|&x| inside(x)) {
        return (None, Vec::new());
    }
    let mut out = Vec::with_capacity(ring.len() + 1);
    let mut cap = Vec::new();
    let n = ring.len();
    for i in 0..n {
        let j = (i + 1) % n;
        if !outside(d[i]) {
            out.push(ring[i]);
            if !inside(d[i]) {
                cap.push(ring[i]);
            }
        }
        if (inside(d[i]) && outside(d[j])) || (outside(d[i]) && inside(d[j])) {
            let p = cut(ring[i], ring[j], d[i], d[j]);
            out.push(p);
            cap.push(p);
        }
    }
    if out.len() < 3 {
        return (None, cap);
    }
    (Some(out), cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square() -> ConvexPolytope {
        ConvexPolytope::cuboid(&CuboidRegion::unit(Dim::Two))
    }

    fn unit_cube() -> ConvexPolytope {
        ConvexPolytope::cuboid(&CuboidRegion::unit(Dim::Three))
    }

    fn rect(w: f64, h: f64) -> ConvexPolytope {
        ConvexPolytope::cuboid(
            &CuboidRegion::new(Dim::Two, Vector::ZERO, Vector::new2(w, h)).unwrap(),
        )
    }

    #[test]
    fn support_values_of_unit_square() {
        let p = unit_square();
        assert_eq!(p.support_value(&Vector::new2(1.0, 0.0)), 1.0);
        assert_eq!(p.support_value(&Vector::new2(-1.0, 0.0)), 0.0);
        let d = Vector::new2(0.5f64.sqrt(), 0.5f64.sqrt());
        assert_relative_eq!(p.support_value(&d), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn hit_tests() {
        let p = unit_square();
        let ex = Vector::new2(1.0, 0.0);
        assert!(p.hits(&Hyperplane::new(ex, 0.5).unwrap()));
        assert!(!p.hits(&Hyperplane::new(ex, 2.0).unwrap()));
        assert!(p.hits(&Hyperplane::new(ex, 1.0).unwrap()));
    }

    #[test]
    fn bisect_square() {
        let out = unit_square()
            .split(&Hyperplane::new(Vector::new2(1.0, 0.0), 0.5).unwrap())
            .unwrap();
        assert_relative_eq!(out.lower.volume(), 0.5);
        assert_relative_eq!(out.upper.volume(), 0.5);
        assert_relative_eq!(out.facet.measure(), 1.0);
    }

    #[test]
    fn diagonal_corner_split() {
        // x + y = 0.5
        let h = Hyperplane::new(Vector::new2(1.0, 1.0), 0.5).unwrap();
        assert_relative_eq!(h.offset(), 0.5 / 2f64.sqrt(), epsilon = 1e-15);
        let out = unit_square().split(&h).unwrap();
        assert_relative_eq!(out.lower.volume(), 0.125, epsilon = 1e-15);
        assert_relative_eq!(out.upper.volume(), 0.875, epsilon = 1e-15);
        assert_eq!(out.lower.vertices().len(), 3);
        assert_eq!(out.upper.vertices().len(), 5);
        assert_relative_eq!(out.facet.measure(), 0.5 * 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn cube_slab_split() {
        let h = Hyperplane::new(Vector::new3(0.0, 0.0, 1.0), 0.25).unwrap();
        let out = unit_cube().split(&h).unwrap();
        assert_relative_eq!(out.lower.volume(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(out.upper.volume(), 0.75, epsilon = 1e-15);
        assert_relative_eq!(out.facet.measure(), 1.0, epsilon = 1e-15);
        assert_eq!(out.lower.face_counts(), vec![8, 12, 6]);
    }

    #[test]
    fn tangent_split_is_degenerate() {
        let h = Hyperplane::new(Vector::new2(1.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            unit_square().split(&h),
            Err(GeometryError::DegenerateSplit { .. })
        ));
    }

    #[test]
    fn containment_is_half_open() {
        let v = CuboidRegion::unit(Dim::Two);
        let small = ConvexPolytope::cuboid(
            &CuboidRegion::new(Dim::Two, Vector::new2(0.1, 0.1), Vector::new2(0.2, 0.2)).unwrap(),
        );
        assert!(small.contained_in(&v));
        let wide = ConvexPolytope::cuboid(
            &CuboidRegion::new(Dim::Two, Vector::new2(0.5, 0.0), Vector::new2(1.5, 1.0)).unwrap(),
        );
        assert!(!wide.contained_in(&v));
        let touching = ConvexPolytope::cuboid(
            &CuboidRegion::new(Dim::Two, Vector::new2(0.5, 0.0), Vector::new2(1.0, 0.5)).unwrap(),
        );
        assert!(!touching.contained_in(&v));
    }

    #[test]
    fn intrinsic_features_examples() {
        let f = unit_square().intrinsic_features();
        assert_eq!(f.volume, 1.0);
        assert_eq!(f.boundary_measure, 4.0);
        assert_relative_eq!(f.diameter, 2f64.sqrt());
        assert_eq!(f.face_counts, vec![4, 4]);

        let f = unit_cube().intrinsic_features();
        assert_relative_eq!(f.volume, 1.0);
        assert_relative_eq!(f.boundary_measure, 6.0);
        assert_relative_eq!(f.diameter, 3f64.sqrt());
        assert_eq!(f.face_counts, vec![8, 12, 6]);

        let f = rect(0.5, 2.0).intrinsic_features();
        assert_relative_eq!(f.volume, 1.0);
        assert_relative_eq!(f.boundary_measure, 5.0);
        assert_relative_eq!(f.diameter, 4.25f64.sqrt());
    }

    #[test]
    fn polygon_constructor_validates() {
        assert!(ConvexPolytope::polygon(vec![
            Vector::new2(0.0, 0.0),
            Vector::new2(1.0, 0.0),
            Vector::new2(2.0, 0.0)
        ])
        .is_err());
        let cw = ConvexPolytope::polygon(vec![
            Vector::new2(0.0, 0.0),
            Vector::new2(0.0, 1.0),
            Vector::new2(1.0, 0.0),
        ])
        .unwrap();
        assert_relative_eq!(cw.volume(), 0.5);
    }

    #[test]
    fn clip_to_cuboid_keeps_overlap() {
        let p = rect(2.0, 1.0);
        let v = CuboidRegion::new(Dim::Two, Vector::new2(0.5, -1.0), Vector::new2(1.0, 3.0)).unwrap();
        assert_relative_eq!(p.clip_to_cuboid(&v).unwrap().volume(), 0.5);
        let far = CuboidRegion::new(Dim::Two, Vector::new2(5.0, 0.0), Vector::new2(6.0, 1.0)).unwrap();
        assert!(p.clip_to_cuboid(&far).is_none());
    }
}
