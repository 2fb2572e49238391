use super::{CuboidRegion, Dim, Halfspace, Vector};

/// A piece of a dividing hyperplane: a segment in the plane, a convex
/// polygon (ordered vertex loop) in space.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    dim: Dim,
    points: Vec<Vector>,
}

impl Facet {
    pub fn segment(a: Vector, b: Vector) -> Self {
        Facet {
            dim: Dim::Two,
            points: vec![a, b],
        }
    }

    /// Planar convex polygon in space, vertices in cyclic order.
    pub fn polygon(points: Vec<Vector>) -> Self {
        Facet {
            dim: Dim::Three,
            points,
        }
    }

    pub(crate) fn empty(dim: Dim) -> Self {
        Facet {
            dim,
            points: Vec::new(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        match self.dim {
            Dim::Two => self.points.len() < 2,
            Dim::Three => self.points.len() < 3,
        }
    }

    /// (l-1)-dimensional volume: length in the plane, area in space.
    pub fn measure(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        match self.dim {
            Dim::Two => self.points[0].distance(&self.points[1]),
            Dim::Three => polygon_area(&self.points),
        }
    }

    /// Midpoint of a segment; vertex average of a polygon.
    pub fn centroid(&self) -> Vector {
        if self.points.is_empty() {
            return Vector::ZERO;
        }
        let sum = self.points.iter().fold(Vector::ZERO, |acc, p| acc + *p);
        sum / self.points.len() as f64
    }

    pub fn translate(&self, a: Vector) -> Facet {
        Facet {
            dim: self.dim,
            points: self.points.iter().map(|p| *p + a).collect(),
        }
    }

    /// Intersection with a closed halfspace.
    pub fn clip(&self, h: &Halfspace) -> Facet {
        if self.is_empty() {
            return self.clone();
        }
        match self.dim {
            Dim::Two => {
                let (a, b) = (self.points[0], self.points[1]);
                let (da, db) = (h.signed_distance(&a), h.signed_distance(&b));
                match (da <= 0.0, db <= 0.0) {
                    (true, true) => self.clone(),
                    (false, false) => Facet::empty(Dim::Two),
                    (true, false) => Facet::segment(a, cut(a, b, da, db)),
                    (false, true) => Facet::segment(cut(a, b, da, db), b),
                }
            }
            Dim::Three => {
                let pts = &self.points;
                let n = pts.len();
                let d: Vec<f64> = pts.iter().map(|p| h.signed_distance(p)).collect();
                let mut out = Vec::with_capacity(n + 1);
                for i in 0..n {
                    let j = (i + 1) % n;
                    if d[i] <= 0.0 {
                        out.push(pts[i]);
                    }
                    if (d[i] < 0.0 && d[j] > 0.0) || (d[i] > 0.0 && d[j] < 0.0) {
                        out.push(cut(pts[i], pts[j], d[i], d[j]));
                    }
                }
                Facet::polygon(out)
            }
        }
    }

    /// Intersection with the closure of a cuboid.
    pub fn clip_to_cuboid(&self, v: &CuboidRegion) -> Facet {
        if self.dim == Dim::Two {
            return self.clip_segment_to_cuboid(v);
        }
        let mut f = self.clone();
        for h in v.halfspaces() {
            f = f.clip(&h);
            if f.is_empty() {
                break;
            }
        }
        f
    }

    // Liang-Barsky.
    fn clip_segment_to_cuboid(&self, v: &CuboidRegion) -> Facet {
        if self.is_empty() {
            return self.clone();
        }
        let (a, b) = (self.points[0], self.points[1]);
        let dir = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for r in 0..2 {
            let (lo, hi) = (v.lower()[r], v.upper()[r]);
            if dir[r] == 0.0 {
                if a[r] < lo || a[r] > hi {
                    return Facet::empty(Dim::Two);
                }
                continue;
            }
            let mut ta = (lo - a[r]) / dir[r];
            let mut tb = (hi - a[r]) / dir[r];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return Facet::empty(Dim::Two);
            }
        }
        let p = if t0 == 0.0 { a } else { a + dir * t0 };
        let q = if t1 == 1.0 { b } else { a + dir * t1 };
        Facet::segment(p, q)
    }

    /// Whether the facet meets the closed cuboid.
    pub fn meets_cuboid(&self, v: &CuboidRegion) -> bool {
        if self.points.iter().any(|p| v.contains_closed(p)) {
            return true;
        }
        let c = self.clip_to_cuboid(v);
        !c.points.is_empty()
    }
}

/// Point where the segment `a b` crosses the zero level of the signed
/// distances `da`, `db`. The endpoints are put in lexicographic order first
/// so that a shared edge yields bit-identical points from either side.
#[inline]
pub(crate) fn cut(a: Vector, b: Vector, da: f64, db: f64) -> Vector {
    let (p, q, dp, dq) = if a.lex_cmp(&b).is_le() {
        (a, b, da, db)
    } else {
        (b, a, db, da)
    };
    let s = dp / (dp - dq);
    p + (q - p) * s
}

pub(crate) fn polygon_area(points: &[Vector]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let o = points[0];
    let mut acc = Vector::ZERO;
    for w in points[1..].windows(2) {
        acc += (w[0] - o).cross(&(w[1] - o));
    }
    0.5 * acc.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_clip_to_cuboid() {
        let f = Facet::segment(Vector::new2(0.0, 0.5), Vector::new2(1.0, 0.5));
        let v = CuboidRegion::new(Dim::Two, Vector::new2(0.0, 0.0), Vector::new2(0.5, 0.5)).unwrap();
        // the segment lies on the closed upper face of v
        assert!((f.clip_to_cuboid(&v).measure() - 0.5).abs() < 1e-15);
        let v = CuboidRegion::new(Dim::Two, Vector::new2(2.0, 0.0), Vector::new2(3.0, 1.0)).unwrap();
        assert_eq!(f.clip_to_cuboid(&v).measure(), 0.0);
    }

    #[test]
    fn square_facet_clip_area() {
        let f = Facet::polygon(vec![
            Vector::new3(0.0, 0.0, 0.5),
            Vector::new3(1.0, 0.0, 0.5),
            Vector::new3(1.0, 1.0, 0.5),
            Vector::new3(0.0, 1.0, 0.5),
        ]);
        assert!((f.measure() - 1.0).abs() < 1e-15);
        let v = CuboidRegion::new(Dim::Three, Vector::ZERO, Vector::new3(0.25, 0.25, 0.25)).unwrap();
        assert_eq!(f.clip_to_cuboid(&v).measure(), 0.0);
        let v = CuboidRegion::new(Dim::Three, Vector::ZERO, Vector::new3(0.25, 0.25, 1.0)).unwrap();
        assert!((f.clip_to_cuboid(&v).measure() - 0.0625).abs() < 1e-15);
    }
}
