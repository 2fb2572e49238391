use super::{Dim, GeometryError, Halfspace, Vector};

/// The half-open cuboid `[lower, upper[`.
///
/// A point belongs to it iff `lower_r <= x_r < upper_r` in every coordinate,
/// so a grid of cuboids tiling a larger cuboid assigns every point to
/// exactly one tile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuboidRegion {
    dim: Dim,
    lower: Vector,
    upper: Vector,
}

impl CuboidRegion {
    pub fn new(dim: Dim, lower: Vector, upper: Vector) -> Result<Self, GeometryError> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if (0..dim.get()).any(|r| !(lower[r] < upper[r])) {
            return Err(GeometryError::EmptyCuboid);
        }
        let mut lo = lower;
        let mut hi = upper;
        for r in dim.get()..3 {
            lo.0[r] = 0.0;
            hi.0[r] = 0.0;
        }
        Ok(CuboidRegion {
            dim,
            lower: lo,
            upper: hi,
        })
    }

    /// `[-h, h[^l`.
    pub fn centered_cube(dim: Dim, half_side: f64) -> Result<Self, GeometryError> {
        let mut lo = Vector::ZERO;
        let mut hi = Vector::ZERO;
        for r in 0..dim.get() {
            lo.0[r] = -half_side;
            hi.0[r] = half_side;
        }
        CuboidRegion::new(dim, lo, hi)
    }

    /// `[0,1[^l`.
    pub fn unit(dim: Dim) -> Self {
        let mut hi = Vector::ZERO;
        for r in 0..dim.get() {
            hi.0[r] = 1.0;
        }
        CuboidRegion {
            dim,
            lower: Vector::ZERO,
            upper: hi,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn lower(&self) -> Vector {
        self.lower
    }

    pub fn upper(&self) -> Vector {
        self.upper
    }

    pub fn side(&self, r: usize) -> f64 {
        self.upper[r] - self.lower[r]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim.get()).map(|r| self.side(r)).product()
    }

    pub fn center(&self) -> Vector {
        (self.lower + self.upper) * 0.5
    }

    /// Half-open membership.
    #[inline]
    pub fn contains(&self, x: &Vector) -> bool {
        (0..self.dim.get()).all(|r| self.lower[r] <= x[r] && x[r] < self.upper[r])
    }

    /// Membership in the closure.
    #[inline]
    pub fn contains_closed(&self, x: &Vector) -> bool {
        (0..self.dim.get()).all(|r| self.lower[r] <= x[r] && x[r] <= self.upper[r])
    }

    /// The `2l` bounding halfspaces of the closure, lower faces first.
    pub fn halfspaces(&self) -> Vec<Halfspace> {
        let d = self.dim.get();
        let mut out = Vec::with_capacity(2 * d);
        for r in 0..d {
            out.push(Halfspace::new(-Vector::axis(r), -self.lower[r]));
        }
        for r in 0..d {
            out.push(Halfspace::new(Vector::axis(r), self.upper[r]));
        }
        out
    }

    /// Corner points of the closure.
    pub fn corners(&self) -> Vec<Vector> {
        let d = self.dim.get();
        (0..1usize << d)
            .map(|mask| {
                let mut v = Vector::ZERO;
                for r in 0..d {
                    v.0[r] = if mask & (1 << r) == 0 {
                        self.lower[r]
                    } else {
                        self.upper[r]
                    };
                }
                v
            })
            .collect()
    }

    pub fn translate(&self, a: Vector) -> CuboidRegion {
        let mut a = a;
        for r in self.dim.get()..3 {
            a.0[r] = 0.0;
        }
        CuboidRegion {
            dim: self.dim,
            lower: self.lower + a,
            upper: self.upper + a,
        }
    }

    /// Whether the closures intersect.
    pub fn intersects_closed(&self, o: &CuboidRegion) -> bool {
        (0..self.dim.get()).all(|r| self.lower[r] <= o.upper[r] && o.lower[r] <= self.upper[r])
    }

    /// Whether the closure of `self` lies in the closure of `o`.
    pub fn is_within(&self, o: &CuboidRegion) -> bool {
        (0..self.dim.get()).all(|r| o.lower[r] <= self.lower[r] && self.upper[r] <= o.upper[r])
    }

    /// Splits along axis `r` at coordinate `at` into `[.., at[` and `[at, ..[`.
    pub fn split_at(&self, r: usize, at: f64) -> Option<(CuboidRegion, CuboidRegion)> {
        if !(self.lower[r] < at && at < self.upper[r]) {
            return None;
        }
        let mut left = *self;
        let mut right = *self;
        left.upper.0[r] = at;
        right.lower.0[r] = at;
        Some((left, right))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_open_rule() {
        let v = CuboidRegion::unit(Dim::Two);
        assert!(v.contains(&Vector::new2(0.0, 0.0)));
        assert!(!v.contains(&Vector::new2(1.0, 0.5)));
        assert!(v.contains_closed(&Vector::new2(1.0, 0.5)));
    }

    #[test]
    fn split_tiles_are_disjoint() {
        let v = CuboidRegion::centered_cube(Dim::Two, 1.0).unwrap();
        let (a, b) = v.split_at(0, 0.25).unwrap();
        for x in [-1.0, -0.3, 0.25, 0.2499999, 0.9999] {
            let p = Vector::new2(x, 0.0);
            assert_eq!(a.contains(&p) as u8 + b.contains(&p) as u8, 1, "x={x}");
        }
        assert!(v.split_at(0, 1.0).is_none());
    }

    #[test]
    fn empty_cuboid_rejected() {
        assert!(CuboidRegion::new(Dim::Two, Vector::new2(0.0, 1.0), Vector::new2(1.0, 1.0)).is_err());
    }
}
