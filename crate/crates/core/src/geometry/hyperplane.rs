use super::{GeometryError, Vector};

/// The affine hyperplane `{x : <x, normal> = offset}`.
///
/// The normal is a unit vector whose first nonzero coordinate is positive,
/// which makes the `(normal, offset)` pair unique for each hyperplane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
}

impl Hyperplane {
    /// Builds the hyperplane `<x, normal> = offset`, normalising and moving
    /// the normal into the canonical hemisphere.
    pub fn new(normal: Vector, offset: f64) -> Result<Self, GeometryError> {
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(GeometryError::ZeroNormal);
        }
        if !offset.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let (u, flipped) = (normal / len).canonical_hemisphere();
        let s = offset / len;
        Ok(Hyperplane {
            normal: u,
            offset: if flipped { -s } else { s },
        })
    }

    pub fn normal(&self) -> Vector {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn signed_distance(&self, x: &Vector) -> f64 {
        x.dot(&self.normal) - self.offset
    }

    pub fn translate(&self, a: Vector) -> Hyperplane {
        Hyperplane {
            normal: self.normal,
            offset: self.offset + a.dot(&self.normal),
        }
    }

    /// `{<x,u> <= s}`.
    pub fn lower_halfspace(&self) -> Halfspace {
        Halfspace::new(self.normal, self.offset)
    }

    /// `{<x,u> >= s}`.
    pub fn upper_halfspace(&self) -> Halfspace {
        Halfspace::new(-self.normal, -self.offset)
    }
}

/// The closed halfspace `{x : <x, normal> <= offset}` with unit outward normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    #[inline]
    pub fn signed_distance(&self, x: &Vector) -> f64 {
        x.dot(&self.normal) - self.offset
    }

    pub fn translate(&self, a: Vector) -> Halfspace {
        Halfspace {
            normal: self.normal,
            offset: self.offset + a.dot(&self.normal),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_is_unique() {
        let h1 = Hyperplane::new(Vector::new2(-2.0, 0.0), -1.0).unwrap();
        let h2 = Hyperplane::new(Vector::new2(1.0, 0.0), 0.5).unwrap();
        assert_eq!(h1, h2);
        assert!((h1.normal().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_normal_rejected() {
        assert_eq!(
            Hyperplane::new(Vector::ZERO, 1.0),
            Err(GeometryError::ZeroNormal)
        );
    }
}
