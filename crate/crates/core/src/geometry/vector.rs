use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use super::GeometryError;

/// Ambient dimension of a run. Only the plane and space are supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub const fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> Result<Self, GeometryError> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(GeometryError::UnsupportedDimension(other)),
        }
    }

    /// Axis unit vectors `e_1, ..., e_l`.
    pub fn axes(self) -> impl Iterator<Item = Vector> {
        (0..self.get()).map(Vector::axis)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// A point or direction in R^2 or R^3.
///
/// Planar vectors carry a zero third coordinate, so dot products and norms
/// need no dimension argument.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector(pub [f64; 3]);

impl Vector {
    pub const ZERO: Vector = Vector([0.0; 3]);

    pub const fn new2(x: f64, y: f64) -> Self {
        Vector([x, y, 0.0])
    }

    pub const fn new3(x: f64, y: f64, z: f64) -> Self {
        Vector([x, y, z])
    }

    pub fn axis(r: usize) -> Self {
        let mut c = [0.0; 3];
        c[r] = 1.0;
        Vector(c)
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self, GeometryError> {
        if !(2..=3).contains(&coords.len()) {
            return Err(GeometryError::UnsupportedDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Vector(c))
    }

    /// Unit vector at angle `phi` from the first axis (planar only).
    pub fn from_angle(phi: f64) -> Self {
        Vector::new2(phi.cos(), phi.sin())
    }

    pub fn coords(&self, dim: Dim) -> &[f64] {
        &self.0[..dim.get()]
    }

    #[inline]
    pub fn dot(&self, other: &Vector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn cross(&self, o: &Vector) -> Vector {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vector([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    /// z-component of the planar cross product.
    #[inline]
    pub fn perp_dot(&self, o: &Vector) -> f64 {
        self.0[0] * o.0[1] - self.0[1] * o.0[0]
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self / n)
    }

    pub fn distance(&self, o: &Vector) -> f64 {
        (*self - *o).norm()
    }

    /// Chebyshev distance.
    pub fn max_abs_diff(&self, o: &Vector) -> f64 {
        (0..3).map(|r| (self.0[r] - o.0[r]).abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Lexicographic comparison, used to give edges a canonical orientation.
    pub fn lex_cmp(&self, o: &Vector) -> std::cmp::Ordering {
        self.0[0]
            .total_cmp(&o.0[0])
            .then(self.0[1].total_cmp(&o.0[1]))
            .then(self.0[2].total_cmp(&o.0[2]))
    }

    /// Flip so that the first nonzero coordinate is positive.
    pub fn canonical_hemisphere(self) -> (Vector, bool) {
        for c in self.0 {
            if c > 0.0 {
                return (self, false);
            }
            if c < 0.0 {
                return (-self, true);
            }
        }
        (self, false)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, r: usize) -> &f64 {
        &self.0[r]
    }
}

impl Add for Vector {
    type Output = Vector;
    #[inline]
    fn add(self, o: Vector) -> Vector {
        Vector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, o: Vector) {
        *self = *self + o;
    }
}

impl Sub for Vector {
    type Output = Vector;
    #[inline]
    fn sub(self, o: Vector) -> Vector {
        Vector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl SubAssign for Vector {
    fn sub_assign(&mut self, o: Vector) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    #[inline]
    fn mul(self, s: f64) -> Vector {
        Vector([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Div<f64> for Vector {
    type Output = Vector;
    #[inline]
    fn div(self, s: f64) -> Vector {
        Vector([self.0[0] / s, self.0[1] / s, self.0[2] / s])
    }
}

impl Neg for Vector {
    type Output = Vector;
    #[inline]
    fn neg(self) -> Vector {
        Vector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_hemisphere_flips_first_nonzero() {
        let (u, flipped) = Vector::new2(-0.6, 0.8).canonical_hemisphere();
        assert!(flipped);
        assert_eq!(u, Vector::new2(0.6, -0.8));
        let (u, flipped) = Vector::new3(0.0, -1.0, 0.0).canonical_hemisphere();
        assert!(flipped);
        assert_eq!(u, Vector::new3(0.0, 1.0, 0.0));
        let (_, flipped) = Vector::new3(0.0, 0.0, 1.0).canonical_hemisphere();
        assert!(!flipped);
    }

    #[test]
    fn from_slice_rejects_bad_input() {
        assert!(Vector::from_slice(&[1.0]).is_err());
        assert!(Vector::from_slice(&[1.0, f64::NAN]).is_err());
        assert_eq!(Vector::from_slice(&[1.0, 2.0]).unwrap(), Vector::new2(1.0, 2.0));
    }
}
