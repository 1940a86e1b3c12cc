//! The upper half-space model `H^n = {(x, s) : x ∈ R^{n-1}, s > 0}` with
//! metric `(|dx|² + ds²)/s²`.
//!
//! Tangent vectors are always stored by their Euclidean components; the
//! hyperbolic norm of a vector `v` at a point of height `s` is `|v|/s`.

mod horocyclic;
mod isometry;
mod polar;

pub use horocyclic::HorocyclicCoord;
pub use isometry::{
    antipode, canonical_to_infinity, general_isometry, inverse_stereographic, normalizer, stereographic,
    BoundaryPoint, Isometry, IsometryFixingInfinity,
};
pub use polar::PolarFrame;

use core::fmt;

use crate::linalg::{Vector, MAX_DIM};
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("height must be positive and finite, got {0}")]
    NonPositiveHeight(f64),
    #[error("coordinates are not finite")]
    NonFinite,
    #[error("dimension n = {0} is outside 2..={MAX_DIM}")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("rotation is not orthogonal (defect {0:e})")]
    NotOrthogonal(f64),
    #[error("rotation has determinant {0}, expected +1")]
    NotSpecial(f64),
    #[error("boundary triple has repeated points")]
    DegenerateTriple,
    #[error("point coincides with the polar center; direction undefined")]
    AtCenter,
    #[error("frame is not orthonormal in the hyperbolic metric (defect {0:e})")]
    NonOrthonormalFrame(f64),
}

/// A point of `H^n`: horizontal part in `R^{n-1}` and positive height.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: Vector,
}

impl Point {
    pub fn new(horizontal: &[f64], height: f64) -> Result<Self, GeometryError> {
        let n = horizontal.len() + 1;
        if !(2..=MAX_DIM).contains(&n) {
            return Err(GeometryError::UnsupportedDimension(n));
        }
        Self::from_coords(Vector::from_slice(horizontal).push(height))
    }

    /// Builds a point from its full coordinate vector `(x_1, …, x_{n-1}, s)`.
    pub fn from_coords(coords: Vector) -> Result<Self, GeometryError> {
        let n = coords.len();
        if !(2..=MAX_DIM).contains(&n) {
            return Err(GeometryError::UnsupportedDimension(n));
        }
        if !coords.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let s = coords[n - 1];
        if !(s > 0.0) {
            return Err(GeometryError::NonPositiveHeight(s));
        }
        Ok(Point { coords })
    }

    /// The point `(0, …, 0, 1)`.
    pub fn base(n: usize) -> Self {
        let mut coords = Vector::zeros(n);
        coords[n - 1] = 1.0;
        Point { coords }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.coords[self.dim() - 1]
    }

    pub fn horizontal(&self) -> Vector {
        self.coords.truncated()
    }

    #[inline]
    pub fn coords(&self) -> &Vector {
        &self.coords
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.coords)
    }
}

/// Hyperbolic distance, `cosh d = 1 + |p − q|²/(2 s_p s_q)`, evaluated in the
/// cancellation-free form `d = 2 asinh(|p − q| / (2 √(s_p s_q)))`.
pub fn distance(p: &Point, q: &Point) -> f64 {
    debug_assert_eq!(p.dim(), q.dim());
    let chord = (*p.coords() - *q.coords()).norm();
    2.0 * (chord / (2.0 * (p.height() * q.height()).sqrt())).asinh()
}

/// Hyperbolic norm of the tangent vector `v` (Euclidean components) at `p`.
pub fn tangent_norm(p: &Point, v: &Vector) -> f64 {
    v.norm() / p.height()
}

/// Follows the geodesic from `p` with initial velocity `v` for time `t`,
/// i.e. returns `exp_p(t v)`.
///
/// The computation is the vertical-axis geodesic conjugated by an isometry
/// fixing `∞`: after normalising `p` to `(0, 1)`, a unit direction making the
/// angle `θ` with the upward vertical reaches, after distance `d`,
/// `x = sin θ sinh d / D`, `s = 1/D` with `D = e^{-d} + 2 sin²(θ/2) sinh d`.
pub fn geodesic_step(p: &Point, v: &Vector, t: f64) -> Point {
    let n = p.dim();
    debug_assert_eq!(v.len(), n);
    let s = p.height();
    let speed = v.norm();
    if speed == 0.0 || t == 0.0 {
        return *p;
    }
    let mut dist = t * speed / s;
    let mut dir = *v * (1.0 / speed);
    if dist < 0.0 {
        dist = -dist;
        dir = -dir;
    }
    let up = dir[n - 1];
    let horiz_sq: f64 = (0..n - 1).map(|i| dir[i] * dir[i]).sum();
    // sin²(θ/2) = (1 − cos θ)/2, written without cancellation near θ = 0.
    let half_sin_sq = if up > 0.0 { horiz_sq / (2.0 * (1.0 + up)) } else { 0.5 * (1.0 - up) };
    let sinh_d = dist.sinh();
    let denom = (-dist).exp() + 2.0 * half_sin_sq * sinh_d;
    let horiz_factor = s * sinh_d / denom;
    let mut coords = *p.coords();
    for i in 0..n - 1 {
        coords[i] += dir[i] * horiz_factor;
    }
    coords[n - 1] = s / denom;
    Point { coords }
}

impl core::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}
