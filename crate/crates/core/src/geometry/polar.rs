use super::{distance, geodesic_step, GeometryError, Point};
use crate::linalg::{Matrix, Vector};
use crate::prelude::*;

const GRAM_TOL: f64 = 1e-10;

/// Geodesic polar coordinates `(ρ, ζ)` about a center, with `ζ` expressed in a
/// hyperbolically orthonormal tangent basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFrame {
    center: Point,
    /// Columns are the basis vectors, in Euclidean components.
    basis: Matrix,
}

impl PolarFrame {
    /// The coordinate frame `s·e_i` at `center`.
    pub fn standard(center: Point) -> Self {
        let n = center.dim();
        PolarFrame { basis: Matrix::identity(n).scaled(center.height()), center }
    }

    pub fn new(center: Point, basis: Matrix) -> Result<Self, GeometryError> {
        let n = center.dim();
        if basis.rows() != n || basis.cols() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, found: basis.cols() });
        }
        let s = center.height();
        let gram = basis.transpose().mul_mat(&basis).scaled(1.0 / (s * s));
        let defect = gram.max_abs_diff(&Matrix::identity(n));
        if !(defect <= GRAM_TOL) {
            return Err(GeometryError::NonOrthonormalFrame(defect));
        }
        Ok(PolarFrame { center, basis })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Tangent vector (Euclidean components) of unit hyperbolic length in
    /// direction `zeta`; `zeta` is normalised first.
    pub fn direction(&self, zeta: &Vector) -> Vector {
        let unit = *zeta * (1.0 / zeta.norm());
        self.basis.mul_vec(&unit)
    }

    pub fn from_polar(&self, rho: f64, zeta: &Vector) -> Point {
        geodesic_step(&self.center, &self.direction(zeta), rho)
    }

    /// Returns `(ρ, ζ)`; fails at the center where `ζ` is undefined.
    pub fn to_polar(&self, p: &Point) -> Result<(f64, Vector), GeometryError> {
        let n = self.center.dim();
        if p.dim() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, found: p.dim() });
        }
        let rho = distance(&self.center, p);
        if rho == 0.0 {
            return Err(GeometryError::AtCenter);
        }
        // Normalise the center to (0, 1) and invert the vertical-axis formula.
        let s = self.center.height();
        let mut x = Vector::zeros(n - 1);
        for i in 0..n - 1 {
            x[i] = (p[i] - self.center[i]) / s;
        }
        let h = p.height() / s;
        let sh = rho.sinh();
        let mut w = x * (1.0 / (h * sh));
        w = w.push((x.norm_sq() + (h - 1.0) * (h + 1.0)) / (2.0 * h * sh));
        let w = w * (1.0 / w.norm());
        let zeta = self.basis.transpose().mul_vec(&w) * (1.0 / s);
        Ok((rho, zeta))
    }
}
