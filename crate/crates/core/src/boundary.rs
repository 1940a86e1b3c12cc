//! Quasiconformal boundary maps of `R^{n-1} ∪ {∞}` and their Euclidean
//! energy density and distortion.

use core::fmt;

use crate::geometry::{BoundaryPoint, Isometry};
use crate::linalg::{Matrix, Vector};
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundaryError {
    #[error("map sends a finite point to infinity")]
    Pole,
    #[error("map produced a non-finite value")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("declared fixed point is moved by {0:e}")]
    NotFixed(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("unknown catalog map `{0}`")]
    UnknownMap(String),
}

/// A boundary map with a declared fixed point and distortion bound.
pub trait BoundaryMap: Send + Sync + fmt::Debug {
    /// Dimension `n − 1` of the boundary.
    fn boundary_dim(&self) -> usize;

    /// Action on the whole boundary sphere.
    fn map_point(&self, x: &BoundaryPoint) -> BoundaryPoint;

    /// Exact Jacobian at a finite point, when the map knows it.
    fn analytic_jacobian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }

    fn fixed_point(&self) -> BoundaryPoint;

    /// Claimed bound on the distortion.
    fn declared_distortion(&self) -> f64;

    /// Evaluates at a finite point; a finite point sent to `∞` is an error.
    fn eval(&self, x: &Vector) -> Result<Vector, BoundaryError> {
        let d = self.boundary_dim();
        if x.len() != d {
            return Err(BoundaryError::DimensionMismatch { expected: d, found: x.len() });
        }
        match self.map_point(&BoundaryPoint::Finite(*x)) {
            BoundaryPoint::Infinity => Err(BoundaryError::Pole),
            BoundaryPoint::Finite(y) if y.is_finite() => Ok(y),
            BoundaryPoint::Finite(_) => Err(BoundaryError::NonFinite),
        }
    }

    /// `f(a + d) − f(a)` for finite points. Implementations override this
    /// when the difference can be formed without cancellation.
    fn eval_offset(&self, a: &Vector, d: &Vector) -> Result<Vector, BoundaryError> {
        Ok(self.eval(&(*a + *d))? - self.eval(a)?)
    }

    /// Analytic Jacobian if available, otherwise central differences.
    fn jacobian(&self, x: &Vector) -> Result<Matrix, BoundaryError> {
        match self.analytic_jacobian(x) {
            Some(j) if j.is_finite() => Ok(j),
            _ => fd_jacobian(self, x),
        }
    }
}

/// Finite-difference step used for boundary Jacobians.
pub fn fd_step(x: &Vector) -> f64 {
    1e-5 * x.norm().max(1.0)
}

/// Central-difference Jacobian with step [`fd_step`].
pub fn fd_jacobian<F: BoundaryMap + ?Sized>(f: &F, x: &Vector) -> Result<Matrix, BoundaryError> {
    let d = f.boundary_dim();
    let h = fd_step(x);
    let mut jac = Matrix::zeros(d, d);
    for j in 0..d {
        let mut xp = *x;
        xp[j] += h;
        let mut xm = *x;
        xm[j] -= h;
        let diff = f.eval(&xp)? - f.eval(&xm)?;
        for i in 0..d {
            jac[(i, j)] = diff[i] / (2.0 * h);
        }
    }
    if !jac.is_finite() {
        return Err(BoundaryError::NonFinite);
    }
    Ok(jac)
}

/// Euclidean energy density `Σ (∂f_i/∂x_j)²` from the finite-difference
/// Jacobian.
pub fn boundary_energy_density<F: BoundaryMap + ?Sized>(f: &F, x: &Vector) -> Result<f64, BoundaryError> {
    Ok(fd_jacobian(f, x)?.frobenius_sq())
}

/// Ratio of the extreme singular values of the finite-difference Jacobian.
/// A singular Jacobian yields `f64::INFINITY`.
pub fn distortion_estimate<F: BoundaryMap + ?Sized>(f: &F, x: &Vector) -> Result<f64, BoundaryError> {
    Ok(fd_jacobian(f, x)?.condition_ratio())
}

fn moved_by<F: BoundaryMap + ?Sized>(f: &F, a: &BoundaryPoint) -> f64 {
    match (a, f.map_point(a)) {
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => 0.0,
        (BoundaryPoint::Finite(x), BoundaryPoint::Finite(y)) => (*x - y).norm(),
        _ => f64::INFINITY,
    }
}

/// Checks that `f` fixes `a` to within `1e-10 (1 + |a|)`.
pub fn check_fixes<F: BoundaryMap + ?Sized>(f: &F, a: &BoundaryPoint) -> Result<(), BoundaryError> {
    let moved = moved_by(f, a);
    let scale = match a {
        BoundaryPoint::Finite(x) => 1.0 + x.norm(),
        BoundaryPoint::Infinity => 1.0,
    };
    if moved <= 1e-10 * scale {
        Ok(())
    } else {
        Err(BoundaryError::NotFixed(moved))
    }
}

/// The test corpus of boundary maps.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogMap {
    Identity {
        dim: usize,
    },
    /// `x ↦ A x`.
    Linear {
        matrix: Matrix,
    },
    /// `x ↦ c + |x − c|^{K−1} (x − c)`.
    RadialStretch {
        k: f64,
        center: Vector,
    },
    /// `x ↦ (x₁ + c·sin x₂, x₂, …)`.
    Shear {
        c: f64,
        dim: usize,
    },
    /// `outer ∘ inner`.
    Composed {
        outer: Box<CatalogMap>,
        inner: Box<CatalogMap>,
    },
    /// Boundary action of an isometry.
    IsometryTrace {
        iso: Isometry,
        anchor: BoundaryPoint,
    },
    /// `I ∘ f ∘ J⁻¹`.
    Conjugated {
        outer: Isometry,
        map: Box<CatalogMap>,
        inner_inv: Isometry,
    },
    /// The same map with a different declared fixed point.
    Anchored {
        map: Box<CatalogMap>,
        anchor: BoundaryPoint,
    },
}

impl CatalogMap {
    pub fn identity(dim: usize) -> Self {
        CatalogMap::Identity { dim }
    }

    pub fn linear(matrix: Matrix) -> Result<Self, BoundaryError> {
        if matrix.rows() != matrix.cols() {
            return Err(BoundaryError::InvalidParameter("linear map must be square"));
        }
        if !matrix.is_finite() || matrix.condition_ratio().is_infinite() {
            return Err(BoundaryError::InvalidParameter("linear map must be invertible"));
        }
        Ok(CatalogMap::Linear { matrix })
    }

    pub fn radial_stretch(k: f64, center: Vector) -> Result<Self, BoundaryError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(BoundaryError::InvalidParameter("radial stretch needs K > 0"));
        }
        Ok(CatalogMap::RadialStretch { k, center })
    }

    pub fn shear(c: f64, dim: usize) -> Result<Self, BoundaryError> {
        if dim < 2 || !c.is_finite() {
            return Err(BoundaryError::InvalidParameter("shear needs dimension ≥ 2 and finite c"));
        }
        Ok(CatalogMap::Shear { c, dim })
    }

    /// `outer ∘ inner`; the composite keeps the fixed point of `inner`, which
    /// `outer` must also fix.
    pub fn compose(outer: CatalogMap, inner: CatalogMap) -> Result<Self, BoundaryError> {
        check_fixes(&outer, &inner.fixed_point())?;
        Ok(CatalogMap::Composed { outer: Box::new(outer), inner: Box::new(inner) })
    }

    pub fn isometry_trace(iso: Isometry, anchor: BoundaryPoint) -> Result<Self, BoundaryError> {
        let map = CatalogMap::IsometryTrace { iso, anchor };
        check_fixes(&map, &anchor)?;
        Ok(map)
    }

    pub fn with_anchor(self, anchor: BoundaryPoint) -> Result<Self, BoundaryError> {
        check_fixes(&self, &anchor)?;
        Ok(CatalogMap::Anchored { map: Box::new(self), anchor })
    }

    /// Looks up a catalog entry by name, as used in configuration files.
    /// `k` is the stretch exponent, `c` the shear amplitude.
    pub fn by_name(name: &str, dim: usize, k: f64, c: f64) -> Result<Self, BoundaryError> {
        match name {
            "identity" => Ok(CatalogMap::identity(dim)),
            "radial_stretch" => CatalogMap::radial_stretch(k, Vector::zeros(dim)),
            "shear" => CatalogMap::shear(c, dim),
            "linear_diag" => {
                let mut entries = vec![1.0; dim];
                entries[0] = k;
                CatalogMap::linear(Matrix::diagonal(&entries))
            }
            _ => Err(BoundaryError::UnknownMap(name.into())),
        }
    }
}

fn finite_or<F: FnOnce(&Vector) -> Vector>(x: &BoundaryPoint, f: F) -> BoundaryPoint {
    match x {
        BoundaryPoint::Infinity => BoundaryPoint::Infinity,
        BoundaryPoint::Finite(v) => BoundaryPoint::Finite(f(v)),
    }
}

fn shear_declared(c: f64) -> f64 {
    let r = 0.5 * (c.abs() + (c * c + 4.0).sqrt());
    r * r
}

/// `I ∘ f ∘ J⁻¹`; distortion is unchanged since isometries act conformally
/// on the boundary.
pub fn conjugate_boundary(f: CatalogMap, outer: Isometry, inner: Isometry) -> CatalogMap {
    let inner_inv = inner.inverse();
    CatalogMap::Conjugated { outer, map: Box::new(f), inner_inv }
}

impl BoundaryMap for CatalogMap {
    fn boundary_dim(&self) -> usize {
        match self {
            CatalogMap::Identity { dim } | CatalogMap::Shear { dim, .. } => *dim,
            CatalogMap::Linear { matrix } => matrix.rows(),
            CatalogMap::RadialStretch { center, .. } => center.len(),
            CatalogMap::Composed { inner, .. } => inner.boundary_dim(),
            CatalogMap::IsometryTrace { iso, .. } => iso.dim() - 1,
            CatalogMap::Conjugated { map, .. } | CatalogMap::Anchored { map, .. } => map.boundary_dim(),
        }
    }

    fn map_point(&self, x: &BoundaryPoint) -> BoundaryPoint {
        match self {
            CatalogMap::Identity { .. } => *x,
            CatalogMap::Linear { matrix } => finite_or(x, |v| matrix.mul_vec(v)),
            CatalogMap::RadialStretch { k, center } => finite_or(x, |v| {
                let w = *v - *center;
                let r = w.norm();
                if r == 0.0 {
                    *center
                } else {
                    *center + w * r.powf(k - 1.0)
                }
            }),
            CatalogMap::Shear { c, .. } => finite_or(x, |v| {
                let mut y = *v;
                y[0] += c * v[1].sin();
                y
            }),
            CatalogMap::Composed { outer, inner } => outer.map_point(&inner.map_point(x)),
            CatalogMap::IsometryTrace { iso, .. } => iso.apply_boundary(x),
            CatalogMap::Conjugated { outer, map, inner_inv, .. } => {
                outer.apply_boundary(&map.map_point(&inner_inv.apply_boundary(x)))
            }
            CatalogMap::Anchored { map, .. } => map.map_point(x),
        }
    }

    fn eval_offset(&self, a: &Vector, d: &Vector) -> Result<Vector, BoundaryError> {
        let out = match self {
            CatalogMap::Identity { .. } => *d,
            CatalogMap::Linear { matrix } => matrix.mul_vec(d),
            CatalogMap::RadialStretch { k, center } => {
                let w = *a - *center;
                let r2 = w.norm_sq();
                if r2 == 0.0 {
                    return Ok(self.eval(&(*a + *d))? - *a);
                }
                // |w+d|^{K-1} − |w|^{K-1} = |w|^{K-1} expm1(½(K−1) ln1p((2w·d + |d|²)/|w|²))
                let rel = (2.0 * w.dot(d) + d.norm_sq()) / r2;
                let base = r2.powf(0.5 * (k - 1.0));
                let jump = base * (0.5 * (k - 1.0) * rel.ln_1p()).exp_m1();
                *d * (base + jump) + w * jump
            }
            CatalogMap::Shear { c, .. } => {
                let mut out = *d;
                out[0] += 2.0 * c * (a[1] + 0.5 * d[1]).cos() * (0.5 * d[1]).sin();
                out
            }
            CatalogMap::Composed { outer, inner } => {
                let inner_a = inner.eval(a)?;
                outer.eval_offset(&inner_a, &inner.eval_offset(a, d)?)?
            }
            CatalogMap::Anchored { map, .. } => map.eval_offset(a, d)?,
            _ => self.eval(&(*a + *d))? - self.eval(a)?,
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(BoundaryError::NonFinite)
        }
    }

    fn analytic_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let d = x.len();
        match self {
            CatalogMap::Identity { dim } => Some(Matrix::identity(*dim)),
            CatalogMap::Linear { matrix } => Some(*matrix),
            CatalogMap::RadialStretch { k, center } => {
                let w = *x - *center;
                let r = w.norm();
                if r == 0.0 {
                    return None;
                }
                let scale = r.powf(k - 1.0);
                Some(Matrix::from_fn(d, d, |i, j| {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    scale * (delta + (k - 1.0) * w[i] * w[j] / (r * r))
                }))
            }
            CatalogMap::Shear { c, .. } => {
                let mut jac = Matrix::identity(d);
                jac[(0, 1)] = c * x[1].cos();
                Some(jac)
            }
            CatalogMap::Composed { outer, inner } => {
                let inner_jac = inner.analytic_jacobian(x)?;
                let y = inner.eval(x).ok()?;
                Some(outer.analytic_jacobian(&y)?.mul_mat(&inner_jac))
            }
            CatalogMap::IsometryTrace { iso, .. } => iso.boundary_jacobian(x),
            CatalogMap::Conjugated { outer, map, inner_inv, .. } => {
                let j_in = inner_inv.boundary_jacobian(x)?;
                let BoundaryPoint::Finite(y) = inner_inv.apply_boundary(&BoundaryPoint::Finite(*x)) else {
                    return None;
                };
                let j_map = map.analytic_jacobian(&y)?;
                let fy = map.eval(&y).ok()?;
                let j_out = outer.boundary_jacobian(&fy)?;
                Some(j_out.mul_mat(&j_map).mul_mat(&j_in))
            }
            CatalogMap::Anchored { map, .. } => map.analytic_jacobian(x),
        }
    }

    fn fixed_point(&self) -> BoundaryPoint {
        match self {
            CatalogMap::Identity { .. }
            | CatalogMap::Linear { .. }
            | CatalogMap::RadialStretch { .. }
            | CatalogMap::Shear { .. } => BoundaryPoint::Infinity,
            CatalogMap::Composed { inner, .. } => inner.fixed_point(),
            CatalogMap::IsometryTrace { anchor, .. } | CatalogMap::Anchored { anchor, .. } => *anchor,
            CatalogMap::Conjugated { outer, map, .. } => outer.apply_boundary(&map.fixed_point()),
        }
    }

    fn declared_distortion(&self) -> f64 {
        match self {
            CatalogMap::Identity { .. } | CatalogMap::IsometryTrace { .. } => 1.0,
            CatalogMap::Linear { matrix } => matrix.condition_ratio(),
            CatalogMap::RadialStretch { k, .. } => k.max(1.0 / k),
            CatalogMap::Shear { c, .. } => shear_declared(*c),
            CatalogMap::Composed { outer, inner } => {
                outer.declared_distortion() * inner.declared_distortion()
            }
            CatalogMap::Conjugated { map, .. } | CatalogMap::Anchored { map, .. } => {
                map.declared_distortion()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x)
    }

    #[test]
    fn catalog_examples() {
        let lin = CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0])).unwrap();
        assert_eq!(lin.eval(&v(&[1.0, 1.0])).unwrap(), v(&[2.0, 1.0]));
        let rs = CatalogMap::radial_stretch(2.0, Vector::zeros(2)).unwrap();
        assert_eq!(rs.eval(&v(&[1.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        assert_eq!(rs.eval(&v(&[2.0, 0.0])).unwrap(), v(&[4.0, 0.0]));
        assert_eq!(rs.eval(&Vector::zeros(2)).unwrap(), Vector::zeros(2));
    }

    #[test]
    fn energy_and_distortion_of_linear() {
        let id = CatalogMap::identity(2);
        let x = v(&[0.3, -7.0]);
        assert!((boundary_energy_density(&id, &x).unwrap() - 2.0).abs() < 1e-9);
        assert!((distortion_estimate(&id, &x).unwrap() - 1.0).abs() < 1e-9);
        let lin = CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0])).unwrap();
        assert!((boundary_energy_density(&lin, &x).unwrap() - 5.0).abs() < 1e-9);
        assert!((distortion_estimate(&lin, &x).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn singular_linear_rejected() {
        assert!(CatalogMap::linear(Matrix::diagonal(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        let maps = [
            CatalogMap::radial_stretch(1.5, v(&[0.2, -0.1])).unwrap(),
            CatalogMap::shear(0.8, 2).unwrap(),
            CatalogMap::compose(
                CatalogMap::shear(0.5, 2).unwrap(),
                CatalogMap::radial_stretch(2.0, Vector::zeros(2)).unwrap(),
            )
            .unwrap(),
            conjugate_boundary(
                CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap(),
                Isometry::inversion(3),
                Isometry::inversion(3),
            ),
        ];
        let x = v(&[0.7, 0.4]);
        for f in &maps {
            let exact = f.analytic_jacobian(&x).unwrap();
            let fd = fd_jacobian(f, &x).unwrap();
            assert!(exact.max_abs_diff(&fd) < 1e-8, "{f:?}");
        }
    }

    #[test]
    fn offsets_agree_with_plain_differences() {
        let maps = [
            CatalogMap::radial_stretch(1.5, v(&[0.2, -0.1])).unwrap(),
            CatalogMap::shear(0.8, 2).unwrap(),
            CatalogMap::compose(
                CatalogMap::shear(0.5, 2).unwrap(),
                CatalogMap::radial_stretch(2.0, Vector::zeros(2)).unwrap(),
            )
            .unwrap(),
        ];
        let a = v(&[0.7, 0.4]);
        let d = v(&[-0.03, 0.02]);
        for f in &maps {
            let plain = f.eval(&(a + d)).unwrap() - f.eval(&a).unwrap();
            assert!(f.eval_offset(&a, &d).unwrap().max_abs_diff(&plain) < 1e-14, "{f:?}");
        }
        // Far from the center the offset keeps its relative accuracy.
        let f = &maps[0];
        let far = v(&[1e6, 0.0]);
        let tiny = v(&[1e-9, 0.0]);
        let off = f.eval_offset(&far, &tiny).unwrap();
        let exact = 1.5 * (1e6f64 - 0.2).sqrt() * 1e-9;
        assert!((off[0] - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn shear_distortion_within_declared() {
        let f = CatalogMap::shear(1.0, 2).unwrap();
        // |cos| = 1 at x₂ = 0 attains the bound.
        let k = distortion_estimate(&f, &v(&[0.0, 0.0])).unwrap();
        assert!((k - f.declared_distortion()).abs() < 1e-6);
    }

    #[test]
    fn anchored_rejects_non_fixed_point() {
        let f = CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap();
        assert!(f.clone().with_anchor(BoundaryPoint::finite(&[0.0, 0.0])).is_ok());
        assert!(matches!(f.with_anchor(BoundaryPoint::finite(&[1.0, 1.0])), Err(BoundaryError::NotFixed(_))));
    }
}
