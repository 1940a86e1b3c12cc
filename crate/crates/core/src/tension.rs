//! Energy density, tension field and distortion of maps `H^n → H^n`,
//! computed from central-difference jets in half-space coordinates.

use crate::boundary::BoundaryError;
use crate::geometry::{GeometryError, Isometry, IsometryFixingInfinity, Point};
use crate::linalg::{Matrix, Vector};
use crate::prelude::*;

/// Relative step of the tension stencil: `h = STEP_FACTOR · s`.
pub const STEP_FACTOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error("stencil step shrank to {0:e}, below the minimum")]
    StepTooSmall(f64),
    #[error("map produced a non-finite value")]
    NonFinite,
    #[error("point outside the map's domain")]
    OutsideDomain,
}

/// A map `H^n → H^n` that can be evaluated pointwise.
pub trait HyperMap: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, p: &Point) -> Result<Point, MapError>;

    /// Coordinates of `F(q) − F(base)`, given `base_image = F(base)`. Maps
    /// that can form the difference without cancellation override this; the
    /// jet is built from these differences.
    fn eval_relative(&self, q: &Point, _base: &Point, base_image: &Point) -> Result<Vector, MapError> {
        Ok(*self.eval(q)?.coords() - *base_image.coords())
    }
}

impl<M: HyperMap + ?Sized> HyperMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        (**self).eval(p)
    }
    fn eval_relative(&self, q: &Point, base: &Point, image: &Point) -> Result<Vector, MapError> {
        (**self).eval_relative(q, base, image)
    }
}

impl<M: HyperMap + ?Sized> HyperMap for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        (**self).eval(p)
    }
    fn eval_relative(&self, q: &Point, base: &Point, image: &Point) -> Result<Vector, MapError> {
        (**self).eval_relative(q, base, image)
    }
}

impl HyperMap for Isometry {
    fn dim(&self) -> usize {
        Isometry::dim(self)
    }
    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        Ok(self.apply(p))
    }
}

impl HyperMap for IsometryFixingInfinity {
    fn dim(&self) -> usize {
        IsometryFixingInfinity::dim(self)
    }
    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        Ok(self.apply(p))
    }
}

/// A map given by a closure.
pub struct ClosedForm<F> {
    dim: usize,
    f: F,
}

impl<F> ClosedForm<F>
where
    F: Fn(&Point) -> Result<Point, MapError> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        ClosedForm { dim, f }
    }
}

impl<F> HyperMap for ClosedForm<F>
where
    F: Fn(&Point) -> Result<Point, MapError> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        (self.f)(p)
    }
}

/// `outer ∘ inner` for an isometry `outer`.
pub struct PostComposed<M> {
    pub outer: Isometry,
    pub inner: M,
}

impl<M: HyperMap> HyperMap for PostComposed<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        Ok(self.outer.apply(&self.inner.eval(p)?))
    }
}

/// Value, first and second coordinate derivatives of a map at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct JetData {
    pub value: Point,
    /// `jacobian[(α, i)] = ∂F^α/∂x^i`.
    pub jacobian: Matrix,
    /// `hessian[γ][(i, j)] = ∂²F^γ/∂x^i∂x^j`.
    pub hessian: Vec<Matrix>,
    /// Step actually used.
    pub step: f64,
}

/// Central-difference jet with step `h`. The step is halved while the stencil
/// would leave the half-space; below `1e-8 · s` the computation is refused.
pub fn jet<M: HyperMap + ?Sized>(f: &M, p: &Point, h: f64) -> Result<JetData, MapError> {
    let n = p.dim();
    let s = p.height();
    let mut h = h;
    while h >= 0.5 * s {
        h *= 0.5;
    }
    if !(h > 1e-8 * s) {
        return Err(MapError::StepTooSmall(h));
    }
    let value = f.eval(p)?;
    // Differences F(q) − F(p) over the stencil.
    let shifted = |offsets: &[(usize, f64)]| -> Result<Vector, MapError> {
        let mut c = *p.coords();
        for &(i, d) in offsets {
            c[i] += d;
        }
        let q = Point::from_coords(c)?;
        let v = f.eval_relative(&q, p, &value)?;
        if !v.is_finite() {
            return Err(MapError::NonFinite);
        }
        Ok(v)
    };
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        plus.push(shifted(&[(i, h)])?);
        minus.push(shifted(&[(i, -h)])?);
    }
    let mut jacobian = Matrix::zeros(n, n);
    let mut hessian = vec![Matrix::zeros(n, n); n];
    for i in 0..n {
        for g in 0..n {
            jacobian[(g, i)] = (plus[i][g] - minus[i][g]) / (2.0 * h);
            hessian[g][(i, i)] = (plus[i][g] + minus[i][g]) / (h * h);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let pp = shifted(&[(i, h), (j, h)])?;
            let pm = shifted(&[(i, h), (j, -h)])?;
            let mp = shifted(&[(i, -h), (j, h)])?;
            let mm = shifted(&[(i, -h), (j, -h)])?;
            for g in 0..n {
                let v = (pp[g] - pm[g] - mp[g] + mm[g]) / (4.0 * h * h);
                hessian[g][(i, j)] = v;
                hessian[g][(j, i)] = v;
            }
        }
    }
    Ok(JetData { value, jacobian, hessian, step: h })
}

/// Jet with the default step `STEP_FACTOR · s`.
pub fn default_jet<M: HyperMap + ?Sized>(f: &M, p: &Point) -> Result<JetData, MapError> {
    jet(f, p, STEP_FACTOR * p.height())
}

/// Local invariants of a map at a point, all derived from one jet.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalReport {
    pub energy: f64,
    /// Euclidean components of `τ(F)` at `F(p)`.
    pub tension: Vector,
    /// `|τ(F)|` in the hyperbolic metric at `F(p)`.
    pub tension_norm: f64,
    pub distortion: f64,
}

/// `𝐞(F) = ½ (s/S)² Σ_{α,i} (∂F^α/∂x^i)²` with `S` the height of `F(p)`.
pub fn energy_from_jet(p: &Point, jet: &JetData) -> f64 {
    let ratio = p.height() / jet.value.height();
    0.5 * ratio * ratio * jet.jacobian.frobenius_sq()
}

/// `τ^γ = s² [ΔF^γ − (n−2) s⁻¹ ∂_s F^γ
///   − S⁻¹ Σ_i (2 ∂_iF^γ ∂_iF^n − δ_{γn} |∂_iF|²)]`, the half-space form of
/// `trace_g ∇dF` after contracting the Christoffel symbols.
pub fn tension_from_jet(p: &Point, jet: &JetData) -> Vector {
    let n = p.dim();
    let s = p.height();
    let big_s = jet.value.height();
    let a = &jet.jacobian;
    let mut tau = Vector::zeros(n);
    for g in 0..n {
        let mut lap = 0.0;
        let mut quad = 0.0;
        for i in 0..n {
            lap += jet.hessian[g][(i, i)];
            quad += 2.0 * a[(g, i)] * a[(n - 1, i)];
            if g == n - 1 {
                let col_sq: f64 = (0..n).map(|k| a[(k, i)] * a[(k, i)]).sum();
                quad -= col_sq;
            }
        }
        let drift = (n as f64 - 2.0) / s * a[(g, n - 1)];
        tau[g] = s * s * (lap - drift - quad / big_s);
    }
    tau
}

pub fn report_from_jet(p: &Point, jet: &JetData) -> LocalReport {
    let tension = tension_from_jet(p, jet);
    LocalReport {
        energy: energy_from_jet(p, jet),
        tension_norm: tension.norm() / jet.value.height(),
        tension,
        distortion: jet.jacobian.condition_ratio(),
    }
}

pub fn local_report<M: HyperMap + ?Sized>(f: &M, p: &Point) -> Result<LocalReport, MapError> {
    Ok(report_from_jet(p, &default_jet(f, p)?))
}

pub fn energy_density<M: HyperMap + ?Sized>(f: &M, p: &Point) -> Result<f64, MapError> {
    Ok(energy_from_jet(p, &default_jet(f, p)?))
}

/// Tension field (Euclidean components at `F(p)`) and its hyperbolic norm.
pub fn tension_field<M: HyperMap + ?Sized>(f: &M, p: &Point) -> Result<(Vector, f64), MapError> {
    let r = local_report(f, p)?;
    Ok((r.tension, r.tension_norm))
}

/// Ratio of extreme singular values of the differential; `∞` if singular.
pub fn map_distortion<M: HyperMap + ?Sized>(f: &M, p: &Point) -> Result<f64, MapError> {
    Ok(default_jet(f, p)?.jacobian.condition_ratio())
}

/// The three predicates of the good set `𝐞 > 1`, `𝐊 < 2K`, `|τ| < ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoodSetMembership {
    pub energy_above_one: bool,
    pub distortion_below: bool,
    pub tension_below: bool,
}

impl GoodSetMembership {
    pub fn all(&self) -> bool {
        self.energy_above_one && self.distortion_below && self.tension_below
    }
}

/// Evaluates the good-set predicates for a map whose boundary map has
/// distortion bound `k`.
pub fn good_set_membership<M: HyperMap + ?Sized>(
    f: &M,
    k: f64,
    eps: f64,
    p: &Point,
) -> Result<GoodSetMembership, MapError> {
    let r = local_report(f, p)?;
    Ok(GoodSetMembership {
        energy_above_one: r.energy > 1.0,
        distortion_below: r.distortion < 2.0 * k,
        tension_below: r.tension_norm < eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity() -> ClosedForm<impl Fn(&Point) -> Result<Point, MapError> + Send + Sync> {
        ClosedForm::new(3, |p: &Point| Ok(*p))
    }

    #[test]
    fn identity_jet_and_invariants() {
        let p = Point::new(&[0.3, -0.2], 0.7).unwrap();
        let jet = default_jet(&identity(), &p).unwrap();
        assert!(jet.jacobian.max_abs_diff(&Matrix::identity(3)) < 1e-9);
        for h in &jet.hessian {
            assert!(h.max_abs_diff(&Matrix::zeros(3, 3)) < 1e-3);
        }
        let r = report_from_jet(&p, &jet);
        assert!((r.energy - 1.5).abs() < 1e-9);
        assert!(r.tension_norm < 1e-6);
        assert!((r.distortion - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vertical_doubling() {
        let f = ClosedForm::new(3, |p: &Point| Ok(Point::new(&[p[0], p[1]], 2.0 * p.height())?));
        let p = Point::new(&[0.0, 0.0], 1.0).unwrap();
        let jet = default_jet(&f, &p).unwrap();
        assert!(jet.jacobian.max_abs_diff(&Matrix::diagonal(&[1.0, 1.0, 2.0])) < 1e-9);
        assert!((jet.jacobian.condition_ratio() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn step_shrinks_near_boundary() {
        let p = Point::new(&[0.0, 0.0], 1e-3).unwrap();
        let jet = jet(&identity(), &p, 1e-3).unwrap();
        assert!(jet.step < 0.5e-3);
    }
}
