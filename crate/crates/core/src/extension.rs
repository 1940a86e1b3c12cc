//! The Gaussian-average extension `𝒢_a(f)` of a boundary map fixing `a`.
//!
//! For `a = ∞` and `p = (x, s)`,
//!
//! ```text
//! 𝒢_∞(f)(x, s) = ( ∫ f(x + s y) φ(y) dy ,  s · √( ∫ 𝐞(f)(x + s y) φ(y) dy / (n − 1) ) )
//! ```
//!
//! with `φ` the standard Gaussian on `R^{n-1}` and `𝐞(f) = |Df|²`. Other
//! anchors are handled by conjugating with a Möbius isometry `M` sending `a`
//! to `∞`: `𝒢_a(f) = M⁻¹ ∘ 𝒢_∞(M f M⁻¹) ∘ M`.

use crate::boundary::{check_fixes, BoundaryError, BoundaryMap};
use crate::geometry::{canonical_to_infinity, distance, BoundaryPoint, GeometryError, Isometry, Point};
use crate::linalg::{Matrix, Vector};
use crate::par::map_indices;
use crate::prelude::*;
use crate::tension::{local_report, HyperMap, MapError};

pub use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("isometries do not carry the anchor to a common point")]
    AnchorMismatch,
    #[error("quadrature rule has dimension {rule}, boundary has dimension {boundary}")]
    RuleDimension { rule: usize, boundary: usize },
}

/// `𝒢_a(f)` for a boundary map `f` fixing `a`.
#[derive(Debug, Clone)]
pub struct GoodExtension {
    map: Arc<dyn BoundaryMap>,
    anchor: BoundaryPoint,
    rule: Arc<QuadratureRule>,
    /// `(M, M⁻¹)` for a finite anchor.
    chart: Option<(Isometry, Isometry)>,
}

impl GoodExtension {
    pub fn new(
        map: Arc<dyn BoundaryMap>,
        anchor: BoundaryPoint,
        rule: Arc<QuadratureRule>,
    ) -> Result<Self, ExtensionError> {
        let d = map.boundary_dim();
        if rule.dim() != d {
            return Err(ExtensionError::RuleDimension { rule: rule.dim(), boundary: d });
        }
        check_fixes(map.as_ref(), &anchor)?;
        let chart = match anchor {
            BoundaryPoint::Infinity => None,
            BoundaryPoint::Finite(_) => {
                let m = canonical_to_infinity(d + 1, &anchor)?;
                let inv = m.inverse();
                Some((m, inv))
            }
        };
        Ok(GoodExtension { map, anchor, rule, chart })
    }

    /// `𝒢_a(f)` anchored at the map's declared fixed point with the default
    /// rule.
    pub fn anchored<F: BoundaryMap + 'static>(f: F) -> Result<Self, ExtensionError> {
        let d = f.boundary_dim();
        let anchor = f.fixed_point();
        let rule = Arc::new(QuadratureRule::gaussian(d, QuadratureRule::DEFAULT_ORDER));
        GoodExtension::new(Arc::new(f), anchor, rule)
    }

    /// Same as [`GoodExtension::new`] with an explicit identification `M`
    /// sending the anchor to `∞`, instead of the canonical one.
    pub fn with_identification(
        map: Arc<dyn BoundaryMap>,
        anchor: BoundaryPoint,
        rule: Arc<QuadratureRule>,
        identification: Isometry,
    ) -> Result<Self, ExtensionError> {
        let mut ext = GoodExtension::new(map, anchor, rule)?;
        if !identification.apply_boundary(&anchor).is_infinity() {
            return Err(ExtensionError::AnchorMismatch);
        }
        let inv = identification.inverse();
        ext.chart = Some((identification, inv));
        Ok(ext)
    }

    pub fn anchor(&self) -> &BoundaryPoint {
        &self.anchor
    }

    pub fn boundary_map(&self) -> &Arc<dyn BoundaryMap> {
        &self.map
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// The conjugated map `g = M f M⁻¹` at a finite point.
    fn chart_eval(&self, y: &Vector) -> Result<Vector, MapError> {
        match &self.chart {
            None => Ok(self.map.eval(y)?),
            Some((m, m_inv)) => {
                let z = m_inv.apply_boundary(&BoundaryPoint::Finite(*y));
                match m.apply_boundary(&self.map.map_point(&z)) {
                    BoundaryPoint::Finite(v) if v.is_finite() => Ok(v),
                    BoundaryPoint::Finite(_) => Err(MapError::NonFinite),
                    BoundaryPoint::Infinity => Err(BoundaryError::Pole.into()),
                }
            }
        }
    }

    fn chart_jacobian_once(&self, y: &Vector) -> Option<Matrix> {
        let jac = match &self.chart {
            None => self.map.jacobian(y).ok()?,
            Some((m, m_inv)) => {
                let j_in = m_inv.boundary_jacobian(y)?;
                let BoundaryPoint::Finite(z) = m_inv.apply_boundary(&BoundaryPoint::Finite(*y)) else {
                    return None;
                };
                let j_f = self.map.jacobian(&z).ok()?;
                let fz = self.map.eval(&z).ok()?;
                let j_out = m.boundary_jacobian(&fz)?;
                j_out.mul_mat(&j_f).mul_mat(&j_in)
            }
        };
        jac.is_finite().then_some(jac)
    }

    /// `|Dg(y)|²`; at the isolated points where the Jacobian is undefined the
    /// node is nudged by `1e-8` along the first axis.
    fn chart_energy(&self, y: &Vector) -> Result<f64, MapError> {
        if let Some(j) = self.chart_jacobian_once(y) {
            return Ok(j.frobenius_sq());
        }
        let mut nudged = *y;
        nudged[0] += 1e-8 * y.norm().max(1.0);
        self.chart_jacobian_once(&nudged).map(|j| j.frobenius_sq()).ok_or(MapError::NonFinite)
    }

    /// `Σ w (g(x_q + s_q y) − g(x_b + s_b y))` and the energy average at `q`,
    /// for the chart-free case.
    fn relative_at_infinity(&self, q: &Point, base: &Point) -> Result<(Vector, f64), MapError> {
        let d = q.dim() - 1;
        let xb = base.horizontal();
        let sb = base.height();
        let dx = q.horizontal() - xb;
        let ds = q.height() - sb;
        let mut horizontal = Vector::zeros(d);
        let mut energy = 0.0;
        for (y, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let a = xb + *y * sb;
            let offset = dx + *y * ds;
            horizontal += self.map.eval_offset(&a, &offset)? * *w;
            energy += w * self.chart_energy(&(a + offset))?;
        }
        Ok((horizontal, energy))
    }

    /// `𝒢_∞(g)` in the chart where the anchor is at `∞`.
    fn eval_at_infinity(&self, q: &Point) -> Result<Point, MapError> {
        let n = q.dim();
        let d = n - 1;
        let x = q.horizontal();
        let s = q.height();
        let mut horizontal = Vector::zeros(d);
        let mut energy = 0.0;
        for (y, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let z = x + *y * s;
            horizontal += self.chart_eval(&z)? * *w;
            energy += w * self.chart_energy(&z)?;
        }
        let height = s * (energy / d as f64).sqrt();
        if !horizontal.is_finite() || !(height > 0.0 && height.is_finite()) {
            return Err(MapError::NonFinite);
        }
        Ok(Point::from_coords(horizontal.push(height))?)
    }

    pub fn evaluate(&self, p: &Point) -> Result<Point, MapError> {
        match &self.chart {
            None => self.eval_at_infinity(p),
            Some((m, m_inv)) => Ok(m_inv.apply(&self.eval_at_infinity(&m.apply(p))?)),
        }
    }

    /// Evaluates at many points, in parallel when enabled.
    pub fn evaluate_many(&self, points: &[Point]) -> Vec<Result<Point, MapError>> {
        map_indices(points.len(), |i| self.evaluate(&points[i]))
    }
}

impl HyperMap for GoodExtension {
    fn dim(&self) -> usize {
        self.map.boundary_dim() + 1
    }

    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        self.evaluate(p)
    }

    fn eval_relative(&self, q: &Point, base: &Point, base_image: &Point) -> Result<Vector, MapError> {
        if self.chart.is_some() {
            return Ok(*self.evaluate(q)?.coords() - *base_image.coords());
        }
        let (horizontal, energy) = self.relative_at_infinity(q, base)?;
        let d = q.dim() - 1;
        let height = q.height() * (energy / d as f64).sqrt();
        let out = horizontal.push(height - base_image.height());
        if out.is_finite() {
            Ok(out)
        } else {
            Err(MapError::NonFinite)
        }
    }
}

/// Maximum over `samples` of `d(I∘𝒢_b(f)∘J⁻¹(p), 𝒢_a(I∘f∘J⁻¹)(p))`, where
/// `b` is the anchor of `lhs` and `rhs` is the extension of the conjugated
/// map anchored at `a = I(b) = J(b)`.
pub fn check_partial_conformal_naturality(
    lhs: &GoodExtension,
    outer: &Isometry,
    inner: &Isometry,
    rhs: &GoodExtension,
    samples: &[Point],
) -> Result<f64, ExtensionError> {
    let b = lhs.anchor();
    let a_outer = outer.apply_boundary(b);
    let a_inner = inner.apply_boundary(b);
    if !same_point(&a_outer, &a_inner) || !same_point(&a_outer, rhs.anchor()) {
        return Err(ExtensionError::AnchorMismatch);
    }
    let inner_inv = inner.inverse();
    let deviations = map_indices(samples.len(), |i| -> Result<f64, MapError> {
        let p = &samples[i];
        let left = outer.apply(&lhs.evaluate(&inner_inv.apply(p))?);
        let right = rhs.evaluate(p)?;
        Ok(distance(&left, &right))
    });
    let mut worst = 0.0f64;
    for d in deviations {
        worst = worst.max(d?);
    }
    Ok(worst)
}

fn same_point(a: &BoundaryPoint, b: &BoundaryPoint) -> bool {
    match (a, b) {
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
        (BoundaryPoint::Finite(x), BoundaryPoint::Finite(y)) => (*x - *y).norm() <= 1e-9 * (1.0 + x.norm()),
        _ => false,
    }
}

/// Empirical quasi-isometry constants on sampled pairs.
///
/// `L` is the largest ratio `max(d'/d, d/d')` over pairs with `d ≥ 1`, where
/// `d'` is the image distance; `A` is then the least additive slack making
/// `d'/L − A ≤ d ≤ L d' + A` hold on every pair.
pub fn quasi_isometry_constants<M: HyperMap + ?Sized>(
    f: &M,
    pairs: &[(Point, Point)],
) -> Result<(f64, f64), MapError> {
    let dists = map_indices(pairs.len(), |i| -> Result<(f64, f64), MapError> {
        let (p, q) = &pairs[i];
        Ok((distance(p, q), distance(&f.eval(p)?, &f.eval(q)?)))
    });
    let dists: Vec<(f64, f64)> = dists.into_iter().collect::<Result<_, _>>()?;
    let mut l = 1.0f64;
    for &(d, di) in &dists {
        if d >= 1.0 && di > 0.0 {
            l = l.max(di / d).max(d / di);
        }
    }
    let mut a = 0.0f64;
    for &(d, di) in &dists {
        a = a.max(di / l - d).max(d - l * di);
    }
    Ok((l, a))
}

/// `max |τ(F)|` over the sample points.
pub fn tension_sup_estimate<M: HyperMap + ?Sized>(f: &M, samples: &[Point]) -> Result<f64, MapError> {
    let values = map_indices(samples.len(), |i| local_report(f, &samples[i]).map(|r| r.tension_norm));
    let mut sup = 0.0f64;
    for v in values {
        sup = sup.max(v?);
    }
    Ok(sup)
}
