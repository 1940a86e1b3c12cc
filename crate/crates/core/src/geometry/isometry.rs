use super::{GeometryError, Point};
use crate::linalg::{rotation_between, Matrix, Vector};
use crate::prelude::*;

const ORTHOGONALITY_TOL: f64 = 1e-12;

/// A point of the boundary sphere `R^{n-1} ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Finite(Vector),
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(coords: &[f64]) -> Self {
        BoundaryPoint::Finite(Vector::from_slice(coords))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    fn approx_eq(&self, other: &BoundaryPoint) -> bool {
        match (self, other) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
                (*a - *b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
            }
            _ => false,
        }
    }
}

/// `p ↦ (a O x + b, a s)` with `a > 0`, `O ∈ SO(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryFixingInfinity {
    scale: f64,
    rotation: Matrix,
    translation: Vector,
}

impl IsometryFixingInfinity {
    pub fn new(scale: f64, rotation: Matrix, translation: Vector) -> Result<Self, GeometryError> {
        let d = translation.len();
        if rotation.rows() != d || rotation.cols() != d {
            return Err(GeometryError::DimensionMismatch { expected: d, found: rotation.rows() });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GeometryError::NonPositiveScale(scale));
        }
        if !translation.is_finite() || !rotation.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let defect = rotation.orthogonality_defect();
        if defect > ORTHOGONALITY_TOL {
            return Err(GeometryError::NotOrthogonal(defect));
        }
        let det = rotation.determinant();
        if det < 0.0 {
            return Err(GeometryError::NotSpecial(det));
        }
        Ok(IsometryFixingInfinity { scale, rotation, translation })
    }

    /// Identity of `H^n`.
    pub fn identity(n: usize) -> Self {
        IsometryFixingInfinity {
            scale: 1.0,
            rotation: Matrix::identity(n - 1),
            translation: Vector::zeros(n - 1),
        }
    }

    pub fn scaling(n: usize, scale: f64) -> Result<Self, GeometryError> {
        Self::new(scale, Matrix::identity(n - 1), Vector::zeros(n - 1))
    }

    pub fn translation_by(b: &Vector) -> Self {
        IsometryFixingInfinity { scale: 1.0, rotation: Matrix::identity(b.len()), translation: *b }
    }

    /// The map sending `(0, 1)` to `p`: `x ↦ s_p x + x_p`.
    pub fn lifting_base_to(p: &Point) -> Self {
        let d = p.dim() - 1;
        IsometryFixingInfinity {
            scale: p.height(),
            rotation: Matrix::identity(d),
            translation: p.horizontal(),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len() + 1
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> &Matrix {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector {
        &self.translation
    }

    pub fn apply(&self, p: &Point) -> Point {
        let x = self.apply_boundary(&p.horizontal());
        let coords = x.push(self.scale * p.height());
        Point::from_coords(coords).expect("isometry image is a valid point")
    }

    pub fn apply_boundary(&self, x: &Vector) -> Vector {
        self.rotation.mul_vec(x) * self.scale + self.translation
    }

    /// Differential on tangent vectors (Euclidean components).
    pub fn push_vector(&self, v: &Vector) -> Vector {
        let n = self.dim();
        let rotated = self.rotation.mul_vec(&v.truncated());
        rotated.push(v[n - 1]) * self.scale
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &IsometryFixingInfinity) -> Self {
        IsometryFixingInfinity {
            scale: self.scale * inner.scale,
            rotation: self.rotation.mul_mat(&inner.rotation),
            translation: self.rotation.mul_vec(&inner.translation) * self.scale + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        let inv_scale = 1.0 / self.scale;
        IsometryFixingInfinity {
            scale: inv_scale,
            translation: -(rt.mul_vec(&self.translation) * inv_scale),
            rotation: rt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Step {
    /// `x ↦ a Q x + b` with `Q` orthogonal (reflections allowed).
    Similarity { scale: f64, orthogonal: Matrix, translation: Vector },
    /// Inversion in the unit sphere, `p ↦ p / |p|²`.
    Inversion,
}

impl Step {
    fn apply_point(&self, p: &Vector) -> Vector {
        match self {
            Step::Similarity { scale, orthogonal, translation } => {
                let n = p.len();
                let x = orthogonal.mul_vec(&p.truncated()) * *scale + *translation;
                x.push(scale * p[n - 1])
            }
            Step::Inversion => *p * (1.0 / p.norm_sq()),
        }
    }

    fn apply_boundary(&self, x: &BoundaryPoint, d: usize) -> BoundaryPoint {
        match (self, x) {
            (Step::Similarity { .. }, BoundaryPoint::Infinity) => BoundaryPoint::Infinity,
            (Step::Similarity { scale, orthogonal, translation }, BoundaryPoint::Finite(x)) => {
                BoundaryPoint::Finite(orthogonal.mul_vec(x) * *scale + *translation)
            }
            (Step::Inversion, BoundaryPoint::Infinity) => BoundaryPoint::Finite(Vector::zeros(d)),
            (Step::Inversion, BoundaryPoint::Finite(x)) => {
                let r2 = x.norm_sq();
                if r2 == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(*x * (1.0 / r2))
                }
            }
        }
    }

    /// Jacobian of the boundary action at a finite point.
    fn boundary_jacobian(&self, x: &Vector) -> Matrix {
        match self {
            Step::Similarity { scale, orthogonal, .. } => orthogonal.scaled(*scale),
            Step::Inversion => {
                let r2 = x.norm_sq();
                let d = x.len();
                Matrix::from_fn(d, d, |i, j| {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    (delta - 2.0 * x[i] * x[j] / r2) / r2
                })
            }
        }
    }

    fn inverse(&self) -> Step {
        match self {
            Step::Similarity { scale, orthogonal, translation } => {
                let qt = orthogonal.transpose();
                let inv = 1.0 / scale;
                Step::Similarity { scale: inv, translation: -(qt.mul_vec(translation) * inv), orthogonal: qt }
            }
            Step::Inversion => Step::Inversion,
        }
    }
}

/// A general isometry of `H^n`, stored as a chain of similarities and unit
/// sphere inversions applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    dim: usize,
    steps: Vec<Step>,
}

impl Isometry {
    pub fn identity(n: usize) -> Self {
        Isometry { dim: n, steps: Vec::new() }
    }

    /// Inversion in the unit sphere centred at the origin.
    pub fn inversion(n: usize) -> Self {
        Isometry { dim: n, steps: vec![Step::Inversion] }
    }

    fn similarity(n: usize, scale: f64, orthogonal: Matrix, translation: Vector) -> Self {
        Isometry { dim: n, steps: vec![Step::Similarity { scale, orthogonal, translation }] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, p: &Point) -> Point {
        let mut v = *p.coords();
        for step in &self.steps {
            v = step.apply_point(&v);
        }
        Point::from_coords(v).expect("isometry image is a valid point")
    }

    pub fn apply_boundary(&self, x: &BoundaryPoint) -> BoundaryPoint {
        let d = self.dim - 1;
        let mut cur = *x;
        for step in &self.steps {
            cur = step.apply_boundary(&cur, d);
        }
        cur
    }

    /// Jacobian of the boundary action at `x`, or `None` if `x` or an
    /// intermediate image is `∞`.
    pub fn boundary_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let d = self.dim - 1;
        let mut cur = *x;
        let mut jac = Matrix::identity(d);
        for step in &self.steps {
            if matches!(step, Step::Inversion) && cur.norm_sq() == 0.0 {
                return None;
            }
            jac = step.boundary_jacobian(&cur).mul_mat(&jac);
            match step.apply_boundary(&BoundaryPoint::Finite(cur), d) {
                BoundaryPoint::Finite(v) => cur = v,
                BoundaryPoint::Infinity => return None,
            }
        }
        Some(jac)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Isometry) -> Isometry {
        let mut steps = inner.steps.clone();
        steps.extend(self.steps.iter().cloned());
        Isometry { dim: self.dim, steps }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { dim: self.dim, steps: self.steps.iter().rev().map(Step::inverse).collect() }
    }
}

impl From<IsometryFixingInfinity> for Isometry {
    fn from(iso: IsometryFixingInfinity) -> Self {
        let n = iso.dim();
        Isometry::similarity(n, iso.scale, iso.rotation, iso.translation)
    }
}

fn check_dim(x: &BoundaryPoint, d: usize) -> Result<(), GeometryError> {
    match x {
        BoundaryPoint::Finite(v) if v.len() != d => {
            Err(GeometryError::DimensionMismatch { expected: d, found: v.len() })
        }
        BoundaryPoint::Finite(v) if !v.is_finite() => Err(GeometryError::NonFinite),
        _ => Ok(()),
    }
}

/// The Möbius isometry sending the ordered triple `(a, b, c)` to
/// `(∞, 0, e₁)`.
pub fn normalizer(n: usize, triple: &[BoundaryPoint; 3]) -> Result<Isometry, GeometryError> {
    let d = n - 1;
    for x in triple {
        check_dim(x, d)?;
    }
    let [a, b, c] = triple;
    if a.approx_eq(b) || a.approx_eq(c) || b.approx_eq(c) {
        return Err(GeometryError::DegenerateTriple);
    }
    let mut iso = Isometry::identity(n);
    let (b, c) = match a {
        BoundaryPoint::Infinity => (*b, *c),
        BoundaryPoint::Finite(a) => {
            iso = Isometry::similarity(n, 1.0, Matrix::identity(d), -*a);
            iso = Isometry::inversion(n).compose(&iso);
            (iso.apply_boundary(b), iso.apply_boundary(c))
        }
    };
    // Both are finite now: only `a` was sent to ∞.
    let (BoundaryPoint::Finite(b), BoundaryPoint::Finite(c)) = (b, c) else {
        return Err(GeometryError::DegenerateTriple);
    };
    let offset = c - b;
    let len = offset.norm();
    if !(len > 0.0) {
        return Err(GeometryError::DegenerateTriple);
    }
    let dir = offset * (1.0 / len);
    let e1 = Vector::unit(d, 0);
    // For n = 2 the only orthogonal map taking -1 to 1 is a reflection.
    let orthogonal = rotation_between(&dir, &e1).unwrap_or_else(|| Matrix::diagonal(&[-1.0]));
    let scale = 1.0 / len;
    let translation = -(orthogonal.mul_vec(&b) * scale);
    Ok(Isometry::similarity(n, scale, orthogonal, translation).compose(&iso))
}

/// The Möbius isometry carrying the triple `from` onto the triple `to`.
pub fn general_isometry(
    n: usize,
    from: &[BoundaryPoint; 3],
    to: &[BoundaryPoint; 3],
) -> Result<Isometry, GeometryError> {
    let source = normalizer(n, from)?;
    let target = normalizer(n, to)?;
    Ok(target.inverse().compose(&source))
}

/// Point of `R^{n-1} ∪ {∞}` diametrically opposite to `x` on the boundary
/// sphere: `x ↦ -x/|x|²`, exchanging `0` and `∞`.
pub fn antipode(x: &BoundaryPoint, d: usize) -> BoundaryPoint {
    match x {
        BoundaryPoint::Infinity => BoundaryPoint::Finite(Vector::zeros(d)),
        BoundaryPoint::Finite(v) => {
            let r2 = v.norm_sq();
            if r2 == 0.0 {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::Finite(-(*v * (1.0 / r2)))
            }
        }
    }
}

/// Stereographic image on `S^{n-1} ⊂ R^n` with `∞` at the north pole `e_n`.
pub fn stereographic(x: &BoundaryPoint, d: usize) -> Vector {
    match x {
        BoundaryPoint::Infinity => Vector::unit(d + 1, d),
        BoundaryPoint::Finite(v) => {
            let r2 = v.norm_sq();
            let k = 1.0 / (1.0 + r2);
            (*v * (2.0 * k)).push((r2 - 1.0) * k)
        }
    }
}

pub fn inverse_stereographic(y: &Vector) -> BoundaryPoint {
    let n = y.len();
    let last = y[n - 1];
    let below = 1.0 - last;
    if below <= 1e-15 {
        return BoundaryPoint::Infinity;
    }
    BoundaryPoint::Finite(y.truncated() * (1.0 / below))
}

/// Möbius isometry sending `a` to `∞` and its antipode to `0`, with the third
/// reference point chosen orthogonal to `a` on the boundary sphere. For
/// `a = ∞` this is the identity.
pub fn canonical_to_infinity(n: usize, a: &BoundaryPoint) -> Result<Isometry, GeometryError> {
    let d = n - 1;
    check_dim(a, d)?;
    let sa = stereographic(a, d);
    let mut third = None;
    for k in 0..n {
        let e = Vector::unit(n, k);
        let w = e - sa * sa.dot(&e);
        let len = w.norm();
        if len > 0.5 {
            third = Some(w * (1.0 / len));
            break;
        }
    }
    let third = third.expect("some coordinate axis is far from a unit vector");
    let triple = [*a, antipode(a, d), inverse_stereographic(&third)];
    normalizer(n, &triple)
}
