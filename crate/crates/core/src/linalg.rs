//! Fixed-capacity vectors and matrices.
//!
//! Every object in the crate lives in dimension `n ≤ MAX_DIM`, so vectors and
//! matrices are stored inline and are `Copy`. Only the singular value
//! decomposition goes through `nalgebra`.

use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::prelude::*;

/// Largest supported dimension of `H^n`.
pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    len: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "dimension {len} exceeds MAX_DIM");
        Vector { len, data: [0.0; MAX_DIM] }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Vector::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        let mut v = Vector::zeros(len);
        for i in 0..len {
            v.data[i] = f(i);
        }
        v
    }

    /// The `i`-th standard basis vector.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Vector::zeros(len);
        v.data[i] = 1.0;
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data[..self.len]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len, other.len);
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Vector) -> f64 {
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Appends a component, growing the length by one.
    pub fn push(mut self, value: f64) -> Self {
        assert!(self.len < MAX_DIM);
        self.data[self.len] = value;
        self.len += 1;
        self
    }

    /// The vector with its last component removed.
    pub fn truncated(&self) -> Self {
        Vector::from_slice(&self.as_slice()[..self.len - 1])
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Vector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(mut self, rhs: Vector) -> Vector {
        self += rhs;
        self
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] += rhs.data[i];
        }
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(mut self, rhs: Vector) -> Vector {
        self -= rhs;
        self
    }
}

impl SubAssign for Vector {
    fn sub_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] -= rhs.data[i];
        }
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(mut self, rhs: f64) -> Vector {
        for i in 0..self.len {
            self.data[i] *= rhs;
        }
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self * -1.0
    }
}

/// Row-major square or rectangular matrix with inline storage.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: [[f64; MAX_DIM]; MAX_DIM],
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows <= MAX_DIM && cols <= MAX_DIM);
        Matrix { rows, cols, data: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m.data[i][i] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i][j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector::from_fn(self.rows, |i| self.data[i][j])
    }

    pub fn row(&self, i: usize) -> Vector {
        Vector::from_slice(&self.data[i][..self.cols])
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.data[j][i])
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.cols, v.len());
        Vector::from_fn(self.rows, |i| (0..self.cols).map(|j| self.data[i][j] * v[j]).sum())
    }

    pub fn mul_mat(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.data[i][k] * other.data[k][j]).sum()
        })
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.data[i][j] * factor)
    }

    pub fn frobenius_sq(&self) -> f64 {
        (0..self.rows).map(|i| self.data[i][..self.cols].iter().map(|x| x * x).sum::<f64>()).sum()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self.data[i][j] - other.data[i][j]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        (0..self.rows).all(|i| self.data[i][..self.cols].iter().all(|x| x.is_finite()))
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data;
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap_or(col);
            if a[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..n {
                let factor = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
        det
    }

    /// `max |MᵀM − I|` entrywise.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.transpose().mul_mat(self);
        gram.max_abs_diff(&Matrix::identity(self.cols))
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let m = nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.data[i][j]);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Ratio of the largest to the smallest singular value; `∞` when singular.
    pub fn condition_ratio(&self) -> f64 {
        let sv = self.singular_values();
        let (max, min) = (sv[0], sv[sv.len() - 1]);
        if !(min > max * 1e-14) {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i][j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            list.entry(&&self.data[i][..self.cols]);
        }
        list.finish()
    }
}

/// Rotation in `SO(d)` carrying the unit vector `from` onto the unit vector `to`,
/// acting as the identity on the orthogonal complement of their span.
///
/// Returns `None` when `from = −to` and `d = 1`, where no rotation exists.
pub fn rotation_between(from: &Vector, to: &Vector) -> Option<Matrix> {
    let d = from.len();
    let c = from.dot(to).clamp(-1.0, 1.0);
    if c > 1.0 - 1e-15 {
        return Some(Matrix::identity(d));
    }
    // Orthonormal pair (from, w) spanning the rotation plane.
    let mut w = *to - *from * c;
    if w.norm() < 1e-12 {
        if d == 1 {
            return None;
        }
        // Antipodal: rotate by π in a plane containing `from`.
        let k = (0..d).min_by(|&a, &b| from[a].abs().total_cmp(&from[b].abs())).unwrap_or(0);
        let e = Vector::unit(d, k);
        w = e - *from * from.dot(&e);
    }
    let w = w * (1.0 / w.norm());
    let s = (1.0 - c * c).max(0.0).sqrt();
    let s = if from.dot(to) < -1.0 + 1e-15 { 0.0 } else { s };
    // R = I + (c − 1)(uuᵀ + wwᵀ) + s(wuᵀ − uwᵀ)
    Some(Matrix::from_fn(d, d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + (c - 1.0) * (from[i] * from[j] + w[i] * w[j]) + s * (w[i] * from[j] - from[i] * w[j])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_permuted_diagonal() {
        let m = Matrix::from_rows(&[&[0.0, 2.0, 0.0], &[3.0, 0.0, 0.0], &[0.0, 0.0, 5.0]]);
        assert!((m.determinant() + 30.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = Matrix::diagonal(&[1.0, -3.0, 2.0]);
        let sv = m.singular_values();
        assert!((sv[0] - 3.0).abs() < 1e-12 && (sv[2] - 1.0).abs() < 1e-12);
        assert!((m.condition_ratio() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_between_maps_and_is_special_orthogonal() {
        let a = Vector::from_slice(&[0.6, 0.8, 0.0]);
        let b = Vector::from_slice(&[0.0, 0.0, 1.0]);
        let r = rotation_between(&a, &b).unwrap();
        assert!(r.mul_vec(&a).max_abs_diff(&b) < 1e-14);
        assert!(r.orthogonality_defect() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);

        let anti = rotation_between(&a, &(-a)).unwrap();
        assert!(anti.mul_vec(&a).max_abs_diff(&(-a)) < 1e-14);
        assert!((anti.determinant() - 1.0).abs() < 1e-14);
        assert!(rotation_between(&Vector::from_slice(&[1.0]), &Vector::from_slice(&[-1.0])).is_none());
    }
}
