//! Gaussian quadrature rules and adaptive Gauss–Kronrod integration.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::linalg::Vector;
use crate::prelude::*;

/// Nodes and weights of the Gauss rule for a weight given by its monic
/// three-term recurrence `p_{k+1} = x p_k − β_k p_{k−1}` (zero diagonal) and
/// total mass `mu0`.
///
/// Golub–Welsch supplies starting nodes; each is polished by Newton steps on
/// the orthonormal recurrence and the weight is `1 / Σ q_k(x)²`.
fn symmetric_gauss(order: usize, beta: impl Fn(usize) -> f64, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let jacobi =
        DMatrix::from_fn(
            order,
            order,
            |i, j| {
                if i + 1 == j || j + 1 == i {
                    beta(i.max(j)).sqrt()
                } else {
                    0.0
                }
            },
        );
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Orthonormal values q_0..q_{order} and derivative of q_order.
    let eval = |x: f64| -> (f64, f64, f64) {
        let mut q_prev = 0.0;
        let mut q = 1.0 / mu0.sqrt();
        let mut dq_prev = 0.0;
        let mut dq = 0.0;
        let mut sum_sq = q * q;
        for k in 0..order {
            let b_next = beta(k + 1).sqrt();
            let b_k = if k == 0 { 0.0 } else { beta(k).sqrt() };
            let q_next = (x * q - b_k * q_prev) / b_next;
            let dq_next = (q + x * dq - b_k * dq_prev) / b_next;
            q_prev = q;
            q = q_next;
            dq_prev = dq;
            dq = dq_next;
            if k + 1 < order {
                sum_sq += q * q;
            }
        }
        (q, dq, sum_sq)
    };

    let mut weights = Vec::with_capacity(order);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (q, dq, _) = eval(*x);
            if dq != 0.0 {
                *x -= q / dq;
            }
        }
        weights.push(1.0 / eval(*x).2);
    }
    // Exact symmetry of the weight function.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

/// One-dimensional Gauss–Hermite rule for the standard normal density
/// `e^{−y²/2}/√(2π)`; weights sum to one.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    symmetric_gauss(order, |k| k as f64, 1.0)
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    symmetric_gauss(
        order,
        |k| {
            let k = k as f64;
            k * k / (4.0 * k * k - 1.0)
        },
        2.0,
    )
}

/// Tensor-product Gauss–Hermite rule for the Gaussian density
/// `φ(y) = (2π)^{-d/2} e^{−|y|²/2}` on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    order: usize,
    nodes: Vec<Vector>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub const DEFAULT_ORDER: usize = 21;

    pub fn gaussian(dim: usize, order: usize) -> Self {
        let (x, w) = gauss_hermite(order);
        let total = order.pow(dim as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut node = Vector::zeros(dim);
            let mut weight = 1.0;
            for axis in 0..dim {
                let k = rem % order;
                rem /= order;
                node[axis] = x[k];
                weight *= w[k];
            }
            nodes.push(node);
            weights.push(weight);
        }
        QuadratureRule { dim, order, nodes, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, mut f: impl FnMut(&Vector) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(y, w)| w * f(y)).sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Globally adaptive 7/15-point Gauss–Kronrod integration of `f` over
/// `[a, b]`, bisecting the interval with the largest error estimate until the
/// total estimate is below `max(abs_tol, rel_tol·|value|)`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = kronrod15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target || pieces.len() >= MAX_INTERVALS || !value.is_finite() {
            return Integral {
                value,
                error_estimate: error,
                converged: error <= target && value.is_finite(),
            };
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Integral { value, error_estimate: error, converged: false };
        }
        let (v1, e1) = kronrod15(&mut f, lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(21);
        let m = |p: i32| -> f64 { x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum() };
        assert!((m(0) - 1.0).abs() < 1e-14);
        assert!(m(1).abs() < 1e-15);
        assert!((m(2) - 1.0).abs() < 1e-13);
        assert!((m(4) - 3.0).abs() < 1e-12);
        assert!((m(10) - 945.0).abs() < 1e-8);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_rule_normalised() {
        let rule = QuadratureRule::gaussian(2, 21);
        assert_eq!(rule.len(), 441);
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!(rule.integrate(|y| y[0] * y[1]).abs() < 1e-14);
        assert!((rule.integrate(|y| y[1] * y[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-9 * exact);
    }
}
