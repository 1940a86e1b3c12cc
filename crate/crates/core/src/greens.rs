//! Green's function of the hyperbolic ball, its volume integral, and the
//! Laplacian inequality for the distance between two maps.
//!
//! In the ball model the Green's function of `−Δ` on the Euclidean ball of
//! radius `r` is the radial function
//! `g_r(ρ) = (1/n) ∫_ρ^r (1 − s²)^{n−2} / s^{n−1} ds` for `ρ ≤ r`, zero
//! beyond.

use crate::calibration;
use crate::geometry::{distance, Point};
use crate::linalg::Vector;
use crate::prelude::*;
use crate::quadrature::integrate;
use crate::tension::{local_report, HyperMap, MapError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreensError {
    #[error("Green's function is infinite at the center")]
    AtCenter,
    #[error("radius must lie in (0, 1], got {0}")]
    BadRadius(f64),
    #[error("argument must lie in (0, 1], got {0}")]
    BadArgument(f64),
    #[error("q must be positive, got {0}")]
    NonPositiveQ(f64),
    #[error("distortion bound must be at least 1, got {0}")]
    BadDistortion(f64),
}

fn integrand(n: usize, s: f64) -> f64 {
    (1.0 - s * s).powi(n as i32 - 2) / s.powi(n as i32 - 1)
}

/// `g_r(ρ)`: closed form for `n = 3`, adaptive quadrature otherwise.
pub fn green(n: usize, r: f64, rho: f64) -> Result<f64, GreensError> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(GreensError::BadRadius(r));
    }
    if rho == 0.0 {
        return Err(GreensError::AtCenter);
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(GreensError::BadArgument(rho));
    }
    if rho >= r {
        return Ok(0.0);
    }
    if n == 3 {
        return Ok((r - rho) * (1.0 - r * rho) / (3.0 * r * rho));
    }
    Ok(green_by_quadrature(n, r, rho))
}

/// `g_r(ρ)` by adaptive quadrature in any dimension.
pub fn green_by_quadrature(n: usize, r: f64, rho: f64) -> f64 {
    if rho >= r {
        return 0.0;
    }
    integrate(|s| integrand(n, s), rho, r, 0.0, 1e-14).value / n as f64
}

/// Both sides of `g_r(ρ) ≥ C_g (1 − ρ²)^{n−1} / ρ^{n−2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl LowerBoundCheck {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

pub fn green_lower_bound_check(n: usize, r: f64, rho: f64) -> Result<LowerBoundCheck, GreensError> {
    let lhs = green(n, r, rho)?;
    let rhs = calibration::C_GREEN * (1.0 - rho * rho).powi(n as i32 - 1) / rho.powi(n as i32 - 2);
    Ok(LowerBoundCheck { lhs, rhs })
}

/// `inf g_r(ρ) ρ^{n−2} / (1 − ρ²)^{n−1}` over a uniform sweep of `(0, r)`.
pub fn calibrate_green_constant(n: usize, r: f64, samples: usize) -> f64 {
    (1..samples)
        .map(|k| {
            let rho = r * k as f64 / samples as f64;
            let g = green(n, r, rho).unwrap();
            g * rho.powi(n as i32 - 2) / (1.0 - rho * rho).powi(n as i32 - 1)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `∫_{rB} g_r dλ = ∫₀^r n ρ^{n−1} g_r(ρ) / (1 − ρ²)^n dρ` with the unit
/// sphere measure normalised to one.
pub fn green_volume_integral(n: usize, r: f64) -> Result<f64, GreensError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(GreensError::BadRadius(r));
    }
    let nf = n as f64;
    let f = |rho: f64| {
        if rho <= 0.0 {
            return 0.0;
        }
        nf * rho.powi(n as i32 - 1) * green(n, r, rho).unwrap() / (1.0 - rho * rho).powi(n as i32)
    };
    // Geometric breakpoints towards r, where (1 − ρ²)^{-n} varies fastest.
    let mut cuts = vec![0.0];
    let mut gap = r;
    while gap > 1e-9 * r {
        gap *= 0.25;
        cuts.push(r - gap);
    }
    cuts.push(r);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(f, w[0], w[1], 0.0, 1e-12).value;
    }
    Ok(total)
}

/// `ε₀(K) = q(2K) tanh(1/4) / 8` for a caller-supplied `q(2K)`.
pub fn epsilon0(k: f64, q_of_2k: f64) -> Result<f64, GreensError> {
    if !(k >= 1.0) {
        return Err(GreensError::BadDistortion(k));
    }
    if !(q_of_2k > 0.0) {
        return Err(GreensError::NonPositiveQ(q_of_2k));
    }
    Ok(q_of_2k * 0.25f64.tanh() / 8.0)
}

/// Cayley-type isometry from the half-space to the unit ball,
/// `p ↦ 2(p + e_n)/|p + e_n|² − e_n`, sending `(0, …, 0, 1)` to the origin.
/// The same formula is its own inverse.
pub fn to_ball(p: &Point) -> Vector {
    cayley(p.coords())
}

/// Inverse of [`to_ball`] for `|w| < 1`.
pub fn from_ball(w: &Vector) -> Result<Point, MapError> {
    Ok(Point::from_coords(cayley(w))?)
}

fn cayley(v: &Vector) -> Vector {
    let n = v.len();
    let mut q = *v;
    q[n - 1] += 1.0;
    let mut out = q * (2.0 / q.norm_sq());
    out[n - 1] -= 1.0;
    out
}

/// Outcome of the distance-Laplacian inequality at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceLaplacian {
    pub distance: f64,
    /// Laplace–Beltrami of `p ↦ d(F(p), G(p))²`.
    pub laplacian: f64,
    /// `−2 d (|τ(F)| + |τ(G)|)`.
    pub bound: f64,
    pub tolerance: f64,
    /// The distance was too small for the stencil; nothing was checked.
    pub skipped: bool,
}

impl DistanceLaplacian {
    pub fn holds(&self) -> bool {
        self.skipped || self.laplacian >= self.bound - self.tolerance
    }
}

/// Checks `Δ d² ≥ −2 d (|τ(F)| + |τ(G)|)` at `p`. The Laplace–Beltrami
/// operator of the half-space is `s² Δ_E − (n − 2) s ∂_s`.
pub fn distance_laplacian_check<F: HyperMap + ?Sized, G: HyperMap + ?Sized>(
    f: &F,
    g: &G,
    p: &Point,
) -> Result<DistanceLaplacian, MapError> {
    let n = p.dim();
    let s = p.height();
    let d2 = |q: &Point| -> Result<f64, MapError> {
        let d = distance(&f.eval(q)?, &g.eval(q)?);
        Ok(d * d)
    };
    let centre = d2(p)?;
    let dist = centre.sqrt();
    if dist < 1e-6 {
        return Ok(DistanceLaplacian {
            distance: dist,
            laplacian: 0.0,
            bound: 0.0,
            tolerance: 0.0,
            skipped: true,
        });
    }
    let h = 1e-3 * s;
    let mut lap = 0.0;
    let mut ds = 0.0;
    for i in 0..n {
        let mut plus = *p.coords();
        plus[i] += h;
        let mut minus = *p.coords();
        minus[i] -= h;
        let up = d2(&Point::from_coords(plus)?)?;
        let down = d2(&Point::from_coords(minus)?)?;
        lap += (up - 2.0 * centre + down) / (h * h);
        if i == n - 1 {
            ds = (up - down) / (2.0 * h);
        }
    }
    let laplacian = s * s * lap - (n as f64 - 2.0) * s * ds;
    let tau_f = local_report(f, p)?.tension_norm;
    let tau_g = local_report(g, p)?.tension_norm;
    Ok(DistanceLaplacian {
        distance: dist,
        laplacian,
        bound: -2.0 * dist * (tau_f + tau_g),
        tolerance: 1e-4 * (1.0 + centre),
        skipped: false,
    })
}
