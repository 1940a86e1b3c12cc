//! The radial heat kernel of `H^n` and its ballistic annulus.
//!
//! For `n = 3` the kernel is known in closed form,
//! `H(ρ, t) = (4πt)^{-3/2} (ρ / sinh ρ) e^{−t − ρ²/4t}`. For other `n` only
//! the two-sided envelope
//! `t^{-n/2} (1+ρ+t)^{(n−3)/2} (1+ρ) e^{−(n−1)²t/4 − (n−1)ρ/2 − ρ²/4t}` is
//! available, up to constants.
//!
//! Most of the mass of `H(·, t)` against the volume element
//! `ω_{n−1} sinh^{n−1} ρ dρ` sits in the annulus `|ρ − (n−1)t| ≤ l √t`.

use core::f64::consts::PI;

use crate::calibration;
use crate::prelude::*;
use crate::quadrature::integrate;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeatKernelError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("annulus estimate needs t ≥ 2l² and l ≥ 1 (t = {t}, l = {l})")]
    Hypothesis { t: f64, l: f64 },
    #[error("tolerance must lie in (0, C), got {0}")]
    BadTolerance(f64),
}

/// Area `ω_{n−1}` of the unit sphere `S^{n−1} ⊂ R^n`.
pub fn sphere_area(n: usize) -> f64 {
    // ω_0 = 2, ω_1 = 2π, ω_k = 2π ω_{k−2} / (k − 1).
    let k = n - 1;
    let mut area = if k.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut j = k % 2;
    while j < k {
        j += 2;
        area *= 2.0 * PI / (j - 1) as f64;
    }
    area
}

/// `ln sinh ρ` for `ρ > 0`, without overflow.
pub fn log_sinh(rho: f64) -> f64 {
    if rho < 1.0 {
        rho.sinh().ln()
    } else {
        rho + (-(-2.0 * rho).exp()).ln_1p() - core::f64::consts::LN_2
    }
}

/// `ρ / sinh ρ`, by series below `1e-6`.
pub fn rho_over_sinh(rho: f64) -> f64 {
    if rho < 1e-6 {
        1.0 - rho * rho / 6.0
    } else if rho < 700.0 {
        rho / rho.sinh()
    } else {
        (rho.ln() - log_sinh(rho)).exp()
    }
}

fn check_args(rho: f64, t: f64) -> Result<(), HeatKernelError> {
    if !(t > 0.0) {
        return Err(HeatKernelError::NonPositiveTime(t));
    }
    if !(rho >= 0.0) {
        return Err(HeatKernelError::NegativeRadius(rho));
    }
    Ok(())
}

/// `ln H(ρ, t)` for `n = 3`.
pub fn log_kernel3(rho: f64, t: f64) -> Result<f64, HeatKernelError> {
    check_args(rho, t)?;
    let lead = -1.5 * (4.0 * PI * t).ln();
    let ratio = if rho < 1.0 { rho_over_sinh(rho).ln() } else { rho.ln() - log_sinh(rho) };
    Ok(lead + ratio - t - rho * rho / (4.0 * t))
}

/// Value of the kernel: exact for `n = 3`, otherwise the envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Exact(f64),
    Envelope { lower: f64, upper: f64 },
}

/// `H(ρ, t)` on `H^n`.
pub fn kernel(n: usize, rho: f64, t: f64) -> Result<KernelValue, HeatKernelError> {
    if n == 3 {
        Ok(KernelValue::Exact(log_kernel3(rho, t)?.exp()))
    } else {
        let (lower, upper) = envelope(n, rho, t)?;
        Ok(KernelValue::Envelope { lower, upper })
    }
}

/// The envelope shape without constants.
pub fn envelope_shape(n: usize, rho: f64, t: f64) -> Result<f64, HeatKernelError> {
    check_args(rho, t)?;
    let m = (n - 1) as f64;
    let log = -0.5 * n as f64 * t.ln() + 0.5 * (n as f64 - 3.0) * (1.0 + rho + t).ln() + rho.ln_1p()
        - m * m * t / 4.0
        - m * rho / 2.0
        - rho * rho / (4.0 * t);
    Ok(log.exp())
}

/// Lower and upper envelope. For `n = 3` the constants are calibrated
/// against the closed form; for other `n` unit constants are used.
pub fn envelope(n: usize, rho: f64, t: f64) -> Result<(f64, f64), HeatKernelError> {
    let shape = envelope_shape(n, rho, t)?;
    if n == 3 {
        Ok((calibration::ENVELOPE_LOWER_3 * shape, calibration::ENVELOPE_UPPER_3 * shape))
    } else {
        Ok((shape, shape))
    }
}

/// Radial mass density `ω_2 H(ρ, t) sinh² ρ` (`n = 3`).
pub fn mass_density(rho: f64, t: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let log = log_kernel3(rho, t).expect("valid arguments") + 2.0 * log_sinh(rho);
    sphere_area(3) * log.exp()
}

/// End of the radial quadrature range.
fn radial_cutoff(t: f64) -> f64 {
    2.0 * t + 12.0 * t.sqrt() + 20.0
}

/// Bound on the mass beyond `r > 2t`, from
/// `ω H sinh² ≤ (4πt)^{-1/2} (ρ/2t) e^{−(ρ−2t)²/4t}` and
/// `erfc u ≤ e^{−u²}/(u√π)`.
fn tail_beyond(r: f64, t: f64) -> f64 {
    let u = (r - 2.0 * t) / (2.0 * t.sqrt());
    if u <= 0.0 {
        return f64::INFINITY;
    }
    (4.0 * PI * t).powf(-0.5) * (-u * u).exp() * (t.sqrt() / u + 1.0)
}

fn integrate_density(a: f64, b: f64, t: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // Split at the peak so the adaptive rule sees a smooth bump on each side.
    let peak = 2.0 * t;
    let mut total = 0.0;
    let mut lo = a;
    for hi in [peak, b] {
        let hi = hi.min(b);
        if hi > lo {
            total += integrate(|r| mass_density(r, t), lo, hi, 1e-14, 1e-12).value;
            lo = hi;
        }
    }
    total
}

/// Total mass `∫₀^∞ ω_2 H sinh² dρ` (`n = 3`).
pub fn total_mass(t: f64) -> Result<f64, HeatKernelError> {
    check_args(0.0, t)?;
    let cut = radial_cutoff(t);
    Ok(integrate_density(0.0, cut, t) + tail_beyond(cut, t))
}

/// Radii of the annulus `|ρ − (n−1)t| ≤ l√t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    pub n: usize,
    pub t: f64,
    pub eps: f64,
    pub l: f64,
    pub r_in: f64,
    pub r_out: f64,
}

impl AnnulusSpec {
    pub fn with_width(n: usize, t: f64, l: f64) -> Self {
        let centre = (n - 1) as f64 * t;
        let half = l * t.sqrt();
        AnnulusSpec { n, t, eps: f64::NAN, l, r_in: centre - half, r_out: centre + half }
    }

    /// The annulus of width `l(ε) = √(8 log(C/ε))`.
    pub fn for_tolerance(n: usize, t: f64, eps: f64, c: f64) -> Result<Self, HeatKernelError> {
        let l = width_for(eps, c)?;
        Ok(AnnulusSpec { eps, ..AnnulusSpec::with_width(n, t, l) })
    }
}

/// `l(ε) = √(8 log(C/ε))`.
pub fn width_for(eps: f64, c: f64) -> Result<f64, HeatKernelError> {
    if !(eps > 0.0 && eps < c) {
        return Err(HeatKernelError::BadTolerance(eps));
    }
    Ok((8.0 * (c / eps).ln()).sqrt())
}

/// Mass of `H(·, t)` outside `|ρ − 2t| ≤ l√t` (`n = 3`).
pub fn annulus_tail_mass(t: f64, l: f64) -> Result<f64, HeatKernelError> {
    check_args(0.0, t)?;
    let spec = AnnulusSpec::with_width(3, t, l);
    let cut = radial_cutoff(t).max(spec.r_out);
    let inner = integrate_density(0.0, spec.r_in.max(0.0), t);
    let outer = integrate_density(spec.r_out.max(0.0), cut, t) + tail_beyond(cut, t);
    Ok(inner + outer)
}

/// A bounded nonnegative radial function with known discontinuities.
#[derive(Clone)]
pub struct RadialProfile {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    sup: f64,
    breakpoints: Vec<f64>,
}

impl core::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("sup", &self.sup)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl RadialProfile {
    pub fn new(eval: impl Fn(f64) -> f64 + Send + Sync + 'static, sup: f64) -> Self {
        RadialProfile { eval: Arc::new(eval), sup, breakpoints: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        RadialProfile::new(move |_| c, c)
    }

    /// Indicator of `[a, b]`.
    pub fn indicator(a: f64, b: f64) -> Self {
        let mut p = RadialProfile::new(move |r| if r >= a && r <= b { 1.0 } else { 0.0 }, 1.0);
        p.breakpoints = vec![a, b];
        p
    }

    /// Piecewise-linear interpolation of `(ρ_k, v_k)` with constant
    /// extension beyond the ends. Nodes must be increasing.
    pub fn tabulated(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), values.len());
        assert!(!nodes.is_empty());
        let sup = values.iter().cloned().fold(0.0, f64::max);
        let breakpoints = nodes.clone();
        let mut p = RadialProfile::new(
            move |r| {
                let k = nodes.partition_point(|&x| x <= r);
                if k == 0 {
                    values[0]
                } else if k == nodes.len() {
                    values[k - 1]
                } else {
                    let (x0, x1) = (nodes[k - 1], nodes[k]);
                    let w = (r - x0) / (x1 - x0);
                    values[k - 1] * (1.0 - w) + values[k] * w
                }
            },
            sup,
        );
        p.breakpoints = breakpoints;
        p
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    /// Radii where the profile may fail to be smooth.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// `∫_a^b g(ρ) Φ(ρ) dρ`, split at the profile's breakpoints.
    fn integrate_weighted(&self, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self.breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.push(b);
        let mut lo = a;
        let mut total = 0.0;
        for hi in cuts {
            if hi > lo {
                total += integrate(|r| g(r) * self.eval(r), lo, hi, 1e-14, 1e-11).value;
                lo = hi;
            }
        }
        total
    }
}

/// Both sides of the Gaussian comparison on the annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSandwich {
    /// `∫_{annulus} Φ ω H sinh² dρ`.
    pub integral: f64,
    /// `∫_{−l}^{l} Φ(2t + r√t) e^{−r²/4} dr`.
    pub gaussian: f64,
    /// `√t · integral / gaussian` (NaN when both vanish).
    pub ratio: f64,
}

fn check_hypothesis(t: f64, l: f64) -> Result<(), HeatKernelError> {
    if t >= 2.0 * l * l && l >= 1.0 {
        Ok(())
    } else {
        Err(HeatKernelError::Hypothesis { t, l })
    }
}

/// Gaussian comparison of the annulus integral (`n = 3`).
pub fn annulus_average_bounds(
    phi: &RadialProfile,
    t: f64,
    l: f64,
) -> Result<AnnulusSandwich, HeatKernelError> {
    check_hypothesis(t, l)?;
    let spec = AnnulusSpec::with_width(3, t, l);
    let integral = phi.integrate_weighted(spec.r_in, spec.r_out, |r| mass_density(r, t));
    let st = t.sqrt();
    // Substituting ρ = 2t + r√t turns the comparator into an integral in ρ.
    let gaussian = phi.integrate_weighted(spec.r_in, spec.r_out, |rho| {
        let r = (rho - 2.0 * t) / st;
        (-r * r / 4.0).exp() / st
    });
    let ratio = if gaussian > 0.0 { st * integral / gaussian } else { f64::NAN };
    Ok(AnnulusSandwich { integral, gaussian, ratio })
}

/// Outcome of the reduction to the main annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    /// `(C′/√t) ∫_{R_in}^{R_out} Φ dρ + ε · sup Φ`.
    pub bound: f64,
    /// `∫₀^∞ Φ ω H sinh² dρ`.
    pub integral: f64,
}

impl Reduction {
    pub fn holds(&self) -> bool {
        self.integral <= self.bound
    }
}

/// Bounds the heat average of `Φ` by an unweighted integral over the main
/// annulus of width `l(ε)` (`n = 3`, calibrated constants).
pub fn reduce_to_annulus(phi: &RadialProfile, t: f64, eps: f64) -> Result<Reduction, HeatKernelError> {
    let spec = AnnulusSpec::for_tolerance(3, t, eps, calibration::C3_TAIL)?;
    check_hypothesis(t, spec.l)?;
    let unweighted = phi.integrate_weighted(spec.r_in, spec.r_out, |_| 1.0);
    let bound = calibration::C3_PRIME / t.sqrt() * unweighted + eps * phi.sup();
    let cut = radial_cutoff(t);
    let integral = phi.integrate_weighted(0.0, cut, |r| mass_density(r, t)) + phi.sup() * tail_beyond(cut, t);
    Ok(Reduction { bound, integral })
}

/// Location of the maximum of `H(ρ, t) sinh² ρ` (`n = 3`).
pub fn peak_location(t: f64) -> f64 {
    // The log-density is concave on the bracket; golden-section search.
    let f = |r: f64| log_kernel3(r, t).unwrap() + 2.0 * log_sinh(r);
    let (mut a, mut b) = (1e-9, radial_cutoff(t));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// `√t · ω H sinh²` at `ρ = 2t + r√t`: the profile that approaches a fixed
/// Gaussian as `t` grows.
pub fn gaussian_profile(t: f64, r: f64) -> f64 {
    let rho = 2.0 * t + r * t.sqrt();
    if rho <= 0.0 {
        return 0.0;
    }
    t.sqrt() * mass_density(rho, t)
}

/// Smallest `C` with `annulus_tail_mass(t, l(ε)) < ε` over the given grid,
/// found by bisection on each grid point.
pub fn calibrate_tail_constant(times: &[f64], tolerances: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &t in times {
        for &eps in tolerances {
            let tail = |c: f64| annulus_tail_mass(t, width_for(eps, c).unwrap()).unwrap();
            let (mut lo, mut hi) = (eps * 1.000_001, 100.0);
            if tail(lo) < eps {
                continue;
            }
            for _ in 0..100 {
                let mid = (lo * hi).sqrt();
                if tail(mid) < eps {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            worst = worst.max(hi);
        }
    }
    worst
}

/// Extreme values of `√t ω H sinh² / e^{−r²/4}` over `|r| ≤ l`, `t` in the
/// sweep: the tightest constant `C′` for the two-sided Gaussian comparison.
pub fn calibrate_annulus_prime(widths: &[f64], times: &[f64]) -> f64 {
    let mut worst = 1.0f64;
    for &l in widths {
        for &t in times {
            if t < 2.0 * l * l {
                continue;
            }
            for k in 0..=400 {
                let r = -l + 2.0 * l * k as f64 / 400.0;
                let q = gaussian_profile(t, r) / (-r * r / 4.0).exp();
                worst = worst.max(q).max(1.0 / q);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_time() {
        assert_eq!(kernel(3, 1.0, 0.0), Err(HeatKernelError::NonPositiveTime(0.0)));
    }

    #[test]
    fn small_radius_series() {
        let a = rho_over_sinh(1e-7);
        assert!((a - 1.0).abs() < 1e-13);
        assert!((rho_over_sinh(0.5) - 0.5 / 0.5f64.sinh()).abs() < 1e-16);
    }

    #[test]
    fn annulus_arithmetic() {
        let spec = AnnulusSpec::with_width(3, 25.0, 2.0);
        assert_eq!((spec.r_in, spec.r_out), (40.0, 60.0));
    }

    #[test]
    fn empty_annulus_keeps_all_mass() {
        assert!((annulus_tail_mass(4.0, 0.0).unwrap() - 1.0).abs() < 1e-6);
    }
}
