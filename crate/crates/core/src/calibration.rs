//! Constants that the theory only asserts to exist, calibrated once by the
//! sweeps in this crate and pinned here.

/// `C` in the annulus width `l(ε) = √(8 log(C/ε))` for `n = 3`, from
/// [`crate::heatkernel::calibrate_tail_constant`] over
/// `t ∈ {4, 16, 64}`, `ε ∈ {0.1, 0.01}` (tight at `t = 4`, `ε = 0.1`).
pub const C3_TAIL: f64 = 0.1967;

/// `C′` in the two-sided Gaussian comparison on the main annulus for
/// `n = 3`, from [`crate::heatkernel::calibrate_annulus_prime`].
pub const C3_PRIME: f64 = 5.52;

/// Envelope constants for `n = 3`: the closed-form kernel divided by the
/// envelope shape increases from `(4π)^{-3/2}` at `ρ = 0` to
/// `2 (4π)^{-3/2}` as `ρ → ∞`.
pub const ENVELOPE_LOWER_3: f64 = 0.022_448_390_265_645_82;
pub const ENVELOPE_UPPER_3: f64 = 2.0 * ENVELOPE_LOWER_3;

/// `C_g` in `g_r(ρ) ≥ C_g (1 − ρ²)^{n−1}/ρ^{n−2}`: for `n = 3`, `r = 1` the
/// ratio is `1/(3(1 + ρ)²)`, whose infimum over `(0, 1)` is `1/12`.
pub const C_GREEN: f64 = 1.0 / 12.0;

/// Largest multiplicity of the ring-lattice sphere covers seen on `10⁵`
/// random points for `R = 1, …, 6` (7 at `R = 1`, at most 5 beyond).
pub const BETA_IMPL: usize = 7;

/// Bi-Lipschitz constant of the cube charts on small caps. Sampled pairs
/// give about 2.26 for every `R`; the square-to-disk map alone has
/// supremum `≈ 2.288` at the diagonals.
pub const L0_IMPL: f64 = 2.3;
