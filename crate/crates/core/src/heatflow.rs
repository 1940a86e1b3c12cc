//! Explicit harmonic map heat flow `∂_t u = τ(u)` on a box of the
//! half-space.
//!
//! The box `[−X, X]^{n−1} × [s_lo, s_hi]` carries a uniform grid. The outer
//! layer of nodes is frozen at the initial map; every other node moves along
//! the geodesic in the direction of `τ(u)`, computed by central differences
//! on the grid. Statistics skip a margin of [`STATS_MARGIN`] nodes.

use crate::boundary::BoundaryMap;
use crate::extension::{ExtensionError, GoodExtension};
use crate::geometry::{distance, geodesic_step, Point};
use crate::heatkernel::{self, HeatKernelError, RadialProfile};
use crate::linalg::{Matrix, Vector};
use crate::par::map_indices;
use crate::prelude::*;
use crate::quadrature::integrate;
use crate::tension::{HyperMap, MapError};

/// Nodes excluded from statistics on each side.
pub const STATS_MARGIN: usize = 3;
/// Fewest nodes per axis accepted.
pub const MIN_RESOLUTION: usize = 2 * STATS_MARGIN + 3;
/// `Δt = CFL_FACTOR · (h_min / s_hi)²`.
pub const CFL_FACTOR: f64 = 0.2;
/// A run aborts once the sup energy exceeds this multiple of its start.
pub const BLOW_UP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("box must satisfy X > 0 and 0 < s_lo < s_hi")]
    BadBox,
    #[error("resolution {0} is below the minimum {MIN_RESOLUTION}")]
    ResolutionTooCoarse(usize),
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("dimension must be 2 or 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("node {node} lost positive height at t = {time}")]
    NonPositiveHeight { node: usize, time: f64 },
    #[error("sup energy {energy:e} exceeds {BLOW_UP_FACTOR}× the initial {initial:e} at t = {time}")]
    BlowUp { energy: f64, initial: f64, time: f64 },
    #[error("profile is not radial about the check center (spread {0:e})")]
    NotRadial(f64),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    HeatKernel(#[from] HeatKernelError),
}

/// `[−X, X]^{n−1} × [s_lo, s_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowBox {
    pub dim: usize,
    pub half_width: f64,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl FlowBox {
    pub fn new(dim: usize, half_width: f64, s_lo: f64, s_hi: f64) -> Result<Self, FlowError> {
        if !(2..=3).contains(&dim) {
            return Err(FlowError::UnsupportedDimension(dim));
        }
        if !(half_width > 0.0 && s_lo > 0.0 && s_hi > s_lo) || !s_hi.is_finite() {
            return Err(FlowError::BadBox);
        }
        Ok(FlowBox { dim, half_width, s_lo, s_hi })
    }
}

/// Grid state of the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGrid {
    bounds: FlowBox,
    resolution: usize,
    spacing: Vector,
    /// Domain position of every node.
    nodes: Vec<Point>,
    initial: Vec<Point>,
    values: Vec<Point>,
    time: f64,
    initial_sup_energy: f64,
}

/// Samples `map` on the grid.
pub fn init_flow<M: HyperMap + ?Sized>(
    map: &M,
    bounds: FlowBox,
    resolution: usize,
) -> Result<FlowGrid, FlowError> {
    if resolution < MIN_RESOLUTION {
        return Err(FlowError::ResolutionTooCoarse(resolution));
    }
    let n = bounds.dim;
    let m = resolution;
    let mut spacing = Vector::zeros(n);
    for i in 0..n - 1 {
        spacing[i] = 2.0 * bounds.half_width / (m - 1) as f64;
    }
    spacing[n - 1] = (bounds.s_hi - bounds.s_lo) / (m - 1) as f64;
    let total = m.pow(n as u32);
    let nodes: Vec<Point> = (0..total)
        .map(|idx| {
            let mut c = Vector::zeros(n);
            let mut rem = idx;
            for i in 0..n {
                let k = rem % m;
                rem /= m;
                c[i] = if i == n - 1 {
                    bounds.s_lo + spacing[i] * k as f64
                } else {
                    -bounds.half_width + spacing[i] * k as f64
                };
            }
            Point::from_coords(c).expect("box lies in the half-space")
        })
        .collect();
    let values = map_indices(total, |k| map.eval(&nodes[k])).into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut grid = FlowGrid {
        bounds,
        resolution,
        spacing,
        nodes,
        initial: values.clone(),
        values,
        time: 0.0,
        initial_sup_energy: 0.0,
    };
    grid.initial_sup_energy = grid.local_fields().iter().map(|f| f.energy).fold(0.0, f64::max);
    Ok(grid)
}

/// [`init_flow`] for the extension `𝒢_∞(f)`; `f` must fix `∞`.
pub fn init_extension<F: BoundaryMap + 'static>(
    f: F,
    bounds: FlowBox,
    resolution: usize,
) -> Result<FlowGrid, FlowError> {
    let ext = GoodExtension::anchored(f)?;
    init_flow(&ext, bounds, resolution)
}

#[derive(Debug, Clone, Copy)]
struct NodeField {
    tension: Vector,
    tension_norm: f64,
    energy: f64,
}

impl FlowGrid {
    pub fn bounds(&self) -> &FlowBox {
        &self.bounds
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn initial_values(&self) -> &[Point] {
        &self.initial
    }

    pub fn spacing(&self) -> &Vector {
        &self.spacing
    }

    /// The default step `CFL_FACTOR · (h_min / s_hi)²`.
    pub fn default_time_step(&self) -> f64 {
        let h = self.spacing.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
        CFL_FACTOR * (h / self.bounds.s_hi).powi(2)
    }

    fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rem = idx;
        for slot in out.iter_mut().take(self.bounds.dim) {
            *slot = rem % self.resolution;
            rem /= self.resolution;
        }
        out
    }

    fn min_offset(&self, idx: usize) -> usize {
        let m = self.resolution;
        self.multi_index(idx)[..self.bounds.dim].iter().map(|&k| k.min(m - 1 - k)).min().unwrap()
    }

    /// Nodes of the frozen outer layer.
    pub fn is_frozen(&self, idx: usize) -> bool {
        self.min_offset(idx) == 0
    }

    /// Nodes used for statistics.
    pub fn in_stats_region(&self, idx: usize) -> bool {
        self.min_offset(idx) >= STATS_MARGIN
    }

    fn stride(&self, axis: usize) -> usize {
        self.resolution.pow(axis as u32)
    }

    /// Tension and energy at an unfrozen node.
    fn field_at(&self, idx: usize) -> NodeField {
        let n = self.bounds.dim;
        let p = &self.nodes[idx];
        let s = p.height();
        let u = &self.values[idx];
        let big_s = u.height();
        let mut jac = Matrix::zeros(n, n);
        let mut lap = Vector::zeros(n);
        for i in 0..n {
            let h = self.spacing[i];
            let up = self.values[idx + self.stride(i)].coords();
            let down = self.values[idx - self.stride(i)].coords();
            for g in 0..n {
                let a = up[g] - u[g];
                let b = down[g] - u[g];
                jac[(g, i)] = (a - b) / (2.0 * h);
                lap[g] += (a + b) / (h * h);
            }
        }
        let mut tau = Vector::zeros(n);
        for g in 0..n {
            let mut quad = 0.0;
            for i in 0..n {
                quad += 2.0 * jac[(g, i)] * jac[(n - 1, i)];
                if g == n - 1 {
                    quad -= (0..n).map(|k| jac[(k, i)] * jac[(k, i)]).sum::<f64>();
                }
            }
            let drift = (n as f64 - 2.0) / s * jac[(g, n - 1)];
            tau[g] = s * s * (lap[g] - drift - quad / big_s);
        }
        let ratio = s / big_s;
        NodeField {
            tension: tau,
            tension_norm: tau.norm() / big_s,
            energy: 0.5 * ratio * ratio * jac.frobenius_sq(),
        }
    }

    fn local_fields(&self) -> Vec<NodeField> {
        let zero = NodeField { tension: Vector::zeros(self.bounds.dim), tension_norm: 0.0, energy: 0.0 };
        map_indices(self.len(), |k| if self.is_frozen(k) { zero } else { self.field_at(k) })
    }

    /// `|τ(u)|` at every node; zero on the frozen layer.
    pub fn tension_norms(&self) -> Vec<f64> {
        self.local_fields().iter().map(|f| f.tension_norm).collect()
    }

    /// `|τ(u)|²` at a node off the frozen layer.
    pub fn tension_squared_at(&self, idx: usize) -> f64 {
        self.field_at(idx).tension_norm.powi(2)
    }

    pub fn stats(&self) -> FlowSample {
        let fields = self.local_fields();
        let mut sup_tension: f64 = 0.0;
        let mut sup_drift: f64 = 0.0;
        let mut energy_sum = 0.0;
        let mut count = 0;
        for (k, f) in fields.iter().enumerate() {
            if !self.in_stats_region(k) {
                continue;
            }
            sup_tension = sup_tension.max(f.tension_norm);
            sup_drift = sup_drift.max(distance(&self.values[k], &self.initial[k]));
            energy_sum += f.energy;
            count += 1;
        }
        FlowSample { t: self.time, sup_tension, sup_drift, mean_energy: energy_sum / count.max(1) as f64 }
    }

    /// Largest distance between the current states of two grids of the same
    /// shape.
    pub fn sup_distance(&self, other: &FlowGrid) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| distance(a, b)).fold(0.0, f64::max)
    }

    /// One intrinsic Euler step.
    pub fn step(&mut self, dt: f64) -> Result<(), FlowError> {
        if !(dt > 0.0) {
            return Err(FlowError::BadTimeStep(dt));
        }
        let fields = self.local_fields();
        let sup_energy = fields.iter().map(|f| f.energy).fold(0.0, f64::max);
        if !(sup_energy <= BLOW_UP_FACTOR * self.initial_sup_energy.max(f64::MIN_POSITIVE)) {
            return Err(FlowError::BlowUp {
                energy: sup_energy,
                initial: self.initial_sup_energy,
                time: self.time,
            });
        }
        let next = map_indices(self.len(), |k| {
            if self.is_frozen(k) {
                self.values[k]
            } else {
                geodesic_step(&self.values[k], &fields[k].tension, dt)
            }
        });
        let time = self.time + dt;
        for (k, q) in next.iter().enumerate() {
            if !(q.height() > 0.0) || !q.coords().is_finite() {
                return Err(FlowError::NonPositiveHeight { node: k, time });
            }
        }
        self.values = next;
        self.time = time;
        Ok(())
    }
}

/// One row of a [`FlowTrace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub sup_tension: f64,
    pub sup_drift: f64,
    pub mean_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
}

impl FlowTrace {
    pub fn initial(&self) -> Option<&FlowSample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&FlowSample> {
        self.samples.last()
    }

    /// Final sup tension strictly below the initial one.
    pub fn decayed(&self) -> bool {
        match (self.initial(), self.last()) {
            (Some(a), Some(b)) => self.samples.len() > 1 && b.sup_tension < a.sup_tension,
            _ => false,
        }
    }

    /// No sample exceeds the smallest earlier value by more than `band`.
    pub fn monotone_within(&self, band: f64) -> bool {
        let mut best = f64::INFINITY;
        for s in &self.samples {
            if s.sup_tension > best * (1.0 + band) {
                return false;
            }
            best = best.min(s.sup_tension);
        }
        true
    }

    /// No sample exceeds the initial value by more than `band`.
    pub fn bounded_by_initial(&self, band: f64) -> bool {
        let Some(first) = self.initial() else { return true };
        self.samples.iter().all(|s| s.sup_tension <= first.sup_tension * (1.0 + band))
    }

    pub fn sup_drift(&self) -> f64 {
        self.samples.iter().map(|s| s.sup_drift).fold(0.0, f64::max)
    }
}

/// Schedule of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub dt: Option<f64>,
    /// Steps between trace rows.
    pub record_every: usize,
}

impl RunConfig {
    pub fn new(t_end: f64) -> Self {
        RunConfig { t_end, dt: None, record_every: 50 }
    }
}

/// Outcome of [`run`]; `error` is set when the run aborted, in which case
/// the trace ends at the last good step.
#[derive(Debug, Clone)]
pub struct FlowRun {
    pub trace: FlowTrace,
    pub grid: FlowGrid,
    pub error: Option<FlowError>,
    pub steps: usize,
    pub dt: f64,
}

/// Steps `grid` to `t_end`, recording statistics every `record_every` steps
/// and at the end. The last step is shortened to land on `t_end`.
pub fn run(mut grid: FlowGrid, config: &RunConfig) -> Result<FlowRun, FlowError> {
    run_with_snapshots(&mut grid, config, &[]).map(|(run, _)| run)
}

/// As [`run`], also cloning the grid at each of `times` (rounded to the
/// nearest step boundary at or after it).
pub fn run_with_snapshots(
    grid: &mut FlowGrid,
    config: &RunConfig,
    times: &[f64],
) -> Result<(FlowRun, Vec<FlowGrid>), FlowError> {
    let dt = config.dt.unwrap_or_else(|| grid.default_time_step());
    if !(dt > 0.0) {
        return Err(FlowError::BadTimeStep(dt));
    }
    let mut trace = FlowTrace { samples: vec![grid.stats()] };
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = times.to_vec();
    pending.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let take = |grid: &FlowGrid, pending: &mut Vec<f64>, snapshots: &mut Vec<FlowGrid>| {
        while pending.last().is_some_and(|&t| t <= grid.time() + 1e-12) {
            pending.pop();
            snapshots.push(grid.clone());
        }
    };
    take(grid, &mut pending, &mut snapshots);
    let mut steps = 0;
    let mut error = None;
    let every = config.record_every.max(1);
    while grid.time() < config.t_end - 1e-12 * config.t_end.max(1.0) {
        let h = dt.min(config.t_end - grid.time());
        if let Err(e) = grid.step(h) {
            error = Some(e);
            break;
        }
        steps += 1;
        take(grid, &mut pending, &mut snapshots);
        if steps % every == 0 {
            trace.samples.push(grid.stats());
        }
    }
    if error.is_none() && steps % every != 0 {
        trace.samples.push(grid.stats());
    }
    Ok((FlowRun { trace, grid: grid.clone(), error, steps, dt }, snapshots))
}

/// Map that moves points radially about the center `c` of a polar frame:
/// `(ρ, ζ) ↦ (ρ + a·b(ρ), ζ)` with the bump
/// `b(ρ) = exp(−1/(1 − (ρ/w)²))·e` for `ρ < w`.
///
/// `|τ|²` of this map is a radial function about `c`, which makes it test
/// data for the comparison with the heat kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    pub center: Point,
    pub amplitude: f64,
    pub width: f64,
}

impl RadialBump {
    fn bump(&self, rho: f64) -> f64 {
        let x = rho / self.width;
        if x >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }
}

impl HyperMap for RadialBump {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn eval(&self, p: &Point) -> Result<Point, MapError> {
        let frame = crate::geometry::PolarFrame::standard(self.center);
        let rho = distance(&self.center, p);
        if rho == 0.0 || rho >= self.width {
            return Ok(*p);
        }
        let (rho, zeta) = frame.to_polar(p)?;
        Ok(frame.from_polar(rho + self.amplitude * self.bump(rho), &zeta))
    }
}

/// Comparison `|τ(u)(x, t)|² ≤ ∫ H(d(x, y), t) |τ(φ)(y)|² dλ(y)` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonSample {
    pub t: f64,
    pub node: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonReport {
    pub samples: Vec<HamiltonSample>,
    pub tolerance: f64,
}

impl HamiltonReport {
    pub fn holds(&self) -> bool {
        self.samples.iter().all(|s| s.lhs <= s.rhs + self.tolerance)
    }

    pub fn worst_excess(&self) -> f64 {
        self.samples.iter().map(|s| s.lhs - s.rhs).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `∫ H(d(x, y), t) Φ(d(c, y)) dλ(y)` for `H³`, with `a = d(x, c)`, by
/// integrating over `r = d(c, y)` and the angle `θ` at `c`.
pub fn radial_heat_average(phi: &RadialProfile, a: f64, t: f64, r_max: f64) -> Result<f64, FlowError> {
    heatkernel::kernel(3, 0.0, t)?;
    let kernel = |d: f64| -> f64 { heatkernel::log_kernel3(d, t).map(f64::exp).unwrap_or(0.0) };
    let inner = |r: f64| -> f64 {
        let value = phi.eval(r);
        if value == 0.0 {
            return 0.0;
        }
        let angular = integrate(
            |theta: f64| {
                let cosh_d = a.cosh() * r.cosh() - a.sinh() * r.sinh() * theta.cos();
                let d = cosh_d.max(1.0).acosh();
                kernel(d) * theta.sin()
            },
            0.0,
            core::f64::consts::PI,
            1e-14,
            1e-10,
        )
        .value;
        2.0 * core::f64::consts::PI * value * r.sinh().powi(2) * angular
    };
    let mut cuts = phi.breakpoints().to_vec();
    cuts.retain(|&c| c > 0.0 && c < r_max);
    cuts.push(0.0);
    cuts.push(r_max);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    Ok(cuts.windows(2).map(|w| integrate(inner, w[0], w[1], 1e-14, 1e-9).value).sum())
}

/// Checks the maximum-principle bound at the given nodes of each snapshot.
///
/// `initial` is the grid at `t = 0`. `|τ(φ)|²` is read off the grid nodes of
/// the stats region, binned by distance to `center`, and must be radial to
/// within `radial_tol` (relative to its sup). `support` bounds the radius
/// where it is nonzero.
pub fn hamilton_check(
    initial: &FlowGrid,
    snapshots: &[FlowGrid],
    center: &Point,
    support: f64,
    nodes: &[usize],
    radial_tol: f64,
    tolerance: f64,
) -> Result<HamiltonReport, FlowError> {
    let profile = radial_profile_from_grid(initial, center, support, radial_tol)?;
    let mut samples = Vec::new();
    for grid in snapshots {
        let t = grid.time();
        if t <= 0.0 {
            for &k in nodes {
                let v = grid.tension_squared_at(k);
                samples.push(HamiltonSample { t, node: k, lhs: v, rhs: v });
            }
            continue;
        }
        for &k in nodes {
            let a = distance(center, &grid.nodes()[k]);
            let rhs = radial_heat_average(&profile, a, t, support)?;
            samples.push(HamiltonSample { t, node: k, lhs: grid.tension_squared_at(k), rhs });
        }
    }
    Ok(HamiltonReport { samples, tolerance })
}

/// Upper envelope of `|τ|²` over radial bins; fails if the spread within a
/// bin exceeds `radial_tol · sup`.
fn radial_profile_from_grid(
    grid: &FlowGrid,
    center: &Point,
    support: f64,
    radial_tol: f64,
) -> Result<RadialProfile, FlowError> {
    const BINS: usize = 48;
    let width = support / BINS as f64;
    let mut lo = vec![f64::INFINITY; BINS];
    let mut hi = vec![0.0f64; BINS];
    let mut sup = 0.0f64;
    for k in 0..grid.len() {
        if grid.is_frozen(k) {
            continue;
        }
        let r = distance(center, &grid.nodes()[k]);
        let v = grid.tension_squared_at(k);
        sup = sup.max(v);
        if r >= support {
            continue;
        }
        let b = ((r / width) as usize).min(BINS - 1);
        lo[b] = lo[b].min(v);
        hi[b] = hi[b].max(v);
    }
    let spread = (0..BINS).filter(|&b| lo[b].is_finite()).map(|b| hi[b] - lo[b]).fold(0.0, f64::max);
    // Below |τ|² ≈ 1e-16 the values are rounding noise.
    if spread > radial_tol * sup.max(1e-16) {
        return Err(FlowError::NotRadial(spread));
    }
    // Envelope over each bin and its neighbours, so that the profile bounds
    // every node value regardless of where it sits in its bin.
    let mut nodes = Vec::with_capacity(BINS + 1);
    let mut values = Vec::with_capacity(BINS + 1);
    for b in 0..BINS {
        let left = if b > 0 { hi[b - 1] } else { 0.0 };
        let right = if b + 1 < BINS { hi[b + 1] } else { 0.0 };
        nodes.push(width * b as f64);
        values.push(hi[b].max(left).max(right));
    }
    nodes.push(support);
    values.push(0.0);
    Ok(RadialProfile::tabulated(nodes, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::CatalogMap;

    fn small_box() -> FlowBox {
        FlowBox::new(3, 1.0, 0.5, 2.0).unwrap()
    }

    #[test]
    fn coarse_grids_rejected() {
        let id = CatalogMap::identity(2);
        assert!(matches!(init_extension(id, small_box(), 5), Err(FlowError::ResolutionTooCoarse(5))));
    }

    #[test]
    fn identity_is_stationary() {
        let mut grid = init_extension(CatalogMap::identity(2), small_box(), 9).unwrap();
        for (u, p) in grid.values().iter().zip(grid.nodes()) {
            assert!(u.coords().max_abs_diff(p.coords()) < 1e-12);
        }
        let dt = grid.default_time_step();
        for _ in 0..20 {
            grid.step(dt).unwrap();
        }
        assert!(grid.stats().sup_drift < 1e-10);
    }

    #[test]
    fn frozen_layer_and_margin() {
        let grid = init_extension(CatalogMap::identity(2), small_box(), 9).unwrap();
        assert!(grid.is_frozen(0));
        let centre = 4 + 4 * 9 + 4 * 81;
        assert!(!grid.is_frozen(centre) && grid.in_stats_region(centre));
        assert!(!grid.in_stats_region(1 + 4 * 9 + 4 * 81));
    }
}
