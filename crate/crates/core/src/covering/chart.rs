use rand::Rng;

use super::sphere::{sphere_distance, SphericalDisk};
use super::CoveringError;
use crate::linalg::Vector;
use crate::prelude::*;
use crate::quadrature::integrate;

/// Largest disk radius accepted by [`cube_to_disk`].
pub const MAX_CHART_RADIUS: f64 = 0.1;

/// Axis-parallel square `[lo₀, hi₀] × [lo₁, hi₁]` in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn centered(half: f64) -> Self {
        Rect { lo: [-half, -half], hi: [half, half] }
    }

    pub fn side(&self) -> f64 {
        self.hi[0] - self.lo[0]
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }

    pub fn area(&self) -> f64 {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    pub fn contains(&self, u: [f64; 2]) -> bool {
        (0..2).all(|i| u[i] >= self.lo[i] && u[i] <= self.hi[i])
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &Rect) -> bool {
        (0..2).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i])
    }

    pub fn contains_rect(&self, other: &Rect, tol: f64) -> bool {
        (0..2).all(|i| other.lo[i] >= self.lo[i] - tol && other.hi[i] <= self.hi[i] + tol)
    }

    /// `k × k` equal subsquares, row by row.
    pub fn subdivide(&self, k: usize) -> Vec<Rect> {
        let step = [(self.hi[0] - self.lo[0]) / k as f64, (self.hi[1] - self.lo[1]) / k as f64];
        let edge = |axis: usize, j: usize| {
            if j == k {
                self.hi[axis]
            } else {
                self.lo[axis] + step[axis] * j as f64
            }
        };
        let mut out = Vec::with_capacity(k * k);
        for j in 0..k {
            for i in 0..k {
                out.push(Rect { lo: [edge(0, i), edge(1, j)], hi: [edge(0, i + 1), edge(1, j + 1)] });
            }
        }
        out
    }

    /// Points along the boundary, `per_edge` per side.
    pub fn boundary_points(&self, per_edge: usize) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(4 * per_edge);
        for j in 0..per_edge {
            let t = j as f64 / per_edge as f64;
            let x = self.lo[0] + t * (self.hi[0] - self.lo[0]);
            let y = self.lo[1] + t * (self.hi[1] - self.lo[1]);
            out.push([x, self.lo[1]]);
            out.push([self.hi[0], y]);
            out.push([self.hi[0] - (x - self.lo[0]), self.hi[1]]);
            out.push([self.lo[0], self.hi[1] - (y - self.lo[1])]);
        }
        out
    }
}

/// Equal subdivision of a square of side `ℓ` into `count²` squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition {
    pub count: usize,
    pub side: f64,
}

/// Subdivision of a square of side `ℓ` into squares whose side lies in
/// `[e^{−R′}, 2e^{−R′}]`. Requires `ℓ e^{R′} ≥ e`.
pub fn partition_cube(side: f64, r_prime: f64) -> Result<Partition, CoveringError> {
    let ratio = side * r_prime.exp();
    if !(side > 0.0) || !(ratio >= core::f64::consts::E * (1.0 - 1e-12)) {
        return Err(CoveringError::PartitionTooCoarse { ratio });
    }
    let count = (0.5 * ratio).ceil().max(1.0) as usize;
    Ok(Partition { count, side: side / count as f64 })
}

/// `B`: the square `[−r, r]²` onto the geodesic disk of radius `r`.
///
/// A radial square-to-disk map `u ↦ u |u|_∞/|u|₂` lands on the flat disk of
/// radius `r`, which is scaled to radius `tan r` and projected gnomonically
/// onto the sphere from the tangent plane at the disk center. The image is
/// exactly the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeChart {
    disk: SphericalDisk,
    scale: f64,
    e1: Vector,
    e2: Vector,
}

pub fn cube_to_disk(disk: &SphericalDisk) -> Result<CubeChart, CoveringError> {
    CubeChart::new(disk)
}

fn cross(a: &Vector, b: &Vector) -> Vector {
    Vector::from_slice(&[a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
}

fn sup_over_euclid(u: [f64; 2]) -> f64 {
    let e = u[0].hypot(u[1]);
    if e == 0.0 {
        0.0
    } else {
        u[0].abs().max(u[1].abs()) / e
    }
}

impl CubeChart {
    pub fn new(disk: &SphericalDisk) -> Result<Self, CoveringError> {
        let r = disk.radius();
        if r > MAX_CHART_RADIUS {
            return Err(CoveringError::ChartTooLarge(r));
        }
        let c = *disk.center();
        let axis = (0..3).min_by(|&i, &j| c[i].abs().partial_cmp(&c[j].abs()).unwrap()).unwrap();
        let helper = Vector::unit(3, axis);
        let e1 = helper - c * helper.dot(&c);
        let e1 = e1 * (1.0 / e1.norm());
        let e2 = cross(&c, &e1);
        Ok(CubeChart { disk: *disk, scale: r.tan() / r, e1, e2 })
    }

    pub fn disk(&self) -> &SphericalDisk {
        &self.disk
    }

    /// Half the side of the domain square; equals the disk radius.
    pub fn half_side(&self) -> f64 {
        self.disk.radius()
    }

    pub fn domain(&self) -> Rect {
        Rect::centered(self.half_side())
    }

    fn tangent(&self, u: [f64; 2]) -> [f64; 2] {
        let m = sup_over_euclid(u) * self.scale;
        [u[0] * m, u[1] * m]
    }

    pub fn map(&self, u: [f64; 2]) -> Vector {
        let w = self.tangent(u);
        let p = *self.disk.center() + self.e1 * w[0] + self.e2 * w[1];
        p * (1.0 / p.norm())
    }

    /// Inverse of [`CubeChart::map`] for points of the open hemisphere
    /// around the center.
    pub fn inverse(&self, p: &Vector) -> Option<[f64; 2]> {
        let h = p.dot(self.disk.center());
        if !(h > 0.0) {
            return None;
        }
        let v = [p.dot(&self.e1) / (h * self.scale), p.dot(&self.e2) / (h * self.scale)];
        let m = sup_over_euclid(v);
        if m == 0.0 {
            return Some([0.0, 0.0]);
        }
        Some([v[0] / m, v[1] / m])
    }

    /// Solid-angle density of `B` with respect to `du`.
    pub fn area_factor(&self, u: [f64; 2]) -> f64 {
        let m = sup_over_euclid(u);
        let w = self.tangent(u);
        let k = self.scale;
        m * m * k * k * (1.0 + w[0] * w[0] + w[1] * w[1]).powf(-1.5)
    }

    /// Solid angle of `B(rect)`. The density is smooth off the axes and
    /// diagonals, so the iterated integral is split there.
    pub fn image_measure(&self, rect: &Rect) -> f64 {
        let pieces = |lo: f64, hi: f64, cuts: &[f64]| -> Vec<(f64, f64)> {
            let mut pts = vec![lo, hi];
            pts.extend(cuts.iter().copied().filter(|&c| c > lo && c < hi));
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.windows(2).map(|p| (p[0], p[1])).collect()
        };
        let (lo1, hi1) = (rect.lo[1], rect.hi[1]);
        let scale = rect.area();
        let outer_cuts = [0.0, lo1, -lo1, hi1, -hi1];
        let inner = |u0: f64| -> f64 {
            pieces(lo1, hi1, &[0.0, u0, -u0])
                .into_iter()
                .map(|(c, d)| integrate(|u1| self.area_factor([u0, u1]), c, d, 1e-15 * scale, 1e-13).value)
                .sum()
        };
        pieces(rect.lo[0], rect.hi[0], &outer_cuts)
            .into_iter()
            .map(|(a, b)| integrate(&inner, a, b, 1e-15 * scale, 1e-12).value)
            .sum()
    }

    /// `max(sup ratio, 1/inf ratio)` of `d(B(u), B(v)) / |u − v|` over random
    /// pairs; half of the pairs are close together.
    pub fn bilipschitz_estimate<R: Rng + ?Sized>(&self, pairs: usize, rng: &mut R) -> f64 {
        let a = self.half_side();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..pairs {
            let u = [rng.random_range(-a..=a), rng.random_range(-a..=a)];
            let v = if k % 2 == 0 {
                [rng.random_range(-a..=a), rng.random_range(-a..=a)]
            } else {
                let d = 1e-3 * a;
                [
                    (u[0] + rng.random_range(-d..=d)).clamp(-a, a),
                    (u[1] + rng.random_range(-d..=d)).clamp(-a, a),
                ]
            };
            let euclid = (u[0] - v[0]).hypot(u[1] - v[1]);
            if euclid == 0.0 {
                continue;
            }
            let ratio = sphere_distance(&self.map(u), &self.map(v)) / euclid;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        hi.max(1.0 / lo)
    }
}

/// Angular part `Ω ⊂ S²` of a sector.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularSet {
    Disk(SphericalDisk),
    /// `B(rect)` for a chart `B`.
    CubeImage {
        chart: Arc<CubeChart>,
        rect: Rect,
    },
}

impl AngularSet {
    pub fn center(&self) -> Vector {
        match self {
            AngularSet::Disk(d) => *d.center(),
            AngularSet::CubeImage { chart, rect } => chart.map(rect.center()),
        }
    }

    /// Solid angle.
    pub fn measure(&self) -> f64 {
        match self {
            AngularSet::Disk(d) => d.measure(),
            AngularSet::CubeImage { chart, rect } => chart.image_measure(rect),
        }
    }

    /// Smallest and largest distance from the center to the boundary.
    pub fn radii(&self) -> (f64, f64) {
        match self {
            AngularSet::Disk(d) => (d.radius(), d.radius()),
            AngularSet::CubeImage { chart, rect } => {
                let c = chart.map(rect.center());
                rect.boundary_points(256).into_iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), u| {
                    let d = sphere_distance(&c, &chart.map(u));
                    (lo.min(d), hi.max(d))
                })
            }
        }
    }
}

/// Concentric disks `D_in ⊂ Ω ⊂ D_out` witnessing admissibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityCertificate {
    pub alpha: f64,
    pub inner: SphericalDisk,
    pub outer: SphericalDisk,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AdmissibilityFailure {
    #[error("inner radius {inner:e} is below the required {required:e}")]
    InnerTooSmall { inner: f64, required: f64 },
    #[error("outer radius {outer:e} exceeds the allowed {allowed:e}")]
    OuterTooLarge { outer: f64, allowed: f64 },
}

/// Checks that `Ω` sits between concentric disks of radii `α^{-1}e^{−ρ_min}`
/// and `αe^{−ρ_min}`.
pub fn admissibility_check(
    omega: &AngularSet,
    rho_min: f64,
    alpha: f64,
) -> Result<AdmissibilityCertificate, AdmissibilityFailure> {
    let scale = (-rho_min).exp();
    let (inner, outer) = omega.radii();
    let required = scale / alpha;
    let allowed = scale * alpha;
    // A little slack for the boundary sampling.
    let tol = 1e-9 * scale;
    if inner + tol < required {
        return Err(AdmissibilityFailure::InnerTooSmall { inner, required });
    }
    if outer > allowed + tol {
        return Err(AdmissibilityFailure::OuterTooLarge { outer, allowed });
    }
    let c = omega.center();
    let disk = |r: f64| SphericalDisk::new(c, r.clamp(f64::MIN_POSITIVE, core::f64::consts::PI));
    Ok(AdmissibilityCertificate {
        alpha,
        inner: disk(inner).expect("unit center"),
        outer: disk(outer).expect("unit center"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_arithmetic() {
        let p = partition_cube(1.0, -(0.3f64.ln())).unwrap();
        assert_eq!(p.count, 2);
        assert!((p.side - 0.5).abs() < 1e-15);
        assert!(partition_cube(1.0, 0.5).is_err());
    }

    #[test]
    fn chart_round_trip_and_center() {
        let disk = SphericalDisk::new(Vector::from_slice(&[0.3, -0.5, 0.8]), 0.05).unwrap();
        let chart = cube_to_disk(&disk).unwrap();
        assert!(sphere_distance(&chart.map([0.0, 0.0]), disk.center()) < 1e-15);
        for u in [[0.01, -0.02], [0.05, 0.05], [-0.05, 0.013]] {
            let back = chart.inverse(&chart.map(u)).unwrap();
            assert!((back[0] - u[0]).abs() < 1e-14 && (back[1] - u[1]).abs() < 1e-14);
        }
        // Corners land on the boundary circle.
        assert!((sphere_distance(&chart.map([0.05, 0.05]), disk.center()) - 0.05).abs() < 1e-14);
        assert!((chart.image_measure(&chart.domain()) - disk.measure()).abs() < 1e-4 * disk.measure());
    }

    #[test]
    fn large_disks_rejected() {
        let disk = SphericalDisk::new(Vector::unit(3, 2), 0.5).unwrap();
        assert!(cube_to_disk(&disk).is_err());
    }
}
