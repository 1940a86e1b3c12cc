use core::f64::consts::PI;

use rand::Rng;

use super::chart::AngularSet;
use super::CoveringError;
use crate::geometry::{Point, PolarFrame};
use crate::linalg::Vector;
use crate::prelude::*;
use crate::tension::MapError;

/// `{ (ρ, ζ) : ρ_min ≤ ρ ≤ ρ_min + r, ζ ∈ Ω }` in geodesic polar coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    frame: PolarFrame,
    rho_min: f64,
    height: f64,
    omega: AngularSet,
}

impl Sector {
    pub fn new(
        frame: PolarFrame,
        rho_min: f64,
        height: f64,
        omega: AngularSet,
    ) -> Result<Self, CoveringError> {
        if frame.center().dim() != 3 {
            return Err(CoveringError::UnsupportedDimension(frame.center().dim()));
        }
        if !(rho_min > 0.0) || !(height > 0.0) {
            return Err(CoveringError::BadSector { rho_min, height });
        }
        if !(omega.measure() > 0.0) {
            return Err(CoveringError::EmptyAngularSet);
        }
        Ok(Sector { frame, rho_min, height, omega })
    }

    pub fn frame(&self) -> &PolarFrame {
        &self.frame
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_min + self.height
    }

    pub fn omega(&self) -> &AngularSet {
        &self.omega
    }

    /// Measure in `dρ dζ`.
    pub fn measure(&self) -> f64 {
        self.height * self.omega.measure()
    }

    /// A sample `(ρ, ζ)` with its weight relative to the `dρ dζ` measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, Vector, f64) {
        let rho = self.rho_min + self.height * rng.random::<f64>();
        match &self.omega {
            AngularSet::Disk(d) => {
                let cos_r = d.radius().cos();
                let z = 1.0 - rng.random::<f64>() * (1.0 - cos_r);
                let phi = 2.0 * PI * rng.random::<f64>();
                let ring = (1.0 - z * z).max(0.0).sqrt();
                let c = *d.center();
                let axis = (0..3).min_by(|&i, &j| c[i].abs().partial_cmp(&c[j].abs()).unwrap()).unwrap();
                let helper = Vector::unit(3, axis);
                let e1 = helper - c * helper.dot(&c);
                let e1 = e1 * (1.0 / e1.norm());
                let e2 = Vector::from_slice(&[
                    c[1] * e1[2] - c[2] * e1[1],
                    c[2] * e1[0] - c[0] * e1[2],
                    c[0] * e1[1] - c[1] * e1[0],
                ]);
                let zeta = c * z + e1 * (ring * phi.cos()) + e2 * (ring * phi.sin());
                (rho, zeta, 1.0)
            }
            AngularSet::CubeImage { chart, rect } => {
                let u = [
                    rect.lo[0] + (rect.hi[0] - rect.lo[0]) * rng.random::<f64>(),
                    rect.lo[1] + (rect.hi[1] - rect.lo[1]) * rng.random::<f64>(),
                ];
                (rho, chart.map(u), chart.area_factor(u))
            }
        }
    }

    pub fn point(&self, rho: f64, zeta: &Vector) -> Point {
        self.frame.from_polar(rho, zeta)
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    /// `mean + 2·std_error`.
    pub fn upper(&self) -> f64 {
        self.mean + 2.0 * self.std_error
    }
}

/// Average of `field` over the sector with respect to `dρ dζ`.
pub fn sector_average<R, F>(
    sector: &Sector,
    field: &F,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate, MapError>
where
    R: Rng + ?Sized,
    F: Fn(&Point) -> Result<f64, MapError> + ?Sized,
{
    let samples = samples.max(2);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (rho, zeta, w) = sector.sample(rng);
        let v = field(&sector.point(rho, &zeta))?;
        if !v.is_finite() {
            return Err(MapError::NonFinite);
        }
        values.push((w, v));
    }
    let total_w: f64 = values.iter().map(|(w, _)| w).sum();
    let mean = values.iter().map(|(w, v)| w * v).sum::<f64>() / total_w;
    let var: f64 = values.iter().map(|(w, v)| (w * (v - mean)).powi(2)).sum::<f64>();
    let n = samples as f64;
    let std_error = (var * n / (n - 1.0)).sqrt() / total_w;
    Ok(Estimate { mean, std_error, samples })
}

/// Settings of the height search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightSearch {
    pub delta: f64,
    pub r_max: f64,
    pub step: f64,
    pub samples: usize,
}

impl HeightSearch {
    pub const DEFAULT_SAMPLES: usize = 4096;
    pub const DEFAULT_STEP: f64 = 0.25;

    pub fn new(delta: f64, r_max: f64) -> Self {
        HeightSearch { delta, r_max, step: Self::DEFAULT_STEP, samples: Self::DEFAULT_SAMPLES }
    }

    /// Candidate heights `1, 1 + step, …` up to `r_max`.
    pub fn grid(&self) -> Vec<f64> {
        if !(self.r_max >= 1.0) || !(self.step > 0.0) {
            return Vec::new();
        }
        let count = ((self.r_max - 1.0) / self.step + 1e-9).floor().max(0.0) as usize;
        (0..=count).map(|k| 1.0 + self.step * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeightOutcome {
    /// The first grid height whose sector is δ-good.
    Good { height: f64, estimate: Estimate },
    /// No grid height was δ-good; the smallest average seen.
    Failed { best_height: f64, best: Estimate },
}

impl HeightOutcome {
    pub fn is_good(&self) -> bool {
        matches!(self, HeightOutcome::Good { .. })
    }

    pub fn height(&self) -> f64 {
        match self {
            HeightOutcome::Good { height, .. } => *height,
            HeightOutcome::Failed { best_height, .. } => *best_height,
        }
    }

    pub fn estimate(&self) -> Estimate {
        match self {
            HeightOutcome::Good { estimate, .. } => *estimate,
            HeightOutcome::Failed { best, .. } => *best,
        }
    }
}

/// Scans the height grid for a sector `S(x, ρ_min, r, Ω)` with
/// `mean + 2·se < δ`.
pub fn find_good_height<R, F>(
    frame: &PolarFrame,
    rho_min: f64,
    omega: &AngularSet,
    search: &HeightSearch,
    field: &F,
    rng: &mut R,
) -> Result<HeightOutcome, CoveringError>
where
    R: Rng + ?Sized,
    F: Fn(&Point) -> Result<f64, MapError> + ?Sized,
{
    let grid = search.grid();
    if grid.is_empty() {
        return Err(CoveringError::BadHeightCap(search.r_max));
    }
    let mut best: Option<(f64, Estimate)> = None;
    for &r in &grid {
        let sector = Sector::new(frame.clone(), rho_min, r, omega.clone())?;
        let est = sector_average(&sector, field, search.samples, rng)?;
        if est.upper() < search.delta {
            return Ok(HeightOutcome::Good { height: r, estimate: est });
        }
        if best.is_none_or(|(_, b)| est.mean < b.mean) {
            best = Some((r, est));
        }
    }
    let (best_height, best) = best.expect("non-empty grid");
    Ok(HeightOutcome::Failed { best_height, best })
}
