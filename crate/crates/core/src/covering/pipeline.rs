use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::chart::{admissibility_check, cube_to_disk, partition_cube, AngularSet, CubeChart, Rect};
use super::sector::{find_good_height, Estimate, HeightSearch};
use super::sphere::{besicovitch_cover, sphere_distance, SphereCover, SphericalDisk};
use super::CoveringError;
use crate::calibration;
use crate::geometry::{Point, PolarFrame};
use crate::heatkernel::AnnulusSpec;
use crate::linalg::Vector;
use crate::par::map_indices;
use crate::prelude::*;
use crate::tension::MapError;

/// `[R_in, R_out] × D_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub index: usize,
    pub disk: SphericalDisk,
    pub r_in: f64,
    pub r_out: f64,
}

impl Cylinder {
    pub fn contains(&self, rho: f64, zeta: &Vector) -> bool {
        rho >= self.r_in && rho <= self.r_out && self.disk.contains(zeta)
    }

    /// Measure in `dρ dζ`.
    pub fn measure(&self) -> f64 {
        (self.r_out - self.r_in) * self.disk.measure()
    }
}

/// One cylinder per disk of `cover`.
pub fn build_cylinders(spec: &AnnulusSpec, cover: &SphereCover) -> Vec<Cylinder> {
    (0..cover.len())
        .map(|index| Cylinder { index, disk: cover.disk(index), r_in: spec.r_in, r_out: spec.r_out })
        .collect()
}

/// Indices of the cylinders containing `(ρ, ζ)`.
pub fn cylinders_containing(spec: &AnnulusSpec, cover: &SphereCover, rho: f64, zeta: &Vector) -> Vec<usize> {
    if rho < spec.r_in || rho > spec.r_out {
        return Vec::new();
    }
    cover.containing(zeta)
}

/// Settings of [`cover_annulus`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoverConfig {
    pub t: f64,
    pub eps: f64,
    /// `C` in the annulus width.
    pub tail_constant: f64,
    /// Height cap `r₀`.
    pub r0: f64,
    pub delta: f64,
    pub alpha: f64,
    pub samples: usize,
    pub height_step: f64,
    /// Restrict to this many cylinders nearest to `focus`; `None` takes all.
    pub max_cylinders: Option<usize>,
    /// Direction in frame coordinates.
    pub focus: Vector,
    /// Per-cylinder cap on erected sectors.
    pub max_sectors: usize,
    pub seed: u64,
}

impl CoverConfig {
    pub fn new(t: f64, eps: f64, delta: f64) -> Self {
        CoverConfig {
            t,
            eps,
            tail_constant: calibration::C3_TAIL,
            r0: 8.0,
            delta,
            alpha: 3f64.sqrt() * calibration::L0_IMPL,
            samples: HeightSearch::DEFAULT_SAMPLES,
            height_step: HeightSearch::DEFAULT_STEP,
            max_cylinders: None,
            focus: Vector::unit(3, 0),
            max_sectors: 4096,
            seed: 0,
        }
    }

    pub fn annulus(&self) -> Result<AnnulusSpec, CoveringError> {
        Ok(AnnulusSpec::for_tolerance(3, self.t, self.eps, self.tail_constant)?)
    }
}

/// A sector of a cylinder's stack, in the cylinder's chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRecord {
    pub rect: Rect,
    pub rho_min: f64,
    pub height: f64,
    pub estimate: Estimate,
    pub good: bool,
    pub admissible: bool,
    pub omega_measure: f64,
}

impl SectorRecord {
    pub fn rho_max(&self) -> f64 {
        self.rho_min + self.height
    }

    pub fn measure(&self) -> f64 {
        self.height * self.omega_measure
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderReport {
    pub cylinder: Cylinder,
    pub sectors: Vec<SectorRecord>,
    pub bad_cells: usize,
    /// Largest `ρ` reached by the stack.
    pub stack_top: f64,
    pub leftover: f64,
    pub leftover_bound: f64,
    pub disjoint: bool,
    pub contained: bool,
    pub weighted_average: f64,
}

impl CylinderReport {
    pub fn leftover_ok(&self) -> bool {
        self.leftover <= self.leftover_bound * (1.0 + 1e-9)
    }

    pub fn covered_measure(&self) -> f64 {
        self.sectors.iter().map(SectorRecord::measure).sum()
    }

    /// Sectors of the stack that contain `(ρ, u)`, `u` in chart coordinates.
    pub fn sectors_at(&self, rho: f64, u: [f64; 2]) -> usize {
        self.sectors.iter().filter(|s| rho > s.rho_min && rho < s.rho_max() && s.rect.contains(u)).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub annulus: AnnulusSpec,
    pub cover_size: usize,
    pub disk_radius: f64,
    pub cylinders: Vec<CylinderReport>,
    pub weighted_average: f64,
}

impl CoverReport {
    pub fn all_good(&self) -> bool {
        self.cylinders.iter().all(|c| c.bad_cells == 0)
    }

    pub fn leftover_ok(&self) -> bool {
        self.cylinders.iter().all(CylinderReport::leftover_ok)
    }

    pub fn disjoint(&self) -> bool {
        self.cylinders.iter().all(|c| c.disjoint && c.contained)
    }

    pub fn sector_count(&self) -> usize {
        self.cylinders.iter().map(|c| c.sectors.len()).sum()
    }
}

fn select_cylinders(cover: &SphereCover, config: &CoverConfig) -> Vec<usize> {
    let Some(limit) = config.max_cylinders else {
        return (0..cover.len()).collect();
    };
    let focus = config.focus * (1.0 / config.focus.norm());
    let mut reach = cover.radius();
    let mut found = cover.centers_within(&focus, reach);
    while found.len() < limit.min(cover.len()) {
        reach = (2.0 * reach).min(core::f64::consts::PI);
        found = cover.centers_within(&focus, reach);
    }
    found.sort_by(|&a, &b| {
        let da = sphere_distance(cover.disk(a).center(), &focus);
        let db = sphere_distance(cover.disk(b).center(), &focus);
        da.partial_cmp(&db).unwrap().then(a.cmp(&b))
    });
    found.truncate(limit);
    found
}

/// Stacks sectors over the cylinders of the main annulus of `H(·, t)`.
///
/// Each cylinder starts from its whole disk at `ρ = R_in`. A sector of the
/// first δ-good height is erected on every cell, its square is split into
/// squares of side in `[e^{−ρ′}, 2e^{−ρ′}]` at the new floor `ρ′`, and the
/// process repeats until the floor passes `R_out − r₀`. Cells without a
/// δ-good height keep their best height and are counted as bad.
pub fn cover_annulus<F>(
    frame: &PolarFrame,
    config: &CoverConfig,
    field: &F,
) -> Result<CoverReport, CoveringError>
where
    F: Fn(&Point) -> Result<f64, MapError> + Sync + ?Sized,
{
    if frame.center().dim() != 3 {
        return Err(CoveringError::UnsupportedDimension(frame.center().dim()));
    }
    if !(config.r0 >= 1.0) {
        return Err(CoveringError::BadHeightCap(config.r0));
    }
    let annulus = config.annulus()?;
    if !(annulus.r_in > 0.0) {
        return Err(CoveringError::AnnulusTooSmall(annulus.r_in));
    }
    let cover = besicovitch_cover(annulus.r_in)?;
    let chosen = select_cylinders(&cover, config);
    let cylinders = build_cylinders(&annulus, &cover);
    let results = map_indices(chosen.len(), |k| stack_cylinder(frame, config, &cylinders[chosen[k]], field));
    let cylinders = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (num, den) = cylinders
        .iter()
        .flat_map(|c| &c.sectors)
        .fold((0.0, 0.0), |(n, d), s| (n + s.estimate.mean * s.measure(), d + s.measure()));
    Ok(CoverReport {
        annulus,
        cover_size: cover.len(),
        disk_radius: cover.radius(),
        cylinders,
        weighted_average: if den > 0.0 { num / den } else { 0.0 },
    })
}

fn stack_cylinder<F>(
    frame: &PolarFrame,
    config: &CoverConfig,
    cylinder: &Cylinder,
    field: &F,
) -> Result<CylinderReport, CoveringError>
where
    F: Fn(&Point) -> Result<f64, MapError> + ?Sized,
{
    let chart = Arc::new(cube_to_disk(&cylinder.disk)?);
    let mut rng =
        ChaCha8Rng::seed_from_u64(config.seed ^ (cylinder.index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let search = HeightSearch {
        delta: config.delta,
        r_max: config.r0,
        step: config.height_step,
        samples: config.samples,
    };
    let stop = cylinder.r_out - config.r0;
    let mut pending = vec![(chart.domain(), cylinder.r_in, true)];
    let mut sectors = Vec::new();
    let mut leftover = 0.0;
    let mut bad_cells = 0;
    while let Some((rect, rho_min, base)) = pending.pop() {
        let omega = if base {
            AngularSet::Disk(cylinder.disk)
        } else {
            AngularSet::CubeImage { chart: chart.clone(), rect }
        };
        let omega_measure = omega.measure();
        if rho_min > stop {
            leftover += (cylinder.r_out - rho_min) * omega_measure;
            continue;
        }
        if sectors.len() >= config.max_sectors {
            return Err(CoveringError::TooManySectors(config.max_sectors));
        }
        let admissible = admissibility_check(&omega, rho_min, config.alpha).is_ok();
        let outcome = find_good_height(frame, rho_min, &omega, &search, field, &mut rng)?;
        let good = outcome.is_good();
        if !good {
            bad_cells += 1;
        }
        let height = outcome.height();
        sectors.push(SectorRecord {
            rect,
            rho_min,
            height,
            estimate: outcome.estimate(),
            good,
            admissible,
            omega_measure,
        });
        let floor = rho_min + height;
        if floor > stop {
            leftover += (cylinder.r_out - floor) * omega_measure;
            continue;
        }
        let part = partition_cube(rect.side(), floor)?;
        for sub in rect.subdivide(part.count).into_iter().rev() {
            pending.push((sub, floor, false));
        }
    }
    let domain = chart.domain();
    let tol = 1e-12 * domain.side();
    let contained = sectors.iter().all(|s| {
        domain.contains_rect(&s.rect, tol) && s.rho_min >= cylinder.r_in && s.rho_max() <= cylinder.r_out
    });
    let disjoint = stack_disjoint(&sectors);
    let (num, den) =
        sectors.iter().fold((0.0, 0.0), |(n, d), s| (n + s.estimate.mean * s.measure(), d + s.measure()));
    let stack_top = sectors.iter().map(SectorRecord::rho_max).fold(cylinder.r_in, f64::max);
    Ok(CylinderReport {
        cylinder: *cylinder,
        sectors,
        bad_cells,
        stack_top,
        leftover,
        leftover_bound: config.r0 * cylinder.disk.measure(),
        disjoint,
        contained,
        weighted_average: if den > 0.0 { num / den } else { 0.0 },
    })
}

fn stack_disjoint(sectors: &[SectorRecord]) -> bool {
    for (i, a) in sectors.iter().enumerate() {
        for b in &sectors[i + 1..] {
            let rho_overlap = a.rho_min < b.rho_max() && b.rho_min < a.rho_max();
            if rho_overlap && a.rect.overlaps(&b.rect) {
                return false;
            }
        }
    }
    true
}

/// The chart of a cylinder, for drawing or sampling its stack.
pub fn cylinder_chart(cylinder: &Cylinder) -> Result<CubeChart, CoveringError> {
    cube_to_disk(&cylinder.disk)
}
