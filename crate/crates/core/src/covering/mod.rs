//! Covers of the sphere of directions, cylinders over the main annulus of
//! the heat kernel, admissible sectors and the stacking procedure that
//! almost fills each cylinder with sectors of small average tension.
//!
//! Everything here is for `H³`, whose sphere of directions is `S²`.

mod chart;
mod pipeline;
mod sector;
mod sphere;

pub use chart::{
    admissibility_check, cube_to_disk, partition_cube, AdmissibilityCertificate, AdmissibilityFailure,
    AngularSet, CubeChart, Partition, Rect, MAX_CHART_RADIUS,
};
pub use pipeline::{
    build_cylinders, cover_annulus, cylinder_chart, cylinders_containing, CoverConfig, CoverReport, Cylinder,
    CylinderReport, SectorRecord,
};
pub use sector::{find_good_height, sector_average, Estimate, HeightOutcome, HeightSearch, Sector};
pub use sphere::{
    besicovitch_cover, from_angles, random_unit, sphere_distance, MultiplicityReport, SphereCover,
    SphericalDisk,
};

use crate::geometry::Point;
use crate::heatkernel::HeatKernelError;
use crate::tension::{tension_field, HyperMap, MapError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoveringError {
    #[error("coverings are implemented for n = 3 only, got {0}")]
    UnsupportedDimension(usize),
    #[error("disk radius must lie in (0, π], got {0}")]
    BadRadius(f64),
    #[error("disk radius {0} is too large for the cube chart")]
    ChartTooLarge(f64),
    #[error("partition needs side·e^R' ≥ e, got {ratio}")]
    PartitionTooCoarse { ratio: f64 },
    #[error("sector needs positive ρ_min and height, got {rho_min} and {height}")]
    BadSector { rho_min: f64, height: f64 },
    #[error("angular set is empty")]
    EmptyAngularSet,
    #[error("height cap must be at least 1, got {0}")]
    BadHeightCap(f64),
    #[error("inner annulus radius {0} is not positive")]
    AnnulusTooSmall(f64),
    #[error("more than {0} sectors in one cylinder")]
    TooManySectors(usize),
    #[error(transparent)]
    HeatKernel(#[from] HeatKernelError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// `p ↦ |τ(F)(p)|²`.
pub fn tension_squared<M: HyperMap + ?Sized>(
    map: &M,
) -> impl Fn(&Point) -> Result<f64, MapError> + Sync + '_ {
    move |p| {
        let (_, norm) = tension_field(map, p)?;
        Ok(norm * norm)
    }
}
