use harmext_core::covering::{cover_annulus, tension_squared, CoverConfig};
use harmext_core::{Point, PolarFrame};

use super::{ensure_dir, is_harmonic, Context};
use crate::config::positive;
use crate::output::{num, stack_svg, write_csv};
use crate::{Check, LabError, Outcome};

/// Good-sector stacks over the cylinders of the main annulus, seen from the
/// base point `(0, 0, 1)`.
pub fn cover(ctx: &Context) -> Result<Outcome, LabError> {
    let cfg = &ctx.config;
    cfg.expect_command("cover")?;
    let name = ctx.map_name("radial_stretch");
    let ext = ctx.extension(ctx.boundary_map("radial_stretch")?)?;

    let mut config = CoverConfig::new(
        positive("t", cfg.t.unwrap_or(4.0))?,
        positive("eps", cfg.eps.unwrap_or(0.1))?,
        positive("delta", cfg.delta.unwrap_or(0.05))?,
    );
    config.r0 = positive("r0", cfg.r0.unwrap_or(config.r0))?;
    config.samples = cfg.samples.unwrap_or(64).max(2);
    config.max_cylinders = Some(cfg.max_cylinders.unwrap_or(2).max(1));
    config.seed = ctx.seed();
    config.annulus()?;

    let frame = PolarFrame::standard(Point::base(3));
    let report = cover_annulus(&frame, &config, &tension_squared(&ext))?;

    ensure_dir(&ctx.out)?;
    let rows = report.cylinders.iter().map(|c| {
        vec![
            c.cylinder.index.to_string(),
            c.sectors.len().to_string(),
            num(c.stack_top - c.cylinder.r_in),
            num(c.leftover),
            num(c.leftover_bound),
            c.bad_cells.to_string(),
            num(c.weighted_average),
        ]
    });
    let header = [
        "cylinder",
        "sector_count",
        "stack_height",
        "leftover",
        "leftover_bound",
        "bad_cells",
        "weighted_tension",
    ];
    let mut files = vec![write_csv(&ctx.path("cover.csv"), &header, rows)?];
    if cfg.svg.unwrap_or(true) {
        if let Some(first) = report.cylinders.first() {
            let offset = first.cylinder.disk.radius() / 3.0;
            let path = ctx.path("cover.svg");
            std::fs::write(&path, stack_svg(first, config.r0, offset))?;
            files.push(path);
        }
    }

    let floor =
        report.cylinders.iter().flat_map(|c| &c.sectors).map(|s| s.estimate.std_error).fold(0.0, f64::max);
    let mut checks = vec![
        Check::new("disjoint-stacks", report.disjoint(), "sectors disjoint and inside their cylinders"),
        Check::new("leftover-bound", report.leftover_ok(), "leftover ≤ r0·|D_i| per cylinder"),
        Check::new(
            "weighted-average",
            report.weighted_average <= config.delta + 2.0 * floor,
            format!("weighted |τ|² {:e} against δ {}", report.weighted_average, config.delta),
        ),
    ];
    if is_harmonic(&name) {
        checks.push(Check::new("all-good", report.all_good(), format!("{} sectors", report.sector_count())));
    }
    Ok(Outcome { files, checks })
}
