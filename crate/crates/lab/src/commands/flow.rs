use harmext_core::heatflow::{init_flow, run, FlowBox, RunConfig};

use super::{ensure_dir, is_harmonic, Context};
use crate::config::positive;
use crate::output::{num, write_csv};
use crate::{Check, LabError, Outcome};

/// Relative noise band for the decay check.
const BAND: f64 = 0.05;
/// Harmonic data must stay within this of its start.
const STATIONARY: f64 = 1e-3;

/// Harmonic map heat flow from `𝒢_∞(f)` with a frozen outer layer.
pub fn flow(ctx: &Context) -> Result<Outcome, LabError> {
    let cfg = &ctx.config;
    cfg.expect_command("flow")?;
    let name = ctx.map_name("radial_stretch");
    let ext = ctx.extension(ctx.boundary_map("radial_stretch")?)?;
    let bounds = FlowBox::new(
        3,
        positive("half_width", cfg.half_width.unwrap_or(2.0))?,
        positive("s_lo", cfg.s_lo.unwrap_or(0.25))?,
        positive("s_hi", cfg.s_hi.unwrap_or(4.0))?,
    )
    .map_err(|e| LabError::Config(e.to_string()))?;
    let resolution = cfg.resolution.unwrap_or(17);
    let grid = init_flow(&ext, bounds, resolution).map_err(|e| LabError::Config(e.to_string()))?;
    let schedule = RunConfig {
        t_end: positive("t_end", cfg.t_end.unwrap_or(1.0))?,
        dt: cfg.dt.map(|dt| positive("dt", dt)).transpose()?,
        record_every: cfg.record_every.unwrap_or(20).max(1),
    };
    let out = run(grid, &schedule)?;

    ensure_dir(&ctx.out)?;
    let rows = out
        .trace
        .samples
        .iter()
        .map(|s| vec![num(s.t), num(s.sup_tension), num(s.sup_drift), num(s.mean_energy)]);
    let file = write_csv(&ctx.path("flow.csv"), &["t", "sup_tension", "sup_drift", "mean_energy"], rows)?;

    let trace = &out.trace;
    let first = trace.initial().map_or(0.0, |s| s.sup_tension);
    let last = trace.last().map_or(0.0, |s| s.sup_tension);
    let mut checks = vec![Check::new(
        "no-abort",
        out.error.is_none(),
        out.error.as_ref().map_or_else(|| format!("{} steps", out.steps), |e| e.to_string()),
    )];
    if is_harmonic(&name) {
        checks.push(Check::new(
            "stationary",
            trace.samples.iter().all(|s| s.sup_tension <= STATIONARY) && trace.sup_drift() <= STATIONARY,
            format!("sup |τ| {last:e}, drift {:e}", trace.sup_drift()),
        ));
    } else {
        checks.push(Check::new("decay", trace.decayed(), format!("sup |τ| {first:e} -> {last:e}")));
        checks.push(Check::new(
            "bounded-by-initial",
            trace.bounded_by_initial(BAND * first),
            format!("band {}", BAND * first),
        ));
    }
    checks.push(Check::new(
        "finite-drift",
        trace.sup_drift().is_finite(),
        format!("sup drift {:e}", trace.sup_drift()),
    ));
    Ok(Outcome { files: vec![file], checks })
}
