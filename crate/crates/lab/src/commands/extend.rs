use harmext_core::tension::local_report;
use harmext_core::Point;

use super::{ensure_dir, is_harmonic, Context};
use crate::config::positive;
use crate::output::{num, write_csv};
use crate::{Check, LabError, Outcome};

/// Harmonic extensions must have `|τ|` below this on the whole grid.
const HARMONIC_TENSION: f64 = 1e-3;

/// `𝒢_∞(f)` with energy, distortion and `|τ|` on a grid that is uniform in
/// `x` and geometric in `s`.
pub fn extend(ctx: &Context) -> Result<Outcome, LabError> {
    let cfg = &ctx.config;
    cfg.expect_command("extend")?;
    let name = ctx.map_name("radial_stretch");
    let ext = ctx.extension(ctx.boundary_map("radial_stretch")?)?;
    let half = positive("half_width", cfg.half_width.unwrap_or(2.0))?;
    let s_lo = positive("s_lo", cfg.s_lo.unwrap_or(0.25))?;
    let s_hi = positive("s_hi", cfg.s_hi.unwrap_or(4.0))?;
    let m = cfg.resolution.unwrap_or(9);
    if m < 2 || s_hi <= s_lo {
        return Err(LabError::Config("need resolution ≥ 2 and s_hi > s_lo".into()));
    }

    let step = |k: usize| k as f64 / (m - 1) as f64;
    let mut rows = Vec::with_capacity(m * m * m);
    let mut sup_tension = 0.0f64;
    let mut finite = true;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let x = [-half + 2.0 * half * step(i), -half + 2.0 * half * step(j)];
                let s = s_lo * (s_hi / s_lo).powf(step(k));
                let p = Point::new(&x, s)?;
                let f = ext.evaluate(&p)?;
                let r = local_report(&ext, &p)?;
                finite &= f.coords().is_finite() && f.height() > 0.0 && r.tension_norm.is_finite();
                sup_tension = sup_tension.max(r.tension_norm);
                rows.push(vec![
                    num(x[0]),
                    num(x[1]),
                    num(s),
                    num(f[0]),
                    num(f[1]),
                    num(f[2]),
                    num(r.energy),
                    num(r.distortion),
                    num(r.tension_norm),
                ]);
            }
        }
    }
    ensure_dir(&ctx.out)?;
    let header = ["x1", "x2", "s", "F1", "F2", "F3", "energy", "distortion", "tension"];
    let file = write_csv(&ctx.path("extend.csv"), &header, rows)?;

    let mut checks = vec![Check::new("finite-values", finite, "all values finite, heights positive")];
    if is_harmonic(&name) {
        checks.push(Check::new(
            "harmonic-tension",
            sup_tension <= HARMONIC_TENSION,
            format!("sup |τ| = {sup_tension:e}"),
        ));
    }
    Ok(Outcome { files: vec![file], checks })
}
