use harmext_core::calibration::C3_TAIL;
use harmext_core::heatkernel::{annulus_tail_mass, mass_density, peak_location, total_mass, AnnulusSpec};

use super::{ensure_dir, Context};
use crate::config::positive;
use crate::output::{num, write_csv};
use crate::{Check, LabError, Outcome};

/// Radial mass profile of `H(·, t)` in `H³` and the tail-mass table of the
/// main annuli.
pub fn kernel(ctx: &Context) -> Result<Outcome, LabError> {
    let cfg = &ctx.config;
    cfg.expect_command("kernel")?;
    let t = positive("t", cfg.t.unwrap_or(16.0))?;
    let eps = positive("eps", cfg.eps.unwrap_or(0.1))?;
    let step = positive("rho_step", cfg.rho_step.unwrap_or(0.25))?;
    let spec = AnnulusSpec::for_tolerance(3, t, eps, C3_TAIL)?;

    ensure_dir(&ctx.out)?;
    let top = 2.0 * t + 8.0 * t.sqrt() + 4.0;
    let count = (top / step).ceil() as usize;
    let profile = (0..=count).map(|k| {
        let rho = k as f64 * step;
        let inside = rho >= spec.r_in && rho <= spec.r_out;
        vec![num(rho), num(mass_density(rho, t)), (inside as u8).to_string()]
    });
    let profile_file =
        write_csv(&ctx.path("kernel_profile.csv"), &["rho", "density", "in_annulus"], profile)?;

    let times = cfg.times.clone().unwrap_or_else(|| vec![4.0, 16.0, 64.0]);
    let tolerances = cfg.tolerances.clone().unwrap_or_else(|| vec![0.1, 0.01]);
    let mut pairs: Vec<(f64, f64)> =
        times.iter().flat_map(|&t| tolerances.iter().map(move |&e| (t, e))).collect();
    if !pairs.contains(&(t, eps)) {
        pairs.push((t, eps));
    }
    let mut rows = Vec::new();
    let mut tails_ok = true;
    let mut worst = 0.0f64;
    for (t, eps) in pairs {
        let a = AnnulusSpec::for_tolerance(3, positive("t", t)?, positive("eps", eps)?, C3_TAIL)?;
        let tail = annulus_tail_mass(t, a.l)?;
        tails_ok &= tail < eps;
        worst = worst.max(tail / eps);
        rows.push(vec![
            num(t),
            num(eps),
            num(a.l),
            num(a.r_in),
            num(a.r_out),
            num(tail),
            ((tail < eps) as u8).to_string(),
        ]);
    }
    let tail_file = write_csv(
        &ctx.path("kernel_tail.csv"),
        &["t", "eps", "l", "r_in", "r_out", "tail_mass", "holds"],
        rows,
    )?;

    let mass = total_mass(t)?;
    let peak = peak_location(t);
    let checks = vec![
        Check::new("unit-mass", (mass - 1.0).abs() <= 1e-6, format!("total mass {mass}")),
        Check::new("tail-below-eps", tails_ok, format!("largest tail/ε {worst}")),
        Check::new("ballistic-peak", (peak - 2.0 * t).abs() < 2.0 * t.sqrt(), format!("peak at ρ = {peak}")),
    ];
    Ok(Outcome { files: vec![profile_file, tail_file], checks })
}
