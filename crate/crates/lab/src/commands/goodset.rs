use harmext_core::tension::good_set_membership;
use harmext_core::{BoundaryMap, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ensure_dir, Context};
use crate::config::positive;
use crate::output::{num, write_csv};
use crate::{Check, LabError, Outcome};

/// Fraction of sampled points of the unit disk lying in the good set at
/// each height.
pub fn goodset(ctx: &Context) -> Result<Outcome, LabError> {
    let cfg = &ctx.config;
    cfg.expect_command("goodset")?;
    let map = ctx.boundary_map("radial_stretch")?;
    let k = map.declared_distortion();
    let ext = ctx.extension(map)?;
    let eps = positive("eps", cfg.eps.unwrap_or(0.1))?;
    let mut heights = cfg.heights.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]);
    for &s in &heights {
        positive("heights", s)?;
    }
    heights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let count = cfg.points.unwrap_or(150).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
    let mut xs = Vec::with_capacity(count);
    while xs.len() < count {
        let x: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if x[0] * x[0] + x[1] * x[1] <= 1.0 {
            xs.push(x);
        }
    }

    let mut fractions = Vec::with_capacity(heights.len());
    for &s in &heights {
        let mut good = 0;
        for x in &xs {
            if good_set_membership(&ext, k, eps, &Point::new(&x[..], s)?)?.all() {
                good += 1;
            }
        }
        fractions.push((s, good));
    }
    ensure_dir(&ctx.out)?;
    let rows = fractions
        .iter()
        .map(|&(s, good)| vec![num(s), good.to_string(), count.to_string(), num(good as f64 / count as f64)]);
    let file = write_csv(&ctx.path("goodset.csv"), &["s", "good", "total", "fraction"], rows)?;

    let trend = fractions.windows(2).all(|w| w[1].1 >= w[0].1);
    let listing: Vec<String> = fractions.iter().map(|(_, g)| g.to_string()).collect();
    let checks = vec![Check::new(
        "nondecreasing-towards-boundary",
        trend,
        format!("good counts {} of {count}", listing.join(", ")),
    )];
    Ok(Outcome { files: vec![file], checks })
}
