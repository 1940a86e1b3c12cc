use harmext_core::boundary::CatalogMap;
use harmext_core::calibration::C_GREEN;
use harmext_core::extension::GoodExtension;
use harmext_core::geometry::{distance, Isometry, IsometryFixingInfinity, Point};
use harmext_core::greens::{
    calibrate_green_constant, distance_laplacian_check, epsilon0, from_ball, green, green_by_quadrature,
    green_lower_bound_check, green_volume_integral, to_ball, GreensError,
};
use harmext_core::linalg::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * k as f64);
    }
    s * h / 3.0
}

/// `(1/n) ∫_ρ^r (1 − s²)^{n−2} / s^{n−1} ds` on a log-spaced variable.
fn green_oracle(n: usize, r: f64, rho: f64) -> f64 {
    if rho >= r {
        return 0.0;
    }
    // s = e^u, ds = s du.
    let f = |u: f64| {
        let s = u.exp();
        (1.0 - s * s).powi(n as i32 - 2) / s.powi(n as i32 - 2)
    };
    simpson(f, rho.ln(), r.ln(), 20_000) / n as f64
}

#[test]
fn closed_form_values() {
    assert!((green(3, 1.0, 0.5).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    for k in 1..100 {
        let rho = k as f64 / 100.0;
        let exact = (1.0 - rho).powi(2) / (3.0 * rho);
        assert!((green(3, 1.0, rho).unwrap() - exact).abs() < 1e-14 * exact.max(1.0));
        assert!((green_by_quadrature(3, 1.0, rho) - exact).abs() < 1e-10);
    }
    assert_eq!(green(3, 0.6, 0.6).unwrap(), 0.0);
    assert_eq!(green(3, 0.6, 0.8).unwrap(), 0.0);
    assert_eq!(green(3, 1.0, 0.0), Err(GreensError::AtCenter));
    assert!(green(3, 1.5, 0.5).is_err());
}

#[test]
fn quadrature_matches_oracle_in_other_dimensions() {
    for n in [2, 4, 5] {
        for (r, rho) in [(1.0, 0.1), (0.9, 0.5), (0.5, 0.05)] {
            let g = green(n, r, rho).unwrap();
            let o = green_oracle(n, r, rho);
            assert!((g - o).abs() < 1e-9 * o.max(1.0), "n {n} r {r} ρ {rho}: {g} vs {o}");
        }
    }
}

#[test]
fn green_is_nonincreasing() {
    for n in [3, 4] {
        let mut previous = f64::INFINITY;
        for k in 1..=200 {
            let rho = 0.9 * k as f64 / 200.0;
            let g = green(n, 0.9, rho).unwrap();
            assert!(g >= 0.0 && g <= previous);
            previous = g;
        }
    }
}

#[test]
fn lower_bound_for_the_unit_ball() {
    // For n = 3, r = 1 the ratio g ρ / (1 − ρ²)² is 1/(3(1 + ρ)²).
    for k in 1..1000 {
        let rho = k as f64 / 1000.0;
        let c = green_lower_bound_check(3, 1.0, rho).unwrap();
        assert!(c.holds(), "{rho}: {c:?}");
        let ratio = c.lhs * rho / (1.0 - rho * rho).powi(2);
        assert!((ratio - 1.0 / (3.0 * (1.0 + rho).powi(2))).abs() < 1e-12);
    }
    let swept = calibrate_green_constant(3, 1.0, 10_000);
    assert!(swept >= C_GREEN && swept - C_GREEN < 1e-4, "{swept}");
    // Both sides vanish together at ρ = r = 1.
    let edge = green_lower_bound_check(3, 1.0, 1.0).unwrap();
    assert_eq!((edge.lhs, edge.rhs), (0.0, 0.0));
    // n = 4 on the unit ball has its own positive constant.
    let c4 = calibrate_green_constant(4, 1.0, 2000);
    assert!(c4 > 0.0 && c4 < C_GREEN, "{c4}");
}

#[test]
fn lower_bound_degenerates_inside_smaller_balls() {
    // g_r(r) = 0 while the right-hand side stays positive, so the swept
    // infimum shrinks with the sweep resolution.
    let coarse = calibrate_green_constant(4, 0.9, 100);
    let fine = calibrate_green_constant(4, 0.9, 10_000);
    assert!(fine < 0.02 * coarse, "{coarse} {fine}");
    assert!(!green_lower_bound_check(4, 0.9, 0.899).unwrap().holds());
}

/// `∫₀^r 3ρ² g_r / (1 − ρ²)³ dρ` for `n = 3`, from the closed form on
/// geometric panels towards `r`.
fn volume_oracle(r: f64) -> f64 {
    let f = |rho: f64| rho * (r - rho) * (1.0 - r * rho) / (r * (1.0 - rho * rho).powi(3));
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut gap = r / 2.0;
    while gap > 1e-12 {
        let hi = r - gap;
        total += simpson(f, lo, hi, 2000);
        lo = hi;
        gap /= 2.0;
    }
    total
}

#[test]
fn volume_integral_diverges_logarithmically() {
    let small = green_volume_integral(3, 0.1).unwrap();
    assert!(small > 0.0 && small < 1e-2, "{small}");
    let mut previous = small;
    for r in [0.9, 0.99, 0.999] {
        let v = green_volume_integral(3, r).unwrap();
        let o = volume_oracle(r);
        assert!((v - o).abs() < 1e-8 * o, "r {r}: {v} vs {o}");
        let log = (1.0 / (1.0 - r * r)).ln();
        assert!(v / log >= 3.0 * C_GREEN / 2.0, "r {r}: {}", v / log);
        assert!(v > previous);
        previous = v;
    }
    assert!(green_volume_integral(3, 1.0).is_err());
}

#[test]
fn epsilon0_arithmetic() {
    assert!((epsilon0(1.5, 8.0).unwrap() - 0.244_918_662_403_709).abs() < 1e-12);
    assert_eq!(epsilon0(1.5, 0.0), Err(GreensError::NonPositiveQ(0.0)));
    assert!(epsilon0(0.5, 1.0).is_err());
    let e = epsilon0(2.0, 0.3).unwrap();
    assert!((epsilon0(2.0, 0.6).unwrap() - 2.0 * e).abs() < 1e-16);
}

#[test]
fn cayley_map_is_an_isometry() {
    let ball_distance = |u: &Vector, v: &Vector| {
        let diff = (*u - *v).norm_sq();
        (1.0 + 2.0 * diff / ((1.0 - u.norm_sq()) * (1.0 - v.norm_sq()))).acosh()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let p = Point::new(
            &[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            rng.random_range(0.1..3.0),
        )
        .unwrap();
        let q = Point::new(
            &[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            rng.random_range(0.1..3.0),
        )
        .unwrap();
        let (u, v) = (to_ball(&p), to_ball(&q));
        assert!(u.norm() < 1.0);
        assert!((ball_distance(&u, &v) - distance(&p, &q)).abs() < 1e-10);
        assert!(from_ball(&u).unwrap().coords().max_abs_diff(p.coords()) < 1e-12);
    }
}

fn interior(seed: u64, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            Point::new(&x, rng.random_range(0.3f64..2.0)).unwrap()
        })
        .collect()
}

#[test]
fn distance_laplacian_of_equal_maps_is_skipped() {
    let iso = Isometry::inversion(3);
    let r = distance_laplacian_check(&iso, &iso, &Point::new(&[0.2, 0.1], 0.5).unwrap()).unwrap();
    assert!(r.skipped && r.holds());
}

#[test]
fn distance_between_isometries_is_subharmonic() {
    let a = Isometry::inversion(3);
    let rot = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
    let b = Isometry::from(IsometryFixingInfinity::new(1.5, rot, Vector::from_slice(&[0.4, 0.0])).unwrap());
    for p in interior(2, 50) {
        let r = distance_laplacian_check(&a, &b, &p).unwrap();
        assert!(!r.skipped);
        assert!(r.bound.abs() < 1e-3 * r.distance.max(1.0));
        assert!(r.laplacian >= -r.tolerance, "{p:?}: {r:?}");
    }
}

#[test]
fn distance_laplacian_between_extensions() {
    let f = GoodExtension::anchored(CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap()).unwrap();
    let g = GoodExtension::anchored(CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0])).unwrap()).unwrap();
    let points = interior(3, 100);
    let passed = points.iter().filter(|p| distance_laplacian_check(&f, &g, p).unwrap().holds()).count();
    assert!(passed >= 99, "{passed} of 100");
}
