use harmext_core::boundary::{
    boundary_energy_density, conjugate_boundary, distortion_estimate, BoundaryMap, CatalogMap,
};
use harmext_core::geometry::{BoundaryPoint, Isometry, IsometryFixingInfinity};
use harmext_core::linalg::{rotation_between, Matrix, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(x: &[f64]) -> Vector {
    Vector::from_slice(x)
}

/// Plain central differences, independent of the library's stencil.
fn jacobian_oracle(f: &dyn BoundaryMap, x: &Vector) -> [[f64; 2]; 2] {
    let h = 1e-6 * x.norm().max(1.0);
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let mut xp = *x;
        xp[c] += h;
        let mut xm = *x;
        xm[c] -= h;
        let fp = f.eval(&xp).unwrap();
        let fm = f.eval(&xm).unwrap();
        for r in 0..2 {
            j[r][c] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

/// Singular values of a 2×2 matrix from the invariants of `AᵀA`.
fn singular_values(j: [[f64; 2]; 2]) -> (f64, f64) {
    let fro: f64 = j.iter().flatten().map(|a| a * a).sum();
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
    (((fro + disc) / 2.0).sqrt(), ((fro - disc) / 2.0).max(0.0).sqrt())
}

fn samples(seed: u64, count: usize, half_width: f64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| v(&[rng.random_range(-half_width..half_width), rng.random_range(-half_width..half_width)]))
        .collect()
}

fn catalog() -> Vec<CatalogMap> {
    vec![
        CatalogMap::identity(2),
        CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0])).unwrap(),
        CatalogMap::linear(Matrix::from_rows(&[&[1.0, 0.7], &[-0.2, 1.5]])).unwrap(),
        CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap(),
        CatalogMap::radial_stretch(2.0, v(&[0.3, -0.4])).unwrap(),
        CatalogMap::shear(0.8, 2).unwrap(),
        CatalogMap::compose(
            CatalogMap::shear(0.5, 2).unwrap(),
            CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap(),
        )
        .unwrap(),
    ]
}

#[test]
fn evaluation_examples() {
    let x = v(&[0.37, -12.5]);
    assert_eq!(CatalogMap::identity(2).eval(&x).unwrap(), x);
    let lin = CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0])).unwrap();
    assert_eq!(lin.eval(&v(&[1.0, 1.0])).unwrap(), v(&[2.0, 1.0]));
    let rs = CatalogMap::radial_stretch(2.0, Vector::zeros(2)).unwrap();
    assert_eq!(rs.eval(&v(&[1.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
    assert_eq!(rs.eval(&v(&[2.0, 0.0])).unwrap(), v(&[4.0, 0.0]));
}

#[test]
fn energy_examples() {
    for x in samples(1, 20, 5.0) {
        let id = CatalogMap::identity(2);
        assert!((boundary_energy_density(&id, &x).unwrap() - 2.0).abs() < 1e-9);
        let lin = CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0])).unwrap();
        assert!((boundary_energy_density(&lin, &x).unwrap() - 5.0).abs() < 1e-9);
    }
    // |x| x at (1, 0): radial derivative 2, tangential 1.
    let rs = CatalogMap::radial_stretch(2.0, Vector::zeros(2)).unwrap();
    let x = v(&[1.0, 0.0]);
    let j = jacobian_oracle(&rs, &x);
    let oracle: f64 = j.iter().flatten().map(|a| a * a).sum();
    assert!((oracle - 5.0).abs() < 1e-6);
    assert!((boundary_energy_density(&rs, &x).unwrap() - oracle).abs() < 1e-6);
}

#[test]
fn energy_matches_oracle_across_catalog() {
    for f in catalog() {
        for x in samples(2, 25, 3.0) {
            if x.norm() < 0.05 {
                continue;
            }
            let j = jacobian_oracle(&f, &x);
            let oracle: f64 = j.iter().flatten().map(|a| a * a).sum();
            let e = boundary_energy_density(&f, &x).unwrap();
            assert!(e > 0.0, "{f:?} at {x:?}");
            assert!((e - oracle).abs() < 1e-5 * oracle.max(1.0), "{f:?} at {x:?}: {e} vs {oracle}");
        }
    }
}

#[test]
fn distortion_examples() {
    let x = v(&[0.4, 1.1]);
    assert!((distortion_estimate(&CatalogMap::identity(2), &x).unwrap() - 1.0).abs() < 1e-9);
    let lin = CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0])).unwrap();
    assert!((distortion_estimate(&lin, &x).unwrap() - 2.0).abs() < 1e-9);
    let rs = CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap();
    for x in samples(3, 50, 4.0) {
        let r = x.norm();
        let (big, small) = singular_values(jacobian_oracle(&rs, &x));
        assert!((big - 1.5 * r.sqrt()).abs() < 1e-6 * big.max(1.0));
        assert!((small - r.sqrt()).abs() < 1e-6 * big.max(1.0));
        assert!((distortion_estimate(&rs, &x).unwrap() - 1.5).abs() < 1e-4);
    }
}

#[test]
fn measured_distortion_within_declared() {
    for f in catalog() {
        let declared = f.declared_distortion();
        for x in samples(4, 40, 3.0) {
            if x.norm() < 1e-3 {
                continue;
            }
            let k = distortion_estimate(&f, &x).unwrap();
            assert!(k >= 1.0 - 1e-12);
            assert!(k <= declared * (1.0 + 1e-3), "{f:?} at {x:?}: {k} > {declared}");
        }
    }
}

#[test]
fn finite_fixed_points_are_fixed() {
    let center = v(&[0.3, -0.4]);
    let rs = CatalogMap::radial_stretch(1.7, center).unwrap();
    let rs = rs.with_anchor(BoundaryPoint::Finite(center)).unwrap();
    assert_eq!(rs.fixed_point(), BoundaryPoint::Finite(center));
    assert!(rs.eval(&center).unwrap().max_abs_diff(&center) < 1e-10);
    let anchored = CatalogMap::linear(Matrix::diagonal(&[2.0, 1.0]))
        .unwrap()
        .with_anchor(BoundaryPoint::finite(&[0.0, 0.0]))
        .unwrap();
    assert!(anchored.eval(&Vector::zeros(2)).unwrap().norm() < 1e-10);
}

#[test]
fn conjugation_by_identity_and_of_identity() {
    let f = CatalogMap::shear(0.8, 2).unwrap();
    let same = conjugate_boundary(f.clone(), Isometry::identity(3), Isometry::identity(3));
    let iso: Isometry = IsometryFixingInfinity::new(
        1.7,
        rotation_between(&v(&[1.0, 0.0]), &v(&[0.6, 0.8])).unwrap(),
        v(&[0.5, -2.0]),
    )
    .unwrap()
    .into();
    let id = conjugate_boundary(CatalogMap::identity(2), iso.clone(), iso);
    for x in samples(5, 20, 3.0) {
        assert!(same.eval(&x).unwrap().max_abs_diff(&f.eval(&x).unwrap()) < 1e-14);
        assert!(id.eval(&x).unwrap().max_abs_diff(&x) < 1e-12);
    }
}

#[test]
fn conjugation_preserves_distortion() {
    let similarity: Isometry = IsometryFixingInfinity::new(
        0.6,
        rotation_between(&v(&[1.0, 0.0]), &v(&[-0.28, 0.96])).unwrap(),
        v(&[1.0, 2.0]),
    )
    .unwrap()
    .into();
    let cases = [
        (CatalogMap::shear(0.8, 2).unwrap(), similarity.clone(), similarity),
        (
            CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap(),
            Isometry::inversion(3),
            Isometry::inversion(3),
        ),
    ];
    for (f, outer, inner) in cases {
        let g = conjugate_boundary(f.clone(), outer, inner.clone());
        for x in samples(6, 30, 2.0) {
            if x.norm() < 0.1 {
                continue;
            }
            let BoundaryPoint::Finite(y) = inner.apply_boundary(&BoundaryPoint::Finite(x)) else {
                panic!("sample mapped to infinity");
            };
            let (a, b) = singular_values(jacobian_oracle(&f, &x));
            let oracle = a / b;
            let k = distortion_estimate(&g, &y).unwrap();
            assert!((k - oracle).abs() < 1e-6 * oracle, "{f:?} at {x:?}: {k} vs {oracle}");
        }
    }
}

#[test]
fn composition_is_submultiplicative() {
    let outer = CatalogMap::shear(0.9, 2).unwrap();
    let inner = CatalogMap::radial_stretch(1.5, Vector::zeros(2)).unwrap();
    let comp = CatalogMap::compose(outer.clone(), inner.clone()).unwrap();
    for x in samples(7, 60, 3.0) {
        if x.norm() < 1e-3 {
            continue;
        }
        let k = distortion_estimate(&comp, &x).unwrap();
        let bound = distortion_estimate(&outer, &inner.eval(&x).unwrap()).unwrap()
            * distortion_estimate(&inner, &x).unwrap();
        assert!(k <= bound * (1.0 + 1e-3), "{k} > {bound}");
    }
}

#[test]
fn unknown_names_rejected() {
    assert!(CatalogMap::by_name("radial_stretch", 2, 1.5, 0.0).is_ok());
    assert!(CatalogMap::by_name("spiral", 2, 1.5, 0.0).is_err());
    assert!(CatalogMap::radial_stretch(0.0, Vector::zeros(2)).is_err());
}

proptest! {
    #[test]
    fn radial_stretch_distortion_is_k(
        k in 1.0f64..3.0,
        x in -50.0f64..50.0,
        y in -50.0f64..50.0,
    ) {
        prop_assume!(x.hypot(y) > 1e-2);
        let f = CatalogMap::radial_stretch(k, Vector::zeros(2)).unwrap();
        let measured = distortion_estimate(&f, &v(&[x, y])).unwrap();
        prop_assert!((measured - k).abs() < 1e-4, "{} vs {}", measured, k);
    }
}
