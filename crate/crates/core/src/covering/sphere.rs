use core::f64::consts::PI;

use rand::Rng;

use super::CoveringError;
use crate::linalg::Vector;
use crate::prelude::*;

/// Great-circle distance between unit vectors of `R³`.
pub fn sphere_distance(a: &Vector, b: &Vector) -> f64 {
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    sin.atan2(a.dot(b))
}

/// Unit vector with polar angle `theta` (from `e₃`) and azimuth `phi`.
pub fn from_angles(theta: f64, phi: f64) -> Vector {
    Vector::from_slice(&[theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
}

fn to_angles(p: &Vector) -> (f64, f64) {
    let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let theta = rho.atan2(p[2]);
    let mut phi = p[1].atan2(p[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    (theta, phi)
}

/// Uniformly distributed point of `S²`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vector {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vector::from_slice(&[r * phi.cos(), r * phi.sin(), z])
}

/// A geodesic disk of `S²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDisk {
    center: Vector,
    radius: f64,
}

impl SphericalDisk {
    pub fn new(center: Vector, radius: f64) -> Result<Self, CoveringError> {
        if center.len() != 3 {
            return Err(CoveringError::UnsupportedDimension(center.len()));
        }
        if !(radius > 0.0 && radius <= PI) {
            return Err(CoveringError::BadRadius(radius));
        }
        let norm = center.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(CoveringError::BadRadius(radius));
        }
        Ok(SphericalDisk { center: center * (1.0 / norm), radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, p: &Vector) -> bool {
        sphere_distance(&self.center, p) <= self.radius
    }

    /// Solid angle `2π (1 − cos r)`.
    pub fn measure(&self) -> f64 {
        4.0 * PI * (0.5 * self.radius).sin().powi(2)
    }
}

#[derive(Debug, Clone, Copy)]
struct Ring {
    theta: f64,
    count: usize,
    first: usize,
    /// Azimuth of the first center.
    phase: f64,
}

/// Cover of `S²` by equal disks whose centers lie on latitude rings.
///
/// Rings are spaced at most one radius apart in polar angle and each ring
/// carries centers at most one radius apart, so every point is within about
/// `0.9` radii of a center. Disks are generated on demand; only the ring
/// table is stored, which keeps covers with millions of disks cheap.
#[derive(Debug, Clone)]
pub struct SphereCover {
    radius: f64,
    rings: Vec<Ring>,
    len: usize,
}

/// Disks of radius `e^{−R}/2` covering `S²`.
pub fn besicovitch_cover(r: f64) -> Result<SphereCover, CoveringError> {
    SphereCover::with_radius(0.5 * (-r).exp())
}

impl SphereCover {
    pub fn with_radius(radius: f64) -> Result<Self, CoveringError> {
        if !(radius > 0.0 && radius <= PI) {
            return Err(CoveringError::BadRadius(radius));
        }
        let gaps = (PI / radius).ceil().max(1.0) as usize;
        let mut rings = Vec::with_capacity(gaps + 1);
        let mut first = 0;
        for k in 0..=gaps {
            let theta = PI * k as f64 / gaps as f64;
            let count = if k == 0 || k == gaps {
                1
            } else {
                (2.0 * PI * theta.sin() / radius).ceil().max(1.0) as usize
            };
            let phase = if k % 2 == 1 { PI / count as f64 } else { 0.0 };
            rings.push(Ring { theta, count, first, phase });
            first += count;
        }
        Ok(SphereCover { radius, rings, len: first })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn disk(&self, index: usize) -> SphericalDisk {
        assert!(index < self.len, "disk index out of range");
        let k = self.rings.partition_point(|r| r.first <= index) - 1;
        let ring = &self.rings[k];
        let j = index - ring.first;
        let phi = ring.phase + 2.0 * PI * j as f64 / ring.count as f64;
        SphericalDisk { center: from_angles(ring.theta, phi), radius: self.radius }
    }

    /// Indices of disks whose centers lie within `reach` of `p`.
    pub fn centers_within(&self, p: &Vector, reach: f64) -> Vec<usize> {
        let (theta, phi) = to_angles(p);
        let mut out = Vec::new();
        let step = self.rings.get(1).map_or(PI, |r| r.theta);
        let lo = ((theta - reach) / step).floor().max(0.0) as usize;
        let hi = (((theta + reach) / step).ceil() as usize).min(self.rings.len() - 1);
        for ring in &self.rings[lo..=hi] {
            if (ring.theta - theta).abs() > reach + 1e-12 {
                continue;
            }
            let sin_prod = theta.sin() * ring.theta.sin();
            let cos_max =
                if sin_prod > 0.0 { (reach.cos() - theta.cos() * ring.theta.cos()) / sin_prod } else { -1.0 };
            let candidates: Vec<usize> = if ring.count == 1 || cos_max <= -1.0 {
                (0..ring.count).collect()
            } else if cos_max > 1.0 {
                Vec::new()
            } else {
                let width = cos_max.acos();
                let spacing = 2.0 * PI / ring.count as f64;
                let start = ((phi - width - ring.phase) / spacing).floor() as i64;
                let end = ((phi + width - ring.phase) / spacing).ceil() as i64;
                let span = (end - start + 1).min(ring.count as i64);
                (0..span).map(|m| (start + m).rem_euclid(ring.count as i64) as usize).collect()
            };
            for j in candidates {
                let idx = ring.first + j;
                if sphere_distance(self.disk(idx).center(), p) <= reach {
                    out.push(idx);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Indices of the disks containing `p`.
    pub fn containing(&self, p: &Vector) -> Vec<usize> {
        self.centers_within(p, self.radius)
    }

    /// Coverage and multiplicity over `samples` uniform random points.
    pub fn multiplicity_report<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> MultiplicityReport {
        let mut uncovered = 0;
        let mut max = 0;
        let mut total = 0;
        for _ in 0..samples {
            let p = random_unit(rng);
            let m = self.containing(&p).len();
            if m == 0 {
                uncovered += 1;
            }
            max = max.max(m);
            total += m;
        }
        MultiplicityReport {
            samples,
            uncovered,
            max_multiplicity: max,
            mean_multiplicity: total as f64 / samples.max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicityReport {
    pub samples: usize,
    pub uncovered: usize,
    pub max_multiplicity: usize,
    pub mean_multiplicity: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_basics() {
        let a = Vector::unit(3, 0);
        let b = Vector::unit(3, 1);
        assert!((sphere_distance(&a, &b) - PI / 2.0).abs() < 1e-15);
        assert!((sphere_distance(&a, &(-a)) - PI).abs() < 1e-15);
    }

    #[test]
    fn coarse_cover_is_small_and_complete() {
        let cover = SphereCover::with_radius(PI / 2.0).unwrap();
        assert!(cover.len() <= 10, "{}", cover.len());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rep = cover.multiplicity_report(2000, &mut rng);
        assert_eq!(rep.uncovered, 0);
    }

    #[test]
    fn neighbour_query_matches_brute_force() {
        let cover = besicovitch_cover(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = random_unit(&mut rng);
            let fast = cover.containing(&p);
            let slow: Vec<usize> = (0..cover.len()).filter(|&i| cover.disk(i).contains(&p)).collect();
            assert_eq!(fast, slow);
        }
    }
}
