use super::{GeometryError, Point};
use crate::linalg::Vector;
use crate::prelude::*;

/// Horocyclic coordinates `(b, h)` for the point `(b, e^{-h})`: `h` is the
/// signed distance from the horosphere at `∞` through `(0, …, 0, 1)`,
/// increasing downwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorocyclicCoord {
    pub base: Vector,
    pub signed_height: f64,
}

impl HorocyclicCoord {
    pub fn new(base: Vector, signed_height: f64) -> Self {
        HorocyclicCoord { base, signed_height }
    }

    pub fn to_point(&self) -> Result<Point, GeometryError> {
        Point::from_coords(self.base.push((-self.signed_height).exp()))
    }

    pub fn from_point(p: &Point) -> Self {
        HorocyclicCoord { base: p.horizontal(), signed_height: -p.height().ln() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_point_has_height_zero() {
        let c = HorocyclicCoord::new(Vector::zeros(2), 0.0);
        assert_eq!(c.to_point().unwrap(), Point::base(3));
        let down = HorocyclicCoord::new(Vector::zeros(2), 1.0).to_point().unwrap();
        assert!((down.height() - (-1.0f64).exp()).abs() < 1e-16);
    }
}
