//! Numerical laboratory for harmonic extensions of quasiconformal maps on
//! hyperbolic space.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: the upper half-space model `H^n`, isometries, geodesic
//!   polar and horocyclic coordinates.
//! * [`boundary`]: quasiconformal boundary maps of `R^{n-1} ∪ {∞}` and their
//!   Euclidean energy density and distortion.
//! * [`extension`]: the Gaussian-average good extension `G_a(f)` and its
//!   naturality checks.
//! * [`tension`]: energy density, tension field and distortion of maps
//!   `H^n → H^n` computed from finite-difference jets.
//! * [`heatflow`]: explicit harmonic map heat flow on a truncated box.
//! * [`heatkernel`]: the radial heat kernel and its ballistic annulus.
//! * [`covering`]: sphere covers, sectors and the annulus-covering pipeline.
//! * [`greens`]: Green's function of the ball and the distance Laplacian check.
//!
//! The crate is `no_std` (with `alloc`) when built without the `std` feature.
//! The `parallel` feature distributes node loops over a rayon pool; results do
//! not depend on the number of workers.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::too_many_arguments)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Float methods come from `num_traits` only without `std`.
#![cfg_attr(feature = "std", allow(unused_imports))]

extern crate alloc;

pub mod boundary;
pub mod calibration;
pub mod covering;
pub mod extension;
pub mod geometry;
pub mod greens;
pub mod heatflow;
pub mod heatkernel;
pub mod linalg;
pub mod quadrature;
pub mod tension;

mod par;

pub use boundary::{BoundaryError, BoundaryMap, CatalogMap};
pub use extension::{ExtensionError, GoodExtension, QuadratureRule};
pub use geometry::{
    BoundaryPoint, GeometryError, HorocyclicCoord, Isometry, IsometryFixingInfinity, Point, PolarFrame,
};
pub use linalg::{Matrix, Vector, MAX_DIM};
pub use tension::{HyperMap, MapError};

pub(crate) mod prelude {
    pub use alloc::boxed::Box;
    pub use alloc::string::{String, ToString};
    pub use alloc::sync::Arc;
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    #[allow(unused_imports)]
    pub use num_traits::Float;
}
