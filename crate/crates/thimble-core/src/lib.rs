//! Relative periods of the Landau–Ginzburg fibration `W = t1 + t2 + 1/(t1 t2)`
//! and the affine structures they induce on its base.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of
//! its inputs; the companion `thimble-lab` crate adds IO and the command line.
//!
//! Layout, bottom up:
//!
//! * [`numkernel`] adaptive Gauss–Kronrod contour quadrature, cubic roots,
//!   bisection and square-root branch tracking.
//! * [`fibration`] branch points, fiber sheets and the density of the form.
//! * [`homology`] exact integer model of `H1(E0, Z)`.
//! * [`periods`] cycle periods, thimble integrals and numeric monodromy.
//! * [`affine_syz`] affine coordinates, rays and the triple point.
//! * [`cps_model`] the exact cut-and-glue model.
//! * [`mirror_atlas`] torus and immersed charts of the mirror.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod affine_syz;
pub mod cps_model;
pub mod fibration;
pub mod homology;
pub mod mirror_atlas;
pub mod numkernel;
pub mod periods;
mod transport;

pub use num_complex::Complex64;
pub use num_rational::Rational64;
