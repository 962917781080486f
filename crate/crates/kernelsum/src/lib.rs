//! Fast summation of radial kernels by slicing.
//!
//! Computes s_m = Σ_n w_n K(x_n, y_m) for radial kernels K(x, y) = F(‖x−y‖)
//! in O(P·(N+M)) instead of O(N·M). The d-dimensional kernel is written as a
//! sphere average of a one-dimensional kernel applied to projections; each of
//! the P projected problems is solved by truncated Fourier summation on
//! non-equispaced nodes, by an exact sorting pass, or by a combination of
//! both, depending on the kernel.
//!
//! See the `book/` directory for a guided tour, and [`slicer::sliced_kernel_sum`]
//! for the main entry point.

// `!(x > 0.0)`-style comparisons are deliberate: they reject NaN along
// with the out-of-domain sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod error;
pub mod fastsum;
pub mod kernels;
pub mod nufft;
pub mod points;
pub mod slicer;
pub mod specfun;

pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelSpec};
pub use points::PointSet;
