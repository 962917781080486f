//! Compiles the book's chapters as rustdoc modules so `cargo test --doc`
//! executes every `rust` code block in `book/src/`. mdBook renders the same
//! markdown; this crate is what keeps the two from drifting apart.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/sliced-kernels.md")]
pub mod sliced_kernels {}

#[doc = include_str!("../../../book/src/gaussian-counterpart.md")]
pub mod gaussian_counterpart {}

#[doc = include_str!("../../../book/src/fourier-summation.md")]
pub mod fourier_summation {}

#[doc = include_str!("../../../book/src/sorting-summation.md")]
pub mod sorting_summation {}

#[doc = include_str!("../../../book/src/laplacian-decomposition.md")]
pub mod laplacian_decomposition {}

#[doc = include_str!("../../../book/src/slicing-driver.md")]
pub mod slicing_driver {}

#[doc = include_str!("../../../book/src/random-features.md")]
pub mod random_features {}

#[doc = include_str!("../../../book/src/benchmarking.md")]
pub mod benchmarking {}
