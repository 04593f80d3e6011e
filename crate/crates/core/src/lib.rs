//! Closed-form Markov kernels for reaction-diffusion equations with convex
//! quadratic reaction rate,
//!
//! ```text
//! ∂φ/∂t = Δφ - (½ zᵀQz + rᵀz + s) φ,
//! ```
//!
//! obtained from their Weyl symbols, together with independent numerical
//! oracles, kernel propagation on grids, and a Sinkhorn solver for the
//! associated discrete Schrödinger bridge.
//!
//! The numerical core is generic over [`Scalar`] (`f32` and `f64`); the
//! aliases below fix it to `f64`, which is what verification and the CLI use.

// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod error;
pub mod kernels;
pub mod profile;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod verify;
pub mod weyl;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use weyl::{AffineSign, AFFINE_SIGN};

pub type QuadraticRate64 = spectral::QuadraticRate<f64>;
pub type SpectralData64 = spectral::SpectralData<f64>;
pub type TimeWindow64 = weyl::TimeWindow<f64>;
pub type SymbolPoint64 = weyl::SymbolPoint<f64>;
pub type KernelEvaluator64 = kernels::KernelEvaluator<f64>;
pub type Grid64 = quadrature::Grid<f64>;
pub type Field64 = quadrature::Field<f64>;
pub type BridgeProblem64 = bridge::BridgeProblem<f64>;
pub type BridgeSolution64 = bridge::BridgeSolution<f64>;

pub type QuadraticRate32 = spectral::QuadraticRate<f32>;
pub type SpectralData32 = spectral::SpectralData<f32>;
pub type TimeWindow32 = weyl::TimeWindow<f32>;
pub type KernelEvaluator32 = kernels::KernelEvaluator<f32>;
pub type Grid32 = quadrature::Grid<f32>;
pub type Field32 = quadrature::Field<f32>;
