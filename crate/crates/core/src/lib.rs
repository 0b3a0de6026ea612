//! Weighted Bergman projections on the unit disc for radial weights
//! μ(z) = M(|z|)(1−|z|²)^α.
//!
//! Numerical routines are generic over [`scalar::Scalar`] (`f32` or `f64`).
//! The `*F64` aliases below fix the double-precision instantiation that the
//! CLI and the acceptance suite use.

pub mod acceptance;
pub mod analysis;
pub mod error;
pub mod format;
pub mod funcspace;
pub mod kernel;
pub mod moments;
pub mod projector;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod sum;
pub mod weights;

pub use error::{BergmanError, Result};
pub use scalar::Scalar;
pub use sum::Precision;

pub type Complex64 = num_complex::Complex<f64>;

pub type WeightSpecF64 = weights::WeightSpec<f64>;
pub type GaussJacobiRuleF64 = quadrature::GaussJacobiRule<f64>;
pub type MomentTableF64 = moments::MomentTable<f64>;
pub type KernelSeriesF64 = kernel::KernelSeries<f64>;
pub type PolarGridF64 = funcspace::PolarGrid<f64>;
pub type GridFunctionF64 = funcspace::GridFunction<f64>;
pub type TaylorCoeffsF64 = funcspace::TaylorCoeffs<f64>;
pub type FnSpecF64 = funcspace::FnSpec<f64>;
pub type MultiplierSeqF64 = projector::MultiplierSeq<f64>;
pub type LemmaQuantitiesF64 = analysis::LemmaQuantities<f64>;
pub type BvReportF64 = analysis::BvReport<f64>;

pub type WeightSpecF32 = weights::WeightSpec<f32>;
pub type GaussJacobiRuleF32 = quadrature::GaussJacobiRule<f32>;
pub type MomentTableF32 = moments::MomentTable<f32>;
pub type PolarGridF32 = funcspace::PolarGrid<f32>;
