//! Higher-order quantum reservoir computing: small spin-system reservoirs evolved
//! exactly, coupled by classical linear feedback and read out linearly.

// Negated comparisons are how NaN gets rejected; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod forecast;
pub mod innate;
pub mod learning;
pub mod num;
pub mod qcore;
pub mod reservoir;
pub mod seeds;
pub mod series;
pub mod tasks;

pub use error::{Error, Result};
pub use num::Real;

/// Double-precision aliases for the common case.
pub type DensityMatrix = qcore::DensityMatrix<f64>;
pub type IsingHamiltonian = qcore::IsingHamiltonian<f64>;
pub type QrConfig = reservoir::QrConfig<f64>;
pub type HqrSystem = reservoir::HqrSystem<f64>;
pub type ReadoutModel = learning::ReadoutModel<f64>;
pub type Series = series::Series<f64>;
