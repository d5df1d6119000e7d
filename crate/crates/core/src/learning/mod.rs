//! Linear readouts, error metrics and an echo state network baseline.

mod esn;
mod metrics;
mod ridge;

pub use esn::{esn_init, esn_step, spectral_radius, EsnModel};
pub use metrics::{nmse, nrmse, rmse, squared_correlation};
pub(crate) use ridge::solve_normal;
pub use ridge::{assemble_design, fit_series, ridge_fit, FeatureMap, ReadoutModel};

#[cfg(test)]
mod tests;
