use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::num::Real;

/// Coefficients of the order-`n` NARMA recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarmaParams {
    pub order: usize,
    pub kappa: f64,
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Raw inputs in `[0, 1]` are mapped linearly onto `[0, input_scale]`.
    pub input_scale: f64,
}

impl NarmaParams {
    pub fn new(order: usize) -> Self {
        Self { order, kappa: 0.3, eta: 0.05, gamma: 1.5, delta: 0.1, input_scale: 0.2 }
    }
}

/// Divergence threshold on `|y_k|`.
pub const NARMA_BOUND: f64 = 10.0;

/// Scales `raw` onto `[0, input_scale]` and runs the recurrence with zero pre-history.
///
/// Returns `(scaled_inputs, targets)`.
pub fn narma_series<T: Real>(params: &NarmaParams, raw: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let n = params.order;
    if n == 0 {
        return arg("NARMA order must be at least 1");
    }
    if raw.iter().any(|&u| !(u >= T::zero() && u <= T::one())) {
        return arg("NARMA raw inputs must lie in [0, 1]");
    }
    let scale = T::lit(params.input_scale);
    let u: Vec<T> = raw.iter().map(|&x| x * scale).collect();
    let (kappa, eta, gamma, delta) =
        (T::lit(params.kappa), T::lit(params.eta), T::lit(params.gamma), T::lit(params.delta));
    let mut y: Vec<T> = Vec::with_capacity(u.len());
    for k in 0..u.len() {
        let prev = if k > 0 { y[k - 1] } else { T::zero() };
        let window = y[k.saturating_sub(n)..k].iter().fold(T::zero(), |s, &v| s + v);
        let lagged = if k + 1 >= n { u[k + 1 - n] } else { T::zero() };
        let yk = kappa * prev + eta * prev * window + gamma * lagged * u[k] + delta;
        if !(yk.abs() <= T::lit(NARMA_BOUND)) {
            return Err(Error::Numerical(format!("NARMA{n} diverged at step {}: y = {yk}", k + 1)));
        }
        y.push(yk);
    }
    Ok((u, y))
}
