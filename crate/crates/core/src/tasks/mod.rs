//! Benchmark data: NARMA, delayed recall, Lorenz and Kuramoto-Sivashinsky trajectories.

mod dynamics;
mod narma;
mod scaling;

pub use dynamics::{kse_etdrk4, kse_wavenumbers, lorenz_rk4, KseParams, KseSolver, LorenzParams, ETD_CONTOUR_POINTS};
pub use narma::{narma_series, NarmaParams, NARMA_BOUND};
pub use scaling::{add_gaussian_noise, delay_target, minmax_scale, MinMaxScaler};

use rand::Rng;

use crate::num::Real;
use crate::seeds::rng_from;
use crate::series::Series;

/// Input and target sequences of one benchmark run.
#[derive(Debug, Clone)]
pub struct TaskSeries<T: Real> {
    pub inputs: Series<T>,
    pub targets: Series<T>,
    pub meta: serde_json::Value,
}

/// `len` i.i.d. uniform samples on `[0, 1)`.
pub fn uniform_inputs<T: Real>(len: usize, seed: u64) -> Vec<T> {
    let mut rng = rng_from(seed);
    (0..len).map(|_| T::lit(rng.gen::<f64>())).collect()
}

/// Low-amplitude smooth random field: a few random Fourier modes.
pub fn kse_initial_field(params: &KseParams, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    let modes: Vec<(f64, f64)> = (1..=4).map(|_| (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1))).collect();
    let l = params.domain_length;
    (0..params.grid)
        .map(|i| {
            let x = l * i as f64 / params.grid as f64;
            modes
                .iter()
                .enumerate()
                .map(|(m, &(a, b))| {
                    let arg = 2.0 * std::f64::consts::PI * (m + 1) as f64 * x / l;
                    a * arg.cos() + b * arg.sin()
                })
                .sum()
        })
        .collect()
}
