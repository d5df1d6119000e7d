use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::learning::{assemble_design, solve_normal, squared_correlation, FeatureMap};
use crate::num::Real;
use crate::reservoir::{run_sequence, HqrSpec, HqrSystem};
use crate::seeds::child;
use crate::series::Series;
use crate::tasks::uniform_inputs;

/// Step counts of the washout, training and evaluation phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySplits {
    pub washout: usize,
    pub train: usize,
    pub eval: usize,
}

impl Default for MemorySplits {
    fn default() -> Self {
        Self { washout: 1000, train: 3000, eval: 1000 }
    }
}

/// `MF(d)` for every requested delay from one run of `sys` on uniform random input.
///
/// All delays share the training Gram matrix, so the cost is one run plus one factorization.
pub fn memory_profile<T: Real>(
    sys: &mut HqrSystem<T>,
    delays: &[usize],
    splits: MemorySplits,
    input_seed: u64,
    beta: T,
) -> Result<Vec<T>> {
    let d_max = delays.iter().copied().max().unwrap_or(0);
    if d_max > splits.washout {
        return arg(format!("delay {d_max} exceeds the washout length {}", splits.washout));
    }
    if splits.train == 0 || splits.eval == 0 {
        return arg("training and evaluation windows must be nonempty");
    }
    if sys.n_in() != 1 {
        return arg("memory profile needs a single input channel");
    }
    let total = splits.washout + splits.train + splits.eval;
    let u: Vec<T> = uniform_inputs(total, input_seed);
    sys.reset();
    let z = run_sequence(sys, &Series::from_scalars(&u), splits.washout)?;
    let x = assemble_design(&z, FeatureMap::Linear)?;
    let n_train = splits.train;
    let x_train = x.rows(0, n_train);
    let x_eval = x.rows(n_train, splits.eval);

    // Row k of z corresponds to input index washout + k.
    let target = |k: usize, d: usize| u[splits.washout + k - d];
    let y_train = DMatrix::from_fn(n_train, delays.len(), |k, j| target(k, delays[j]));
    let gram = x_train.tr_mul(&x_train);
    let w = solve_normal(gram, &x_train.tr_mul(&y_train), beta)?;
    let pred = x_eval * w;
    delays
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let truth: Vec<T> = (0..splits.eval).map(|k| target(n_train + k, d)).collect();
            let guess: Vec<T> = pred.column(j).iter().copied().collect();
            squared_correlation(&guess, &truth)
        })
        .collect()
}

/// `MF(d)` for a single delay.
pub fn memory_function<T: Real>(
    sys: &mut HqrSystem<T>,
    d: usize,
    splits: MemorySplits,
    input_seed: u64,
    beta: T,
) -> Result<T> {
    Ok(memory_profile(sys, &[d], splits, input_seed, beta)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryCapacity {
    /// Trial-averaged `MF(d)` for `d = 0..=d_max`.
    pub mf_mean: Vec<f64>,
    pub per_trial: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Truncated memory capacity `sum_{d<=d_max} MF(d)` averaged over `trials` random ensembles.
pub fn memory_capacity(
    spec: &HqrSpec,
    d_max: usize,
    trials: usize,
    seed: u64,
    splits: MemorySplits,
    beta: f64,
) -> Result<MemoryCapacity> {
    if trials == 0 {
        return arg("memory capacity needs at least one trial");
    }
    let delays: Vec<usize> = (0..=d_max).collect();
    let mut mf_mean = vec![0.0; d_max + 1];
    let mut per_trial = Vec::with_capacity(trials);
    for t in 0..trials {
        let trial_seed = child(seed, "mc-trial", t);
        let mut sys = spec.build::<f64>(trial_seed)?;
        let mf = memory_profile(&mut sys, &delays, splits, child(trial_seed, "mc-input", 0), beta)?;
        for (m, v) in mf_mean.iter_mut().zip(&mf) {
            *m += v / trials as f64;
        }
        per_trial.push(mf.iter().sum());
    }
    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    let std = (per_trial.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / trials as f64).sqrt();
    Ok(MemoryCapacity { mf_mean, per_trial, mean, std })
}
