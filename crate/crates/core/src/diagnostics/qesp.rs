use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::qcore::DensityMatrix;
use crate::reservoir::HqrSystem;
use crate::seeds::{child, rng_from};
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QespConfig {
    pub washout: usize,
    pub eval: usize,
    pub trials: usize,
}

impl QespConfig {
    pub fn validate(&self) -> Result<()> {
        if self.washout == 0 || self.eval == 0 || self.trials == 0 {
            return Err(Error::Config("QESP washout, eval and trials must all be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QespResult {
    pub mu: f64,
    pub per_trial: Vec<f64>,
}

/// Post-washout signals of `sys` driven by `inputs` from its current state.
fn evaluation_signals<T: Real>(sys: &mut HqrSystem<T>, inputs: &Series<T>, cfg: &QespConfig) -> Result<Vec<Vec<T>>> {
    let mut out = Vec::with_capacity(cfg.eval);
    for (k, u) in inputs.rows().take(cfg.washout + cfg.eval).enumerate() {
        let z = sys.step(u)?;
        if k >= cfg.washout {
            out.push(z.to_vec());
        }
    }
    Ok(out)
}

fn mean_distance<T: Real>(a: &[Vec<T>], b: &[Vec<T>]) -> f64 {
    let total: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (*p - *q).as_f64().powi(2)).sum::<f64>().sqrt())
        .sum();
    total / a.len() as f64
}

/// QESP index with explicit perturbed initial states (one set of per-reservoir states per trial).
///
/// The reference trajectory starts from the system's configured initial states.
pub fn qesp_index_with_states<T: Real>(
    sys: &HqrSystem<T>,
    inputs: &Series<T>,
    cfg: &QespConfig,
    trial_states: &[Vec<DensityMatrix<T>>],
) -> Result<QespResult> {
    cfg.validate()?;
    if inputs.len() < cfg.washout + cfg.eval {
        return arg(format!("QESP needs {} inputs, got {}", cfg.washout + cfg.eval, inputs.len()));
    }
    let mut reference = sys.clone();
    reference.reset();
    let ref_signals = evaluation_signals(&mut reference, inputs, cfg)?;
    let mut per_trial = Vec::with_capacity(trial_states.len());
    for states in trial_states {
        let mut trial = sys.clone();
        trial.reset_to(states)?;
        let sig = evaluation_signals(&mut trial, inputs, cfg)?;
        per_trial.push(mean_distance(&ref_signals, &sig));
    }
    if per_trial.is_empty() {
        return arg("QESP needs at least one trial");
    }
    let mu = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
    Ok(QespResult { mu, per_trial })
}

/// QESP index: mean L2 distance between post-washout signals from the reference
/// initial state and from `cfg.trials` random (Ginibre) initial states.
pub fn qesp_index<T: Real>(sys: &HqrSystem<T>, inputs: &Series<T>, cfg: &QespConfig, seed: u64) -> Result<QespResult> {
    cfg.validate()?;
    let states: Vec<Vec<DensityMatrix<T>>> = (0..cfg.trials)
        .map(|p| {
            let mut rng = rng_from(child(seed, "qesp-initial", p));
            (0..sys.n_qr()).map(|l| DensityMatrix::ginibre(sys.config(l).n_qubits(), &mut rng)).collect()
        })
        .collect();
    qesp_index_with_states(sys, inputs, cfg, &states)
}
