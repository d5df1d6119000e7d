//! Innate training: recursive-least-squares adaptation of the feedback weights so
//! that noisy trajectories return to the recorded noise-free ones.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::reservoir::{signal_index, HqrSystem};
use crate::seeds::{child, rng_from};
use crate::series::Series;

/// Weight magnitude beyond which training is declared divergent.
pub const WEIGHT_GUARD: f64 = 1e3;

/// Gaussian signal noise with standard deviation `std`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub std: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(std: f64, seed: u64) -> Result<Self> {
        if !(std >= 0.0 && std.is_finite()) {
            return Err(Error::Config(format!("noise standard deviation {std} must be finite and >= 0")));
        }
        Ok(Self { std, seed })
    }

    pub fn from_variance(variance: f64, seed: u64) -> Result<Self> {
        if !(variance >= 0.0) {
            return Err(Error::Config(format!("noise variance {variance} must be >= 0")));
        }
        Self::new(variance.sqrt(), seed)
    }

    fn add<T: Real, R: Rng>(&self, z: &mut [T], rng: &mut R) {
        if self.std == 0.0 {
            return;
        }
        let normal = Normal::new(0.0, self.std).expect("validated std");
        for x in z {
            *x += T::lit(normal.sample(rng));
        }
    }
}

/// Step boundaries: transient `[0, transient)`, training `[transient, train)`,
/// evaluation `[train, eval)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnateWindows {
    pub transient: usize,
    pub train: usize,
    pub eval: usize,
}

impl Default for InnateWindows {
    fn default() -> Self {
        Self { transient: 2000, train: 4000, eval: 6000 }
    }
}

impl InnateWindows {
    pub fn validate(&self) -> Result<()> {
        if !(self.transient < self.train && self.train < self.eval) {
            return Err(Error::Config(format!(
                "innate windows must satisfy transient < train < eval, got {} / {} / {}",
                self.transient, self.train, self.eval
            )));
        }
        Ok(())
    }
}

/// Where each training loop starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LoopStart {
    /// Fresh random (Ginibre) states every loop.
    #[default]
    Random,
    /// The configured initial states the targets were recorded from.
    Reference,
}

/// Index of the representative signal of reservoir `l`: qubit 2 at the last substep.
pub fn representative_index<T: Real>(sys: &HqrSystem<T>, l: usize) -> Result<usize> {
    let cfg = sys.config(l);
    if cfg.n_qubits() < 2 {
        return arg(format!("reservoir {l} has a single qubit and no representative spin"));
    }
    Ok(sys.block(l).start + signal_index(2, cfg.n_virtual(), cfg.n_virtual()))
}

/// Noise-free representative trajectories over `[transient, eval)`, one row per step.
///
/// Runs from the configured initial states and resets the system afterward.
pub fn record_targets<T: Real>(
    sys: &mut HqrSystem<T>,
    inputs: &Series<T>,
    windows: InnateWindows,
) -> Result<Series<T>> {
    windows.validate()?;
    if inputs.len() < windows.eval {
        return arg(format!("innate training needs {} inputs, got {}", windows.eval, inputs.len()));
    }
    let reps: Vec<usize> = (0..sys.n_qr()).map(|l| representative_index(sys, l)).collect::<Result<_>>()?;
    sys.reset();
    let mut out = Series::with_capacity(reps.len(), windows.eval - windows.transient);
    let mut row = vec![T::zero(); reps.len()];
    for (k, u) in inputs.rows().take(windows.eval).enumerate() {
        let z = sys.step(u)?;
        if k >= windows.transient {
            for (r, &i) in row.iter_mut().zip(&reps) {
                *r = z[i];
            }
            out.push(&row)?;
        }
    }
    sys.reset();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct InnateTrainer<T: Real> {
    pub learning_rate: T,
    pub windows: InnateWindows,
    pub start: LoopStart,
    /// Inverse correlation estimates, one per reservoir, over its connected columns.
    pub p_matrices: Vec<DMatrix<T>>,
    connected: Vec<Vec<usize>>,
    representative: Vec<usize>,
    targets: Series<T>,
}

impl<T: Real> InnateTrainer<T> {
    /// Records the targets of `sys` and initializes every `P` to the identity.
    pub fn new(sys: &mut HqrSystem<T>, inputs: &Series<T>, learning_rate: T, windows: InnateWindows) -> Result<Self> {
        if !(learning_rate > T::zero()) {
            return Err(Error::Config(format!("learning rate {learning_rate} must be positive")));
        }
        let targets = record_targets(sys, inputs, windows)?;
        let connected: Vec<Vec<usize>> = (0..sys.n_qr()).map(|l| sys.feedback_columns(l)).collect();
        let representative = (0..sys.n_qr()).map(|l| representative_index(sys, l)).collect::<Result<_>>()?;
        let p_matrices = connected.iter().map(|c| DMatrix::identity(c.len(), c.len())).collect();
        Ok(Self { learning_rate, windows, start: LoopStart::Random, p_matrices, connected, representative, targets })
    }

    pub fn targets(&self) -> &Series<T> {
        &self.targets
    }

    pub fn connected(&self, l: usize) -> &[usize] {
        &self.connected[l]
    }

    pub fn representative(&self) -> &[usize] {
        &self.representative
    }

    /// Representative-signal error against the target at absolute step `k`.
    fn errors(&self, z: &[T], k: usize) -> Vec<T> {
        let target = self.targets.row(k - self.windows.transient);
        self.representative.iter().zip(target).map(|(&i, &t)| z[i] - t).collect()
    }

    /// Smallest eigenvalue of every `P` must stay positive.
    pub fn check_p(&self) -> Result<()> {
        for (l, p) in self.p_matrices.iter().enumerate() {
            if p.nrows() == 0 {
                continue;
            }
            let min = p.clone().symmetric_eigen().eigenvalues.min();
            if !(min > T::zero()) {
                return Err(Error::Numerical(format!(
                    "P matrix of reservoir {l} lost definiteness (min eigenvalue {min})"
                )));
            }
        }
        Ok(())
    }
}

/// One update: each `P` takes its rank-one step first, then
/// `w[n, i] -= zeta e_n (P r)_i` over the connected columns of reservoir `n`.
pub fn force_step<T: Real>(
    trainer: &mut InnateTrainer<T>,
    w_con: &mut DMatrix<T>,
    r: &[T],
    errors: &[T],
) -> Result<()> {
    if errors.len() != trainer.p_matrices.len() || w_con.nrows() != errors.len() {
        return arg("one error per reservoir is required");
    }
    for (n, (p, cols)) in trainer.p_matrices.iter_mut().zip(&trainer.connected).enumerate() {
        if cols.is_empty() {
            continue;
        }
        let rv = DVector::from_iterator(cols.len(), cols.iter().map(|&j| r[j]));
        let pr = &*p * &rv;
        let denom = T::one() + rv.dot(&pr);
        if !(denom >= T::one() - T::lit(1e-9)) {
            return Err(Error::Numerical(format!("RLS denominator {denom} below 1 for reservoir {n}")));
        }
        p.ger(-T::one() / denom, &pr, &pr, T::one());
        let e = errors[n];
        if e == T::zero() {
            continue;
        }
        let gain = &*p * &rv;
        let scale = trainer.learning_rate * e;
        for (&j, g) in cols.iter().zip(gain.iter()) {
            w_con[(n, j)] -= scale * *g;
        }
    }
    Ok(())
}

/// Root mean square difference of two equally long sequences.
pub fn trajectory_rmse<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() || a.is_empty() {
        return arg(format!("rmse needs equal nonempty lengths, got {} and {}", a.len(), b.len()));
    }
    let s = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok((s / T::from_usize_lossy(a.len())).sqrt())
}

/// RMSE of the representative signals against the targets over each window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRmse {
    pub train: f64,
    pub eval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnateReport {
    pub noise_std: f64,
    pub loops: usize,
    pub learning_rate: f64,
    pub pre: WindowRmse,
    pub post: WindowRmse,
    /// Evaluation-window RMSE after each training loop.
    pub loop_eval_rmse: Vec<f64>,
    pub max_weight: f64,
}

struct RunTrace {
    rmse: WindowRmse,
}

/// One pass over `[0, eval)` with noisy feedback, updating weights inside the training window.
fn noisy_pass<T: Real>(
    sys: &mut HqrSystem<T>,
    trainer: &mut InnateTrainer<T>,
    inputs: &Series<T>,
    noise: &NoiseSpec,
    init_seed: u64,
    noise_seed: u64,
    learn: bool,
) -> Result<RunTrace> {
    let w = trainer.windows;
    match trainer.start {
        LoopStart::Random => sys.reset_random(&mut rng_from(init_seed)),
        LoopStart::Reference => sys.reset(),
    }
    let mut rng = rng_from(noise_seed);
    let mut sq = [0.0f64; 2];
    let mut z = vec![T::zero(); sys.n_total()];
    for (k, u) in inputs.rows().take(w.eval).enumerate() {
        sys.step(u)?;
        noise.add(sys.signal_mut(), &mut rng);
        if k < w.transient {
            continue;
        }
        z.copy_from_slice(sys.signal());
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite signal at step {k}")));
        }
        let e = trainer.errors(&z, k);
        let window = usize::from(k >= w.train);
        sq[window] += e.iter().map(|x| x.as_f64().powi(2)).sum::<f64>();
        if learn && k < w.train {
            let mut w_con = std::mem::replace(&mut sys.coupling_mut().w_con, DMatrix::zeros(0, 0));
            let res = force_step(trainer, &mut w_con, &z, &e);
            sys.coupling_mut().w_con = w_con;
            res?;
            let big = sys.coupling().w_con.iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max);
            if !(big <= WEIGHT_GUARD) {
                return Err(Error::Numerical(format!(
                    "feedback weight magnitude {big:.3e} exceeded {WEIGHT_GUARD:e} at step {k}; lower the learning rate"
                )));
            }
        }
    }
    let n = sys.n_qr() as f64;
    Ok(RunTrace {
        rmse: WindowRmse {
            train: (sq[0] / (n * (w.train - w.transient) as f64)).sqrt(),
            eval: (sq[1] / (n * (w.eval - w.train) as f64)).sqrt(),
        },
    })
}

/// Runs `loops` training passes and compares evaluation RMSE before and after.
///
/// The pre- and post-training evaluations share initial state and noise, so the
/// difference isolates the effect of the learned weights.
pub fn innate_train<T: Real>(
    sys: &mut HqrSystem<T>,
    trainer: &mut InnateTrainer<T>,
    inputs: &Series<T>,
    loops: usize,
    noise: &NoiseSpec,
) -> Result<InnateReport> {
    if inputs.len() < trainer.windows.eval {
        return arg(format!("innate training needs {} inputs, got {}", trainer.windows.eval, inputs.len()));
    }
    let eval_init = child(noise.seed, "innate-eval-init", 0);
    let eval_noise = child(noise.seed, "innate-eval-noise", 0);
    let pre = noisy_pass(sys, trainer, inputs, noise, eval_init, eval_noise, false)?.rmse;
    let mut loop_eval_rmse = Vec::with_capacity(loops);
    for p in 0..loops {
        trainer.check_p()?;
        let trace = noisy_pass(
            sys,
            trainer,
            inputs,
            noise,
            child(noise.seed, "innate-init", p),
            child(noise.seed, "innate-noise", p),
            true,
        )?;
        loop_eval_rmse.push(trace.rmse.eval);
    }
    trainer.check_p()?;
    let post = noisy_pass(sys, trainer, inputs, noise, eval_init, eval_noise, false)?.rmse;
    let max_weight = sys.coupling().w_con.iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max);
    Ok(InnateReport {
        noise_std: noise.std,
        loops,
        learning_rate: trainer.learning_rate.as_f64(),
        pre,
        post,
        loop_eval_rmse,
        max_weight,
    })
}
