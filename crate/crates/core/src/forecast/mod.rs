//! Teacher-forced training and closed-loop prediction of dynamical systems.

mod parallel;

pub use parallel::{parallel_forecast, ParallelLayout};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::learning::{fit_series, nrmse, FeatureMap, ReadoutModel};
use crate::num::Real;
use crate::reservoir::{CouplingMatrices, HqrSystem};
use crate::series::Series;

/// Settings of one teacher-forcing plus closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedLoopConfig {
    pub washout: usize,
    pub train_steps: usize,
    pub predict_steps: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub lyapunov: f64,
    /// Integration step of the sampled series, so that `steps * dt` is physical time.
    pub dt: f64,
    #[serde(default)]
    pub augment: bool,
    pub beta: f64,
}

fn default_epsilon() -> f64 {
    0.5
}

impl ClosedLoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.train_steps == 0 || self.predict_steps == 0 {
            return Err(Error::Config("train_steps and predict_steps must be at least 1".into()));
        }
        if !(self.lyapunov > 0.0 && self.dt > 0.0 && self.beta >= 0.0) {
            return Err(Error::Config("lyapunov and dt must be positive and beta nonnegative".into()));
        }
        Ok(())
    }

    pub fn feature_map(&self) -> FeatureMap {
        if self.augment {
            FeatureMap::SquareEven
        } else {
            FeatureMap::Linear
        }
    }
}

/// Squares every even-indexed signal column.
pub fn augment_states<T: Real>(z: &Series<T>) -> Series<T> {
    let mut out = z.clone();
    for k in 0..out.len() {
        FeatureMap::SquareEven.apply_in_place(out.row_mut(k));
    }
    out
}

/// Resets `sys`, drives it with `series[0..washout+k]` and pairs each post-washout
/// signal vector with the next row of the series.
pub fn teacher_signals<T: Real>(
    sys: &mut HqrSystem<T>,
    series: &Series<T>,
    washout: usize,
    k: usize,
) -> Result<(Series<T>, Series<T>)> {
    if series.len() < washout + k + 1 {
        return arg(format!("teacher forcing needs {} rows, got {}", washout + k + 1, series.len()));
    }
    if series.dim() != sys.n_in() {
        return arg(format!("series has {} components, system takes {} inputs", series.dim(), sys.n_in()));
    }
    sys.reset();
    let mut z = Series::with_capacity(sys.n_total(), k);
    for t in 0..washout + k {
        let s = sys.step(series.row(t))?;
        if t >= washout {
            z.push(s)?;
        }
    }
    Ok((z, series.slice(washout + 1, washout + k + 1)))
}

/// Fits a next-step readout on `k` teacher-forced steps; `sys` is left warm.
pub fn teacher_force<T: Real>(
    sys: &mut HqrSystem<T>,
    series: &Series<T>,
    washout: usize,
    k: usize,
    beta: T,
    map: FeatureMap,
) -> Result<ReadoutModel<T>> {
    let (z, y) = teacher_signals(sys, series, washout, k)?;
    fit_series(&z, &y, beta, map)
}

/// Closed-loop output. `failure` is set when the run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast<T> {
    pub predictions: Series<T>,
    pub failure: Option<String>,
}

/// Autonomous prediction: each readout output, clamped to `[0, 1]`, becomes the next input.
///
/// The first prediction is read from the system's current signal.
pub fn closed_loop<T: Real>(sys: &mut HqrSystem<T>, model: &ReadoutModel<T>, steps: usize) -> Result<Forecast<T>> {
    if model.d_out() != sys.n_in() || model.n_features() != sys.n_total() {
        return arg("readout shape does not match the system");
    }
    let mut predictions = Series::with_capacity(model.d_out(), steps);
    let mut y = vec![T::zero(); model.d_out()];
    for t in 0..steps {
        model.predict_into(sys.signal(), &mut y)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Ok(Forecast { predictions, failure: Some(format!("non-finite readout at step {t}")) });
        }
        y.iter_mut().for_each(|v| *v = v.clamp(T::zero(), T::one()));
        predictions.push(&y)?;
        if t + 1 < steps {
            sys.step(&y)?;
        }
    }
    Ok(Forecast { predictions, failure: None })
}

/// Folds a linear readout into the feedback: `(1 - alpha) W_in W_out^T + alpha W_con`,
/// with the readout bias carried by a trailing constant-1 column.
///
/// The returned coupling has `alpha = 1`, so the rewired system needs no external input
/// (feed zeros). Trajectories match [`closed_loop`] whenever no output is clamped.
pub fn rewire_feedback<T: Real>(c: &CouplingMatrices<T>, model: &ReadoutModel<T>) -> Result<CouplingMatrices<T>> {
    if model.feature_map != FeatureMap::Linear {
        return arg("only a linear readout can be folded into the feedback");
    }
    let n_total = model.n_features();
    if model.d_out() != c.n_in() || c.w_con.ncols() != n_total {
        return arg(format!(
            "readout maps {} signals to {} outputs; coupling has {} signals and {} inputs",
            n_total,
            model.d_out(),
            c.w_con.ncols(),
            c.n_in()
        ));
    }
    let ext = T::one() - c.alpha;
    // Row l of W_in W_out^T gives reservoir l's drive in terms of [1, z].
    let drive = &c.w_in * model.weights.transpose();
    let mut w_con = DMatrix::zeros(c.n_qr(), n_total + 1);
    for l in 0..c.n_qr() {
        for i in 0..n_total {
            w_con[(l, i)] = ext * drive[(l, i + 1)] + c.alpha * c.w_con[(l, i)];
        }
        w_con[(l, n_total)] = ext * drive[(l, 0)];
    }
    Ok(CouplingMatrices { w_in: c.w_in.clone(), w_con, alpha: T::one(), topology: c.topology })
}

/// Valid prediction time in Lyapunov units: the number of leading steps whose NRMSE
/// stays within `epsilon`, times `dt * lyapunov`.
pub fn vpt<T: Real>(
    pred: &Series<T>,
    target: &Series<T>,
    sigma: &[T],
    epsilon: f64,
    lyapunov: f64,
    dt: f64,
) -> Result<f64> {
    if pred.is_empty() {
        return arg("valid prediction time of an empty forecast");
    }
    let errors = nrmse(pred, target, sigma)?;
    let valid = errors.iter().take_while(|e| e.as_f64() <= epsilon).count();
    Ok(valid as f64 * dt * lyapunov)
}

/// Result of [`train_and_forecast`], in the scaled coordinates of the input series.
#[derive(Debug, Clone)]
pub struct ForecastRun<T: Real> {
    pub model: ReadoutModel<T>,
    pub predictions: Series<T>,
    pub truth: Series<T>,
    pub nrmse: Vec<T>,
    pub vpt: f64,
    pub failure: Option<String>,
}

/// Teacher forcing on the first `washout + train_steps` rows, then a closed-loop
/// forecast compared against the following rows.
///
/// `sigma` is the per-component standard deviation used by NRMSE, in scaled units.
pub fn train_and_forecast<T: Real>(
    sys: &mut HqrSystem<T>,
    series: &Series<T>,
    cfg: &ClosedLoopConfig,
    sigma: &[T],
) -> Result<ForecastRun<T>> {
    cfg.validate()?;
    let start = cfg.washout + cfg.train_steps;
    if series.len() < start + cfg.predict_steps {
        return arg(format!("forecast needs {} rows, got {}", start + cfg.predict_steps, series.len()));
    }
    let model = teacher_force(sys, series, cfg.washout, cfg.train_steps, T::lit(cfg.beta), cfg.feature_map())?;
    let forecast = closed_loop(sys, &model, cfg.predict_steps)?;
    let truth = series.slice(start, start + forecast.predictions.len());
    let (errors, score) = if forecast.predictions.is_empty() {
        (Vec::new(), 0.0)
    } else {
        let e = nrmse(&forecast.predictions, &truth, sigma)?;
        let s = vpt(&forecast.predictions, &truth, sigma, cfg.epsilon, cfg.lyapunov, cfg.dt)?;
        (e, s)
    };
    Ok(ForecastRun {
        model,
        predictions: forecast.predictions,
        truth,
        nrmse: errors,
        vpt: score,
        failure: forecast.failure,
    })
}
