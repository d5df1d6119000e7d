use hqrc_core::forecast::{train_and_forecast, ClosedLoopConfig};
use hqrc_core::seeds::{child, rng_from};
use hqrc_core::tasks::{lorenz_rk4, minmax_scale, LorenzParams};
use rand::Rng;
use serde_json::json;

use super::{mean_std, par_map, quantile};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Outcome, Table};
use crate::row;

struct Trial {
    vpt: f64,
    failed: bool,
    /// Unscaled `(prediction, truth)` rows, kept for trial 0 only.
    forecast: Option<(hqrc_core::Series, hqrc_core::Series)>,
}

/// Closed-loop Lorenz forecasts: VPT distribution per feedback strength.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.lorenz()?;
    let params = LorenzParams { dt: s.dt, ..LorenzParams::default() };
    let cells: Vec<(usize, usize)> = (0..s.alphas.len()).flat_map(|a| (0..s.trials).map(move |t| (a, t))).collect();
    let trials = par_map(cfg.workers, &cells, |&(a, t)| {
        let mut rng = rng_from(child(cfg.seed, "lorenz-initial", t));
        let x0 = [rng.gen_range(-15.0..15.0), rng.gen_range(-20.0..20.0), rng.gen_range(5.0..45.0)];
        let len = s.washout + s.train + s.predict;
        let traj = lorenz_rk4::<f64>(x0, s.transient + len, &params)?;
        let data = traj.slice(s.transient, s.transient + len);
        let (scaled, scaler) = minmax_scale(&data, 0.0, 1.0)?;
        let sigma = scaled.std_per_component();
        let mut r = cfg.reservoir.clone();
        r.alpha = s.alphas[a];
        let mut sys = r.spec(3).build::<f64>(child(cfg.seed, "lorenz-reservoir", t))?;
        let loop_cfg = ClosedLoopConfig {
            washout: s.washout,
            train_steps: s.train,
            predict_steps: s.predict,
            epsilon: s.epsilon,
            lyapunov: params.lyapunov,
            dt: s.dt,
            augment: s.augment,
            beta: s.beta,
        };
        let run = train_and_forecast(&mut sys, &scaled, &loop_cfg, &sigma)?;
        let forecast =
            if t == 0 { Some((scaler.inverse(&run.predictions)?, scaler.inverse(&run.truth)?)) } else { None };
        Ok(Trial { vpt: run.vpt, failed: run.failure.is_some(), forecast })
    })?;

    let mut out = Outcome::default();
    let mut table = Table::new(&["alpha", "trial", "vpt", "failed"]);
    for (&(a, t), tr) in cells.iter().zip(&trials) {
        table.push(row![s.alphas[a], t, tr.vpt, usize::from(tr.failed)])?;
    }
    let mut summary = Table::new(&["alpha", "median", "q25", "q75", "mean", "std"]);
    let mut grid = Vec::new();
    for (a, group) in trials.chunks(s.trials).enumerate() {
        let v: Vec<f64> = group.iter().map(|t| t.vpt).collect();
        let (m, sd) = mean_std(&v);
        let med = quantile(&v, 0.5);
        summary.push(row![s.alphas[a], med, quantile(&v, 0.25), quantile(&v, 0.75), m, sd])?;
        grid.push(json!({ "alpha": s.alphas[a], "median_vpt": med, "mean_vpt": m }));
        if let Some((pred, truth)) = &group[0].forecast {
            let mut f =
                Table::new(&["step", "lyapunov_time", "x_pred", "y_pred", "z_pred", "x_true", "y_true", "z_true"]);
            for (k, (p, q)) in pred.rows().zip(truth.rows()).enumerate() {
                let lt = (k + 1) as f64 * s.dt * params.lyapunov;
                f.push(row![k, lt, p[0], p[1], p[2], q[0], q[1], q[2]])?;
            }
            out.table(&format!("lorenz_forecast_a{a}.csv"), f);
        }
    }
    out.table("lorenz_vpt.csv", table);
    out.table("lorenz_summary.csv", summary);
    out.metric("cells", grid);
    Ok(out)
}
