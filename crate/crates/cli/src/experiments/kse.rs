use hqrc_core::forecast::{parallel_forecast, ParallelLayout};
use hqrc_core::learning::{nrmse, FeatureMap};
use hqrc_core::seeds::child;
use hqrc_core::tasks::{kse_etdrk4, kse_initial_field, minmax_scale, KseParams};
use serde_json::json;

use super::par_map;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Outcome, Table};
use crate::row;

struct Trial {
    errors: Vec<f64>,
    forecast: Option<(hqrc_core::Series, hqrc_core::Series)>,
}

/// Number of leading steps whose error stays below `threshold`.
pub fn valid_steps(errors: &[f64], threshold: f64) -> usize {
    errors.iter().take_while(|&&e| e < threshold).count()
}

/// Parallel closed-loop forecasts of a Kuramoto-Sivashinsky field.
///
/// All trials cut their windows from one long trajectory, `trial_spacing` steps apart.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.kse()?;
    let params = KseParams { domain_length: s.domain_length, grid: s.grid, dt: s.dt, lyapunov: s.lyapunov };
    let window = s.washout + s.train + s.predict;
    let total = s.transient + (s.trials - 1) * s.trial_spacing + window;
    let u0 = kse_initial_field(&params, child(cfg.seed, "kse-initial", 0));
    let traj = kse_etdrk4::<f64>(&u0, total, &params)?;

    let cells: Vec<(usize, usize)> = (0..s.alphas.len()).flat_map(|a| (0..s.trials).map(move |t| (a, t))).collect();
    let inner = if cells.len() == 1 { cfg.workers } else { 1 };
    let map = if s.augment { FeatureMap::SquareEven } else { FeatureMap::Linear };
    let trials = par_map(cfg.workers, &cells, |&(a, t)| {
        let start = s.transient + t * s.trial_spacing;
        let (scaled, scaler) = minmax_scale(&traj.slice(start, start + window), 0.0, 1.0)?;
        let sigma = scaled.slice(s.washout, s.washout + s.train).std_per_component();
        let mut r = cfg.reservoir.clone();
        r.alpha = s.alphas[a];
        let layout = ParallelLayout {
            groups: s.groups,
            width: s.width,
            halo: s.halo,
            reservoir: r.spec((2 * s.halo + 1) * s.width),
        };
        let f = parallel_forecast(
            &layout,
            &scaled,
            s.washout,
            s.train,
            s.predict,
            s.beta,
            map,
            child(cfg.seed, "kse-trial", t),
            inner,
        )?;
        let truth = scaled.slice(s.washout + s.train, s.washout + s.train + f.predictions.len());
        let errors = if f.predictions.is_empty() { Vec::new() } else { nrmse(&f.predictions, &truth, &sigma)? };
        let forecast = if t == 0 { Some((scaler.inverse(&f.predictions)?, scaler.inverse(&truth)?)) } else { None };
        Ok(Trial { errors, forecast })
    })?;

    let lyap_time = |k: usize| (k + 1) as f64 * s.dt * s.lyapunov;
    let mut out = Outcome::default();
    let mut curves = Table::new(&["alpha", "trial", "step", "lyapunov_time", "nrmse"]);
    let mut mean_curves = Table::new(&["alpha", "step", "lyapunov_time", "nrmse_mean"]);
    let mut summary = Table::new(&["alpha", "trial", "valid_steps", "valid_time"]);
    let mut grid = Vec::new();
    for (a, group) in trials.chunks(s.trials).enumerate() {
        let alpha = s.alphas[a];
        for (t, tr) in group.iter().enumerate() {
            for (k, &e) in tr.errors.iter().enumerate() {
                curves.push(row![alpha, t, k, lyap_time(k), e])?;
            }
            let v = valid_steps(&tr.errors, s.threshold);
            summary.push(row![alpha, t, v, v as f64 * s.dt * s.lyapunov])?;
        }
        // Failed trials end early; the mean curve stops at the shortest one.
        let len = group.iter().map(|t| t.errors.len()).min().unwrap_or(0);
        let mean: Vec<f64> =
            (0..len).map(|k| group.iter().map(|t| t.errors[k]).sum::<f64>() / group.len() as f64).collect();
        for (k, &e) in mean.iter().enumerate() {
            mean_curves.push(row![alpha, k, lyap_time(k), e])?;
        }
        let v = valid_steps(&mean, s.threshold);
        let valid_time = v as f64 * s.dt * s.lyapunov;
        grid.push(
            json!({ "alpha": alpha, "mean_valid_steps": v, "mean_valid_time": valid_time, "predicted_steps": len }),
        );
        if let Some((pred, truth)) = &group[0].forecast {
            let mut header = vec!["step".to_string()];
            header.extend((0..s.grid).map(|i| format!("pred_{i}")));
            header.extend((0..s.grid).map(|i| format!("true_{i}")));
            let mut f = Table::new(&header);
            for (k, (p, q)) in pred.rows().zip(truth.rows()).enumerate() {
                let mut cells = row![k];
                cells.extend(p.iter().chain(q).map(|&x| crate::output::Cell::from(x)));
                f.push(cells)?;
            }
            out.table(&format!("kse_forecast_a{a}.csv"), f);
        }
    }
    out.table("kse_nrmse.csv", curves);
    out.table("kse_mean_nrmse.csv", mean_curves);
    out.table("kse_summary.csv", summary);
    out.metric("cells", grid);
    Ok(out)
}
