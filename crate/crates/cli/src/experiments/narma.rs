use hqrc_core::learning::{esn_init, fit_series, nmse, FeatureMap};
use hqrc_core::reservoir::run_sequence;
use hqrc_core::seeds::child;
use hqrc_core::tasks::{narma_series, uniform_inputs, NarmaParams};
use hqrc_core::Series;
use serde_json::json;

use super::{mean_std, par_map};
use crate::config::{EsnSection, ExperimentConfig, NarmaSection, ReservoirInput};
use crate::error::CliError;
use crate::output::{Cell, Outcome, Table};

/// Raw input, scaled input and target of one NARMA realization.
type Task = (Vec<f64>, Vec<f64>, Vec<f64>);

fn task(s: &NarmaSection, order: usize, seed: u64, t: usize) -> Result<Task, CliError> {
    let raw = uniform_inputs::<f64>(s.washout + s.train + s.eval, child(seed, "narma-input", t));
    let (scaled, y) = narma_series(&NarmaParams::new(order), &raw)?;
    Ok((raw, scaled, y))
}

/// Fits on `[washout, washout + train)` and scores NMSE on the following `eval` steps.
/// `features` row `k` belongs to time step `k`.
fn score(s: &NarmaSection, features: &Series, y: &[f64], beta: f64) -> Result<f64, CliError> {
    let (w, k) = (s.washout, s.train);
    let targets = Series::from_scalars(y);
    let model = fit_series(&features.slice(w, w + k), &targets.slice(w, w + k), beta, FeatureMap::Linear)?;
    let pred = model.predict_series(&features.slice(w + k, w + k + s.eval))?;
    Ok(nmse(pred.as_flat(), &y[w + k..w + k + s.eval])?)
}

fn hqr_nmse(cfg: &ExperimentConfig, s: &NarmaSection, order: usize, alpha: f64, t: usize) -> Result<f64, CliError> {
    let (raw, scaled, y) = task(s, order, cfg.seed, t)?;
    let input = match s.reservoir_input {
        ReservoirInput::Raw => raw,
        ReservoirInput::Scaled => scaled,
    };
    let mut r = cfg.reservoir.clone();
    r.alpha = alpha;
    let mut sys = r.spec(1).build::<f64>(child(cfg.seed, "narma-reservoir", t))?;
    let z = run_sequence(&mut sys, &Series::from_scalars(&input), 0)?;
    score(s, &z, &y, s.beta)
}

/// Echo state network baseline on the scaled input.
pub fn esn_nmse(e: &EsnSection, s: &NarmaSection, order: usize, seed: u64, t: usize) -> Result<f64, CliError> {
    let (_, scaled, y) = task(s, order, seed, t)?;
    let mut esn = esn_init::<f64>(e.nodes, 1, e.radius, e.degree, e.noise, child(seed, "narma-esn", t))?;
    esn.scale_inputs(e.input_scale);
    let u = Series::from_scalars(&scaled);
    let split = s.washout + s.train;
    esn.data_std = u.slice(0, split).std_per_component();
    let mut h = esn.run(&u.slice(0, split), true)?;
    let tail = esn.run(&u.slice(split, u.len()), false)?;
    for row in tail.rows() {
        h.push(row)?;
    }
    score(s, &h, &y, e.beta)
}

/// NMSE of HQR ensembles over orders and feedback strengths, plus an optional ESN baseline.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.narma()?;
    let mut cells: Vec<(usize, Option<f64>, usize)> = Vec::new();
    for &order in &s.orders {
        for &alpha in &s.alphas {
            cells.extend((0..s.trials).map(|t| (order, Some(alpha), t)));
        }
        if s.esn.is_some() {
            cells.extend((0..s.trials).map(|t| (order, None, t)));
        }
    }
    let scores = par_map(cfg.workers, &cells, |&(order, alpha, t)| match (alpha, &s.esn) {
        (Some(a), _) => hqr_nmse(cfg, s, order, a, t),
        (None, Some(e)) => esn_nmse(e, s, order, cfg.seed, t),
        (None, None) => unreachable!("ESN cells exist only with an [narma.esn] table"),
    })?;

    let alpha_cell = |a: Option<f64>| a.map_or(Cell::Text(String::new()), Cell::Num);
    let model = |a: Option<f64>| if a.is_some() { "hqr" } else { "esn" };
    let mut out = Outcome::default();
    let mut table = Table::new(&["model", "order", "alpha", "trial", "nmse"]);
    for (&(order, alpha, t), &v) in cells.iter().zip(&scores) {
        table.push(vec![
            Cell::from(model(alpha)),
            Cell::from(order),
            alpha_cell(alpha),
            Cell::from(t),
            Cell::from(v),
        ])?;
    }
    let mut summary = Table::new(&["model", "order", "alpha", "mean", "std"]);
    let mut grid = Vec::new();
    for (chunk, c) in scores.chunks(s.trials).zip(cells.iter().step_by(s.trials)) {
        let (m, sd) = mean_std(chunk);
        summary.push(vec![Cell::from(model(c.1)), Cell::from(c.0), alpha_cell(c.1), Cell::from(m), Cell::from(sd)])?;
        grid.push(json!({ "model": model(c.1), "order": c.0, "alpha": c.1, "mean": m, "std": sd }));
    }
    out.table("narma.csv", table);
    out.table("narma_mean.csv", summary);
    out.metric("cells", grid);
    Ok(out)
}
