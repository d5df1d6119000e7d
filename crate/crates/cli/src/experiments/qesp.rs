use hqrc_core::diagnostics::{qesp_index, QespConfig};
use hqrc_core::seeds::child;
use hqrc_core::tasks::uniform_inputs;
use hqrc_core::Series;
use serde_json::json;

use super::{mean_std, par_map};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Outcome, Table};
use crate::row;

/// QESP index over a `(J, tau)` grid, one row per trial.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.qesp()?;
    let q = QespConfig { washout: s.washout, eval: s.eval, trials: s.perturbations };
    let mut cells = Vec::new();
    for &j in &s.couplings {
        for &tau in &s.taus {
            for t in 0..s.trials {
                cells.push((j, tau, t));
            }
        }
    }
    let mus = par_map(cfg.workers, &cells, |&(j, tau, t)| {
        let mut r = cfg.reservoir.clone();
        r.coupling = j;
        r.tau = tau;
        let sys = r.spec(1).build::<f64>(child(cfg.seed, "qesp-reservoir", t))?;
        let inputs = Series::from_scalars(&uniform_inputs::<f64>(s.washout + s.eval, child(cfg.seed, "qesp-input", t)));
        Ok(qesp_index(&sys, &inputs, &q, child(cfg.seed, "qesp-perturb", t))?.mu)
    })?;

    let mut out = Outcome::default();
    let mut table = Table::new(&["coupling", "tau", "trial", "mu"]);
    for (&(j, tau, t), &mu) in cells.iter().zip(&mus) {
        table.push(row![j, tau, t, mu])?;
    }
    let mut summary = Table::new(&["coupling", "tau", "mean", "std"]);
    let mut grid = Vec::new();
    for (chunk, c) in mus.chunks(s.trials).zip(cells.iter().step_by(s.trials)) {
        let (m, sd) = mean_std(chunk);
        summary.push(row![c.0, c.1, m, sd])?;
        grid.push(json!({ "coupling": c.0, "tau": c.1, "mean": m, "std": sd }));
    }
    out.table("qesp.csv", table);
    out.table("qesp_mean.csv", summary);
    out.metric("cells", grid);
    Ok(out)
}
