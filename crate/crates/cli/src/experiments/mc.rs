use hqrc_core::diagnostics::{memory_profile, MemorySplits};
use hqrc_core::seeds::child;
use serde_json::json;

use super::{mean_std, par_map};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Outcome, Table};
use crate::row;

/// Memory functions and capacities for each ensemble variant over a `tau` grid.
///
/// Trial `t` uses the same Hamiltonian and input draws for every variant and `tau`.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.mc()?;
    let splits = MemorySplits { washout: s.washout, train: s.train, eval: s.eval };
    let delays: Vec<usize> = (0..=s.d_max).collect();
    let mut cells = Vec::new();
    for v in &s.variants {
        for &tau in &s.taus {
            for t in 0..s.trials {
                cells.push((*v, tau, t));
            }
        }
    }
    let profiles = par_map(cfg.workers, &cells, |&(v, tau, t)| {
        let mut r = cfg.reservoir.clone();
        r.n_qr = v.n_qr;
        r.alpha = v.alpha;
        r.tau = tau;
        let trial_seed = child(cfg.seed, "mc-trial", t);
        let mut sys = r.spec(1).build::<f64>(trial_seed)?;
        Ok(memory_profile(&mut sys, &delays, splits, child(trial_seed, "mc-input", 0), s.beta)?)
    })?;

    let mut out = Outcome::default();
    let mut per_trial = Table::new(&["n_qr", "alpha", "tau", "trial", "mc"]);
    let mut mf_table = Table::new(&["n_qr", "alpha", "tau", "delay", "mf_mean"]);
    let mut summary = Table::new(&["n_qr", "alpha", "tau", "mc_mean", "mc_std"]);
    let mut grid = Vec::new();
    for (group, cell) in profiles.chunks(s.trials).zip(cells.iter().step_by(s.trials)) {
        let (v, tau, _) = *cell;
        let caps: Vec<f64> = group.iter().map(|mf| mf.iter().sum()).collect();
        for (t, c) in caps.iter().enumerate() {
            per_trial.push(row![v.n_qr, v.alpha, tau, t, *c])?;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for d in 0..=s.d_max {
            let m = group.iter().map(|mf| mf[d]).sum::<f64>() / group.len() as f64;
            mf_table.push(row![v.n_qr, v.alpha, tau, d, m])?;
            for mf in group {
                lo = lo.min(mf[d]);
                hi = hi.max(mf[d]);
            }
        }
        let (m, sd) = mean_std(&caps);
        summary.push(row![v.n_qr, v.alpha, tau, m, sd])?;
        grid.push(json!({ "n_qr": v.n_qr, "alpha": v.alpha, "tau": tau, "mc_mean": m, "mc_std": sd, "mf_min": lo, "mf_max": hi }));
    }
    out.table("mc.csv", per_trial);
    out.table("mf.csv", mf_table);
    out.table("mc_mean.csv", summary);
    out.metric("cells", grid);
    Ok(out)
}
