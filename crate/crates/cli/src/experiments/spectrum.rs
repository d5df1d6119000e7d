use hqrc_core::diagnostics::{cptp_spectrum, superoperator};
use hqrc_core::qcore::{build_ising, max_abs_diff};
use hqrc_core::seeds::child;
use serde_json::json;

use super::par_map;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Outcome, Table};
use crate::row;

struct Cell {
    lambda1: f64,
    lambda2: f64,
    inv_lambda2: f64,
    residual: f64,
    eigenvalues: Vec<(f64, f64)>,
}

/// Channel spectrum and fixed point of one reservoir over a `(u, tau)` grid.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.spectrum()?;
    let r = &cfg.reservoir;
    let mut cells = Vec::new();
    for t in 0..s.trials {
        for &u in &s.inputs {
            for &tau in &s.taus {
                cells.push((t, u, tau));
            }
        }
    }
    let results = par_map(cfg.workers, &cells, |&(t, u, tau)| {
        let h = build_ising::<f64>(r.n_qubits, r.coupling, child(cfg.seed, "spectrum-reservoir", t));
        let op = superoperator(&h, u, tau)?;
        let sp = cptp_spectrum(&op)?;
        let fixed = sp.fixed_point.matrix();
        Ok(Cell {
            lambda1: sp.lambda1().norm(),
            lambda2: sp.lambda2_abs(),
            inv_lambda2: sp.inv_lambda2,
            residual: max_abs_diff(&op.apply(fixed), fixed),
            eigenvalues: sp.eigenvalues.iter().map(|z| (z.re, z.im)).collect(),
        })
    })?;

    let mut out = Outcome::default();
    let mut table =
        Table::new(&["trial", "u", "tau", "lambda1_abs", "lambda2_abs", "inv_lambda2", "fixed_point_residual"]);
    let mut eig = Table::new(&["trial", "u", "tau", "index", "re", "im", "abs"]);
    let mut grid = Vec::new();
    for (&(t, u, tau), c) in cells.iter().zip(&results) {
        table.push(row![t, u, tau, c.lambda1, c.lambda2, c.inv_lambda2, c.residual])?;
        if s.eigenvalues {
            for (i, &(re, im)) in c.eigenvalues.iter().enumerate() {
                eig.push(row![t, u, tau, i, re, im, re.hypot(im)])?;
            }
        }
        grid.push(json!({ "trial": t, "u": u, "tau": tau, "lambda1_abs": c.lambda1,
            "inv_lambda2": c.inv_lambda2, "fixed_point_residual": c.residual }));
    }
    out.table("spectrum.csv", table);
    if s.eigenvalues {
        out.table("eigenvalues.csv", eig);
    }
    out.metric("cells", grid);
    Ok(out)
}
