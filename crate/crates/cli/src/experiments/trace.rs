use hqrc_core::reservoir::signal_site;
use hqrc_core::seeds::child;
use hqrc_core::tasks::uniform_inputs;

use super::par_map;
use crate::config::{ExperimentConfig, TraceInput};
use crate::error::CliError;
use crate::output::{Cell, Outcome, Table};

/// Per-step signals of one reservoir after a transient, for each `tau`.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.trace()?;
    let r = &cfg.reservoir;
    let total = s.transient + s.steps;
    let inputs: Vec<f64> = match s.input {
        TraceInput::Random => uniform_inputs(total, child(cfg.seed, "trace-input", 0)),
        TraceInput::Constant { value } => vec![value; total],
    };
    let rows = par_map(cfg.workers, &s.taus, |&tau| {
        let mut rr = r.clone();
        rr.tau = tau;
        let mut sys = rr.spec(1).build::<f64>(child(cfg.seed, "trace-reservoir", 0))?;
        let block = sys.block(s.reservoir_index);
        let mut kept = Vec::with_capacity(s.steps);
        for (k, &u) in inputs.iter().enumerate() {
            let z = sys.step(&[u])?;
            if k >= s.transient {
                kept.push((u, z[block.clone()].to_vec()));
            }
        }
        Ok(kept)
    })?;

    let mut header = vec!["tau".to_string(), "step".into(), "input".into()];
    for i in 0..r.n_qubits * r.n_virtual {
        let (j, v) = signal_site(i, r.n_virtual);
        header.push(format!("q{j}_v{v}"));
    }
    let mut table = Table::new(&header);
    for (&tau, kept) in s.taus.iter().zip(&rows) {
        for (k, (u, z)) in kept.iter().enumerate() {
            let mut cells = vec![Cell::from(tau), Cell::from(s.transient + k), Cell::from(*u)];
            cells.extend(z.iter().map(|&x| Cell::from(x)));
            table.push(cells)?;
        }
    }
    let mut out = Outcome::default();
    out.metric("rows", table.len());
    out.table("trace.csv", table);
    Ok(out)
}
