use hqrc_core::innate::{innate_train, InnateReport, InnateTrainer, InnateWindows, NoiseSpec};
use hqrc_core::seeds::child;
use hqrc_core::tasks::uniform_inputs;
use hqrc_core::Series;
use serde_json::json;

use super::{mean_std, par_map};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Outcome, Table};
use crate::row;

/// Quantum-innate training under signal noise: pre/post evaluation RMSE per noise level.
///
/// Trial `t` shares its ensemble, inputs and noise stream across noise levels.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.innate()?;
    let windows = InnateWindows { transient: s.transient, train: s.train_end, eval: s.eval_end };
    let cells: Vec<(usize, usize)> = (0..s.noise_stds.len()).flat_map(|i| (0..s.trials).map(move |t| (i, t))).collect();
    let reports: Vec<InnateReport> = par_map(cfg.workers, &cells, |&(i, t)| {
        let mut sys = cfg.reservoir.spec(1).build::<f64>(child(cfg.seed, "innate-reservoir", t))?;
        let inputs = Series::from_scalars(&uniform_inputs::<f64>(s.eval_end, child(cfg.seed, "innate-input", t)));
        let mut trainer = InnateTrainer::new(&mut sys, &inputs, s.learning_rate, windows)?;
        let noise = NoiseSpec::new(s.noise_stds[i], child(cfg.seed, "innate-noise", t))?;
        Ok(innate_train(&mut sys, &mut trainer, &inputs, s.loops, &noise)?)
    })?;

    let mut out = Outcome::default();
    let mut table =
        Table::new(&["noise_std", "trial", "pre_train", "pre_eval", "post_train", "post_eval", "max_weight"]);
    let mut loops = Table::new(&["noise_std", "trial", "loop", "eval_rmse"]);
    for (&(i, t), r) in cells.iter().zip(&reports) {
        let sd = s.noise_stds[i];
        table.push(row![sd, t, r.pre.train, r.pre.eval, r.post.train, r.post.eval, r.max_weight])?;
        for (p, &e) in r.loop_eval_rmse.iter().enumerate() {
            loops.push(row![sd, t, p, e])?;
        }
    }
    let mut summary = Table::new(&["noise_std", "pre_eval_mean", "pre_eval_std", "post_eval_mean", "post_eval_std"]);
    let mut grid = Vec::new();
    for (i, group) in reports.chunks(s.trials).enumerate() {
        let pre: Vec<f64> = group.iter().map(|r| r.pre.eval).collect();
        let post: Vec<f64> = group.iter().map(|r| r.post.eval).collect();
        let (pm, ps) = mean_std(&pre);
        let (qm, qs) = mean_std(&post);
        summary.push(row![s.noise_stds[i], pm, ps, qm, qs])?;
        grid.push(json!({ "noise_std": s.noise_stds[i], "pre_eval_mean": pm, "post_eval_mean": qm }));
    }
    out.table("innate.csv", table);
    out.table("innate_loops.csv", loops);
    out.table("innate_mean.csv", summary);
    out.metric("cells", grid);
    Ok(out)
}
