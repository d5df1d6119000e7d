use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hqrc_cli::{parse_config, resolve_out_dir, run_experiment, CliError, ExperimentKind, OUT_DIR_ENV};

/// Higher-order quantum reservoir computing experiments.
///
/// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 1 other errors.
#[derive(Debug, Parser)]
#[command(name = "hqrc", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentKind,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides HQRC_OUT_DIR and the config's out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent trials and grid cells.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: Args) -> Result<PathBuf, CliError> {
    let mut cfg = parse_config(&args.config)?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let env = std::env::var(OUT_DIR_ENV).ok();
    let out = resolve_out_dir(args.out.as_deref(), env.as_deref(), &cfg);
    cfg.validate(args.experiment)?;
    run_experiment(args.experiment, &cfg, &out)?;
    Ok(out)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(out) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hqrc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
