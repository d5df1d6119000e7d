//! Experiment runner behind the `hqrc` binary: TOML configs in, CSV tables and a
//! JSON manifest out.

// Negated comparisons are how NaN gets rejected; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

pub use config::{parse_config, ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use output::{Outcome, RunManifest, Table};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "HQRC_OUT_DIR";

const DEFAULT_OUT_DIR: &str = "hqrc-out";

/// `--out` wins, then `HQRC_OUT_DIR`, then `out_dir` from the config, then `hqrc-out`.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<&str>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Validates and runs one experiment, returning its tables without touching disk.
pub fn execute(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate(kind)?;
    match kind {
        ExperimentKind::Qesp => experiments::qesp::run(cfg),
        ExperimentKind::Mc => experiments::mc::run(cfg),
        ExperimentKind::Spectrum => experiments::spectrum::run(cfg),
        ExperimentKind::Narma => experiments::narma::run(cfg),
        ExperimentKind::Lorenz => experiments::lorenz::run(cfg),
        ExperimentKind::Kse => experiments::kse::run(cfg),
        ExperimentKind::Innate => experiments::innate::run(cfg),
        ExperimentKind::Trace => experiments::trace::run(cfg),
    }
}

fn config_hash(cfg: &serde_json::Value) -> String {
    let digest = Sha256::digest(cfg.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `kind`, writes its CSV tables into `out`, and records a manifest.
///
/// A failed run still leaves a manifest carrying the failure message.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let snapshot = serde_json::to_value(cfg)?;
    let mut manifest = RunManifest {
        experiment: kind.name().to_string(),
        status: "ok".into(),
        failure: None,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_hash(&snapshot),
        config: snapshot,
        seed: cfg.seed,
        workers: cfg.workers,
        outputs: Vec::new(),
        metrics: Default::default(),
        wall_clock_seconds: 0.0,
    };
    std::fs::create_dir_all(out)?;
    let result = execute(kind, cfg).and_then(|outcome| {
        for (name, table) in &outcome.tables {
            table.write(&out.join(name))?;
            manifest.outputs.push(name.clone());
        }
        Ok(outcome.metrics)
    });
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    match result {
        Ok(metrics) => {
            manifest.metrics = metrics;
            manifest.write_atomic(out)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.status = "failed".into();
            manifest.failure = Some(e.to_string());
            // The original error matters more than a failure to record it.
            let _ = manifest.write_atomic(out);
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_dir_precedence() {
        let mut cfg = ExperimentConfig::from_toml("[reservoir]\nn_qubits = 2\ntau = 1.0\ncoupling = 1.0\n").unwrap();
        assert_eq!(resolve_out_dir(None, None, &cfg), PathBuf::from("hqrc-out"));
        assert_eq!(resolve_out_dir(None, Some(""), &cfg), PathBuf::from("hqrc-out"));
        cfg.out_dir = Some("cfg".into());
        assert_eq!(resolve_out_dir(None, None, &cfg), PathBuf::from("cfg"));
        assert_eq!(resolve_out_dir(None, Some("env"), &cfg), PathBuf::from("env"));
        assert_eq!(resolve_out_dir(Some(Path::new("flag")), Some("env"), &cfg), PathBuf::from("flag"));
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = serde_json::json!({ "seed": 1 });
        let b = serde_json::json!({ "seed": 2 });
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
