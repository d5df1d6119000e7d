//! TOML experiment configuration. Every table rejects unknown keys.

use std::path::{Path, PathBuf};

use hqrc_core::reservoir::{HqrSpec, InputMap, Topology};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Qesp,
    Mc,
    Spectrum,
    Narma,
    Lorenz,
    Kse,
    Innate,
    Trace,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Qesp => "qesp",
            Self::Mc => "mc",
            Self::Spectrum => "spectrum",
            Self::Narma => "narma",
            Self::Lorenz => "lorenz",
            Self::Kse => "kse",
            Self::Innate => "innate",
            Self::Trace => "trace",
        }
    }
}

fn one() -> usize {
    1
}

fn default_topology() -> Topology {
    Topology::Mutual
}

/// Reservoir ensemble shared by every experiment; sweeps override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSection {
    #[serde(default = "one")]
    pub n_qr: usize,
    pub n_qubits: usize,
    #[serde(default = "one")]
    pub n_virtual: usize,
    pub tau: f64,
    /// Coupling magnitude `J`.
    pub coupling: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_topology")]
    pub topology: Topology,
    #[serde(default)]
    pub input_map: InputMap,
}

impl ReservoirSection {
    pub fn spec(&self, n_in: usize) -> HqrSpec {
        HqrSpec::new(self.n_qr, self.n_qubits, self.n_virtual, self.tau, self.coupling, self.alpha)
            .with_topology(self.topology)
            .with_input_map(self.input_map)
            .with_inputs(n_in)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n_qr == 0 {
            return config_err("reservoir.n_qr must be at least 1");
        }
        if !(2..=10).contains(&self.n_qubits) {
            return config_err(format!("reservoir.n_qubits = {} must lie in [2, 10]", self.n_qubits));
        }
        if self.n_virtual == 0 {
            return config_err("reservoir.n_virtual must be at least 1");
        }
        positive("reservoir.tau", self.tau)?;
        finite_nonneg("reservoir.coupling", self.coupling)?;
        unit("reservoir.alpha", self.alpha)
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        config_err(format!("{name} = {x} must be positive and finite"))
    }
}

fn finite_nonneg(name: &str, x: f64) -> Result<(), CliError> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        config_err(format!("{name} = {x} must be nonnegative and finite"))
    }
}

fn unit(name: &str, x: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        config_err(format!("{name} = {x} must lie in [0, 1]"))
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        config_err(format!("{name} must list at least one value"))
    } else {
        Ok(())
    }
}

fn at_least_one(name: &str, n: usize) -> Result<(), CliError> {
    if n == 0 {
        config_err(format!("{name} must be at least 1"))
    } else {
        Ok(())
    }
}

fn each(name: &str, v: &[f64], check: fn(&str, f64) -> Result<(), CliError>) -> Result<(), CliError> {
    nonempty(name, v)?;
    v.iter().try_for_each(|&x| check(name, x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QespSection {
    pub taus: Vec<f64>,
    pub couplings: Vec<f64>,
    #[serde(default = "qesp_washout")]
    pub washout: usize,
    #[serde(default = "qesp_eval")]
    pub eval: usize,
    /// Random initial states compared against the reference per trial.
    #[serde(default = "ten")]
    pub perturbations: usize,
    #[serde(default = "ten")]
    pub trials: usize,
}

fn qesp_washout() -> usize {
    9000
}
fn qesp_eval() -> usize {
    1000
}
fn ten() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McVariant {
    pub n_qr: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub taus: Vec<f64>,
    pub variants: Vec<McVariant>,
    #[serde(default = "mc_dmax")]
    pub d_max: usize,
    #[serde(default = "ten")]
    pub trials: usize,
    #[serde(default = "thousand")]
    pub washout: usize,
    #[serde(default = "mc_train")]
    pub train: usize,
    #[serde(default = "thousand")]
    pub eval: usize,
    #[serde(default = "mc_beta")]
    pub beta: f64,
}

fn mc_dmax() -> usize {
    200
}
fn thousand() -> usize {
    1000
}
fn mc_train() -> usize {
    3000
}
fn mc_beta() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Constant input values `u`.
    pub inputs: Vec<f64>,
    pub taus: Vec<f64>,
    #[serde(default = "one")]
    pub trials: usize,
    /// Also write every nonzero eigenvalue.
    #[serde(default)]
    pub eigenvalues: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum ReservoirInput {
    /// The uniform `[0, 1]` sequence before NARMA scaling.
    #[default]
    Raw,
    /// The scaled sequence that enters the recurrence.
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsnSection {
    #[serde(default = "esn_nodes")]
    pub nodes: usize,
    #[serde(default = "esn_radius")]
    pub radius: f64,
    #[serde(default = "ten")]
    pub degree: usize,
    #[serde(default = "esn_noise")]
    pub noise: f64,
    #[serde(default = "unit_scale")]
    pub input_scale: f64,
    #[serde(default = "narma_beta")]
    pub beta: f64,
}

fn esn_nodes() -> usize {
    100
}
fn esn_radius() -> f64 {
    0.8
}
fn esn_noise() -> f64 {
    1e-3
}
fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NarmaSection {
    pub orders: Vec<usize>,
    pub alphas: Vec<f64>,
    #[serde(default = "ten")]
    pub trials: usize,
    #[serde(default = "narma_phase")]
    pub washout: usize,
    #[serde(default = "narma_phase")]
    pub train: usize,
    #[serde(default = "narma_phase")]
    pub eval: usize,
    #[serde(default = "narma_beta")]
    pub beta: f64,
    #[serde(default)]
    pub reservoir_input: ReservoirInput,
    pub esn: Option<EsnSection>,
}

fn narma_phase() -> usize {
    2000
}
fn narma_beta() -> f64 {
    1e-7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzSection {
    pub alphas: Vec<f64>,
    #[serde(default = "twenty")]
    pub trials: usize,
    #[serde(default = "thousand")]
    pub transient: usize,
    #[serde(default = "hundred")]
    pub washout: usize,
    #[serde(default = "lorenz_train")]
    pub train: usize,
    #[serde(default = "thousand")]
    pub predict: usize,
    #[serde(default = "narma_beta")]
    pub beta: f64,
    #[serde(default = "half")]
    pub epsilon: f64,
    #[serde(default)]
    pub augment: bool,
    #[serde(default = "lorenz_dt")]
    pub dt: f64,
}

fn twenty() -> usize {
    20
}
fn hundred() -> usize {
    100
}
fn lorenz_train() -> usize {
    10_000
}
fn half() -> f64 {
    0.5
}
fn lorenz_dt() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KseSection {
    #[serde(default = "kse_grid")]
    pub grid: usize,
    #[serde(default = "kse_length")]
    pub domain_length: f64,
    #[serde(default = "kse_dt")]
    pub dt: f64,
    #[serde(default = "kse_lyapunov")]
    pub lyapunov: f64,
    #[serde(default = "thousand")]
    pub transient: usize,
    #[serde(default = "kse_washout")]
    pub washout: usize,
    #[serde(default = "kse_train")]
    pub train: usize,
    #[serde(default = "kse_washout")]
    pub predict: usize,
    #[serde(default = "kse_groups")]
    pub groups: usize,
    #[serde(default = "two")]
    pub width: usize,
    #[serde(default = "two")]
    pub halo: usize,
    pub alphas: Vec<f64>,
    #[serde(default = "three")]
    pub trials: usize,
    /// Steps between the starts of consecutive trials on the shared trajectory.
    #[serde(default = "kse_spacing")]
    pub trial_spacing: usize,
    #[serde(default = "kse_beta")]
    pub beta: f64,
    #[serde(default = "yes")]
    pub augment: bool,
    /// NRMSE level whose first crossing defines the reported valid time.
    #[serde(default = "unit_scale")]
    pub threshold: f64,
}

fn kse_grid() -> usize {
    16
}
fn kse_length() -> f64 {
    22.0
}
fn kse_dt() -> f64 {
    0.25
}
fn kse_lyapunov() -> f64 {
    0.05
}
fn kse_washout() -> usize {
    200
}
fn kse_train() -> usize {
    2000
}
fn kse_groups() -> usize {
    8
}
fn two() -> usize {
    2
}
fn three() -> usize {
    3
}
fn kse_spacing() -> usize {
    300
}
fn kse_beta() -> f64 {
    1e-6
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnateSection {
    pub noise_stds: Vec<f64>,
    #[serde(default = "ten")]
    pub trials: usize,
    #[serde(default = "twenty")]
    pub loops: usize,
    #[serde(default = "innate_rate")]
    pub learning_rate: f64,
    #[serde(default = "innate_transient")]
    pub transient: usize,
    #[serde(default = "innate_train_end")]
    pub train_end: usize,
    #[serde(default = "innate_eval_end")]
    pub eval_end: usize,
}

fn innate_rate() -> f64 {
    10.0
}
fn innate_transient() -> usize {
    2000
}
fn innate_train_end() -> usize {
    4000
}
fn innate_eval_end() -> usize {
    6000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
#[derive(Default)]
pub enum TraceInput {
    #[default]
    Random,
    Constant {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub taus: Vec<f64>,
    #[serde(default = "qesp_washout")]
    pub transient: usize,
    #[serde(default = "thousand")]
    pub steps: usize,
    /// Which reservoir of the ensemble to record.
    #[serde(default)]
    pub reservoir_index: usize,
    #[serde(default)]
    pub input: TraceInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must match the subcommand.
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    pub reservoir: ReservoirSection,
    pub qesp: Option<QespSection>,
    pub mc: Option<McSection>,
    pub spectrum: Option<SpectrumSection>,
    pub narma: Option<NarmaSection>,
    pub lorenz: Option<LorenzSection>,
    pub kse: Option<KseSection>,
    pub innate: Option<InnateSection>,
    pub trace: Option<TraceSection>,
}

fn section<T>(s: &Option<T>, kind: ExperimentKind) -> Result<&T, CliError> {
    s.as_ref().ok_or_else(|| CliError::Config(format!("missing [{}] table", kind.name())))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn qesp(&self) -> Result<&QespSection, CliError> {
        section(&self.qesp, ExperimentKind::Qesp)
    }
    pub fn mc(&self) -> Result<&McSection, CliError> {
        section(&self.mc, ExperimentKind::Mc)
    }
    pub fn spectrum(&self) -> Result<&SpectrumSection, CliError> {
        section(&self.spectrum, ExperimentKind::Spectrum)
    }
    pub fn narma(&self) -> Result<&NarmaSection, CliError> {
        section(&self.narma, ExperimentKind::Narma)
    }
    pub fn lorenz(&self) -> Result<&LorenzSection, CliError> {
        section(&self.lorenz, ExperimentKind::Lorenz)
    }
    pub fn kse(&self) -> Result<&KseSection, CliError> {
        section(&self.kse, ExperimentKind::Kse)
    }
    pub fn innate(&self) -> Result<&InnateSection, CliError> {
        section(&self.innate, ExperimentKind::Innate)
    }
    pub fn trace(&self) -> Result<&TraceSection, CliError> {
        section(&self.trace, ExperimentKind::Trace)
    }

    /// Checks everything `kind` will read, before any computation starts.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), CliError> {
        if let Some(declared) = self.experiment {
            if declared != kind {
                return config_err(format!(
                    "config declares experiment {:?} but {:?} was requested",
                    declared.name(),
                    kind.name()
                ));
            }
        }
        at_least_one("workers", self.workers)?;
        self.reservoir.validate()?;
        let r = &self.reservoir;
        match kind {
            ExperimentKind::Qesp => {
                let s = self.qesp()?;
                each("qesp.taus", &s.taus, positive)?;
                each("qesp.couplings", &s.couplings, finite_nonneg)?;
                at_least_one("qesp.washout", s.washout)?;
                at_least_one("qesp.eval", s.eval)?;
                at_least_one("qesp.perturbations", s.perturbations)?;
                at_least_one("qesp.trials", s.trials)?;
            }
            ExperimentKind::Mc => {
                let s = self.mc()?;
                each("mc.taus", &s.taus, positive)?;
                nonempty("mc.variants", &s.variants)?;
                for v in &s.variants {
                    at_least_one("mc.variants.n_qr", v.n_qr)?;
                    unit("mc.variants.alpha", v.alpha)?;
                    if v.n_qr == 1 && v.alpha > 0.0 {
                        return config_err("mc.variants: a single reservoir has no feedback, so alpha must be 0");
                    }
                }
                at_least_one("mc.trials", s.trials)?;
                at_least_one("mc.train", s.train)?;
                at_least_one("mc.eval", s.eval)?;
                if s.d_max > s.washout {
                    return config_err(format!("mc.d_max = {} must not exceed mc.washout = {}", s.d_max, s.washout));
                }
                finite_nonneg("mc.beta", s.beta)?;
            }
            ExperimentKind::Spectrum => {
                let s = self.spectrum()?;
                each("spectrum.inputs", &s.inputs, unit)?;
                each("spectrum.taus", &s.taus, positive)?;
                at_least_one("spectrum.trials", s.trials)?;
            }
            ExperimentKind::Narma => {
                let s = self.narma()?;
                nonempty("narma.orders", &s.orders)?;
                if s.orders.contains(&0) {
                    return config_err("narma.orders must be positive");
                }
                // An ESN-only run needs no reservoir sweep.
                if s.esn.is_none() || !s.alphas.is_empty() {
                    each("narma.alphas", &s.alphas, unit)?;
                }
                if r.n_qr == 1 && s.alphas.iter().any(|&a| a > 0.0) {
                    return config_err("narma.alphas: a single reservoir has no feedback, so alpha must be 0");
                }
                at_least_one("narma.trials", s.trials)?;
                at_least_one("narma.train", s.train)?;
                at_least_one("narma.eval", s.eval)?;
                finite_nonneg("narma.beta", s.beta)?;
                if let Some(e) = &s.esn {
                    if !(e.radius > 0.0 && e.radius < 1.0) {
                        return config_err(format!("narma.esn.radius = {} must lie in (0, 1)", e.radius));
                    }
                    if e.degree == 0 || e.degree >= e.nodes {
                        return config_err(format!("narma.esn.degree = {} must lie in [1, nodes)", e.degree));
                    }
                    finite_nonneg("narma.esn.noise", e.noise)?;
                    positive("narma.esn.input_scale", e.input_scale)?;
                    finite_nonneg("narma.esn.beta", e.beta)?;
                }
            }
            ExperimentKind::Lorenz => {
                let s = self.lorenz()?;
                each("lorenz.alphas", &s.alphas, unit)?;
                at_least_one("lorenz.trials", s.trials)?;
                at_least_one("lorenz.train", s.train)?;
                at_least_one("lorenz.predict", s.predict)?;
                finite_nonneg("lorenz.beta", s.beta)?;
                positive("lorenz.epsilon", s.epsilon)?;
                positive("lorenz.dt", s.dt)?;
            }
            ExperimentKind::Kse => {
                let s = self.kse()?;
                if s.grid < 4 || s.grid % 2 != 0 {
                    return config_err(format!("kse.grid = {} must be even and at least 4", s.grid));
                }
                positive("kse.domain_length", s.domain_length)?;
                positive("kse.dt", s.dt)?;
                positive("kse.lyapunov", s.lyapunov)?;
                at_least_one("kse.groups", s.groups)?;
                at_least_one("kse.width", s.width)?;
                if s.groups * s.width != s.grid {
                    return config_err(format!(
                        "kse.groups * kse.width = {} must equal kse.grid = {}",
                        s.groups * s.width,
                        s.grid
                    ));
                }
                each("kse.alphas", &s.alphas, unit)?;
                at_least_one("kse.trials", s.trials)?;
                at_least_one("kse.train", s.train)?;
                at_least_one("kse.predict", s.predict)?;
                finite_nonneg("kse.beta", s.beta)?;
                positive("kse.threshold", s.threshold)?;
            }
            ExperimentKind::Innate => {
                let s = self.innate()?;
                each("innate.noise_stds", &s.noise_stds, finite_nonneg)?;
                at_least_one("innate.trials", s.trials)?;
                positive("innate.learning_rate", s.learning_rate)?;
                if !(s.transient < s.train_end && s.train_end < s.eval_end) {
                    return config_err("innate windows must satisfy transient < train_end < eval_end");
                }
                if r.n_qr < 2 || r.alpha <= 0.0 {
                    return config_err("innate training needs at least two reservoirs and alpha > 0");
                }
            }
            ExperimentKind::Trace => {
                let s = self.trace()?;
                each("trace.taus", &s.taus, positive)?;
                at_least_one("trace.steps", s.steps)?;
                if s.reservoir_index >= r.n_qr {
                    return config_err(format!(
                        "trace.reservoir_index = {} but the ensemble has {} reservoirs",
                        s.reservoir_index, r.n_qr
                    ));
                }
                if let TraceInput::Constant { value } = s.input {
                    unit("trace.input.value", value)?;
                }
            }
        }
        Ok(())
    }
}

/// Reads and parses a config file; validation is a separate step.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text)
}
