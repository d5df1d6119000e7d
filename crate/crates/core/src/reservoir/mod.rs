//! Single-reservoir stepping with temporal multiplexing and the coupled ensemble.
//!
//! Within one reservoir the signal of qubit `j` at substep `v` sits at
//! `(j - 1) * V + (v - 1)`; reservoirs are concatenated in order.

mod config;
mod coupling;
mod kernel;
mod system;

pub use config::{qr_step, signal_index, signal_site, QrConfig};
pub use coupling::{cyclic_input_weights, generate_couplings, mix_input, CouplingMatrices, InputMap, Topology};
pub use kernel::StepKernel;
pub use system::{hqr_step, run_sequence, HqrSystem};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::num::Real;
use crate::qcore::build_ising;
use crate::seeds::{child, rng_from};

/// Homogeneous ensemble description: every reservoir shares size, period and coupling scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HqrSpec {
    pub n_qr: usize,
    pub n_qubits: usize,
    pub n_virtual: usize,
    pub tau: f64,
    pub coupling: f64,
    pub alpha: f64,
    pub topology: Topology,
    pub n_in: usize,
    #[serde(default)]
    pub input_map: InputMap,
}

impl HqrSpec {
    pub fn new(n_qr: usize, n_qubits: usize, n_virtual: usize, tau: f64, coupling: f64, alpha: f64) -> Self {
        Self {
            n_qr,
            n_qubits,
            n_virtual,
            tau,
            coupling,
            alpha,
            topology: Topology::Mutual,
            n_in: 1,
            input_map: InputMap::Mixed,
        }
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub fn with_input_map(mut self, input_map: InputMap) -> Self {
        self.input_map = input_map;
        self
    }

    pub fn with_inputs(mut self, n_in: usize) -> Self {
        self.n_in = n_in;
        self
    }

    pub fn n_total(&self) -> usize {
        self.n_qr * self.n_qubits * self.n_virtual
    }

    /// Reservoir `l` of the ensemble built from `seed`; identical to the one inside [`HqrSpec::build`].
    pub fn reservoir<T: Real>(&self, seed: u64, l: usize) -> Result<QrConfig<T>> {
        if self.n_qubits == 0 {
            return Err(crate::Error::Config("n_qubits must be at least 1".into()));
        }
        let h = build_ising(self.n_qubits, T::lit(self.coupling), child(seed, "hamiltonian", l));
        QrConfig::new(h, self.n_virtual, T::lit(self.tau), None)
    }

    /// Builds the ensemble with Hamiltonians and couplings derived from `seed`.
    pub fn build<T: Real>(&self, seed: u64) -> Result<HqrSystem<T>> {
        if self.n_qr == 0 {
            return Err(crate::Error::Config("n_qr must be at least 1".into()));
        }
        let configs = (0..self.n_qr).map(|l| self.reservoir(seed, l)).collect::<Result<Vec<_>>>()?;
        let blocks: Vec<usize> = configs.iter().map(QrConfig::n_signals).collect();
        let mut rng = rng_from(child(seed, "coupling", 0));
        let mut coupling = generate_couplings(self.n_in, &blocks, self.topology, T::lit(self.alpha), &mut rng)?;
        if self.input_map == InputMap::Cyclic {
            coupling.w_in = cyclic_input_weights(self.n_qr, self.n_in);
        }
        HqrSystem::new(configs, coupling)
    }
}

#[cfg(test)]
mod tests;
