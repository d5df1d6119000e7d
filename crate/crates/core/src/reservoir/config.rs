use std::sync::Arc;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::qcore::{
    eigensystem, evolve, inject_input, measure_z, propagator, DensityMatrix, Eigensystem, IsingHamiltonian, Propagator,
};

use super::kernel::StepKernel;

/// Static configuration of one quantum reservoir.
#[derive(Debug, Clone)]
pub struct QrConfig<T: Real> {
    n_virtual: usize,
    tau: T,
    hamiltonian: IsingHamiltonian<T>,
    eig: Eigensystem<T>,
    initial_state: DensityMatrix<T>,
    substep: Propagator<T>,
    kernel: Arc<StepKernel<T>>,
}

impl<T: Real> QrConfig<T> {
    /// Builds a configuration; the initial state defaults to the maximally mixed state.
    pub fn new(
        hamiltonian: IsingHamiltonian<T>,
        n_virtual: usize,
        tau: T,
        initial_state: Option<DensityMatrix<T>>,
    ) -> Result<Self> {
        let n = hamiltonian.n_qubits();
        if n_virtual == 0 {
            return Err(Error::Config("n_virtual must be at least 1".into()));
        }
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::Config(format!("tau must be positive and finite, got {tau}")));
        }
        let initial_state = initial_state.unwrap_or_else(|| DensityMatrix::maximally_mixed(n));
        if initial_state.n_qubits() != n {
            return Err(Error::Config(format!(
                "initial state has {} qubits, Hamiltonian has {n}",
                initial_state.n_qubits()
            )));
        }
        initial_state.check()?;
        let eig = eigensystem(&hamiltonian);
        let substep = propagator(&eig, tau / T::from_usize_lossy(n_virtual));
        let kernel = Arc::new(StepKernel::new(&eig, n, n_virtual, tau));
        Ok(Self { n_virtual, tau, hamiltonian, eig, initial_state, substep, kernel })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn n_virtual(&self) -> usize {
        self.n_virtual
    }

    /// Signals emitted per step: `N * V`.
    pub fn n_signals(&self) -> usize {
        self.n_qubits() * self.n_virtual
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn hamiltonian(&self) -> &IsingHamiltonian<T> {
        &self.hamiltonian
    }

    pub fn eigensystem(&self) -> &Eigensystem<T> {
        &self.eig
    }

    pub fn initial_state(&self) -> &DensityMatrix<T> {
        &self.initial_state
    }

    pub fn substep_propagator(&self) -> &Propagator<T> {
        &self.substep
    }

    pub fn kernel(&self) -> &Arc<StepKernel<T>> {
        &self.kernel
    }
}

/// Position of the signal of qubit `site` (1-based) at substep `v` (1-based) within one reservoir.
#[inline]
pub fn signal_index(site: usize, v: usize, n_virtual: usize) -> usize {
    (site - 1) * n_virtual + (v - 1)
}

/// Inverse of [`signal_index`]: `(site, v)`, both 1-based.
#[inline]
pub fn signal_site(index: usize, n_virtual: usize) -> (usize, usize) {
    (index / n_virtual + 1, index % n_virtual + 1)
}

/// One reservoir step on the full density matrix: inject `u`, then `V` substeps,
/// recording `(1 + <Z_j>)/2` after each.
pub fn qr_step<T: Real>(rho: &DensityMatrix<T>, u: T, cfg: &QrConfig<T>) -> Result<(DensityMatrix<T>, Vec<T>)> {
    let n = cfg.n_qubits();
    let v_count = cfg.n_virtual;
    let mut state = inject_input(rho, u)?;
    let mut z = vec![T::zero(); n * v_count];
    for v in 1..=v_count {
        state = evolve(&state, &cfg.substep)?;
        for j in 1..=n {
            z[signal_index(j, v, v_count)] = (T::one() + measure_z(&state, j)?) * T::lit(0.5);
        }
    }
    Ok((state, z))
}
