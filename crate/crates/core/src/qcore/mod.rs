//! Dense linear algebra for single-reservoir quantum states.
//!
//! Basis convention: qubit 1 is the most significant bit of the computational
//! basis index, so `|q1 q2 ... qN>` has index `q1·2^(N-1) + ... + qN`.

mod hamiltonian;
mod operators;
mod state;

pub use hamiltonian::{
    build_ising, build_ising_with_rng, eigensystem, propagator, spectral_gap, Eigensystem, IsingHamiltonian, Propagator,
};
pub use operators::{hermitian_defect, kron, max_abs_diff, pauli_operator, z_sign, Axis, CMatrix};
pub use state::{
    evolve, inject_input, input_spin_state, measure_z, partial_trace_first, schatten1_distance, DensityMatrix,
};

pub(crate) use state::trace_out_first;

use crate::num::Real;

/// Default tolerance for state invariants at precision `T`.
pub fn tolerance<T: Real>() -> T {
    let floor = T::lit(1e-10);
    let scaled = T::default_epsilon() * T::lit(1e4);
    if scaled > floor {
        scaled
    } else {
        floor
    }
}

/// Degeneracy tolerance used by [`spectral_gap`] when callers have no better value.
pub const DEFAULT_GAP_TOLERANCE: f64 = 1e-9;
