//! Stability and capacity diagnostics.

mod memory;
mod qesp;
mod spectrum;

pub use memory::{memory_capacity, memory_function, memory_profile, MemoryCapacity, MemorySplits};
pub use qesp::{qesp_index, qesp_index_with_states, QespConfig, QespResult};
pub use spectrum::{cptp_spectrum, superoperator, SpectrumResult, SuperOperator, INV_LAMBDA2_SENTINEL};

#[cfg(test)]
mod tests;
