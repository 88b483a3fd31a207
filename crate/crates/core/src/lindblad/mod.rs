// SPDX-License-Identifier: Apache-2.0

//! Many-body master equations for small chains in the Pauli basis.
//!
//! Density operators and observables are coefficient vectors over the `4ⁿ`
//! Pauli strings. Generators are sparse in that basis: the Hamiltonian part
//! couples strings through the structure matrix `F` and the double-commutator
//! dissipators are diagonal.

mod evolve;
mod generator;
mod lr;
mod mixing;
mod pauli;

pub use evolve::{
    evolve_density, heisenberg_evolve, heisenberg_evolve_scaled, pauli_trace_product,
    validate_density, ScaledOperator,
};
pub use generator::{build_generator, weights, H0Spec, NoiseKind, Superoperator};
pub use lr::{
    lr_commutator, lr_log_commutator, lr_log_commutator_of, probe_operators, MAX_LR_QUBITS,
    RANDOM_PROBES,
};
pub use mixing::{
    build_structure_matrix, rank_condition_report, relaxation_check, RankReport, RelaxationReport,
    StructureMatrix, MAX_SPECTRAL_QUBITS, RANK_TOL,
};
pub use pauli::{
    anticommute, pauli_commutator, site_pauli, string_index, string_mul, string_of, weight, Pauli,
    PauliOperatorRep, MAX_QUBITS,
};
