//! Numerical toolkit for work extraction from partially characterized
//! quantum sources.
//!
//! The crate computes von Neumann, observational and entanglement entropy,
//! ergotropy and observational ergotropy, minimizes observational entropy
//! over local product measurements (quantum correlation entropy), and
//! simulates the certify-then-extract protocol in which a source is first
//! measured in a fixed basis and then dephased by random phases and cooled
//! by an N-copy passive unitary.
//!
//! Entropies are in nats. Bipartite indices are `i_a * d_b + i_b`.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod localopt;
pub mod protocol;
pub mod qstate;
pub mod rng;
pub mod thermo;

pub use entropy::{
    entanglement_entropy, observational_entropy, outcome_distribution, schmidt,
    von_neumann_entropy, Measurement, OutcomeDistribution, ProductMeasurement,
    SchmidtDecomposition,
};
pub use error::{Error, Result};
pub use localopt::{
    haar_random_unitary, minimize_obs_entropy_product, quantum_correlation_entropy,
    LocalMinResult, OptimizerConfig, QuantumCorrelation, Strategy,
};
pub use protocol::{
    certify, convergence_study, cooling_diagnostic, extraction_unitary, random_phase_unitary,
    simulate_extraction, Certification, ConvergenceReport, ConvergenceRow, CoolingReport,
    Extraction, ProtocolConfig, WorkSamples,
};
pub use qstate::{
    spectral, Bipartition, CMatrix, DensityMatrix, PureState, SpectralDecomposition, Subsystem,
    C64, DEFAULT_DIM_CAP, DEFAULT_TOL,
};
pub use thermo::{
    entanglement_ergotropy, ergotropy, observational_ergotropy, passive_transform, solve_beta,
    thermal_entropy, thermal_state, Hamiltonian, ObservationalErgotropy, PassiveTransform,
    ThermalState,
};
