//! Ground-state EPR steering of an impurity-doped cavity-BEC Dicke model.
//!
//! The crate computes, in recoil-frequency units, the quantum-phase
//! structure of a generalized Dicke model (an atomic condensate coupled to a
//! single cavity mode, dressed by one impurity atom), the Gaussian ground
//! states of its normal and superradiant phases, and the two EPR steering
//! parameters of those states. A truncated-Fock-space oracle cross-checks
//! every closed form by dense/iterative diagonalization.
//!
//! Modules:
//! - [`model`]: effective frequencies, critical coupling, phase label, mean
//!   fields, superradiant coefficients.
//! - [`supermode`]: quadratic position-momentum problems, super-mode
//!   spectra with explicit mixing-angle branch, ground-state moments.
//! - [`steering`]: steering parameters (closed form and from moments),
//!   direction classification, threshold root-finding, QPT witness.
//! - [`oracle`]: brute-force Fock-space verification of all of the above.

pub mod error;
pub mod model;
pub mod oracle;
pub mod steering;
pub mod supermode;

pub use error::{GdmError, Result};
pub use model::{
    classify_phase, critical_coupling, effective_frequencies, impurity_couplings, mean_fields,
    superradiant_coeffs, EffectiveFrequencies, GdmParams, ImpurityCouplings, ImpurityRawParams,
    MeanField, PhaseLabel, SuperradiantCoeffs, DEFAULT_PHASE_TOL,
};
pub use oracle::{
    build_hamiltonian_matrix, compare, dump_matrix, ground_state, quadrature_moments, FockConfig,
    HamiltonianPhase, OracleDeltas, OracleReport, NEAR_CRITICAL_EXCLUSION,
};
pub use steering::{
    classify, continuity_baseline, find_threshold, qpt_witness, spectrum_at, steering_at,
    steering_closed_form, steering_from_moments, SteeringClass, SteeringDirection, SteeringMode,
    SteeringPair, WitnessReport, CRITERION_THRESHOLD, DEFAULT_WITNESS_EPSILON,
};
pub use supermode::{
    build_normal_problem, build_superradiant_problem, diagonalize, displacements,
    ground_state_moments, Branch, Displacements, GaussianMoments, QuadraticModeProblem,
    SupermodeSpectrum, CRITICAL_TOL,
};
