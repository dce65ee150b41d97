//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Everything that can go wrong while evaluating the model.
#[derive(Debug, Clone, Error)]
pub enum GdmError {
    /// A frequency detuning in the impurity-coupling formulas vanished.
    #[error("detuning {name} vanishes; impurity couplings are undefined")]
    ZeroDetuning { name: &'static str },

    /// A model parameter violates its allowed range.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Effective atomic frequency came out non-positive.
    #[error("atomic mode unstable for these parameters (omega2 = {omega2})")]
    UnstableAtomicMode { omega2: f64 },

    /// Effective cavity frequency came out non-positive.
    #[error("cavity mode unstable for these parameters (omega1 = {omega1})")]
    UnstableCavityMode { omega1: f64 },

    /// Mean fields requested below the critical coupling.
    #[error("mean fields undefined in normal phase (lambda = {lambda} < lambda_c = {lambda_c})")]
    MeanFieldsUndefined { lambda: f64, lambda_c: f64 },

    /// K = sqrt(1 - beta^2) vanished. Unreachable for beta^2 < 1/2 but guarded.
    #[error("K = sqrt(1 - beta^2) vanished (beta = {beta}); superradiant coefficients singular")]
    SingularKFactor { beta: f64 },

    /// A quadratic mode problem has a non-positive diagonal stiffness.
    #[error("quadratic mode problem unstable (stiffness = {stiffness} <= 0)")]
    UnstableStiffness { stiffness: f64 },

    /// The lower super-mode frequency squared is negative beyond tolerance.
    #[error(
        "critical or unstable: lower super-mode frequency imaginary (omega_lo^2 = {omega_lo_sq:e})"
    )]
    ImaginaryLowerMode { omega_lo_sq: f64 },

    /// The lower super-mode frequency vanishes within tolerance: the problem
    /// sits at the quantum phase transition and moments diverge.
    #[error("critical point: lower super-mode frequency vanishes (omega_lo^2 = {omega_lo_sq:e})")]
    CriticalPoint { omega_lo_sq: f64 },

    /// A variance in a steering denominator is non-positive.
    #[error("non-positive variance in steering denominator")]
    ZeroVariance,

    /// A closed-form steering denominator vanished (requires omega_lo = 0).
    #[error("degenerate steering denominator")]
    DegenerateDenominator,

    /// Bisection bracket does not contain a sign change of E - 1/2.
    #[error("no crossing: E - 1/2 has the same sign at both ends of [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    /// Bisection bracket crosses the critical coupling, where the two phases
    /// use different closed forms.
    #[error("bracket [{lo}, {hi}] straddles the critical coupling {lambda_c}; phases use different closed forms")]
    BracketStraddlesCritical { lo: f64, hi: f64, lambda_c: f64 },

    /// Witness offset outside its supported window.
    #[error("witness offset epsilon = {epsilon} outside [1e-4, 0.5)")]
    InvalidEpsilon { epsilon: f64 },

    /// Requested Fock matrix would exceed the configured dimension cap.
    #[error("Fock matrix dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// The iterative eigensolver failed to reach its residual target.
    #[error("eigensolver failed: {message}")]
    Eigensolver { message: String },

    /// Oracle comparison requested too close to the critical coupling, where
    /// the soft-mode squeezing makes Fock truncation diverge.
    #[error("near-critical exclusion: |lambda - lambda_c|/lambda_c = {rel:.4} < {limit}")]
    NearCritical { rel: f64, limit: f64 },

    /// Invalid Fock truncation configuration.
    #[error("invalid Fock configuration: {message}")]
    InvalidFockConfig { message: String },
}

pub type Result<T> = std::result::Result<T, GdmError>;
