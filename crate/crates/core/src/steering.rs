//! EPR steering parameters, direction classification, threshold search, and
//! the phase-transition witness.
//!
//! Steerability of the two-mode Gaussian ground state is measured by the
//! pair
//!
//! ```text
//! E_a->p = var1 - cov / var2      (atoms steer photons when < 1/2)
//! E_p->a = var2 - cov / var1      (photons steer atoms when < 1/2)
//! ```
//!
//! Note the cross-correlation enters *unsquared*; this matches the closed
//! forms used throughout and is the canonical mode here
//! ([`SteeringMode::PaperUnsquared`]). The conventional Reid
//! conditional-variance criterion with `cov^2` is available as an explicitly
//! labeled alternative ([`SteeringMode::ReidSquared`]); it reduces to the
//! tidy closed forms `1/D_a`, `1/D_p` with
//!
//! ```text
//! D_a = (Omega_hi + Omega_lo) + cos2theta (Omega_hi - Omega_lo)
//! D_p = (Omega_hi + Omega_lo) - cos2theta (Omega_hi - Omega_lo)
//! ```
//!
//! Both parameters diverge like `1/Omega_lo` as the coupling approaches the
//! critical point, and the normal- and superradiant-phase expressions meet
//! there with a finite mismatch: the jump witnesses the quantum phase
//! transition.

use crate::error::{GdmError, Result};
use crate::model::{
    classify_phase, critical_coupling, mean_fields, superradiant_coeffs, GdmParams, PhaseLabel,
    DEFAULT_PHASE_TOL,
};
use crate::supermode::{
    build_normal_problem, build_superradiant_problem, diagonalize, ground_state_moments, Branch,
    GaussianMoments, SupermodeSpectrum,
};

/// The steering criterion threshold: a mode is steerable when its parameter
/// drops strictly below this value.
pub const CRITERION_THRESHOLD: f64 = 0.5;

/// Absolute tolerance in lambda for threshold bisection.
pub const THRESHOLD_LAMBDA_TOL: f64 = 1e-6;

/// Default relative offset for witness evaluation around the critical point.
pub const DEFAULT_WITNESS_EPSILON: f64 = 1e-3;

/// How the steering parameters treat the cross-correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringMode {
    /// Unsquared cross-correlation, matching the closed forms. Canonical.
    PaperUnsquared,
    /// Conventional Reid conditional variance with squared covariance.
    ReidSquared,
}

impl std::fmt::Display for SteeringMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SteeringMode::PaperUnsquared => write!(f, "paper"),
            SteeringMode::ReidSquared => write!(f, "reid"),
        }
    }
}

/// The two steering parameters of a state, plus the mode that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringPair {
    /// Steerability from the condensed atoms to the cavity field.
    pub e_atoms_to_photons: f64,
    /// Steerability from the cavity field to the condensed atoms.
    pub e_photons_to_atoms: f64,
    /// The 1/2 criterion both parameters are compared against.
    pub criterion_threshold: f64,
    /// Covariance treatment used to compute the pair.
    pub mode: SteeringMode,
}

/// Which directions are steerable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringClass {
    NoSteering,
    OneWayPhotonsToAtoms,
    OneWayAtomsToPhotons,
    TwoWay,
}

impl std::fmt::Display for SteeringClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SteeringClass::NoSteering => write!(f, "none"),
            SteeringClass::OneWayPhotonsToAtoms => write!(f, "one-way-photons-to-atoms"),
            SteeringClass::OneWayAtomsToPhotons => write!(f, "one-way-atoms-to-photons"),
            SteeringClass::TwoWay => write!(f, "two-way"),
        }
    }
}

/// One of the two steering directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringDirection {
    AtomsToPhotons,
    PhotonsToAtoms,
}

impl std::fmt::Display for SteeringDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SteeringDirection::AtomsToPhotons => write!(f, "atoms->photons"),
            SteeringDirection::PhotonsToAtoms => write!(f, "photons->atoms"),
        }
    }
}

/// Steering parameters straight from the moments.
pub fn steering_from_moments(m: &GaussianMoments, mode: SteeringMode) -> Result<SteeringPair> {
    if m.var1 <= 0.0 || m.var2 <= 0.0 {
        return Err(GdmError::ZeroVariance);
    }
    let correlation = match mode {
        SteeringMode::PaperUnsquared => m.cov,
        SteeringMode::ReidSquared => m.cov * m.cov,
    };
    Ok(SteeringPair {
        e_atoms_to_photons: m.var1 - correlation / m.var2,
        e_photons_to_atoms: m.var2 - correlation / m.var1,
        criterion_threshold: CRITERION_THRESHOLD,
        mode,
    })
}

/// Closed-form steering parameters of a diagonalized problem:
///
/// ```text
/// N  = S (S - 4 P) + 4 P,  S = sin2theta (Omega_hi - Omega_lo),  P = Omega_hi Omega_lo
/// E_a->p = N / (4 P D_a),  E_p->a = N / (4 P D_p)
/// ```
///
/// Algebraically identical to [`steering_from_moments`] in
/// [`SteeringMode::PaperUnsquared`] applied to the ground-state moments.
pub fn steering_closed_form(s: &SupermodeSpectrum) -> Result<SteeringPair> {
    let p = s.omega_hi * s.omega_lo;
    let diff = s.omega_hi - s.omega_lo;
    // Half-angle arrangement of D_a = sum + cos2theta diff and
    // D_p = sum - cos2theta diff; identical algebra, no cancellation when
    // cos2theta approaches -+1.
    let (cos_sq, sin_sq) = crate::supermode::half_angle_weights(s);
    let d_a = 2.0 * (s.omega_hi * cos_sq + s.omega_lo * sin_sq);
    let d_p = 2.0 * (s.omega_hi * sin_sq + s.omega_lo * cos_sq);
    if d_a == 0.0 || d_p == 0.0 {
        return Err(GdmError::DegenerateDenominator);
    }
    let shear = s.sin2theta * diff;
    let numerator = shear * (shear - 4.0 * p) + 4.0 * p;
    Ok(SteeringPair {
        e_atoms_to_photons: numerator / (4.0 * p * d_a),
        e_photons_to_atoms: numerator / (4.0 * p * d_p),
        criterion_threshold: CRITERION_THRESHOLD,
        mode: SteeringMode::PaperUnsquared,
    })
}

/// Classifies a pair by strict comparison against the 1/2 criterion.
pub fn classify(pair: &SteeringPair) -> SteeringClass {
    let atoms_steer = pair.e_atoms_to_photons < pair.criterion_threshold;
    let photons_steer = pair.e_photons_to_atoms < pair.criterion_threshold;
    match (atoms_steer, photons_steer) {
        (false, false) => SteeringClass::NoSteering,
        (false, true) => SteeringClass::OneWayPhotonsToAtoms,
        (true, false) => SteeringClass::OneWayAtomsToPhotons,
        (true, true) => SteeringClass::TwoWay,
    }
}

/// Diagonalizes the phase-appropriate problem at the parameter set's own
/// coupling. Errors at the critical point.
pub fn spectrum_at(params: &GdmParams, branch: Branch) -> Result<SupermodeSpectrum> {
    match classify_phase(params, DEFAULT_PHASE_TOL)? {
        PhaseLabel::Normal => diagonalize(&build_normal_problem(params)?, branch),
        PhaseLabel::Critical => Err(GdmError::CriticalPoint { omega_lo_sq: 0.0 }),
        PhaseLabel::Superradiant => {
            let mf = mean_fields(params)?;
            let coeffs = superradiant_coeffs(params, &mf)?;
            diagonalize(&build_superradiant_problem(params, &coeffs)?, branch)
        }
    }
}

/// Full pipeline from parameters to a steering pair, picking the phase
/// automatically.
pub fn steering_at(params: &GdmParams, branch: Branch, mode: SteeringMode) -> Result<SteeringPair> {
    let spectrum = spectrum_at(params, branch)?;
    match mode {
        SteeringMode::PaperUnsquared => steering_closed_form(&spectrum),
        SteeringMode::ReidSquared => {
            let m = ground_state_moments(
                &spectrum,
                &crate::supermode::Displacements {
                    x01: 0.0,
                    x0_lo: 0.0,
                },
            );
            steering_from_moments(&m, SteeringMode::ReidSquared)
        }
    }
}

/// Bisects the selected steering parameter through the 1/2 criterion inside
/// `bracket = [lambda_lo, lambda_hi]`, to an absolute lambda tolerance of
/// [`THRESHOLD_LAMBDA_TOL`]. Uses the canonical unsquared mode.
///
/// The bracket must lie within a single phase: the two phases use different
/// closed forms and must not be mixed inside one root-find.
pub fn find_threshold(
    params: &GdmParams,
    branch: Branch,
    which: SteeringDirection,
    bracket: [f64; 2],
) -> Result<f64> {
    let [mut lo, mut hi] = bracket;
    if lo.is_nan() || hi.is_nan() || lo >= hi || lo < 0.0 {
        return Err(GdmError::InvalidParameter {
            name: "bracket",
            value: lo,
            reason: "bracket must satisfy 0 <= lambda_lo < lambda_hi",
        });
    }
    let lambda_c = critical_coupling(params)?;
    let phase_lo = classify_phase(&params.at_lambda(lo), DEFAULT_PHASE_TOL)?;
    let phase_hi = classify_phase(&params.at_lambda(hi), DEFAULT_PHASE_TOL)?;
    if phase_lo != phase_hi || phase_lo == PhaseLabel::Critical {
        return Err(GdmError::BracketStraddlesCritical { lo, hi, lambda_c });
    }
    let eval = |lambda: f64| -> Result<f64> {
        let pair = steering_at(
            &params.at_lambda(lambda),
            branch,
            SteeringMode::PaperUnsquared,
        )?;
        let value = match which {
            SteeringDirection::AtomsToPhotons => pair.e_atoms_to_photons,
            SteeringDirection::PhotonsToAtoms => pair.e_photons_to_atoms,
        };
        Ok(value - CRITERION_THRESHOLD)
    };
    let mut f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(GdmError::NoCrossing { lo, hi });
    }
    while hi - lo > THRESHOLD_LAMBDA_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = eval(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Steering pairs just below and just above the critical coupling, and the
/// absolute jumps between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport {
    pub lambda_c: f64,
    /// Normal-phase closed form at lambda_c (1 - epsilon).
    pub e_below: SteeringPair,
    /// Superradiant-phase closed form at lambda_c (1 + epsilon).
    pub e_above: SteeringPair,
    pub jump_atoms_to_photons: f64,
    pub jump_photons_to_atoms: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(1e-4..0.5).contains(&epsilon) {
        return Err(GdmError::InvalidEpsilon { epsilon });
    }
    Ok(())
}

/// Evaluates the steering parameters at `lambda_c (1 -+ epsilon)` with the
/// phase-appropriate closed form on each side and reports the jumps across
/// the critical point. Both sides use the same branch.
pub fn qpt_witness(params: &GdmParams, branch: Branch, epsilon: f64) -> Result<WitnessReport> {
    check_epsilon(epsilon)?;
    let lambda_c = critical_coupling(params)?;
    let below = steering_at(
        &params.at_lambda(lambda_c * (1.0 - epsilon)),
        branch,
        SteeringMode::PaperUnsquared,
    )?;
    let above = steering_at(
        &params.at_lambda(lambda_c * (1.0 + epsilon)),
        branch,
        SteeringMode::PaperUnsquared,
    )?;
    Ok(WitnessReport {
        lambda_c,
        e_below: below,
        e_above: above,
        jump_atoms_to_photons: (above.e_atoms_to_photons - below.e_atoms_to_photons).abs(),
        jump_photons_to_atoms: (above.e_photons_to_atoms - below.e_photons_to_atoms).abs(),
    })
}

/// Continuity baseline for the witness: the variation a *single* closed form
/// shows over the same relative window, evaluated with the normal-phase
/// expression around the interior anchor `lambda_c / 2` where it is
/// analytic. Returns `(jump_atoms_to_photons, jump_photons_to_atoms)`.
///
/// A genuine phase-transition jump must tower over this; forcing one formula
/// on both sides makes the "jump" collapse to an ordinary smooth increment
/// that vanishes as epsilon -> 0.
pub fn continuity_baseline(params: &GdmParams, branch: Branch, epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let anchor = 0.5 * critical_coupling(params)?;
    let eval = |lambda: f64| -> Result<SteeringPair> {
        let problem = build_normal_problem(&params.at_lambda(lambda))?;
        steering_closed_form(&diagonalize(&problem, branch)?)
    };
    let below = eval(anchor * (1.0 - epsilon))?;
    let above = eval(anchor * (1.0 + epsilon))?;
    Ok((
        (above.e_atoms_to_photons - below.e_atoms_to_photons).abs(),
        (above.e_photons_to_atoms - below.e_photons_to_atoms).abs(),
    ))
}
