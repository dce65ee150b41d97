//! Reduced generalized-Dicke-model parameters and phase-level quantities.
//!
//! The impurity-doped cavity-BEC system reduces, after averaging over the
//! impurity state and a Holstein-Primakoff mapping in the thermodynamic
//! limit, to two coupled bosonic modes: the cavity field and the condensed
//! atoms. Everything here is expressed in recoil-frequency units
//! (`omega_r = 1`) with `hbar = 1`.
//!
//! The effective mode frequencies are
//!
//! ```text
//! omega1 = omega + xi1 * delta
//! omega2 = omega_r - chi'' - kappa * (1 + delta)
//! ```
//!
//! and the field-BEC coupling drives a quantum phase transition at
//!
//! ```text
//! lambda_c = sqrt(omega1 * omega2) / 2
//! ```
//!
//! Below `lambda_c` (normal phase) both modes are macroscopically empty;
//! above it (superradiant phase) both acquire mean-field displacements
//! `alpha`, `beta` and the atomic mode picks up shifted coefficients
//! `omega3`, `zeta`, `eta`.

use crate::error::{GdmError, Result};

/// Default relative tolerance for deciding that a coupling sits exactly at
/// the phase transition.
pub const DEFAULT_PHASE_TOL: f64 = 1e-9;

/// Raw microscopic impurity parameters, all in recoil-frequency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityRawParams {
    /// Impurity-cavity coupling g_Q.
    pub g_q: f64,
    /// Pump Rabi frequency Omega_Q.
    pub omega_rabi_q: f64,
    /// Impurity level splitting omega_Q.
    pub omega_q: f64,
    /// Cavity frequency omega_c.
    pub omega_c: f64,
    /// Pump frequency omega_p.
    pub omega_p: f64,
}

/// Effective impurity couplings derived from [`ImpurityRawParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityCouplings {
    /// Impurity-induced cavity frequency shift xi1.
    pub xi1: f64,
    /// Impurity-induced cavity drive xi2.
    pub xi2: f64,
    /// Renormalized impurity splitting Delta_Q. Computed for completeness;
    /// it drops out of the reduced two-mode model.
    pub delta_q: f64,
}

/// Second-order impurity couplings:
///
/// ```text
/// xi1     = g_Q^2 / Delta_1
/// xi2     = g_Q Omega_Q / Delta_1 + g_Q Omega_Q / Delta_2
/// Delta_Q = Delta_2 + g_Q^2 / Delta_1 + 2 Omega_Q^2 / Delta_2
/// ```
///
/// with detunings `Delta_1 = omega_Q - omega_c`, `Delta_2 = omega_Q - omega_p`.
/// Fails if either detuning vanishes.
pub fn impurity_couplings(raw: &ImpurityRawParams) -> Result<ImpurityCouplings> {
    let delta1 = raw.omega_q - raw.omega_c;
    let delta2 = raw.omega_q - raw.omega_p;
    if delta1 == 0.0 {
        return Err(GdmError::ZeroDetuning {
            name: "Delta_1 = omega_Q - omega_c",
        });
    }
    if delta2 == 0.0 {
        return Err(GdmError::ZeroDetuning {
            name: "Delta_2 = omega_Q - omega_p",
        });
    }
    let g = raw.g_q;
    let rabi = raw.omega_rabi_q;
    Ok(ImpurityCouplings {
        xi1: g * g / delta1,
        xi2: g * rabi / delta1 + g * rabi / delta2,
        delta_q: delta2 + g * g / delta1 + 2.0 * rabi * rabi / delta2,
    })
}

/// All physical constants of the reduced two-mode model, in recoil units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdmParams {
    /// Effective cavity frequency omega.
    pub omega: f64,
    /// Recoil frequency; fixed to 1 by the unit convention but carried
    /// explicitly.
    pub omega_r: f64,
    /// Interatomic nonlinearity chi (enters the superradiant phase only).
    pub chi: f64,
    /// s-wave nonlinear shift chi''.
    pub chi_pp: f64,
    /// Impurity-BEC coupling kappa.
    pub kappa: f64,
    /// Impurity-induced cavity shift xi1.
    pub xi1: f64,
    /// Impurity-induced cavity drive xi2.
    pub xi2: f64,
    /// Impurity population delta = <sigma_z>, dimensionless in [-1, 1].
    pub delta: f64,
    /// Field-BEC coupling lambda, the phase-transition control parameter.
    pub lambda_coupling: f64,
    /// When false, kappa, xi1 and xi2 are treated as zero.
    pub impurity_on: bool,
}

impl GdmParams {
    /// Parameters without the impurity atom.
    pub fn bare(omega: f64, chi: f64, chi_pp: f64, lambda: f64) -> Self {
        Self {
            omega,
            omega_r: 1.0,
            chi,
            chi_pp,
            kappa: 0.0,
            xi1: 0.0,
            xi2: 0.0,
            delta: 0.0,
            lambda_coupling: lambda,
            impurity_on: false,
        }
    }

    /// Switches the impurity on with the given couplings and population.
    pub fn with_impurity(mut self, kappa: f64, xi1: f64, xi2: f64, delta: f64) -> Self {
        self.kappa = kappa;
        self.xi1 = xi1;
        self.xi2 = xi2;
        self.delta = delta;
        self.impurity_on = true;
        self
    }

    /// Same parameters at a different field-BEC coupling.
    pub fn at_lambda(mut self, lambda: f64) -> Self {
        self.lambda_coupling = lambda;
        self
    }

    /// kappa as seen by the model: zero when the impurity is off.
    pub fn kappa_eff(&self) -> f64 {
        if self.impurity_on {
            self.kappa
        } else {
            0.0
        }
    }

    /// xi1 as seen by the model: zero when the impurity is off.
    pub fn xi1_eff(&self) -> f64 {
        if self.impurity_on {
            self.xi1
        } else {
            0.0
        }
    }

    /// xi2 as seen by the model: zero when the impurity is off.
    pub fn xi2_eff(&self) -> f64 {
        if self.impurity_on {
            self.xi2
        } else {
            0.0
        }
    }

    /// Checks the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("omega", self.omega),
            ("omega_r", self.omega_r),
            ("chi", self.chi),
            ("chi_pp", self.chi_pp),
            ("kappa", self.kappa),
            ("xi1", self.xi1),
            ("xi2", self.xi2),
            ("delta", self.delta),
            ("lambda", self.lambda_coupling),
        ] {
            if !value.is_finite() {
                return Err(GdmError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        if self.omega <= 0.0 {
            return Err(GdmError::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "must be positive",
            });
        }
        if self.omega_r <= 0.0 {
            return Err(GdmError::InvalidParameter {
                name: "omega_r",
                value: self.omega_r,
                reason: "must be positive",
            });
        }
        if self.lambda_coupling < 0.0 {
            return Err(GdmError::InvalidParameter {
                name: "lambda",
                value: self.lambda_coupling,
                reason: "must be non-negative",
            });
        }
        if !(-1.0..=1.0).contains(&self.delta) {
            return Err(GdmError::InvalidParameter {
                name: "delta",
                value: self.delta,
                reason: "impurity population must lie in [-1, 1]",
            });
        }
        Ok(())
    }
}

/// Effective frequencies of the two reduced modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveFrequencies {
    /// Effective cavity frequency omega1 = omega + xi1 * delta.
    pub omega1: f64,
    /// Effective atomic frequency omega2 = omega_r - chi'' - kappa (1 + delta).
    pub omega2: f64,
}

/// Computes `omega1` and `omega2`, rejecting parameter sets for which either
/// mode frequency is non-positive.
pub fn effective_frequencies(params: &GdmParams) -> Result<EffectiveFrequencies> {
    params.validate()?;
    let omega1 = params.omega + params.xi1_eff() * params.delta;
    let omega2 = params.omega_r - params.chi_pp - params.kappa_eff() * (1.0 + params.delta);
    if omega1 <= 0.0 {
        return Err(GdmError::UnstableCavityMode { omega1 });
    }
    if omega2 <= 0.0 {
        return Err(GdmError::UnstableAtomicMode { omega2 });
    }
    Ok(EffectiveFrequencies { omega1, omega2 })
}

/// Critical field-BEC coupling `lambda_c = sqrt(omega1 omega2) / 2` at which
/// the lower super-mode frequency closes and the phase transition occurs.
pub fn critical_coupling(params: &GdmParams) -> Result<f64> {
    let freqs = effective_frequencies(params)?;
    Ok(0.5 * (freqs.omega1 * freqs.omega2).sqrt())
}

/// Which side of the phase transition a parameter set sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseLabel {
    Normal,
    Critical,
    Superradiant,
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseLabel::Normal => write!(f, "normal"),
            PhaseLabel::Critical => write!(f, "critical"),
            PhaseLabel::Superradiant => write!(f, "superradiant"),
        }
    }
}

/// Thresholds `lambda` against `lambda_c` with a relative tolerance `tol`:
/// `Normal` strictly below, `Superradiant` strictly above, `Critical` inside
/// the tolerance band.
pub fn classify_phase(params: &GdmParams, tol: f64) -> Result<PhaseLabel> {
    let lambda_c = critical_coupling(params)?;
    let lambda = params.lambda_coupling;
    if lambda < lambda_c * (1.0 - tol) {
        Ok(PhaseLabel::Normal)
    } else if lambda > lambda_c * (1.0 + tol) {
        Ok(PhaseLabel::Superradiant)
    } else {
        Ok(PhaseLabel::Critical)
    }
}

/// Mean-field displacements of the superradiant phase, positive-root
/// convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanField {
    /// Cavity displacement alpha >= 0.
    pub alpha: f64,
    /// Atomic displacement beta >= 0, with beta^2 < 1/2 strictly.
    pub beta: f64,
    /// K = sqrt(1 - beta^2).
    pub k_factor: f64,
}

/// Macroscopic excitation amplitudes in the superradiant phase:
///
/// ```text
/// beta^2  = (4 lambda^2 - omega1 omega2) / (2 chi omega1 + 8 lambda^2)
/// alpha^2 = lambda^2 (4 lambda^2 - omega1 omega2)(4 lambda^2 + omega1 omega2 + 2 chi omega1)
///           / (omega1^2 (chi omega1 + 4 lambda^2)^2)
/// ```
///
/// Positive roots are taken; the sign-flipped partner is the physically
/// equivalent Z2 image. Fails for `lambda < lambda_c`. At `lambda = lambda_c`
/// both displacements vanish.
pub fn mean_fields(params: &GdmParams) -> Result<MeanField> {
    let freqs = effective_frequencies(params)?;
    let lambda_c = 0.5 * (freqs.omega1 * freqs.omega2).sqrt();
    let lambda = params.lambda_coupling;
    let w1w2 = freqs.omega1 * freqs.omega2;
    let four_l2 = 4.0 * lambda * lambda;
    // Rounding in lambda_c can leave the numerator a few ulps negative when
    // lambda = lambda_c exactly; clamp that band to zero.
    let mut excess = four_l2 - w1w2;
    if excess < 0.0 {
        if excess > -1e-12 * w1w2 {
            excess = 0.0;
        } else {
            return Err(GdmError::MeanFieldsUndefined { lambda, lambda_c });
        }
    }
    let beta_denom = 2.0 * params.chi * freqs.omega1 + 8.0 * lambda * lambda;
    if beta_denom <= 0.0 {
        return Err(GdmError::InvalidParameter {
            name: "chi",
            value: params.chi,
            reason: "2 chi omega1 + 8 lambda^2 must be positive for the mean fields",
        });
    }
    let beta_sq = excess / beta_denom;
    let alpha_denom = freqs.omega1 * (params.chi * freqs.omega1 + four_l2);
    let alpha_sq = lambda * lambda * excess * (four_l2 + w1w2 + 2.0 * params.chi * freqs.omega1)
        / (alpha_denom * alpha_denom);
    Ok(MeanField {
        alpha: alpha_sq.sqrt(),
        beta: beta_sq.sqrt(),
        k_factor: (1.0 - beta_sq).sqrt(),
    })
}

/// Shifted atomic-mode coefficients of the superradiant phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperradiantCoeffs {
    /// Shifted atomic frequency omega3.
    pub omega3: f64,
    /// Effective field-atom coupling zeta.
    pub zeta: f64,
    /// Coefficient of the quadratic (b + b^dag)^2 term, eta.
    pub eta: f64,
}

/// Superradiant-phase coefficients
///
/// ```text
/// omega3 = omega_r - chi'' - kappa (1 + delta) + 2 chi beta^2 + lambda alpha beta / K
/// zeta   = lambda (K - beta^2 / K)
/// eta    = chi beta^2 + lambda alpha beta (2 + beta^2) / (2 K^3)
/// ```
///
/// At `lambda = lambda_c` these reduce continuously to the normal-phase
/// values `(omega2, lambda, 0)`.
pub fn superradiant_coeffs(params: &GdmParams, mf: &MeanField) -> Result<SuperradiantCoeffs> {
    let freqs = effective_frequencies(params)?;
    let k = mf.k_factor;
    if k == 0.0 {
        return Err(GdmError::SingularKFactor { beta: mf.beta });
    }
    let lambda = params.lambda_coupling;
    let beta_sq = mf.beta * mf.beta;
    let lab = lambda * mf.alpha * mf.beta;
    let omega3 = freqs.omega2 + 2.0 * params.chi * beta_sq + lab / k;
    let zeta = lambda * (k - beta_sq / k);
    let eta = params.chi * beta_sq + lab * (2.0 + beta_sq) / (2.0 * k * k * k);
    if omega3 <= 0.0 {
        return Err(GdmError::UnstableAtomicMode { omega2: omega3 });
    }
    Ok(SuperradiantCoeffs { omega3, zeta, eta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1_params(lambda: f64) -> GdmParams {
        GdmParams::bare(400.0, 0.0, 0.1, lambda).with_impurity(0.5, 0.001, 0.002, 0.5)
    }

    fn fig5_params(lambda: f64) -> GdmParams {
        GdmParams::bare(400.0, 0.1, 0.1, lambda).with_impurity(0.5, 0.001, 0.002, 0.5)
    }

    #[test]
    fn impurity_couplings_vanish_without_cavity_coupling() {
        let raw = ImpurityRawParams {
            g_q: 0.0,
            omega_rabi_q: 3.0,
            omega_q: 2000.0,
            omega_c: 1000.0,
            omega_p: 1000.0,
        };
        let c = impurity_couplings(&raw).unwrap();
        assert_eq!(c.xi1, 0.0);
        assert_eq!(c.xi2, 0.0);
        assert_relative_eq!(c.delta_q, 1000.0 + 2.0 * 9.0 / 1000.0, max_relative = 1e-15);
    }

    #[test]
    fn impurity_couplings_hand_substitution() {
        let raw = ImpurityRawParams {
            g_q: 1.0,
            omega_rabi_q: 1.0,
            omega_q: 2000.0,
            omega_c: 1000.0,
            omega_p: 1000.0,
        };
        let c = impurity_couplings(&raw).unwrap();
        assert_relative_eq!(c.xi1, 0.001, max_relative = 1e-15);
        assert_relative_eq!(c.xi2, 0.002, max_relative = 1e-15);
        assert_relative_eq!(c.delta_q, 1000.003, max_relative = 1e-15);
    }

    #[test]
    fn impurity_couplings_reject_zero_detuning() {
        let raw = ImpurityRawParams {
            g_q: 1.0,
            omega_rabi_q: 1.0,
            omega_q: 1000.0,
            omega_c: 1000.0,
            omega_p: 900.0,
        };
        assert!(matches!(
            impurity_couplings(&raw),
            Err(GdmError::ZeroDetuning { .. })
        ));
    }

    #[test]
    fn effective_frequencies_with_impurity() {
        let f = effective_frequencies(&fig1_params(1.0)).unwrap();
        assert_relative_eq!(f.omega1, 400.0005, max_relative = 1e-15);
        assert_relative_eq!(f.omega2, 0.15, max_relative = 1e-13);
    }

    #[test]
    fn effective_frequencies_without_impurity() {
        let f = effective_frequencies(&GdmParams::bare(400.0, 0.0, 0.1, 1.0)).unwrap();
        assert_relative_eq!(f.omega1, 400.0, max_relative = 1e-15);
        assert_relative_eq!(f.omega2, 0.9, max_relative = 1e-15);
    }

    #[test]
    fn ground_state_impurity_decouples_kappa() {
        // delta = -1 kills the kappa(1 + delta) term.
        let p = GdmParams::bare(400.0, 0.0, 0.1, 1.0).with_impurity(7.3, 0.0, 0.0, -1.0);
        let f = effective_frequencies(&p).unwrap();
        assert_relative_eq!(f.omega2, 0.9, max_relative = 1e-15);
    }

    #[test]
    fn effective_frequencies_reject_unstable_atomic_mode() {
        let p = GdmParams::bare(400.0, 0.0, 1.2, 1.0);
        assert!(matches!(
            effective_frequencies(&p),
            Err(GdmError::UnstableAtomicMode { .. })
        ));
    }

    #[test]
    fn critical_coupling_matches_quoted_values() {
        // Impurity on: the quoted 3.87 omega_r.
        let lc = critical_coupling(&fig1_params(1.0)).unwrap();
        assert_relative_eq!(lc, 3.872985766821252, max_relative = 1e-14);
        // Impurity off: (1/2) sqrt(400 * 0.9).
        let lc0 = critical_coupling(&GdmParams::bare(400.0, 0.0, 0.1, 1.0)).unwrap();
        assert_relative_eq!(lc0, 9.486832980505138, max_relative = 1e-14);
    }

    #[test]
    fn critical_coupling_vanishes_with_soft_atomic_mode() {
        // omega2 -> 0+ drives lambda_c -> 0.
        let p = GdmParams::bare(400.0, 0.0, 1.0 - 1e-12, 0.0);
        let lc = critical_coupling(&p).unwrap();
        assert!(lc < 1e-4);
    }

    #[test]
    fn classify_phase_thresholds() {
        let p = fig1_params(0.0);
        assert_eq!(classify_phase(&p, 1e-9).unwrap(), PhaseLabel::Normal);
        let lc = critical_coupling(&p).unwrap();
        assert_eq!(
            classify_phase(&p.at_lambda(lc), 1e-9).unwrap(),
            PhaseLabel::Critical
        );
        assert_eq!(
            classify_phase(&p.at_lambda(8.0), 1e-9).unwrap(),
            PhaseLabel::Superradiant
        );
    }

    #[test]
    fn mean_fields_vanish_at_criticality() {
        let p = fig5_params(0.0);
        let lc = critical_coupling(&p).unwrap();
        let mf = mean_fields(&p.at_lambda(lc)).unwrap();
        assert_eq!(mf.alpha, 0.0);
        assert_eq!(mf.beta, 0.0);
        assert_eq!(mf.k_factor, 1.0);
    }

    #[test]
    fn mean_fields_rejected_in_normal_phase() {
        let p = fig5_params(1.0);
        assert!(matches!(
            mean_fields(&p),
            Err(GdmError::MeanFieldsUndefined { .. })
        ));
    }

    #[test]
    fn mean_fields_saturate_at_large_coupling() {
        let p = fig5_params(2e4);
        let mf = mean_fields(&p).unwrap();
        assert!(mf.beta * mf.beta < 0.5);
        assert_relative_eq!(mf.beta * mf.beta, 0.5, max_relative = 1e-6);
    }

    #[test]
    fn mean_fields_hand_evaluated_at_lambda_8() {
        // Independently evaluated by high-precision substitution into the
        // displacement formulas.
        let mf = mean_fields(&fig5_params(8.0)).unwrap();
        assert_relative_eq!(
            mf.beta * mf.beta,
            0.331_080_898_466_064_5,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            mf.alpha * mf.alpha,
            3.543_452_535_554_612e-4,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            mf.k_factor * mf.k_factor + mf.beta * mf.beta,
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn superradiant_coeffs_reduce_to_normal_at_criticality() {
        let p = fig5_params(0.0);
        let lc = critical_coupling(&p).unwrap();
        let at_lc = p.at_lambda(lc);
        let mf = mean_fields(&at_lc).unwrap();
        let c = superradiant_coeffs(&at_lc, &mf).unwrap();
        let f = effective_frequencies(&at_lc).unwrap();
        assert_relative_eq!(c.omega3, f.omega2, epsilon = 1e-10);
        assert_relative_eq!(c.zeta, lc, epsilon = 1e-10);
        assert_relative_eq!(c.eta, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn superradiant_coeffs_without_nonlinearity() {
        // chi = 0 leaves only the alpha-beta part of eta.
        let p = GdmParams::bare(400.0, 0.0, 0.1, 12.0);
        let mf = mean_fields(&p).unwrap();
        let c = superradiant_coeffs(&p, &mf).unwrap();
        let expected =
            12.0 * mf.alpha * mf.beta * (2.0 + mf.beta * mf.beta) / (2.0 * mf.k_factor.powi(3));
        assert_relative_eq!(c.eta, expected, max_relative = 1e-14);
    }

    #[test]
    fn superradiant_coeffs_hand_evaluated_at_lambda_8() {
        let p = fig5_params(8.0);
        let mf = mean_fields(&p).unwrap();
        let c = superradiant_coeffs(&p, &mf).unwrap();
        assert_relative_eq!(c.omega3, 0.32216193477015966, max_relative = 1e-12);
        assert_relative_eq!(c.zeta, 3.3045471020524166, max_relative = 1e-12);
        assert_relative_eq!(c.eta, 0.217_710_477_016_518_6, max_relative = 1e-12);
    }

    #[test]
    fn delta_out_of_range_rejected() {
        let p = GdmParams::bare(400.0, 0.0, 0.1, 1.0).with_impurity(0.5, 0.001, 0.0, 2.0);
        assert!(matches!(
            p.validate(),
            Err(GdmError::InvalidParameter { name: "delta", .. })
        ));
    }
}
