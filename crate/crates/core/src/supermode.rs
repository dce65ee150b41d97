//! Position-momentum quadratic problems and their super-mode decomposition.
//!
//! Both phase Hamiltonians take the same form after moving to scaled
//! quadratures `x = (b + b^dag) / sqrt(2 omega)`:
//!
//! ```text
//! H = p1^2/2 + (stiffness1/2) x1^2 + p2^2/2 + (stiffness2/2) x2^2
//!     + cross * x1 x2 + drive * x1
//! ```
//!
//! A rotation by the mixing angle theta decouples the two oscillators into
//! super-modes with frequencies `Omega_hi >= Omega_lo`. The mixing angle
//! enters all downstream quantities only through `sin 2theta` and
//! `cos 2theta`, whose magnitudes are fixed by the problem but whose common
//! sign is a scenario choice ([`Branch`]): it selects which mode plays the
//! "broad" role and thereby the direction of one-way steering.
//!
//! The ground state is Gaussian; its quadrature variances, covariance, and
//! drive-induced mean displacements are assembled in [`GaussianMoments`].

use crate::error::{GdmError, Result};
use crate::model::{effective_frequencies, GdmParams, SuperradiantCoeffs};

/// Absolute tolerance on `Omega_lo^2` (in recoil units squared) below which a
/// problem is flagged as sitting at the critical point.
pub const CRITICAL_TOL: f64 = 1e-10;

/// Coefficients of the two-mode quadratic problem in the position-momentum
/// representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticModeProblem {
    /// Twice the x1^2 coefficient; equals omega1^2.
    pub stiffness1: f64,
    /// Twice the x2^2 coefficient; omega2^2 in the normal phase,
    /// omega3 (omega3 + 4 eta) in the superradiant phase.
    pub stiffness2: f64,
    /// Coefficient of x1 x2; 2 lambda sqrt(omega1 omega2) or
    /// 2 zeta sqrt(omega1 omega3).
    pub cross: f64,
    /// Coefficient of x1; xi2 delta sqrt(2 omega1).
    pub drive: f64,
    /// Bare frequency used in the mode-1 quadrature scaling.
    pub omega_a: f64,
    /// Bare frequency used in the mode-2 quadrature scaling.
    pub omega_b: f64,
}

/// Sign choice of `sin 2theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    SinPositive,
    SinNegative,
}

impl Branch {
    /// +1 for `SinPositive`, -1 for `SinNegative`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::SinPositive => 1.0,
            Branch::SinNegative => -1.0,
        }
    }

    /// The opposite sign choice.
    pub fn flipped(self) -> Self {
        match self {
            Branch::SinPositive => Branch::SinNegative,
            Branch::SinNegative => Branch::SinPositive,
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::SinPositive => write!(f, "sin2theta>0"),
            Branch::SinNegative => write!(f, "sin2theta<0"),
        }
    }
}

/// Super-mode frequencies and mixing-angle functions of a diagonalized
/// problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermodeSpectrum {
    /// Larger super-mode frequency.
    pub omega_hi: f64,
    /// Smaller super-mode frequency.
    pub omega_lo: f64,
    /// sin 2theta with the branch sign applied.
    pub sin2theta: f64,
    /// cos 2theta; opposite-signed to sin 2theta when stiffness1 > stiffness2.
    pub cos2theta: f64,
    /// The branch that fixed the signs.
    pub branch: Branch,
}

/// Drive-induced displacements of the two super-modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacements {
    /// drive / Omega_hi^2.
    pub x01: f64,
    /// drive / Omega_lo^2.
    pub x0_lo: f64,
}

/// First and second moments of the Gaussian ground state in the physical
/// quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    /// (Delta x1)^2.
    pub var1: f64,
    /// (Delta x2)^2.
    pub var2: f64,
    /// Symmetrized cross-correlation `<x1, x2>`.
    pub cov: f64,
    /// `<x1>`.
    pub mean1: f64,
    /// `<x2>`.
    pub mean2: f64,
}

/// Builds the normal-phase problem:
/// stiffnesses `(omega1^2, omega2^2)`, coupling `2 lambda sqrt(omega1 omega2)`,
/// drive `xi2 delta sqrt(2 omega1)`.
pub fn build_normal_problem(params: &GdmParams) -> Result<QuadraticModeProblem> {
    let freqs = effective_frequencies(params)?;
    let lambda = params.lambda_coupling;
    Ok(QuadraticModeProblem {
        stiffness1: freqs.omega1 * freqs.omega1,
        stiffness2: freqs.omega2 * freqs.omega2,
        cross: 2.0 * lambda * (freqs.omega1 * freqs.omega2).sqrt(),
        drive: params.xi2_eff() * params.delta * (2.0 * freqs.omega1).sqrt(),
        omega_a: freqs.omega1,
        omega_b: freqs.omega2,
    })
}

/// Builds the superradiant-phase problem from precomputed mean-field
/// coefficients: stiffnesses `(omega1^2, omega3 (omega3 + 4 eta))`, coupling
/// `2 zeta sqrt(omega1 omega3)`, same drive as the normal phase.
pub fn build_superradiant_problem(
    params: &GdmParams,
    coeffs: &SuperradiantCoeffs,
) -> Result<QuadraticModeProblem> {
    let freqs = effective_frequencies(params)?;
    let stiffness2 = coeffs.omega3 * (coeffs.omega3 + 4.0 * coeffs.eta);
    if stiffness2 <= 0.0 {
        return Err(GdmError::UnstableStiffness {
            stiffness: stiffness2,
        });
    }
    Ok(QuadraticModeProblem {
        stiffness1: freqs.omega1 * freqs.omega1,
        stiffness2,
        cross: 2.0 * coeffs.zeta * (freqs.omega1 * coeffs.omega3).sqrt(),
        drive: params.xi2_eff() * params.delta * (2.0 * freqs.omega1).sqrt(),
        omega_a: freqs.omega1,
        omega_b: coeffs.omega3,
    })
}

/// Diagonalizes the 2x2 symmetric stiffness matrix
///
/// ```text
/// [ stiffness1   cross      ]
/// [ cross        stiffness2 ]
/// ```
///
/// into super-mode frequencies `Omega_hi = sqrt(larger eigenvalue)`,
/// `Omega_lo = sqrt(smaller eigenvalue)`. The smaller eigenvalue is formed as
/// `det / Omega_hi^2` to avoid the cancellation in `trace/2 - radius` near
/// criticality.
///
/// Magnitudes of the mixing-angle functions follow from the same matrix:
/// `|sin 2theta| = |cross| / radius`, `|cos 2theta| = |s1 - s2| / (2 radius)`
/// with `radius = sqrt((s1 - s2)^2/4 + cross^2)`. The requested [`Branch`]
/// fixes the sign of `sin 2theta`; `cos 2theta` takes the sign of
/// `(stiffness2 - stiffness1) * sin 2theta`, i.e. the opposite sign to
/// `sin 2theta` in the usual regime `stiffness1 > stiffness2`.
pub fn diagonalize(problem: &QuadraticModeProblem, branch: Branch) -> Result<SupermodeSpectrum> {
    let s1 = problem.stiffness1;
    let s2 = problem.stiffness2;
    let c = problem.cross;
    if s1 <= 0.0 {
        return Err(GdmError::UnstableStiffness { stiffness: s1 });
    }
    if s2 <= 0.0 {
        return Err(GdmError::UnstableStiffness { stiffness: s2 });
    }
    let radius = f64::hypot(0.5 * (s1 - s2), c);
    let hi_sq = 0.5 * (s1 + s2) + radius;
    let det = s1 * s2 - c * c;
    let lo_sq = det / hi_sq;
    if lo_sq < -CRITICAL_TOL {
        return Err(GdmError::ImaginaryLowerMode { omega_lo_sq: lo_sq });
    }
    if lo_sq.abs() <= CRITICAL_TOL {
        return Err(GdmError::CriticalPoint { omega_lo_sq: lo_sq });
    }
    if s1 <= s2 {
        log::warn!(
            "stiffness1 = {s1} <= stiffness2 = {s2}: outside the tan(2theta) < 0 regime the \
             branch sign conventions were stated for; cos2theta follows sign(s2 - s1)"
        );
    }
    let sgn = branch.sign();
    let sin2theta = sgn * c.abs() / radius;
    let cos2theta = if s1 == s2 {
        0.0
    } else {
        sgn * (s2 - s1).signum() * (0.5 * (s1 - s2).abs() / radius)
    };
    Ok(SupermodeSpectrum {
        omega_hi: hi_sq.sqrt(),
        omega_lo: lo_sq.sqrt(),
        sin2theta,
        cos2theta,
        branch,
    })
}

/// Displacements of the super-mode coordinates produced by the drive term:
/// `x01 = drive / Omega_hi^2`, `x0_lo = drive / Omega_lo^2`.
pub fn displacements(
    spectrum: &SupermodeSpectrum,
    problem: &QuadraticModeProblem,
) -> Result<Displacements> {
    if spectrum.omega_lo == 0.0 || spectrum.omega_hi == 0.0 {
        return Err(GdmError::CriticalPoint { omega_lo_sq: 0.0 });
    }
    Ok(Displacements {
        x01: problem.drive / (spectrum.omega_hi * spectrum.omega_hi),
        x0_lo: problem.drive / (spectrum.omega_lo * spectrum.omega_lo),
    })
}

/// Half-angle weights `(cos^2 theta, sin^2 theta)` of a spectrum, computed
/// through `sin 2theta` so the small weight keeps full relative precision
/// when `cos 2theta` sits next to -+1:
/// `(1 - |cos2theta|)/2 = sin2theta^2 / (2 (1 + |cos2theta|))`.
pub(crate) fn half_angle_weights(spectrum: &SupermodeSpectrum) -> (f64, f64) {
    let small = spectrum.sin2theta * spectrum.sin2theta / (2.0 * (1.0 + spectrum.cos2theta.abs()));
    if spectrum.cos2theta >= 0.0 {
        (1.0 - small, small)
    } else {
        (small, 1.0 - small)
    }
}

/// Ground-state moments of the physical quadratures:
///
/// ```text
/// var1 = (Omega_lo cos^2 theta + Omega_hi sin^2 theta) / (2 Omega_hi Omega_lo)
/// var2 = (Omega_lo sin^2 theta + Omega_hi cos^2 theta) / (2 Omega_hi Omega_lo)
/// cov  = sin2theta (Omega_hi - Omega_lo) / (4 Omega_hi Omega_lo)
/// ```
///
/// The means come from rotating the displaced super-mode means back:
/// `mean1 = -(x01 cos^2 theta + x0_lo sin^2 theta)`,
/// `mean2 = (x01 - x0_lo) sin theta cos theta`, expressed through the
/// double-angle functions.
pub fn ground_state_moments(spectrum: &SupermodeSpectrum, disp: &Displacements) -> GaussianMoments {
    let hi = spectrum.omega_hi;
    let lo = spectrum.omega_lo;
    let inv2p = 1.0 / (2.0 * hi * lo);
    let (cos_sq, sin_sq) = half_angle_weights(spectrum);
    // The half-angle arrangement avoids the cancellation the equivalent
    // (sum -+ cos2theta diff) form suffers when cos2theta approaches -+1.
    GaussianMoments {
        var1: (lo * cos_sq + hi * sin_sq) * inv2p,
        var2: (lo * sin_sq + hi * cos_sq) * inv2p,
        cov: spectrum.sin2theta * (hi - lo) * 0.5 * inv2p,
        mean1: -(disp.x01 * cos_sq + disp.x0_lo * sin_sq),
        mean2: (disp.x01 - disp.x0_lo) * 0.5 * spectrum.sin2theta,
    }
}
