//! Brute-force verification in a truncated two-mode Fock space.
//!
//! The phase Hamiltonians are assembled directly from ladder operators in
//! the product number basis |n1, n2> (n2 fastest, row-major over (n1, n2)):
//!
//! ```text
//! normal:       w1 d'd + w2 b'b + lambda (d + d')(b + b') + xi2 delta (d + d')
//! superradiant: w1 d'd + w3 b'b + zeta (d + d')(b + b')
//!               + eta (b + b')^2 + xi2 delta (d + d')
//! ```
//!
//! The lowest eigenpair is extracted by a dense symmetric eigensolver at
//! small dimensions and by restarted Lanczos with full reorthogonalization
//! above that, quadrature moments are evaluated by ladder-operator action on
//! the statevector, and [`compare`] refines the cutoffs until the moments
//! stop moving and reports relative deltas against the closed-form pipeline.
//!
//! Second moments are evaluated as full operator sandwiches: the ladder
//! images keep their overflow component one level above the cutoff, so
//! `<x^2>` is the second moment of the truncated state in the untruncated
//! space rather than an artifact of clipping.

use nalgebra::{DMatrix, DVector};

use crate::error::{GdmError, Result};
use crate::model::{
    classify_phase, critical_coupling, effective_frequencies, mean_fields, superradiant_coeffs,
    GdmParams, PhaseLabel, DEFAULT_PHASE_TOL,
};
use crate::steering::{steering_closed_form, steering_from_moments, SteeringMode, SteeringPair};
use crate::supermode::{
    build_normal_problem, build_superradiant_problem, diagonalize, displacements,
    ground_state_moments, Branch, GaussianMoments,
};

/// Relative coupling window around the critical point that [`compare`]
/// refuses to enter: the soft-mode squeezing diverges there and the Fock
/// truncation cost with it.
pub const NEAR_CRITICAL_EXCLUSION: f64 = 0.02;

/// Largest dimension handled by the dense eigensolver before switching to
/// Lanczos.
const DENSE_EIGEN_MAX: usize = 600;

/// Relative residual target of the eigensolver contract:
/// `|| M v - E v || <= 1e-10 * ||M||_inf`.
const RESIDUAL_REL_TOL: f64 = 1e-10;

/// Which phase Hamiltonian the oracle should assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianPhase {
    Normal,
    Superradiant,
}

/// Fock truncation and refinement policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    /// Initial max occupation of mode 1.
    pub cutoff1: usize,
    /// Initial max occupation of mode 2.
    pub cutoff2: usize,
    /// Multiplicative cutoff growth per refinement step.
    pub growth: f64,
    /// Relative agreement required between successive refinements on every
    /// moment before the run counts as converged.
    pub conv_tol: f64,
    /// Hard cap on the matrix dimension (cutoff1 + 1)(cutoff2 + 1).
    pub max_dim: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            cutoff1: 12,
            cutoff2: 12,
            growth: 1.5,
            conv_tol: 1e-8,
            max_dim: 40_000,
        }
    }
}

impl FockConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff1 < 4 || self.cutoff2 < 4 {
            return Err(GdmError::InvalidFockConfig {
                message: format!(
                    "cutoffs ({}, {}) too small; need at least 4 per mode",
                    self.cutoff1, self.cutoff2
                ),
            });
        }
        if self.growth.is_nan() || self.growth <= 1.0 {
            return Err(GdmError::InvalidFockConfig {
                message: format!("growth factor {} must exceed 1", self.growth),
            });
        }
        let dim = (self.cutoff1 + 1) * (self.cutoff2 + 1);
        if dim > self.max_dim {
            return Err(GdmError::DimensionCap {
                dim,
                cap: self.max_dim,
            });
        }
        Ok(())
    }
}

/// Per-quantity relative deltas between the oracle and the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDeltas {
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
    pub mean1: f64,
    pub mean2: f64,
    pub e_atoms_to_photons: f64,
    pub e_photons_to_atoms: f64,
}

impl OracleDeltas {
    /// Largest of the individual deltas.
    pub fn max(&self) -> f64 {
        [
            self.var1,
            self.var2,
            self.cov,
            self.mean1,
            self.mean2,
            self.e_atoms_to_photons,
            self.e_photons_to_atoms,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Outcome of a brute-force comparison run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Numerically evaluated ground-state moments, expressed in the frame of
    /// the requested branch.
    pub moments: GaussianMoments,
    /// Steering parameters from the oracle moments (unsquared mode).
    pub steering: SteeringPair,
    /// Ground-state energy of the final truncated Hamiltonian.
    pub ground_energy: f64,
    /// Final cutoffs after refinement.
    pub cutoffs_used: (usize, usize),
    /// True when two successive refinements agreed within `conv_tol` on
    /// every moment.
    pub converged: bool,
    /// Relative deltas against the closed-form pipeline.
    pub deltas: OracleDeltas,
}

/// Ladder-operator coefficients of one phase Hamiltonian.
struct LadderCoeffs {
    omega_a: f64,
    omega_b: f64,
    coupling: f64,
    quad_b: f64,
    drive: f64,
}

fn ladder_coeffs(params: &GdmParams, phase: HamiltonianPhase) -> Result<LadderCoeffs> {
    let freqs = effective_frequencies(params)?;
    let drive = params.xi2_eff() * params.delta;
    match phase {
        HamiltonianPhase::Normal => Ok(LadderCoeffs {
            omega_a: freqs.omega1,
            omega_b: freqs.omega2,
            coupling: params.lambda_coupling,
            quad_b: 0.0,
            drive,
        }),
        HamiltonianPhase::Superradiant => {
            let mf = mean_fields(params)?;
            let coeffs = superradiant_coeffs(params, &mf)?;
            Ok(LadderCoeffs {
                omega_a: freqs.omega1,
                omega_b: coeffs.omega3,
                coupling: coeffs.zeta,
                quad_b: coeffs.eta,
                drive,
            })
        }
    }
}

#[inline]
fn basis_index(n1: usize, n2: usize, cutoff2: usize) -> usize {
    n1 * (cutoff2 + 1) + n2
}

/// Assembles the dense, real-symmetric Hamiltonian matrix in the product
/// number basis with the given occupation cutoffs.
pub fn build_hamiltonian_matrix(
    params: &GdmParams,
    phase: HamiltonianPhase,
    cutoffs: (usize, usize),
) -> Result<DMatrix<f64>> {
    build_from_ladder(&ladder_coeffs(params, phase)?, cutoffs)
}

fn build_from_ladder(c: &LadderCoeffs, cutoffs: (usize, usize)) -> Result<DMatrix<f64>> {
    let (c1, c2) = cutoffs;
    let n1 = c1 + 1;
    let n2 = c2 + 1;
    let dim = n1 * n2;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let idx = |a: usize, b: usize| basis_index(a, b, c2);
    for a in 0..n1 {
        let up_a = ((a + 1) as f64).sqrt();
        for b in 0..n2 {
            let i = idx(a, b);
            // Diagonal: number operators plus the diagonal of eta (b + b')^2.
            h[(i, i)] +=
                c.omega_a * a as f64 + c.omega_b * b as f64 + c.quad_b * (2.0 * b as f64 + 1.0);
            // Drive: xi2 delta (d + d').
            if a + 1 < n1 && c.drive != 0.0 {
                let j = idx(a + 1, b);
                h[(j, i)] += c.drive * up_a;
                h[(i, j)] += c.drive * up_a;
            }
            // eta (b^2 + b'^2) part of the quadratic term.
            if b + 2 < n2 && c.quad_b != 0.0 {
                let v = c.quad_b * (((b + 1) * (b + 2)) as f64).sqrt();
                let j = idx(a, b + 2);
                h[(j, i)] += v;
                h[(i, j)] += v;
            }
            // coupling (d + d')(b + b'): place the upper ladder step in each
            // mode; symmetry supplies the rest.
            if c.coupling != 0.0 {
                let up_b = ((b + 1) as f64).sqrt();
                let down_b = (b as f64).sqrt();
                if a + 1 < n1 && b + 1 < n2 {
                    let j = idx(a + 1, b + 1);
                    let v = c.coupling * up_a * up_b;
                    h[(j, i)] += v;
                    h[(i, j)] += v;
                }
                if a + 1 < n1 && b > 0 {
                    let j = idx(a + 1, b - 1);
                    let v = c.coupling * up_a * down_b;
                    h[(j, i)] += v;
                    h[(i, j)] += v;
                }
            }
        }
    }
    Ok(h)
}

/// Writes the matrix as `(row, col, value)` triples, row-major, with
/// 17-significant-digit decimal values.
pub fn dump_matrix<W: std::io::Write>(matrix: &DMatrix<f64>, out: &mut W) -> std::io::Result<()> {
    for row in 0..matrix.nrows() {
        for col in 0..matrix.ncols() {
            writeln!(out, "{} {} {:.16e}", row, col, matrix[(row, col)])?;
        }
    }
    Ok(())
}

fn infinity_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
/// Deterministic start vector; restarts from the current Ritz vector. Stops
/// early at `tight_target`; after the restart budget, accepts the best pair
/// found if it at least meets `contract_target`.
fn lanczos_lowest(
    m: &DMatrix<f64>,
    tight_target: f64,
    contract_target: f64,
) -> Result<(f64, DVector<f64>)> {
    let dim = m.nrows();
    let max_krylov = dim.min(500);
    let mut v = DVector::<f64>::from_fn(dim, |i, _| 1.0 + 0.3 * ((1.7 * i as f64).sin()));
    v /= v.norm();
    let mut best: Option<(f64, DVector<f64>, f64)> = None;
    for _restart in 0..12 {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_krylov);
        let mut alphas: Vec<f64> = Vec::with_capacity(max_krylov);
        let mut betas: Vec<f64> = Vec::with_capacity(max_krylov);
        basis.push(v.clone());
        for j in 0..max_krylov {
            let mut w = m * &basis[j];
            let alpha = basis[j].dot(&w);
            alphas.push(alpha);
            w -= &basis[j] * alpha;
            if j > 0 {
                w -= &basis[j - 1] * betas[j - 1];
            }
            // Full reorthogonalization, two passes.
            for _ in 0..2 {
                for u in &basis {
                    let overlap = u.dot(&w);
                    w -= u * overlap;
                }
            }
            let beta = w.norm();
            if beta < 1e-14 || j + 1 == max_krylov {
                break;
            }
            betas.push(beta);
            basis.push(w / beta);
        }
        // Lowest eigenpair of the tridiagonal Rayleigh-Ritz matrix.
        let k = alphas.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = t.symmetric_eigen();
        let (lowest_idx, &energy) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty Krylov space");
        let coeffs = eig.eigenvectors.column(lowest_idx);
        let mut ritz = DVector::<f64>::zeros(dim);
        for (u, &c) in basis.iter().zip(coeffs.iter()) {
            ritz += u * c;
        }
        ritz /= ritz.norm();
        let residual = (m * &ritz - &ritz * energy).norm();
        if residual <= tight_target {
            return Ok((energy, ritz));
        }
        if best.as_ref().is_none_or(|(_, _, r)| residual < *r) {
            best = Some((energy, ritz.clone(), residual));
        }
        v = ritz;
    }
    match best {
        Some((energy, state, residual)) if residual <= contract_target => Ok((energy, state)),
        _ => Err(GdmError::Eigensolver {
            message: format!(
                "Lanczos failed to reach residual {contract_target:.3e} at dimension {dim}"
            ),
        }),
    }
}

/// Lowest eigenpair of a real-symmetric matrix. Dense decomposition at small
/// dimensions, restarted Lanczos above; either way the returned pair
/// satisfies `|| M v - E v || <= 1e-10 ||M||_inf` and the statevector is
/// normalized.
pub fn ground_state(matrix: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if matrix.nrows() != matrix.ncols() || matrix.is_empty() {
        return Err(GdmError::Eigensolver {
            message: "matrix must be square and non-empty".into(),
        });
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(GdmError::Eigensolver {
            message: "matrix has non-finite entries".into(),
        });
    }
    let norm = infinity_norm(matrix);
    let residual_target = RESIDUAL_REL_TOL * norm.max(1.0);
    let (energy, state) = if matrix.nrows() <= DENSE_EIGEN_MAX {
        let eig = matrix.clone().symmetric_eigen();
        let (lowest_idx, &energy) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty matrix");
        let mut state: DVector<f64> = eig.eigenvectors.column(lowest_idx).into();
        state /= state.norm();
        (energy, state)
    } else {
        // Tighter internal target so moment errors stay well below the
        // truncation scale; the contract target is the acceptance floor.
        lanczos_lowest(matrix, 1e-13 * norm.max(1.0), residual_target)?
    };
    let residual = (matrix * &state - &state * energy).norm();
    if residual > residual_target {
        return Err(GdmError::Eigensolver {
            message: format!("residual {residual:.3e} exceeds contract {residual_target:.3e}"),
        });
    }
    Ok((energy, state))
}

/// Applies `(a + a')` along mode 1 of a statevector laid out with n2 fastest.
/// The image is one level taller in mode 1 so no amplitude is clipped.
fn ladder_mode1(psi: &DVector<f64>, n1: usize, n2: usize) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(n1 + 1, n2);
    for a in 0..n1 {
        for b in 0..n2 {
            let amp = psi[a * n2 + b];
            if a > 0 {
                out[(a - 1, b)] += (a as f64).sqrt() * amp;
            }
            out[(a + 1, b)] += ((a + 1) as f64).sqrt() * amp;
        }
    }
    out
}

/// Same for mode 2.
fn ladder_mode2(psi: &DVector<f64>, n1: usize, n2: usize) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(n1, n2 + 1);
    for a in 0..n1 {
        for b in 0..n2 {
            let amp = psi[a * n2 + b];
            if b > 0 {
                out[(a, b - 1)] += (b as f64).sqrt() * amp;
            }
            out[(a, b + 1)] += ((b + 1) as f64).sqrt() * amp;
        }
    }
    out
}

/// Quadrature moments of a normalized statevector with the quadrature
/// scalings `x1 = (d + d') / sqrt(2 omega_a)`, `x2 = (b + b') / sqrt(2 omega_b)`.
pub fn quadrature_moments(
    state: &DVector<f64>,
    cutoffs: (usize, usize),
    omega_a: f64,
    omega_b: f64,
) -> GaussianMoments {
    let n1 = cutoffs.0 + 1;
    let n2 = cutoffs.1 + 1;
    debug_assert_eq!(state.len(), n1 * n2);
    let img1 = ladder_mode1(state, n1, n2);
    let img2 = ladder_mode2(state, n1, n2);
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    let mut cross = 0.0;
    let mut sq1 = 0.0;
    let mut sq2 = 0.0;
    for a in 0..n1 {
        for b in 0..n2 {
            let amp = state[a * n2 + b];
            sum1 += amp * img1[(a, b)];
            sum2 += amp * img2[(a, b)];
            // (d + d') and (b + b') commute, so the symmetrized product is
            // the plain product of the two ladder images.
            cross += img1[(a, b)] * img2[(a, b)];
        }
    }
    for v in img1.iter() {
        sq1 += v * v;
    }
    for v in img2.iter() {
        sq2 += v * v;
    }
    let scale1 = 1.0 / (2.0 * omega_a);
    let scale2 = 1.0 / (2.0 * omega_b);
    let scale_cross = 1.0 / (2.0 * (omega_a * omega_b).sqrt());
    let mean1 = sum1 * (2.0 * omega_a).sqrt().recip();
    let mean2 = sum2 * (2.0 * omega_b).sqrt().recip();
    GaussianMoments {
        var1: sq1 * scale1 - mean1 * mean1,
        var2: sq2 * scale2 - mean2 * mean2,
        cov: cross * scale_cross - mean1 * mean2,
        mean1,
        mean2,
    }
}

/// Relative difference with a small absolute floor so exact zeros do not
/// blow up the ratio.
fn rel_delta(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn moments_agree(a: &GaussianMoments, b: &GaussianMoments, tol: f64, scale: f64) -> bool {
    let pairs = [
        (a.var1, b.var1),
        (a.var2, b.var2),
        (a.cov, b.cov),
        (a.mean1, b.mean1),
        (a.mean2, b.mean2),
    ];
    pairs.into_iter().all(|(x, y)| {
        let diff = (x - y).abs();
        diff <= tol * x.abs().max(y.abs()) || diff <= 1e-12 * scale
    })
}

/// Re-expresses physical-frame moments in the frame of the requested branch.
///
/// The `SinPositive` branch labels the super-modes through the rotated angle
/// `theta + pi/2`, whose x-sector image is the mode exchange
/// `(x1, x2) -> (x2, -x1)`: variances swap and the covariance flips sign.
/// `SinNegative` is the physical frame of the Hamiltonians as written
/// (positive coupling) and maps identically.
fn to_branch_frame(m: &GaussianMoments, branch: Branch) -> GaussianMoments {
    match branch {
        Branch::SinNegative => *m,
        Branch::SinPositive => GaussianMoments {
            var1: m.var2,
            var2: m.var1,
            cov: -m.cov,
            mean1: m.mean2,
            mean2: -m.mean1,
        },
    }
}

fn grow_cutoff(c: usize, growth: f64) -> usize {
    ((c as f64 * growth).ceil() as usize).max(c + 1)
}

/// Projects a statevector onto the even joint-parity sector and
/// renormalizes. Every drive-free term conserves (-1)^(n1 + n2) and the
/// ground state of a stable problem is even, so zeroing the odd amplitudes
/// strips eigensolver parity contamination without touching the physics;
/// the quadrature means then vanish to machine precision as they must.
fn project_even_parity(state: &mut DVector<f64>, cutoffs: (usize, usize)) {
    let n2 = cutoffs.1 + 1;
    for (idx, amp) in state.iter_mut().enumerate() {
        if (idx / n2 + idx % n2) % 2 == 1 {
            *amp = 0.0;
        }
    }
    let norm = state.norm();
    if norm > 0.0 {
        *state /= norm;
    }
}

/// Runs the full brute-force comparison: assembles the phase Hamiltonian,
/// refines Fock cutoffs by the growth factor until two successive
/// refinements agree on every moment (or the dimension cap is hit), and
/// reports relative deltas between the oracle and the closed-form pipeline,
/// both expressed in the frame of `branch`.
pub fn compare(params: &GdmParams, branch: Branch, config: &FockConfig) -> Result<OracleReport> {
    config.validate()?;
    let lambda_c = critical_coupling(params)?;
    let rel = (params.lambda_coupling - lambda_c).abs() / lambda_c;
    if rel < NEAR_CRITICAL_EXCLUSION {
        return Err(GdmError::NearCritical {
            rel,
            limit: NEAR_CRITICAL_EXCLUSION,
        });
    }
    let phase = match classify_phase(params, DEFAULT_PHASE_TOL)? {
        PhaseLabel::Normal => HamiltonianPhase::Normal,
        PhaseLabel::Superradiant => HamiltonianPhase::Superradiant,
        PhaseLabel::Critical => unreachable!("excluded by the near-critical guard"),
    };
    let coeffs = ladder_coeffs(params, phase)?;

    // Closed-form side, evaluated in the physical frame then mapped.
    let problem = match phase {
        HamiltonianPhase::Normal => build_normal_problem(params)?,
        HamiltonianPhase::Superradiant => {
            let mf = mean_fields(params)?;
            let sr = superradiant_coeffs(params, &mf)?;
            build_superradiant_problem(params, &sr)?
        }
    };
    let spectrum_phys = diagonalize(&problem, Branch::SinNegative)?;
    let disp = displacements(&spectrum_phys, &problem)?;
    let closed_phys = ground_state_moments(&spectrum_phys, &disp);
    let closed = to_branch_frame(&closed_phys, branch);
    let spectrum_branch = diagonalize(&problem, branch)?;
    let closed_steering = steering_closed_form(&spectrum_branch)?;

    let scale = closed.var1.abs().max(closed.var2.abs()).max(1.0);
    let mut c1 = config.cutoff1;
    let mut c2 = config.cutoff2;
    let mut previous: Option<(GaussianMoments, f64, (usize, usize))> = None;
    let mut converged = false;
    loop {
        let dim = (c1 + 1) * (c2 + 1);
        if dim > config.max_dim {
            break;
        }
        let matrix = build_from_ladder(&coeffs, (c1, c2))?;
        let (energy, mut state) = ground_state(&matrix)?;
        if coeffs.drive == 0.0 {
            project_even_parity(&mut state, (c1, c2));
        }
        let moments = quadrature_moments(&state, (c1, c2), coeffs.omega_a, coeffs.omega_b);
        if let Some((prev_moments, _, _)) = &previous {
            if moments_agree(prev_moments, &moments, config.conv_tol, scale) {
                previous = Some((moments, energy, (c1, c2)));
                converged = true;
                break;
            }
        }
        previous = Some((moments, energy, (c1, c2)));
        c1 = grow_cutoff(c1, config.growth);
        c2 = grow_cutoff(c2, config.growth);
    }
    let (raw_moments, ground_energy, cutoffs_used) =
        previous.expect("config validation guarantees at least one refinement fits under the cap");
    let oracle_moments = to_branch_frame(&raw_moments, branch);
    let oracle_steering = steering_from_moments(&oracle_moments, SteeringMode::PaperUnsquared)?;
    let deltas = OracleDeltas {
        var1: rel_delta(oracle_moments.var1, closed.var1),
        var2: rel_delta(oracle_moments.var2, closed.var2),
        cov: rel_delta(oracle_moments.cov, closed.cov),
        mean1: rel_delta(oracle_moments.mean1, closed.mean1),
        mean2: rel_delta(oracle_moments.mean2, closed.mean2),
        e_atoms_to_photons: rel_delta(
            oracle_steering.e_atoms_to_photons,
            closed_steering.e_atoms_to_photons,
        ),
        e_photons_to_atoms: rel_delta(
            oracle_steering.e_photons_to_atoms,
            closed_steering.e_photons_to_atoms,
        ),
    };
    Ok(OracleReport {
        moments: oracle_moments,
        steering: oracle_steering,
        ground_energy,
        cutoffs_used,
        converged,
        deltas,
    })
}
