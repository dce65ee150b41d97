//! Scenario handling, figure presets, sweeps and reports for the
//! cavity-BEC steering CLI.
//!
//! The binary in `main.rs` is a thin wrapper; everything testable lives
//! here. Output CSV uses shortest round-trip decimal formatting so a parsed
//! file reproduces the computed doubles bit for bit, and sweeps use fixed
//! grid arithmetic so identical invocations emit byte-identical files.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use gdm_steering::{
    build_normal_problem, build_superradiant_problem, classify, classify_phase,
    continuity_baseline, critical_coupling, diagonalize, find_threshold, ground_state_moments,
    mean_fields, qpt_witness, steering_closed_form, steering_from_moments, superradiant_coeffs,
    Branch, Displacements, FockConfig, GdmError, GdmParams, OracleReport, PhaseLabel,
    SteeringClass, SteeringDirection, SteeringMode, SupermodeSpectrum, WitnessReport,
};

/// Relative window around the critical coupling inside which sweep rows are
/// reported as critical with empty steering fields.
pub const SWEEP_CRITICAL_WINDOW: f64 = 0.005;

/// Fixed CSV header for sweep-style output.
pub const CSV_HEADER: &str = "lambda,phase,omega_hi,omega_lo,sin2theta,cos2theta,\
E_atoms_to_photons,E_photons_to_atoms,steering_class";

/// Errors at the CLI boundary, carrying their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, preset, flag, or file: exit code 2.
    Config(String),
    /// Numerical or phase error from the model: exit code 3.
    Numerical(GdmError),
    /// Oracle failed to converge within its dimension cap: exit code 4.
    OracleNonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::OracleNonConvergence(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(err) => write!(f, "numerical error: {err}"),
            CliError::OracleNonConvergence(msg) => write!(f, "oracle non-convergence: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<GdmError> for CliError {
    fn from(err: GdmError) -> Self {
        CliError::Numerical(err)
    }
}

/// Whether the phase is picked from lambda or forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasePolicy {
    Auto,
    ForceNormal,
    ForceSuperradiant,
}

impl std::fmt::Display for PhasePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhasePolicy::Auto => write!(f, "auto"),
            PhasePolicy::ForceNormal => write!(f, "normal"),
            PhasePolicy::ForceSuperradiant => write!(f, "superradiant"),
        }
    }
}

/// A fully specified run configuration.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub params: GdmParams,
    pub branch: Branch,
    pub phase_policy: PhasePolicy,
    pub steering_mode: SteeringMode,
}

impl Scenario {
    /// Rejects a forced phase that contradicts the scenario's own coupling,
    /// unless explicitly overridden.
    pub fn validate_policy(&self, allow_override: bool) -> Result<(), CliError> {
        if allow_override || self.phase_policy == PhasePolicy::Auto {
            return Ok(());
        }
        let phase = classify_phase(&self.params, gdm_steering::DEFAULT_PHASE_TOL)?;
        let conflict = matches!(
            (self.phase_policy, phase),
            (PhasePolicy::ForceNormal, PhaseLabel::Superradiant)
                | (PhasePolicy::ForceSuperradiant, PhaseLabel::Normal)
        );
        if conflict {
            return Err(CliError::Config(format!(
                "phase policy `{}` conflicts with lambda = {} (phase {}); pass \
                 --allow-phase-mismatch to override",
                self.phase_policy, self.params.lambda_coupling, phase
            )));
        }
        Ok(())
    }
}

/// Default sweep window of a preset, relative to its critical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeKind {
    /// Normal phase only: [0.01, 0.99 lambda_c].
    NormalPhase,
    /// Superradiant phase only: [1.01 lambda_c, 25].
    Superradiant,
    /// Across the transition: [0.01, 2 lambda_c].
    AcrossTransition,
}

/// One figure preset: the caption's parameter set plus branch and default
/// sweep window.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub omega: f64,
    pub chi: f64,
    pub chi_pp: f64,
    pub kappa: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub delta: f64,
    pub impurity_on: bool,
    pub branch: Branch,
    pub range: RangeKind,
    pub note: &'static str,
}

impl Preset {
    pub fn scenario(&self) -> Scenario {
        let mut params = GdmParams::bare(self.omega, self.chi, self.chi_pp, 0.0);
        if self.impurity_on {
            params = params.with_impurity(self.kappa, self.xi1, self.xi2, self.delta);
        }
        Scenario {
            params,
            branch: self.branch,
            phase_policy: PhasePolicy::Auto,
            steering_mode: SteeringMode::PaperUnsquared,
        }
    }

    /// Default `(lambda_min, lambda_max)` for sweeps of this preset.
    pub fn default_range(&self) -> Result<(f64, f64), CliError> {
        let lambda_c = critical_coupling(&self.scenario().params)?;
        Ok(match self.range {
            RangeKind::NormalPhase => (0.01, 0.99 * lambda_c),
            RangeKind::Superradiant => (1.01 * lambda_c, 25.0),
            RangeKind::AcrossTransition => (0.01, 2.0 * lambda_c),
        })
    }
}

const IMP_ON: (f64, f64, f64, f64, bool) = (0.5, 0.001, 0.0, 0.5, true);
const IMP_OFF: (f64, f64, f64, f64, bool) = (0.0, 0.0, 0.0, 0.0, false);

macro_rules! preset {
    ($name:literal, $desc:literal, $chi:literal, $imp:expr, $branch:expr, $range:expr, $note:literal) => {
        Preset {
            name: $name,
            description: $desc,
            omega: 400.0,
            chi: $chi,
            chi_pp: 0.1,
            kappa: $imp.0,
            xi1: $imp.1,
            xi2: $imp.2,
            delta: $imp.3,
            impurity_on: $imp.4,
            branch: $branch,
            range: $range,
            note: $note,
        }
    };
}

/// The ten figure presets. All share omega = 400 and chi'' = 0.1 in recoil
/// units; the impurity set is kappa = 0.5, xi1 = 0.001, delta = 0.5. The
/// captions do not fix xi2; it is set to 0 here (the steering parameters are
/// drive-independent, so nothing downstream changes).
pub const PRESETS: &[Preset] = &[
    preset!(
        "fig1",
        "normal phase, impurity on, sin2theta > 0",
        0.0,
        IMP_ON,
        Branch::SinPositive,
        RangeKind::NormalPhase,
        ""
    ),
    preset!(
        "fig2",
        "normal phase, impurity off, sin2theta > 0",
        0.0,
        IMP_OFF,
        Branch::SinPositive,
        RangeKind::NormalPhase,
        ""
    ),
    preset!(
        "fig3",
        "normal phase, impurity on, sin2theta < 0",
        0.0,
        IMP_ON,
        Branch::SinNegative,
        RangeKind::NormalPhase,
        ""
    ),
    preset!(
        "fig4",
        "normal phase, impurity off, sin2theta < 0",
        0.0,
        IMP_OFF,
        Branch::SinNegative,
        RangeKind::NormalPhase,
        ""
    ),
    preset!(
        "fig5",
        "superradiant phase, impurity on, sin2theta > 0",
        0.1,
        IMP_ON,
        Branch::SinPositive,
        RangeKind::Superradiant,
        ""
    ),
    preset!(
        "fig6",
        "superradiant phase, impurity off, sin2theta > 0",
        0.1,
        IMP_OFF,
        Branch::SinPositive,
        RangeKind::Superradiant,
        ""
    ),
    preset!(
        "fig7",
        "superradiant phase, impurity on, sin2theta < 0",
        0.1,
        IMP_ON,
        Branch::SinNegative,
        RangeKind::Superradiant,
        "surrounding text says sin2theta > 0, but the plotted one-way direction \
             (atoms steer the field) matches the sin2theta < 0 branch; this preset \
             uses SinNegative"
    ),
    preset!(
        "fig8",
        "superradiant phase, impurity off, sin2theta < 0",
        0.1,
        IMP_OFF,
        Branch::SinNegative,
        RangeKind::Superradiant,
        ""
    ),
    preset!(
        "fig9",
        "witness across the transition, impurity on",
        0.1,
        IMP_ON,
        Branch::SinPositive,
        RangeKind::AcrossTransition,
        "panels (a,b) use sin2theta > 0 (this branch); rerun with --branch neg \
             for panels (c,d)"
    ),
    preset!(
        "fig10",
        "witness across the transition, impurity off",
        0.1,
        IMP_OFF,
        Branch::SinPositive,
        RangeKind::AcrossTransition,
        "panels (a,b) use sin2theta > 0 (this branch); rerun with --branch neg \
             for panels (c,d)"
    ),
];

/// Looks up a preset by name.
pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn parse_key_f64(key: &str, value: &str) -> Result<f64, CliError> {
    value.trim().parse::<f64>().map_err(|_| {
        CliError::Config(format!(
            "key `{key}`: cannot parse `{}` as a number",
            value.trim()
        ))
    })
}

fn parse_key_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CliError::Config(format!(
            "key `{key}`: expected true or false, got `{other}`"
        ))),
    }
}

pub fn parse_branch(value: &str) -> Result<Branch, CliError> {
    match value.trim() {
        "pos" => Ok(Branch::SinPositive),
        "neg" => Ok(Branch::SinNegative),
        other => Err(CliError::Config(format!(
            "key `branch`: expected pos or neg, got `{other}`"
        ))),
    }
}

pub fn parse_steering_mode(value: &str) -> Result<SteeringMode, CliError> {
    match value.trim() {
        "paper" => Ok(SteeringMode::PaperUnsquared),
        "reid" => Ok(SteeringMode::ReidSquared),
        other => Err(CliError::Config(format!(
            "key `mode`: expected paper or reid, got `{other}`"
        ))),
    }
}

fn parse_phase_policy(value: &str) -> Result<PhasePolicy, CliError> {
    match value.trim() {
        "auto" => Ok(PhasePolicy::Auto),
        "normal" => Ok(PhasePolicy::ForceNormal),
        "superradiant" => Ok(PhasePolicy::ForceSuperradiant),
        other => Err(CliError::Config(format!(
            "key `phase`: expected auto, normal or superradiant, got `{other}`"
        ))),
    }
}

const CONFIG_KEYS: &[&str] = &[
    "omega",
    "chi",
    "chi_pp",
    "kappa",
    "xi1",
    "xi2",
    "delta",
    "lambda",
    "impurity_on",
    "branch",
    "phase",
    "mode",
];

/// Parses a flat `key = value` configuration file with a strict schema.
///
/// Grammar: one `key = value` pair per line; blank lines and lines starting
/// with `#` are ignored; keys must be unique and drawn from the documented
/// set; `omega`, `chi_pp`, `impurity_on` and `branch` are required, the rest
/// default to zero / `auto` / `paper`.
pub fn parse_config(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::Config(format!("cannot read `{}`: {err}", path.display())))?;
    parse_config_str(&text)
}

/// [`parse_config`] on an in-memory string.
pub fn parse_config_str(text: &str) -> Result<Scenario, CliError> {
    let mut seen: Vec<(&str, String)> = Vec::new();
    for (line_no, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((raw_key, raw_value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                line_no + 1
            )));
        };
        let key = raw_key.trim();
        let Some(&canonical) = CONFIG_KEYS.iter().find(|&&k| k == key) else {
            return Err(CliError::Config(format!(
                "line {}: unknown key `{key}`",
                line_no + 1
            )));
        };
        if seen.iter().any(|(k, _)| *k == canonical) {
            return Err(CliError::Config(format!(
                "line {}: duplicate key `{key}`",
                line_no + 1
            )));
        }
        seen.push((canonical, raw_value.trim().to_string()));
    }
    let get = |key: &str| {
        seen.iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
    };
    for required in ["omega", "chi_pp", "impurity_on", "branch"] {
        if get(required).is_none() {
            return Err(CliError::Config(format!(
                "missing required key `{required}`"
            )));
        }
    }
    let f = |key: &str, default: f64| -> Result<f64, CliError> {
        get(key).map_or(Ok(default), |v| parse_key_f64(key, v))
    };
    let impurity_on = parse_key_bool("impurity_on", get("impurity_on").unwrap())?;
    let mut params = GdmParams::bare(
        f("omega", 0.0)?,
        f("chi", 0.0)?,
        f("chi_pp", 0.0)?,
        f("lambda", 0.0)?,
    );
    if impurity_on {
        params = params.with_impurity(
            f("kappa", 0.0)?,
            f("xi1", 0.0)?,
            f("xi2", 0.0)?,
            f("delta", 0.0)?,
        );
    }
    params.validate().map_err(|err| match err {
        GdmError::InvalidParameter {
            name,
            value,
            reason,
        } => CliError::Config(format!("key `{name}` = {value}: {reason}")),
        other => CliError::Numerical(other),
    })?;
    Ok(Scenario {
        params,
        branch: parse_branch(get("branch").unwrap())?,
        phase_policy: get("phase").map_or(Ok(PhasePolicy::Auto), parse_phase_policy)?,
        steering_mode: get("mode").map_or(Ok(SteeringMode::PaperUnsquared), parse_steering_mode)?,
    })
}

/// Computed columns of one sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub omega_hi: f64,
    pub omega_lo: f64,
    pub sin2theta: f64,
    pub cos2theta: f64,
    pub e_atoms_to_photons: f64,
    pub e_photons_to_atoms: f64,
    pub class: SteeringClass,
}

/// One row of a lambda sweep. Rows inside the critical window or rows whose
/// evaluation failed carry no values; failures keep their message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub phase: PhaseLabel,
    pub values: Option<SweepValues>,
    pub error: Option<String>,
}

fn spectrum_for_policy(
    scenario: &Scenario,
    params: &GdmParams,
) -> Result<SupermodeSpectrum, GdmError> {
    let phase = match scenario.phase_policy {
        PhasePolicy::Auto => classify_phase(params, gdm_steering::DEFAULT_PHASE_TOL)?,
        PhasePolicy::ForceNormal => PhaseLabel::Normal,
        PhasePolicy::ForceSuperradiant => PhaseLabel::Superradiant,
    };
    match phase {
        PhaseLabel::Normal => diagonalize(&build_normal_problem(params)?, scenario.branch),
        PhaseLabel::Critical => Err(GdmError::CriticalPoint { omega_lo_sq: 0.0 }),
        PhaseLabel::Superradiant => {
            let mf = mean_fields(params)?;
            let coeffs = superradiant_coeffs(params, &mf)?;
            diagonalize(
                &build_superradiant_problem(params, &coeffs)?,
                scenario.branch,
            )
        }
    }
}

fn steering_pair_for(
    scenario: &Scenario,
    spectrum: &SupermodeSpectrum,
) -> Result<gdm_steering::SteeringPair, GdmError> {
    match scenario.steering_mode {
        SteeringMode::PaperUnsquared => steering_closed_form(spectrum),
        SteeringMode::ReidSquared => {
            let moments = ground_state_moments(
                spectrum,
                &Displacements {
                    x01: 0.0,
                    x0_lo: 0.0,
                },
            );
            steering_from_moments(&moments, SteeringMode::ReidSquared)
        }
    }
}

fn evaluate_row(scenario: &Scenario, lambda: f64, lambda_c: f64) -> SweepRow {
    let params = scenario.params.at_lambda(lambda);
    let phase =
        classify_phase(&params, gdm_steering::DEFAULT_PHASE_TOL).unwrap_or(PhaseLabel::Critical);
    if (lambda - lambda_c).abs() < SWEEP_CRITICAL_WINDOW * lambda_c {
        return SweepRow {
            lambda,
            phase: PhaseLabel::Critical,
            values: None,
            error: None,
        };
    }
    match spectrum_for_policy(scenario, &params)
        .and_then(|s| steering_pair_for(scenario, &s).map(|pair| (s, pair)))
    {
        Ok((s, pair)) => SweepRow {
            lambda,
            phase,
            values: Some(SweepValues {
                omega_hi: s.omega_hi,
                omega_lo: s.omega_lo,
                sin2theta: s.sin2theta,
                cos2theta: s.cos2theta,
                e_atoms_to_photons: pair.e_atoms_to_photons,
                e_photons_to_atoms: pair.e_photons_to_atoms,
                class: classify(&pair),
            }),
            error: None,
        },
        Err(err) => SweepRow {
            lambda,
            phase,
            values: None,
            error: Some(err.to_string()),
        },
    }
}

/// Runs a uniform lambda sweep. Grid points are evaluated in parallel; rows
/// come back in lambda order. Per-row failures are recorded in the row and
/// the sweep continues.
pub fn run_sweep(
    scenario: &Scenario,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
) -> Result<Vec<SweepRow>, CliError> {
    if !(lambda_min >= 0.0 && lambda_min < lambda_max) {
        return Err(CliError::Config(format!(
            "need 0 <= lambda-min < lambda-max, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if points < 2 {
        return Err(CliError::Config(format!(
            "need at least 2 points, got {points}"
        )));
    }
    let lambda_c = critical_coupling(&scenario.params)?;
    let step = (lambda_max - lambda_min) / (points - 1) as f64;
    Ok((0..points)
        .into_par_iter()
        .map(|i| evaluate_row(scenario, lambda_min + step * i as f64, lambda_c))
        .collect())
}

/// Renders sweep rows as CSV under [`CSV_HEADER`]. Missing values become
/// empty fields; doubles use shortest round-trip formatting.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 64 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        match &row.values {
            Some(v) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    row.lambda,
                    row.phase,
                    v.omega_hi,
                    v.omega_lo,
                    v.sin2theta,
                    v.cos2theta,
                    v.e_atoms_to_photons,
                    v.e_photons_to_atoms,
                    v.class
                );
            }
            None => {
                let _ = writeln!(out, "{},{},,,,,,,", row.lambda, row.phase);
            }
        }
    }
    out
}

fn parse_phase_label(s: &str) -> Result<PhaseLabel, CliError> {
    match s {
        "normal" => Ok(PhaseLabel::Normal),
        "critical" => Ok(PhaseLabel::Critical),
        "superradiant" => Ok(PhaseLabel::Superradiant),
        other => Err(CliError::Config(format!("bad phase label `{other}`"))),
    }
}

fn parse_class(s: &str) -> Result<SteeringClass, CliError> {
    match s {
        "none" => Ok(SteeringClass::NoSteering),
        "one-way-photons-to-atoms" => Ok(SteeringClass::OneWayPhotonsToAtoms),
        "one-way-atoms-to-photons" => Ok(SteeringClass::OneWayAtomsToPhotons),
        "two-way" => Ok(SteeringClass::TwoWay),
        other => Err(CliError::Config(format!("bad steering class `{other}`"))),
    }
}

/// Parses CSV produced by [`sweep_to_csv`] back into rows (error messages
/// are not round-tripped).
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(CliError::Config(format!("bad CSV header: {:?}", other)));
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CliError::Config(format!("bad CSV row `{line}`")));
        }
        let lambda = f64::from_str(fields[0])
            .map_err(|_| CliError::Config(format!("bad lambda `{}`", fields[0])))?;
        let phase = parse_phase_label(fields[1])?;
        let values = if fields[2].is_empty() {
            None
        } else {
            let num = |i: usize| -> Result<f64, CliError> {
                f64::from_str(fields[i])
                    .map_err(|_| CliError::Config(format!("bad number `{}`", fields[i])))
            };
            Some(SweepValues {
                omega_hi: num(2)?,
                omega_lo: num(3)?,
                sin2theta: num(4)?,
                cos2theta: num(5)?,
                e_atoms_to_photons: num(6)?,
                e_photons_to_atoms: num(7)?,
                class: parse_class(fields[8])?,
            })
        };
        rows.push(SweepRow {
            lambda,
            phase,
            values,
            error: None,
        });
    }
    Ok(rows)
}

/// A crossing of one steering parameter through 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdCrossing {
    pub direction: SteeringDirection,
    pub lambda_star: f64,
    pub phase: PhaseLabel,
}

/// Scans `[lambda_min, lambda_max]` on a coarse grid for sign changes of
/// `E - 1/2` in either direction and refines each bracket by bisection.
/// Brackets never straddle the critical coupling; the scan always uses the
/// canonical unsquared criterion.
pub fn run_thresholds(
    scenario: &Scenario,
    lambda_min: f64,
    lambda_max: f64,
    scan_points: usize,
) -> Result<Vec<ThresholdCrossing>, CliError> {
    if !(lambda_min >= 0.0 && lambda_min < lambda_max) {
        return Err(CliError::Config(format!(
            "need 0 <= lambda-min < lambda-max, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if scan_points < 2 {
        return Err(CliError::Config(format!(
            "need at least 2 scan points, got {scan_points}"
        )));
    }
    let lambda_c = critical_coupling(&scenario.params)?;
    let step = (lambda_max - lambda_min) / (scan_points - 1) as f64;
    // Sampled values per grid point, skipping the critical window.
    let samples: Vec<Option<(f64, f64, f64, PhaseLabel)>> = (0..scan_points)
        .into_par_iter()
        .map(|i| {
            let lambda = lambda_min + step * i as f64;
            if (lambda - lambda_c).abs() < SWEEP_CRITICAL_WINDOW * lambda_c {
                return None;
            }
            let params = scenario.params.at_lambda(lambda);
            let phase = classify_phase(&params, gdm_steering::DEFAULT_PHASE_TOL).ok()?;
            let auto = Scenario {
                phase_policy: PhasePolicy::Auto,
                ..*scenario
            };
            let spectrum = spectrum_for_policy(&auto, &params).ok()?;
            let pair = steering_closed_form(&spectrum).ok()?;
            Some((
                lambda,
                pair.e_atoms_to_photons,
                pair.e_photons_to_atoms,
                phase,
            ))
        })
        .collect();
    let mut crossings = Vec::new();
    for pair in samples.windows(2) {
        let (Some(a), Some(b)) = (&pair[0], &pair[1]) else {
            continue;
        };
        if a.3 != b.3 {
            continue;
        }
        for (direction, fa, fb) in [
            (SteeringDirection::AtomsToPhotons, a.1, b.1),
            (SteeringDirection::PhotonsToAtoms, a.2, b.2),
        ] {
            if (fa - 0.5).signum() != (fb - 0.5).signum() {
                match find_threshold(&scenario.params, scenario.branch, direction, [a.0, b.0]) {
                    Ok(lambda_star) => crossings.push(ThresholdCrossing {
                        direction,
                        lambda_star,
                        phase: a.3,
                    }),
                    Err(GdmError::NoCrossing { .. }) => {}
                    Err(err) => return Err(err.into()),
                }
            }
        }
    }
    crossings.sort_by(|x, y| x.lambda_star.total_cmp(&y.lambda_star));
    Ok(crossings)
}

/// A witness evaluation plus its same-formula continuity baseline.
#[derive(Debug, Clone, Copy)]
pub struct WitnessRun {
    pub report: WitnessReport,
    /// `(jump_atoms_to_photons, jump_photons_to_atoms)` of the normal-phase
    /// closed form over the same relative window at the interior anchor.
    pub baseline: (f64, f64),
    pub branch: Branch,
    pub epsilon: f64,
}

/// Evaluates the witness at `lambda_c (1 -+ epsilon)` together with the
/// continuity baseline.
pub fn run_witness(scenario: &Scenario, epsilon: f64) -> Result<WitnessRun, CliError> {
    let report = qpt_witness(&scenario.params, scenario.branch, epsilon)?;
    let baseline = continuity_baseline(&scenario.params, scenario.branch, epsilon)?;
    Ok(WitnessRun {
        report,
        baseline,
        branch: scenario.branch,
        epsilon,
    })
}

/// Renders the two witness evaluation points in the sweep CSV schema.
pub fn witness_to_csv(run: &WitnessRun) -> String {
    let r = &run.report;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (lambda, phase, pair) in [
        (
            r.lambda_c * (1.0 - run.epsilon),
            PhaseLabel::Normal,
            &r.e_below,
        ),
        (
            r.lambda_c * (1.0 + run.epsilon),
            PhaseLabel::Superradiant,
            &r.e_above,
        ),
    ] {
        let _ = writeln!(
            out,
            "{},{},,,,,{},{},{}",
            lambda,
            phase,
            pair.e_atoms_to_photons,
            pair.e_photons_to_atoms,
            classify(pair)
        );
    }
    out
}

/// Brute-force comparison at the scenario's coupling (or an explicit
/// lambda), optionally dumping the Hamiltonian matrix first.
pub fn run_oracle_check(
    scenario: &Scenario,
    lambda: Option<f64>,
    config: &FockConfig,
    dump_to: Option<&Path>,
) -> Result<OracleReport, CliError> {
    let params = match lambda {
        Some(l) => scenario.params.at_lambda(l),
        None => scenario.params,
    };
    if let Some(path) = dump_to {
        let phase = match classify_phase(&params, gdm_steering::DEFAULT_PHASE_TOL)? {
            PhaseLabel::Normal => gdm_steering::HamiltonianPhase::Normal,
            PhaseLabel::Superradiant => gdm_steering::HamiltonianPhase::Superradiant,
            PhaseLabel::Critical => {
                return Err(CliError::Numerical(GdmError::CriticalPoint {
                    omega_lo_sq: 0.0,
                }))
            }
        };
        let matrix = gdm_steering::build_hamiltonian_matrix(
            &params,
            phase,
            (config.cutoff1, config.cutoff2),
        )?;
        let mut file = std::fs::File::create(path)
            .map_err(|err| CliError::Config(format!("cannot write `{}`: {err}", path.display())))?;
        gdm_steering::dump_matrix(&matrix, &mut file)
            .map_err(|err| CliError::Config(format!("dump failed: {err}")))?;
    }
    Ok(gdm_steering::compare(&params, scenario.branch, config)?)
}

/// Text rendering helpers used by the binary and tests.
pub mod render {
    use super::*;

    pub fn scenario_line(scenario: &Scenario) -> String {
        let p = &scenario.params;
        format!(
            "omega={} chi={} chi''={} kappa={} xi1={} xi2={} delta={} impurity={} \
             branch={} phase-policy={} mode={}",
            p.omega,
            p.chi,
            p.chi_pp,
            p.kappa_eff(),
            p.xi1_eff(),
            p.xi2_eff(),
            p.delta,
            if p.impurity_on { "on" } else { "off" },
            scenario.branch,
            scenario.phase_policy,
            scenario.steering_mode,
        )
    }

    pub fn sweep_summary(rows: &[SweepRow], lambda_c: f64) -> String {
        let ok = rows.iter().filter(|r| r.values.is_some()).count();
        let critical = rows
            .iter()
            .filter(|r| r.values.is_none() && r.error.is_none())
            .count();
        let failed = rows.iter().filter(|r| r.error.is_some()).count();
        let mut out = format!(
            "lambda_c = {lambda_c}\nrows: {ok} evaluated, {critical} critical-window, {failed} failed\n"
        );
        let values: Vec<&SweepValues> = rows.iter().filter_map(|r| r.values.as_ref()).collect();
        if !values.is_empty() {
            let min_max = |f: fn(&SweepValues) -> f64| {
                let lo = values.iter().map(|v| f(v)).fold(f64::INFINITY, f64::min);
                let hi = values
                    .iter()
                    .map(|v| f(v))
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            };
            let (a_lo, a_hi) = min_max(|v| v.e_atoms_to_photons);
            let (p_lo, p_hi) = min_max(|v| v.e_photons_to_atoms);
            let _ = writeln!(out, "E_atoms_to_photons in [{a_lo}, {a_hi}]");
            let _ = writeln!(out, "E_photons_to_atoms in [{p_lo}, {p_hi}]");
        }
        for row in rows.iter().filter(|r| r.error.is_some()).take(3) {
            let _ = writeln!(
                out,
                "  lambda = {}: {}",
                row.lambda,
                row.error.as_deref().unwrap_or("")
            );
        }
        out
    }

    pub fn thresholds_report(crossings: &[ThresholdCrossing]) -> String {
        if crossings.is_empty() {
            return "no crossings of E = 1/2 in the scanned range\n".to_string();
        }
        let mut out = String::from("crossings of E = 1/2 (unsquared criterion):\n");
        for c in crossings {
            let _ = writeln!(
                out,
                "  {} at lambda = {} ({} phase)",
                c.direction, c.lambda_star, c.phase
            );
        }
        out
    }

    pub fn witness_report(run: &WitnessRun) -> String {
        let r = &run.report;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "lambda_c = {}, epsilon = {}, branch {}",
            r.lambda_c, run.epsilon, run.branch
        );
        let _ = writeln!(
            out,
            "below  (normal):       E_atoms_to_photons = {:<22} E_photons_to_atoms = {}",
            r.e_below.e_atoms_to_photons, r.e_below.e_photons_to_atoms
        );
        let _ = writeln!(
            out,
            "above  (superradiant): E_atoms_to_photons = {:<22} E_photons_to_atoms = {}",
            r.e_above.e_atoms_to_photons, r.e_above.e_photons_to_atoms
        );
        let _ = writeln!(
            out,
            "jumps across lambda_c: {} / {}",
            r.jump_atoms_to_photons, r.jump_photons_to_atoms
        );
        let _ = writeln!(
            out,
            "same-formula baseline: {} / {}",
            run.baseline.0, run.baseline.1
        );
        out
    }

    pub fn oracle_report(report: &OracleReport, lambda: f64) -> String {
        let m = &report.moments;
        let d = &report.deltas;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "oracle comparison at lambda = {lambda}: cutoffs ({}, {}), converged: {}",
            report.cutoffs_used.0, report.cutoffs_used.1, report.converged
        );
        let _ = writeln!(out, "ground energy: {}", report.ground_energy);
        let _ = writeln!(
            out,
            "moments: var1={} var2={} cov={} mean1={} mean2={}",
            m.var1, m.var2, m.cov, m.mean1, m.mean2
        );
        let _ = writeln!(
            out,
            "steering: E_atoms_to_photons={} E_photons_to_atoms={}",
            report.steering.e_atoms_to_photons, report.steering.e_photons_to_atoms
        );
        let _ = writeln!(
            out,
            "relative deltas vs closed form: var1={:.3e} var2={:.3e} cov={:.3e} mean1={:.3e} \
             mean2={:.3e} E_a->p={:.3e} E_p->a={:.3e} (max {:.3e})",
            d.var1,
            d.var2,
            d.cov,
            d.mean1,
            d.mean2,
            d.e_atoms_to_photons,
            d.e_photons_to_atoms,
            d.max()
        );
        out
    }

    pub fn preset_table() -> String {
        let mut out = String::from(
            "name   description                                        branch        default-range\n",
        );
        for p in PRESETS {
            let range = match p.range {
                RangeKind::NormalPhase => "[0.01, 0.99 lc]",
                RangeKind::Superradiant => "[1.01 lc, 25]",
                RangeKind::AcrossTransition => "[0.01, 2 lc]",
            };
            let _ = writeln!(
                out,
                "{:<6} {:<50} {:<13} {}",
                p.name,
                p.description,
                p.branch.to_string(),
                range
            );
            if !p.note.is_empty() {
                let _ = writeln!(out, "       note: {}", p.note);
            }
        }
        out
    }
}
