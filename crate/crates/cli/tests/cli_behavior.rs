//! Config grammar, CSV contract, preset data, and process exit codes.

use std::io::Write;
use std::process::Command;

use gdm_steering::{Branch, SteeringMode};
use gdm_steering_cli::{
    parse_config, parse_config_str, parse_sweep_csv, preset, run_sweep, sweep_to_csv, CliError,
    PhasePolicy, RangeKind, PRESETS,
};

const VALID_CONFIG: &str = "\
# fig5-like parameters
omega = 400.0
chi = 0.1
chi_pp = 0.1
impurity_on = true
kappa = 0.5
xi1 = 0.001
xi2 = 0.0
delta = 0.5
lambda = 8.0
branch = pos
phase = auto
mode = paper
";

#[test]
fn config_parses_and_validates() {
    let sc = parse_config_str(VALID_CONFIG).unwrap();
    assert_eq!(sc.params.omega, 400.0);
    assert_eq!(sc.params.lambda_coupling, 8.0);
    assert!(sc.params.impurity_on);
    assert_eq!(sc.branch, Branch::SinPositive);
    assert_eq!(sc.phase_policy, PhasePolicy::Auto);
    assert_eq!(sc.steering_mode, SteeringMode::PaperUnsquared);
}

#[test]
fn config_defaults_for_optional_keys() {
    let sc =
        parse_config_str("omega = 2\nchi_pp = 0\nimpurity_on = false\nbranch = neg\n").unwrap();
    assert_eq!(sc.params.chi, 0.0);
    assert_eq!(sc.params.lambda_coupling, 0.0);
    assert_eq!(sc.branch, Branch::SinNegative);
}

#[test]
fn config_rejects_unknown_key_by_name() {
    let err =
        parse_config_str("omega = 2\nchi_pp = 0\nimpurity_on = false\nbranch = neg\nbogus = 1\n")
            .unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("unknown key `bogus`"), "{msg}");
}

#[test]
fn config_rejects_missing_key_by_name() {
    let err = parse_config_str("omega = 2\nimpurity_on = false\nbranch = neg\n").unwrap_err();
    assert!(err.to_string().contains("`chi_pp`"), "{err}");
}

#[test]
fn config_rejects_duplicate_key() {
    let err =
        parse_config_str("omega = 2\nomega = 3\nchi_pp = 0\nimpurity_on = false\nbranch = neg\n")
            .unwrap_err();
    assert!(err.to_string().contains("duplicate key `omega`"), "{err}");
}

#[test]
fn config_rejects_out_of_range_delta_by_name() {
    let text = "omega = 2\nchi_pp = 0\nimpurity_on = true\ndelta = 2\nbranch = pos\n";
    let err = parse_config_str(text).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("`delta`"), "{msg}");
    assert!(matches!(err, CliError::Config(_)));
}

#[test]
fn config_file_roundtrip() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(VALID_CONFIG.as_bytes()).unwrap();
    let sc = parse_config(file.path()).unwrap();
    assert_eq!(sc.params.kappa, 0.5);
}

#[test]
fn preset_fig1_matches_caption() {
    let p = preset("fig1").unwrap();
    assert_eq!(
        (
            p.omega,
            p.chi,
            p.chi_pp,
            p.kappa,
            p.xi1,
            p.delta,
            p.impurity_on
        ),
        (400.0, 0.0, 0.1, 0.5, 0.001, 0.5, true)
    );
    assert_eq!(p.branch, Branch::SinPositive);
}

#[test]
fn preset_fig6_matches_caption() {
    let p = preset("fig6").unwrap();
    assert_eq!(
        (p.omega, p.chi, p.chi_pp, p.impurity_on),
        (400.0, 0.1, 0.1, false)
    );
    assert_eq!(p.branch, Branch::SinPositive);
}

/// The checked-in preset table: (name, chi, impurity_on, branch-is-positive,
/// range kind). Every preset must match it field for field; the physical
/// constants shared by all presets are pinned separately below.
const PRESET_TABLE: &[(&str, f64, bool, bool, RangeKind)] = &[
    ("fig1", 0.0, true, true, RangeKind::NormalPhase),
    ("fig2", 0.0, false, true, RangeKind::NormalPhase),
    ("fig3", 0.0, true, false, RangeKind::NormalPhase),
    ("fig4", 0.0, false, false, RangeKind::NormalPhase),
    ("fig5", 0.1, true, true, RangeKind::Superradiant),
    ("fig6", 0.1, false, true, RangeKind::Superradiant),
    ("fig7", 0.1, true, false, RangeKind::Superradiant),
    ("fig8", 0.1, false, false, RangeKind::Superradiant),
    ("fig9", 0.1, true, true, RangeKind::AcrossTransition),
    ("fig10", 0.1, false, true, RangeKind::AcrossTransition),
];

#[test]
fn presets_match_checked_in_table() {
    assert_eq!(PRESETS.len(), PRESET_TABLE.len());
    for (p, row) in PRESETS.iter().zip(PRESET_TABLE) {
        assert_eq!(p.name, row.0);
        assert_eq!(p.chi, row.1, "{}", p.name);
        assert_eq!(p.impurity_on, row.2, "{}", p.name);
        assert_eq!(p.branch == Branch::SinPositive, row.3, "{}", p.name);
        assert_eq!(p.range, row.4, "{}", p.name);
        assert_eq!((p.omega, p.chi_pp), (400.0, 0.1), "{}", p.name);
        if p.impurity_on {
            assert_eq!(
                (p.kappa, p.xi1, p.xi2, p.delta),
                (0.5, 0.001, 0.0, 0.5),
                "{}",
                p.name
            );
        } else {
            assert_eq!(
                (p.kappa, p.xi1, p.xi2, p.delta),
                (0.0, 0.0, 0.0, 0.0),
                "{}",
                p.name
            );
        }
    }
    // fig7 documents its branch discrepancy.
    assert!(preset("fig7").unwrap().note.contains("sin2theta < 0"));
}

#[test]
fn csv_round_trips_bit_exact() {
    let sc = preset("fig9").unwrap().scenario();
    let (lo, hi) = preset("fig9").unwrap().default_range().unwrap();
    // Dense enough that the grid lands inside the 0.5% critical window.
    let rows = run_sweep(&sc, lo, hi, 401).unwrap();
    assert!(
        rows.iter().any(|r| r.values.is_none()),
        "expected critical-window rows"
    );
    let csv = sweep_to_csv(&rows);
    let parsed = parse_sweep_csv(&csv).unwrap();
    assert_eq!(parsed.len(), rows.len());
    for (a, b) in rows.iter().zip(&parsed) {
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        assert_eq!(a.phase, b.phase);
        match (&a.values, &b.values) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                assert_eq!(x.omega_hi.to_bits(), y.omega_hi.to_bits());
                assert_eq!(x.omega_lo.to_bits(), y.omega_lo.to_bits());
                assert_eq!(x.sin2theta.to_bits(), y.sin2theta.to_bits());
                assert_eq!(x.cos2theta.to_bits(), y.cos2theta.to_bits());
                assert_eq!(
                    x.e_atoms_to_photons.to_bits(),
                    y.e_atoms_to_photons.to_bits()
                );
                assert_eq!(
                    x.e_photons_to_atoms.to_bits(),
                    y.e_photons_to_atoms.to_bits()
                );
                assert_eq!(x.class, y.class);
            }
            other => panic!("value presence mismatch: {other:?}"),
        }
    }
}

#[test]
fn sweeps_are_deterministic() {
    let sc = preset("fig5").unwrap().scenario();
    let (lo, hi) = preset("fig5").unwrap().default_range().unwrap();
    let first = sweep_to_csv(&run_sweep(&sc, lo, hi, 101).unwrap());
    let second = sweep_to_csv(&run_sweep(&sc, lo, hi, 101).unwrap());
    assert_eq!(
        first, second,
        "sweep CSV must be byte-identical across runs"
    );
}

#[test]
fn sweep_rejects_bad_grid() {
    let sc = preset("fig1").unwrap().scenario();
    assert!(matches!(
        run_sweep(&sc, 1.0, 0.5, 10),
        Err(CliError::Config(_))
    ));
    assert!(matches!(
        run_sweep(&sc, 0.1, 1.0, 1),
        Err(CliError::Config(_))
    ));
    let rows = run_sweep(&sc, 0.5, 1.0, 2).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].lambda < rows[1].lambda);
}

#[test]
fn forced_phase_policy_is_validated() {
    // lambda = 8 sits above lambda_c = 3.873 for the fig5 parameters.
    let mut sc = preset("fig5").unwrap().scenario();
    sc.params = sc.params.at_lambda(8.0);
    sc.phase_policy = PhasePolicy::ForceNormal;
    let err = sc.validate_policy(false).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert!(err.to_string().contains("phase policy"));
    sc.validate_policy(true).unwrap();
}

#[test]
fn forced_normal_sweep_records_row_errors_and_continues() {
    let mut sc = preset("fig9").unwrap().scenario();
    sc.phase_policy = PhasePolicy::ForceNormal;
    let lc = gdm_steering::critical_coupling(&sc.params).unwrap();
    let rows = run_sweep(&sc, 0.5 * lc, 1.5 * lc, 21).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().any(|r| r.values.is_some()));
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    assert!(
        !failed.is_empty(),
        "rows above lambda_c must fail under ForceNormal"
    );
    for row in failed {
        assert!(row.lambda > lc);
    }
}

#[test]
fn reid_mode_sweep_uses_conditional_variances() {
    let mut sc = preset("fig4").unwrap().scenario();
    sc.steering_mode = SteeringMode::ReidSquared;
    let lc = gdm_steering::critical_coupling(&sc.params).unwrap();
    let rows = run_sweep(&sc, 0.5 * lc, 0.6 * lc, 5).unwrap();
    let paper_rows = run_sweep(&preset("fig4").unwrap().scenario(), 0.5 * lc, 0.6 * lc, 5).unwrap();
    for (reid, paper) in rows.iter().zip(&paper_rows) {
        let (r, p) = (reid.values.unwrap(), paper.values.unwrap());
        // The squared-covariance criterion is never larger than the paper's
        // unsquared one when the covariance is negative.
        assert!(r.e_atoms_to_photons <= p.e_atoms_to_photons);
        assert!(r.e_atoms_to_photons > 0.0);
    }
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gdm-steering"))
}

#[test]
fn exit_code_zero_on_success() {
    let out = binary().args(["preset-list"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fig7"));
}

#[test]
fn exit_code_two_on_config_errors() {
    let out = binary()
        .args(["sweep", "--preset", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(b"omega = -1\nchi_pp = 0\nimpurity_on = false\nbranch = pos\n")
        .unwrap();
    let out = binary()
        .args(["sweep", "--config"])
        .arg(file.path())
        .args(["--lambda-min", "0.1", "--lambda-max", "1.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega"));
}

#[test]
fn exit_code_three_on_near_critical_oracle_check() {
    // lambda_c = 3.873 for fig5; 1% away is inside the 2% exclusion zone.
    let out = binary()
        .args(["oracle-check", "--preset", "fig5", "--lambda", "3.9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("near-critical"));
}

#[test]
fn witness_and_debug_mode_run() {
    let out = binary()
        .args(["witness", "--preset", "fig9", "--epsilon", "0.001"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("jumps across lambda_c"));
    let out = binary()
        .args([
            "witness",
            "--preset",
            "fig9",
            "--debug-same-formula",
            "--epsilon",
            "0.001",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("same-formula"));
}

#[test]
fn oracle_check_writes_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("h.txt");
    let out = binary()
        .args([
            "oracle-check",
            "--preset",
            "fig1",
            "--lambda",
            "2.0",
            "--cutoff1",
            "8",
        ])
        .args(["--dump-matrix"])
        .arg(&dump)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&dump).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("0 0 "));
    // (cutoff1 + 1)(cutoff2 + 1) squared entries, row-major.
    let dim = 9 * 13;
    assert_eq!(text.lines().count(), dim * dim);
}
