use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gdm_steering::{continuity_baseline, critical_coupling, FockConfig};
use gdm_steering_cli::{
    parse_branch, parse_config, parse_steering_mode, preset, render, run_oracle_check, run_sweep,
    run_thresholds, run_witness, sweep_to_csv, witness_to_csv, CliError, Scenario,
};

/// Ground-state EPR steering of an impurity-doped cavity-BEC Dicke model:
/// lambda sweeps, 1/2-criterion thresholds, phase-transition witness runs,
/// and brute-force Fock-space checks.
#[derive(Parser)]
#[command(name = "gdm-steering", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Figure preset name (see `preset-list`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Path to a flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the mixing-angle branch: pos | neg.
    #[arg(long)]
    branch: Option<String>,
    /// Override the steering mode: paper | reid.
    #[arg(long)]
    mode: Option<String>,
    /// Allow a forced phase policy that contradicts the configured lambda.
    #[arg(long)]
    allow_phase_mismatch: bool,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario, CliError> {
        let mut scenario = match (&self.preset, &self.config) {
            (Some(name), None) => preset(name)
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "unknown preset `{name}`; run `gdm-steering preset-list`"
                    ))
                })?
                .scenario(),
            (None, Some(path)) => parse_config(path)?,
            (None, None) => {
                return Err(CliError::Config(
                    "pass --preset <name> or --config <path>".into(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("clap forbids this combination"),
        };
        if let Some(branch) = &self.branch {
            scenario.branch = parse_branch(branch)?;
        }
        if let Some(mode) = &self.mode {
            scenario.steering_mode = parse_steering_mode(mode)?;
        }
        scenario.validate_policy(self.allow_phase_mismatch)?;
        Ok(scenario)
    }

    fn default_range(&self) -> Result<Option<(f64, f64)>, CliError> {
        match &self.preset {
            Some(name) => preset(name).map(|p| p.default_range()).transpose(),
            None => Ok(None),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep lambda over a uniform grid and emit one CSV row per point.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Lower end of the lambda grid (defaults to the preset's range).
        #[arg(long)]
        lambda_min: Option<f64>,
        /// Upper end of the lambda grid.
        #[arg(long)]
        lambda_max: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Write the CSV here (summary always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate all crossings of the steering parameters through 1/2.
    Thresholds {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        lambda_min: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        /// Coarse scan resolution before bisection refinement.
        #[arg(long, default_value_t = 400)]
        scan_points: usize,
        /// Write crossings as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the steering parameters just below and above the critical
    /// coupling and report the jump.
    Witness {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Relative offset from the critical coupling.
        #[arg(long, default_value_t = gdm_steering::DEFAULT_WITNESS_EPSILON)]
        epsilon: f64,
        /// Debug mode: evaluate the normal-phase formula on both sides of an
        /// interior anchor instead of crossing the transition.
        #[arg(long)]
        debug_same_formula: bool,
        /// Write the two evaluation points as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare closed forms against the truncated-Fock-space oracle.
    OracleCheck {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Coupling to check (defaults to the config's lambda).
        #[arg(long)]
        lambda: Option<f64>,
        /// Initial Fock cutoff of mode 1.
        #[arg(long, default_value_t = 12)]
        cutoff1: usize,
        /// Initial Fock cutoff of mode 2.
        #[arg(long, default_value_t = 12)]
        cutoff2: usize,
        /// Relative convergence tolerance between refinements.
        #[arg(long, default_value_t = 1e-8)]
        conv_tol: f64,
        /// Hard cap on the Fock matrix dimension.
        #[arg(long, default_value_t = 40_000)]
        max_dim: usize,
        /// Dump the Hamiltonian at the initial cutoffs as (row, col, value)
        /// triples.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// List the built-in figure presets.
    PresetList,
}

fn write_output(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|err| CliError::Config(format!("cannot write `{}`: {err}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep {
            scenario,
            lambda_min,
            lambda_max,
            points,
            out,
        } => {
            let sc = scenario.scenario()?;
            let range = scenario.default_range()?;
            let lambda_min = lambda_min
                .or(range.map(|r| r.0))
                .ok_or_else(|| CliError::Config("--lambda-min required without a preset".into()))?;
            let lambda_max = lambda_max
                .or(range.map(|r| r.1))
                .ok_or_else(|| CliError::Config("--lambda-max required without a preset".into()))?;
            println!("{}", render::scenario_line(&sc));
            let rows = run_sweep(&sc, lambda_min, lambda_max, points)?;
            print!(
                "{}",
                render::sweep_summary(&rows, critical_coupling(&sc.params)?)
            );
            if let Some(path) = out {
                write_output(&path, &sweep_to_csv(&rows))?;
            }
            Ok(())
        }
        Command::Thresholds {
            scenario,
            lambda_min,
            lambda_max,
            scan_points,
            out,
        } => {
            let sc = scenario.scenario()?;
            let range = scenario.default_range()?;
            let lambda_min = lambda_min
                .or(range.map(|r| r.0))
                .ok_or_else(|| CliError::Config("--lambda-min required without a preset".into()))?;
            let lambda_max = lambda_max
                .or(range.map(|r| r.1))
                .ok_or_else(|| CliError::Config("--lambda-max required without a preset".into()))?;
            println!("{}", render::scenario_line(&sc));
            let crossings = run_thresholds(&sc, lambda_min, lambda_max, scan_points)?;
            print!("{}", render::thresholds_report(&crossings));
            if let Some(path) = out {
                let mut csv = String::from("direction,lambda_star,phase\n");
                for c in &crossings {
                    csv.push_str(&format!("{},{},{}\n", c.direction, c.lambda_star, c.phase));
                }
                write_output(&path, &csv)?;
            }
            Ok(())
        }
        Command::Witness {
            scenario,
            epsilon,
            debug_same_formula,
            out,
        } => {
            let sc = scenario.scenario()?;
            println!("{}", render::scenario_line(&sc));
            if debug_same_formula {
                let (jump_a, jump_p) = continuity_baseline(&sc.params, sc.branch, epsilon)?;
                println!(
                    "same-formula jumps at the interior anchor (epsilon = {epsilon}): \
                     {jump_a} / {jump_p}"
                );
                return Ok(());
            }
            let witness = run_witness(&sc, epsilon)?;
            print!("{}", render::witness_report(&witness));
            if let Some(path) = out {
                write_output(&path, &witness_to_csv(&witness))?;
            }
            Ok(())
        }
        Command::OracleCheck {
            scenario,
            lambda,
            cutoff1,
            cutoff2,
            conv_tol,
            max_dim,
            dump_matrix,
        } => {
            let sc = scenario.scenario()?;
            let config = FockConfig {
                cutoff1,
                cutoff2,
                conv_tol,
                max_dim,
                ..FockConfig::default()
            };
            println!("{}", render::scenario_line(&sc));
            let lambda_used = lambda.unwrap_or(sc.params.lambda_coupling);
            let report = run_oracle_check(&sc, lambda, &config, dump_matrix.as_deref())?;
            print!("{}", render::oracle_report(&report, lambda_used));
            if !report.converged {
                return Err(CliError::OracleNonConvergence(format!(
                    "moments still moving at cutoffs ({}, {}); raise --max-dim or the cutoffs",
                    report.cutoffs_used.0, report.cutoffs_used.1
                )));
            }
            Ok(())
        }
        Command::PresetList => {
            print!("{}", render::preset_table());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
