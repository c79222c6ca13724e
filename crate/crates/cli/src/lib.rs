//! Command-line scenario runner: parameter sweeps to CSV and the oracle suite.

// `!(x > 0.0)` is how NaN gets rejected alongside the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use smqsl::dynamics::{
    ad_diagnostics, amplitude_damping, neel_mixed_state, AmplitudeDamping, BipartiteModel, NonHermitianModel, TimeGrid,
};
use smqsl::qsl::{kraus_bound_trajectory, manybody_bound_trajectory, nh_bound_trajectory, sweep, GridReport};
use smqsl::verify::{self, CriterionOutcome};
use smqsl::Subsystem;

use config::{Model, RawConfig, Scenario, ScenarioConfig, SpeedBound};

#[derive(Debug, Parser)]
#[command(name = "smqsl", version, about = "Sharma-Mittal entropy quantum speed limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitude-damping qubit, (q, τ) grid.
    Ad(ScenarioArgs),
    /// Trace-normalized PT-symmetric qubit, (q, τ) grid.
    Pt(ScenarioArgs),
    /// Reduced half-chain of an XXZ chain from a mixed Néel state, (q, τ) grid.
    Xxz(ScenarioArgs),
    /// Bloch components, fidelity and smallest eigenvalue under amplitude damping.
    AdDiagnostics(ScenarioArgs),
    /// Run the oracle checks and print a PASS/FAIL table.
    Verify,
}

/// Every scenario flag. Values given here override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Plain-text `key=value` file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Bloch radius of the initial qubit.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Damping rate.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Gain/loss rate.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// Number of chain sites.
    #[arg(long)]
    pub length: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<String>,
    /// Anisotropy.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Néel weight of the initial mixture.
    #[arg(long)]
    pub p: Option<String>,
    /// `renyi`, `tsallis` or `sme:<z>`.
    #[arg(long)]
    pub entropy: Option<String>,
    /// `start:stop:step`.
    #[arg(long)]
    pub q_grid: Option<String>,
    /// `start:stop:step`; time axis of diagnostics.
    #[arg(long)]
    pub tau_grid: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// Largest trajectory step before refinement.
    #[arg(long)]
    pub grid_step: Option<String>,
    /// Variance-refined non-Hermitian bound.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub refined: Option<String>,
    /// Amplitude-damping speed series: `kraus` or `schatten`.
    #[arg(long)]
    pub bound: Option<String>,
}

impl ScenarioArgs {
    /// Merges the config file (if any) with the flags, flags taking precedence.
    pub fn resolve(&self, scenario: Scenario) -> Result<ScenarioConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        let flags = [
            ("r", &self.r),
            ("theta", &self.theta),
            ("phi", &self.phi),
            ("gamma", &self.gamma),
            ("omega", &self.omega),
            ("eta", &self.eta),
            ("length", &self.length),
            ("j", &self.j),
            ("delta", &self.delta),
            ("p", &self.p),
            ("entropy", &self.entropy),
            ("q-grid", &self.q_grid),
            ("tau-grid", &self.tau_grid),
            ("out", &self.out),
            ("grid-step", &self.grid_step),
            ("refined", &self.refined),
            ("bound", &self.bound),
        ];
        for (key, value) in flags {
            raw.set_flag(key, value.clone());
        }
        Ok(ScenarioConfig::from_raw(scenario, &raw)?)
    }
}

const DEFAULT_STEP: f64 = 0.01;

/// Default trajectory step: `0.01`, or a tenth of the fastest time scale.
fn default_step(rate: f64) -> f64 {
    if rate > 0.0 {
        DEFAULT_STEP.min(0.1 / rate)
    } else {
        DEFAULT_STEP
    }
}

fn grid_report(cfg: &ScenarioConfig) -> Result<GridReport> {
    let entropy = cfg.entropy.context("grid scenarios need an entropy")?;
    let step = |rate: f64| cfg.grid_step.unwrap_or_else(|| default_step(rate));
    let report = match &cfg.model {
        Model::AmplitudeDamping { bloch, gamma, bound } => {
            let rho0 = bloch.density_matrix();
            let channel = AmplitudeDamping::new(*gamma)?;
            match bound {
                SpeedBound::Kraus => sweep(
                    |g: &TimeGrid| kraus_bound_trajectory(&channel, &rho0, g),
                    &cfg.q_grid,
                    entropy,
                    &cfg.tau_grid,
                    step(*gamma),
                )?,
                SpeedBound::Schatten => sweep(
                    |g: &TimeGrid| amplitude_damping(bloch, *gamma, g),
                    &cfg.q_grid,
                    entropy,
                    &cfg.tau_grid,
                    step(*gamma),
                )?,
            }
        }
        Model::Pt {
            bloch,
            omega,
            eta,
            refined,
        } => {
            let model = NonHermitianModel::pt_symmetric(*omega, *eta)?;
            let rho0 = bloch.density_matrix();
            sweep(
                |g: &TimeGrid| nh_bound_trajectory(&model, &rho0, *refined, g),
                &cfg.q_grid,
                entropy,
                &cfg.tau_grid,
                step(omega.max(*eta)),
            )?
        }
        Model::Xxz { length, j, delta, p } => {
            let model = BipartiteModel::xxz(*length, length / 2, *j, *delta)?;
            let (rho0, _) = neel_mixed_state(*length, *p)?;
            sweep(
                |g: &TimeGrid| manybody_bound_trajectory(&model, &rho0, Subsystem::A, g),
                &cfg.q_grid,
                entropy,
                &cfg.tau_grid,
                step(2.0 * j.abs() * (1.0 + delta.abs())),
            )?
        }
    };
    Ok(report)
}

/// Runs a grid or diagnostics scenario and returns the CSV bytes.
pub fn render(cfg: &ScenarioConfig) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match (cfg.scenario, &cfg.model) {
        (Scenario::AdDiagnostics, Model::AmplitudeDamping { bloch, gamma, .. }) => {
            let rows = ad_diagnostics(bloch, *gamma, &cfg.tau_grid)?;
            output::write_diagnostics(&mut buf, &rows)?;
        }
        _ => output::write_grid(&mut buf, &grid_report(cfg)?)?,
    }
    Ok(buf)
}

/// Renders the scenario and writes it to `--out` atomically, or to stdout.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<()> {
    let bytes = render(cfg)?;
    match &cfg.out {
        Some(path) => output::write_atomic(path, &bytes).with_context(|| format!("writing {}", path.display()))?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(&bytes)?;
        }
    }
    Ok(())
}

/// One table line per criterion.
pub fn format_outcome(outcome: &CriterionOutcome) -> String {
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    format!("[{status}] {:>2} {:<36} {}", outcome.id, outcome.name, outcome.detail)
}

/// Prints the verification table; `true` when every criterion passed.
pub fn run_verify() -> bool {
    let outcomes = verify::run_all();
    for outcome in &outcomes {
        println!("{}", format_outcome(outcome));
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} passed", outcomes.len());
    passed == outcomes.len()
}

pub fn run(cli: Cli) -> Result<bool> {
    let (scenario, args) = match &cli.command {
        Command::Ad(a) => (Scenario::Ad, a),
        Command::Pt(a) => (Scenario::Pt, a),
        Command::Xxz(a) => (Scenario::Xxz, a),
        Command::AdDiagnostics(a) => (Scenario::AdDiagnostics, a),
        Command::Verify => return Ok(run_verify()),
    };
    run_scenario(&args.resolve(scenario)?)?;
    Ok(true)
}
