//! Scenario-driven front end behind the `sirdyn` binary: simulate, classify,
//! sweep and verify.

pub mod output;
pub mod report;
pub mod scenario;
pub mod sweep;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::filippov::{classify_regime, simulate_threshold_from, threshold_rate, DEFAULT_MAX_MODE_SWITCHES};
use crate::network::{reproduction_series, simulate_network};
use crate::sir::{reproduction_function, simulate_scalar, SirState};
use crate::{Error, Trajectory};

pub use report::RunReport;
pub use scenario::{ModelSpec, Prepared, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SIMULATION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
/// `classify` on parameters that sit exactly on a regime boundary.
pub const EXIT_BOUNDARY: i32 = 4;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const REPORT_FILE: &str = "report.toml";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const VERIFY_FILE: &str = "verify.toml";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("verification failed: {0} check(s) did not pass")]
    Verification(usize),
    #[error("boundary regime: {0}")]
    Boundary(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Io(_) => EXIT_VALIDATION,
            Self::Simulation(_) => EXIT_SIMULATION,
            Self::Verification(_) => EXIT_VERIFICATION,
            Self::Boundary(_) => EXIT_BOUNDARY,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// A finished (or aborted) simulation of one scenario.
#[derive(Debug, Clone)]
pub struct Run {
    pub prepared: Prepared,
    pub trajectory: Trajectory,
    /// `R` at each stored time.
    pub reproduction: Vec<f64>,
    /// Set when the integrator gave up; `trajectory` then holds what was
    /// computed before the failure, possibly nothing.
    pub failure: Option<String>,
}

impl Run {
    /// Number of nodes (1 for the scalar models).
    pub fn nodes(&self) -> usize {
        match &self.prepared {
            Prepared::Network { model, .. } => model.n(),
            _ => 1,
        }
    }
}

fn reproduction(prepared: &Prepared, traj: &Trajectory) -> Result<Vec<f64>, Error> {
    match prepared {
        Prepared::Scalar { model, .. } => Ok(traj
            .states
            .iter()
            .map(|s| reproduction_function(&SirState::from_slice(s), model))
            .collect()),
        Prepared::Threshold { policy, .. } => Ok(traj
            .states
            .iter()
            .map(|s| s[0] * threshold_rate(s[1], policy) / policy.gamma)
            .collect()),
        Prepared::Network { model, .. } => reproduction_series(traj, model),
    }
}

/// Validates and integrates a scenario. Integration failures are captured
/// in [`Run::failure`] rather than returned.
pub fn run_scenario(scenario: &Scenario) -> Result<Run, CliError> {
    let prepared = scenario.prepare()?;
    let opts = scenario.options();
    let outcome = match &prepared {
        Prepared::Scalar { model, initial } => simulate_scalar(model, *initial, scenario.horizon, &opts),
        Prepared::Threshold { policy, epsilon } => SirState::outbreak(*epsilon).and_then(|start| {
            simulate_threshold_from(policy, start, scenario.horizon, &opts, DEFAULT_MAX_MODE_SWITCHES)
        }),
        Prepared::Network { model, initial } => simulate_network(model, initial, scenario.horizon, &opts),
    };
    let (trajectory, failure) = match outcome {
        Ok(traj) => (traj, None),
        Err(e) => {
            let partial = match &e {
                Error::Integration(ie) => ie.partial().cloned(),
                _ => None,
            };
            (partial.unwrap_or_default(), Some(e.to_string()))
        }
    };
    let reproduction = reproduction(&prepared, &trajectory).map_err(|e| CliError::Simulation(e.to_string()))?;
    Ok(Run {
        prepared,
        trajectory,
        reproduction,
        failure,
    })
}

/// Paths written by [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutputs {
    pub trajectory: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub report: PathBuf,
}

/// `sirdyn simulate`: trajectory and event tables plus a report in `out`.
///
/// Outputs are written even when the simulation fails, with the report
/// marking them partial; the error is returned afterwards.
pub fn simulate(scenario: &Scenario, out: &Path) -> Result<SimulateOutputs, CliError> {
    let run = run_scenario(scenario)?;
    let mut outputs = SimulateOutputs {
        trajectory: None,
        events: None,
        report: out.join(REPORT_FILE),
    };
    if scenario.output.trajectory {
        let path = out.join(TRAJECTORY_FILE);
        write_atomic(&path, &output::trajectory_csv(&run)?)?;
        outputs.trajectory = Some(path);
    }
    if scenario.output.events {
        let path = out.join(EVENTS_FILE);
        write_atomic(&path, &output::events_csv(&run.trajectory, run.nodes())?)?;
        outputs.events = Some(path);
    }
    let report = RunReport::build(scenario, &run, &outputs);
    write_atomic(&outputs.report, report.to_toml().as_bytes())?;
    match run.failure {
        Some(msg) => Err(CliError::Simulation(msg)),
        None => Ok(outputs),
    }
}

/// `sirdyn classify`: regime and analytics of a threshold scenario as TOML,
/// without simulating.
pub fn classify(scenario: &Scenario) -> Result<String, CliError> {
    let Prepared::Threshold { policy, epsilon } = scenario.prepare()? else {
        return Err(CliError::Validation(format!(
            "classify needs a threshold scenario, got `{}`",
            scenario.model.kind()
        )));
    };
    match classify_regime(epsilon, &policy) {
        Ok(report) => Ok(report::regime_toml(&report)),
        Err(e @ Error::BoundaryRegime { .. }) => Err(CliError::Boundary(e.to_string())),
        Err(e) => Err(CliError::Validation(e.to_string())),
    }
}
