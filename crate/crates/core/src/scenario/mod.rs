//! Configuration, batch execution and file output.
//!
//! [`run_scenario`] writes three files into the configured output directory:
//!
//! * `trajectory.csv`: one row per agent per sampled step,
//! * `metrics.csv`: one row per sampled step,
//! * `summary.txt`: `key = value` lines with the headline numbers, the
//!   configuration echo and the crate version.
//!
//! A simulation fault is not an error here: the files written so far are
//! kept and the fault is recorded in the summary.

pub mod compare;
pub mod config;
pub mod io;
pub mod replay;

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::error::FlockError;
use crate::metrics::{window_mean, MetricsRow};
use crate::sim::{compute_neighbors, run_with};
use crate::state::SwarmState;

pub use compare::{run_comparison, CellSummary, ComparisonCell, ComparisonReport};
pub use config::{parse_config, parse_config_with_overrides, ConfigError, ScenarioConfig};
pub use io::IoError;
pub use replay::{run_replay, ReplayOutcome};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Fraction of the run, counted from the end, used for final-window means.
pub const FINAL_WINDOW: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    /// The run could not be set up (the configuration passed parsing but the
    /// engine rejected it).
    #[error("setup failed: {0}")]
    Setup(#[from] FlockError),
    #[error("FLOCK_THREADS: {0}")]
    Threads(String),
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_time: f64,
    pub final_gamma: Option<f64>,
    /// Mean gamma over the last fifth of the simulated time.
    pub window_gamma_mean: Option<f64>,
    pub max_cohesion_radius: f64,
    pub fault: Option<FlockError>,
}

impl RunSummary {
    pub fn from_rows(rows: &[MetricsRow], fault: Option<FlockError>) -> Self {
        let final_time = rows.last().map_or(0.0, |r| r.time);
        RunSummary {
            final_time,
            final_gamma: rows.last().and_then(|r| r.gamma),
            window_gamma_mean: window_mean(rows, (1.0 - FINAL_WINDOW) * final_time, final_time, |r| r.gamma),
            max_cohesion_radius: rows.iter().map(|r| r.cohesion_radius).fold(0.0, f64::max),
            fault,
        }
    }

    /// Summary lines shared by scenario runs and replays.
    pub(crate) fn entries(&self, wall_clock_s: f64) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| io::UNDEFINED.to_string(), |v| v.to_string());
        vec![
            ("version".into(), crate::VERSION.to_string()),
            (
                "status".into(),
                if self.fault.is_some() { "fault" } else { "ok" }.to_string(),
            ),
            (
                "fault".into(),
                self.fault
                    .as_ref()
                    .map_or_else(|| io::UNDEFINED.to_string(), |f| f.to_string()),
            ),
            ("fault_time".into(), opt(self.fault.as_ref().and_then(FlockError::time))),
            ("final_time".into(), self.final_time.to_string()),
            ("final_gamma".into(), opt(self.final_gamma)),
            ("final_window_gamma_mean".into(), opt(self.window_gamma_mean)),
            ("max_cohesion_radius".into(), self.max_cohesion_radius.to_string()),
            ("wall_clock_s".into(), format!("{wall_clock_s:.3}")),
        ]
    }
}

/// Paths and results of a finished (possibly faulted) run.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub trajectory: PathBuf,
    pub metrics_path: PathBuf,
    pub summary_path: PathBuf,
    pub metrics: Vec<MetricsRow>,
    pub summary: RunSummary,
}

impl ScenarioOutcome {
    pub fn fault(&self) -> Option<&FlockError> {
        self.summary.fault.as_ref()
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))
}

/// Runs one configured scenario from its seeded initial swarm and writes
/// its files.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome, ScenarioError> {
    run_scenario_from(config, &config.initial_state()?)
}

/// Like [`run_scenario`], starting from `initial` instead of a sampled swarm.
pub fn run_scenario_from(config: &ScenarioConfig, initial: &SwarmState) -> Result<ScenarioOutcome, ScenarioError> {
    let started = Instant::now();
    let params = config.params();
    params.validate()?;
    if initial.dim() != config.dim {
        return Err(FlockError::invalid("dim", "initial state and configuration disagree").into());
    }

    create_dir(&config.out)?;
    let trajectory = config.out.join(TRAJECTORY_FILE);
    let metrics_path = config.out.join(METRICS_FILE);
    let summary_path = config.out.join(SUMMARY_FILE);
    let mut traj_writer = io::TrajectoryWriter::create(&trajectory, config.dim)?;
    let mut metrics_writer = io::MetricsWriter::create(&metrics_path)?;

    let mut rows = Vec::new();
    let mut write_error: Option<IoError> = None;
    let result = run_with(initial, &params, config.decimation, |state| {
        let row = MetricsRow::compute(state, &compute_neighbors(state, params.radius));
        rows.push(row);
        if write_error.is_none() {
            if let Err(e) = traj_writer.write(state).and_then(|_| metrics_writer.write(&row)) {
                write_error = Some(e);
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e.into());
    }
    traj_writer.finish()?;
    metrics_writer.finish()?;

    let summary = RunSummary::from_rows(&rows, result.err());
    let mut entries = summary.entries(started.elapsed().as_secs_f64());
    entries.extend(config.entries().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    io::write_key_values(&summary_path, "run summary", &entries)?;

    Ok(ScenarioOutcome {
        trajectory,
        metrics_path,
        summary_path,
        metrics: rows,
        summary,
    })
}
