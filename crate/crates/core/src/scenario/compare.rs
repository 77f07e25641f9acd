//! Three-way comparison of the control laws over a list of seeds.
//!
//! Every seed is sampled once and the same initial swarm is handed to all
//! three variants. Cells run in parallel; `FLOCK_THREADS` caps the number of
//! worker threads.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::io::{self, MetricsWriter, UNDEFINED};
use super::{create_dir, ScenarioConfig, ScenarioError, FINAL_WINDOW};
use crate::error::FlockError;
use crate::metrics::{relative_std, window, window_mean, MetricsRow};
use crate::sim::{compute_neighbors, run_with};
use crate::state::{ModelParams, SwarmState, Variant};

pub const THREADS_ENV: &str = "FLOCK_THREADS";

/// Final-window numbers of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub final_gamma: Option<f64>,
    pub window_gamma_mean: Option<f64>,
    pub mean_neighbor_distance: Option<f64>,
    /// Relative standard deviation of the cohesion radius.
    pub cohesion_radius_rsd: Option<f64>,
}

impl CellSummary {
    /// Summarises the window `[(1 - FINAL_WINDOW) * t_end, t_end]`.
    pub fn from_rows(rows: &[MetricsRow], t_end: f64) -> Self {
        let from = (1.0 - FINAL_WINDOW) * t_end;
        let radii: Vec<f64> = window(rows, from, t_end).map(|r| r.cohesion_radius).collect();
        CellSummary {
            final_gamma: rows.last().and_then(|r| r.gamma),
            window_gamma_mean: window_mean(rows, from, t_end, |r| r.gamma),
            mean_neighbor_distance: window_mean(rows, from, t_end, MetricsRow::dist_mean),
            cohesion_radius_rsd: relative_std(&radii),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonCell {
    pub seed: u64,
    pub variant: Variant,
    /// Metrics at every sampled step up to the end or the fault.
    pub metrics: Vec<MetricsRow>,
    pub summary: CellSummary,
    pub fault: Option<FlockError>,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub t_end: f64,
    /// Seeds in the order given, each followed by the three variants.
    pub cells: Vec<ComparisonCell>,
}

/// Mean of each cell number over the seeds of one variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub variant: Variant,
    pub cells: usize,
    pub faults: usize,
    pub window_gamma_mean: Option<f64>,
    pub mean_neighbor_distance: Option<f64>,
    pub cohesion_radius_rsd: Option<f64>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |v| v.to_string())
}

impl ComparisonReport {
    pub fn cell(&self, seed: u64, variant: Variant) -> Option<&ComparisonCell> {
        self.cells.iter().find(|c| c.seed == seed && c.variant == variant)
    }

    pub fn aggregate(&self) -> Vec<AggregateRow> {
        Variant::ALL
            .iter()
            .map(|&variant| {
                let cells: Vec<&ComparisonCell> = self.cells.iter().filter(|c| c.variant == variant).collect();
                AggregateRow {
                    variant,
                    cells: cells.len(),
                    faults: cells.iter().filter(|c| c.fault.is_some()).count(),
                    window_gamma_mean: mean_of(cells.iter().map(|c| c.summary.window_gamma_mean)),
                    mean_neighbor_distance: mean_of(cells.iter().map(|c| c.summary.mean_neighbor_distance)),
                    cohesion_radius_rsd: mean_of(cells.iter().map(|c| c.summary.cohesion_radius_rsd)),
                }
            })
            .collect()
    }

    /// Per-cell table followed by the per-variant aggregate, as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,variant,status,final_gamma,window_gamma_mean,mean_neighbor_distance,cohesion_radius_rsd\n",
        );
        for c in &self.cells {
            let s = &c.summary;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.seed,
                c.variant,
                if c.fault.is_some() { "fault" } else { "ok" },
                opt(s.final_gamma),
                opt(s.window_gamma_mean),
                opt(s.mean_neighbor_distance),
                opt(s.cohesion_radius_rsd),
            ));
        }
        for a in self.aggregate() {
            out.push_str(&format!(
                "all,{},{}/{} ok,{},{},{},{}\n",
                a.variant,
                a.cells - a.faults,
                a.cells,
                UNDEFINED,
                opt(a.window_gamma_mean),
                opt(a.mean_neighbor_distance),
                opt(a.cohesion_radius_rsd),
            ));
        }
        out
    }

    /// Writes `comparison.csv` and one metrics file per cell into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, io::IoError> {
        create_dir(dir)?;
        let table = dir.join("comparison.csv");
        std::fs::write(&table, self.to_csv()).map_err(|e| io::IoError::io(&table, e))?;
        let mut paths = vec![table];
        for c in &self.cells {
            let path = dir.join(format!("metrics_seed{}_{}.csv", c.seed, c.variant));
            let mut w = MetricsWriter::create(&path)?;
            for row in &c.metrics {
                w.write(row)?;
            }
            w.finish()?;
            paths.push(path);
        }
        Ok(paths)
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |v: Option<f64>| v.map_or_else(|| UNDEFINED.to_string(), |v| format!("{v:.4}"));
        writeln!(
            f,
            "{:>6} {:>8} {:>7} {:>12} {:>12} {:>12}",
            "seed", "variant", "status", "gamma_final", "dist_mean", "R_rsd"
        )?;
        for c in &self.cells {
            writeln!(
                f,
                "{:>6} {:>8} {:>7} {:>12} {:>12} {:>12}",
                c.seed,
                c.variant.as_str(),
                if c.fault.is_some() { "fault" } else { "ok" },
                cell(c.summary.window_gamma_mean),
                cell(c.summary.mean_neighbor_distance),
                cell(c.summary.cohesion_radius_rsd),
            )?;
        }
        for a in self.aggregate() {
            writeln!(
                f,
                "{:>6} {:>8} {:>7} {:>12} {:>12} {:>12}",
                "all",
                a.variant.as_str(),
                format!("{}/{}", a.cells - a.faults, a.cells),
                cell(a.window_gamma_mean),
                cell(a.mean_neighbor_distance),
                cell(a.cohesion_radius_rsd),
            )?;
        }
        Ok(())
    }
}

fn run_cell(initial: &SwarmState, params: &ModelParams, decimation: usize, seed: u64) -> ComparisonCell {
    let mut metrics = Vec::new();
    let result = run_with(initial, params, decimation, |state| {
        metrics.push(MetricsRow::compute(state, &compute_neighbors(state, params.radius)));
    });
    ComparisonCell {
        seed,
        variant: params.variant,
        summary: CellSummary::from_rows(&metrics, params.t_end),
        metrics,
        fault: result.err(),
    }
}

fn thread_cap() -> Result<Option<usize>, ScenarioError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ScenarioError::Threads(format!(
                "expected a positive integer, got `{s}`"
            ))),
        },
    }
}

/// Runs every variant on every seed from the base configuration.
///
/// The base configuration's `model` and `seed` are ignored. A cell that
/// faults is reported as such; the other cells still run.
pub fn run_comparison(base: &ScenarioConfig, seeds: &[u64]) -> Result<ComparisonReport, ScenarioError> {
    if seeds.is_empty() {
        return Err(FlockError::invalid("seeds", "at least one seed is required").into());
    }
    let params = base.params();
    params.validate()?;
    let initials = seeds
        .iter()
        .map(|&seed| ScenarioConfig { seed, ..base.clone() }.initial_state())
        .collect::<Result<Vec<_>, _>>()?;

    let jobs: Vec<(usize, Variant)> = (0..seeds.len())
        .flat_map(|s| Variant::ALL.into_iter().map(move |v| (s, v)))
        .collect();
    let execute = || -> Vec<ComparisonCell> {
        jobs.par_iter()
            .map(|&(s, variant)| run_cell(&initials[s], &params.with_variant(variant), base.decimation, seeds[s]))
            .collect()
    };
    let cells = match thread_cap()? {
        None => execute(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ScenarioError::Threads(e.to_string()))?
            .install(execute),
    };
    Ok(ComparisonReport {
        t_end: params.t_end,
        cells,
    })
}
