//! File output for the nine-robot replay.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::io::{self, write_replay_trajectory, MetricsWriter};
use super::{create_dir, RunSummary, ScenarioError, METRICS_FILE, SUMMARY_FILE, TRAJECTORY_FILE};
use crate::metrics::MetricsRow;
use crate::sim::compute_neighbors;
use crate::unicycle::{replay_from, Replay, ReplayConfig};

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub trajectory: PathBuf,
    pub metrics_path: PathBuf,
    pub summary_path: PathBuf,
    /// `None` when the replay faulted.
    pub replay: Option<Replay>,
    pub summary: RunSummary,
}

fn metrics_rows(replay: &Replay, radius: f64) -> crate::Result<Vec<MetricsRow>> {
    replay
        .frames
        .iter()
        .map(|f| {
            let state = replay.shadow_state(f)?;
            Ok(MetricsRow::compute(&state, &compute_neighbors(&state, radius)))
        })
        .collect()
}

/// Runs a replay and writes trajectory, metrics and summary files into `out`.
pub fn run_replay(config: &ReplayConfig, out: &Path) -> Result<ReplayOutcome, ScenarioError> {
    let started = Instant::now();
    config.validate()?;
    create_dir(out)?;
    let trajectory = out.join(TRAJECTORY_FILE);
    let metrics_path = out.join(METRICS_FILE);
    let summary_path = out.join(SUMMARY_FILE);

    let result = replay_from(config, config.sample_robots());
    let (replay, rows, fault) = match result {
        Ok(replay) => {
            let rows = metrics_rows(&replay, config.params.radius)?;
            (Some(replay), rows, None)
        }
        Err(e) => (None, Vec::new(), Some(e)),
    };

    let file = File::create(&trajectory).map_err(|e| io::IoError::io(&trajectory, e))?;
    write_replay_trajectory(
        BufWriter::new(file),
        replay.as_ref().map_or(&[][..], |r| &r.frames[..]),
        &trajectory,
    )?;
    let mut w = MetricsWriter::create(&metrics_path)?;
    for row in &rows {
        w.write(row)?;
    }
    w.finish()?;

    let summary = RunSummary::from_rows(&rows, fault);
    let mut entries = summary.entries(started.elapsed().as_secs_f64());
    if let Some(r) = &replay {
        let max_v = r
            .frames
            .iter()
            .flat_map(|f| &f.v_cmd)
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        let max_w = r
            .frames
            .iter()
            .flat_map(|f| &f.omega_cmd)
            .fold(0.0, |m: f64, w| m.max(w.abs()));
        entries.push(("max_v_cmd".into(), max_v.to_string()));
        entries.push(("max_abs_omega_cmd".into(), max_w.to_string()));
        entries.push(("wall_violations".into(), r.wall_violations.len().to_string()));
        for v in &r.wall_violations {
            entries.push((
                format!("wall_violation.{}", v.robot),
                format!("t={} x={} y={}", v.time, v.position.x(), v.position.y()),
            ));
        }
    }
    let p = &config.params;
    entries.extend([
        ("config.n".into(), config.n.to_string()),
        ("config.seed".into(), config.seed.to_string()),
        ("config.start_region".into(), config.start_region.to_string()),
        ("config.arena".into(), format!("{}x{}", config.arena.0, config.arena.1)),
        ("config.radius".into(), p.radius.to_string()),
        ("config.delta".into(), p.delta.to_string()),
        ("config.k".into(), p.k.to_string()),
        ("config.vmax".into(), p.v_max.to_string()),
        ("config.umax".into(), p.u_max.to_string()),
        ("config.dt".into(), p.dt.to_string()),
        ("config.t_end".into(), p.t_end.to_string()),
        ("config.v_lin_max".into(), config.limits.v_lin_max.to_string()),
        ("config.omega_max".into(), config.limits.omega_max.to_string()),
        ("config.k_omega".into(), config.k_omega.to_string()),
    ]);
    io::write_key_values(&summary_path, "replay summary", &entries)?;

    Ok(ReplayOutcome {
        trajectory,
        metrics_path,
        summary_path,
        replay,
        summary,
    })
}
