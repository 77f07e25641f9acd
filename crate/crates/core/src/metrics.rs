//! Flocking observables computed from a single snapshot.
//!
//! Undefined metrics (no qualifying agent, no neighbour pair) are reported as
//! `None` rather than as a sentinel number.

use crate::sim::NeighborGraph;
use crate::state::{SwarmState, Vector};

/// Cosine of the angle between two non-zero vectors, clamped to `[-1, 1]`.
fn cosine(a: &Vector, b: &Vector, norm_a: f64, norm_b: f64) -> f64 {
    (a.dot(b) / (norm_a * norm_b)).clamp(-1.0, 1.0)
}

/// Alignment order parameter: the mean over agents of the mean cosine
/// similarity between an agent's velocity and each neighbour's velocity.
///
/// Agents with no neighbours or zero speed are left out of the outer mean; a
/// neighbour at rest contributes a cosine of zero. Returns `None` when no
/// agent qualifies.
pub fn alignment_metric(state: &SwarmState, graph: &NeighborGraph) -> Option<f64> {
    let agents = state.agents();
    let speeds: Vec<f64> = agents.iter().map(|a| a.velocity.norm()).collect();
    let mut total = 0.0;
    let mut counted = 0usize;
    for (i, a) in agents.iter().enumerate() {
        let neighbors = graph.neighbors(i);
        if neighbors.is_empty() || speeds[i] == 0.0 {
            continue;
        }
        let inner: f64 = neighbors
            .iter()
            .map(|&j| {
                if speeds[j] == 0.0 {
                    0.0
                } else {
                    cosine(&a.velocity, &agents[j].velocity, speeds[i], speeds[j])
                }
            })
            .sum();
        total += inner / neighbors.len() as f64;
        counted += 1;
    }
    (counted > 0).then(|| (total / counted as f64).clamp(-1.0, 1.0))
}

/// Minimum, mean and maximum distance over neighbour pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Distance statistics over unordered neighbour pairs, each counted once.
pub fn pair_distance_stats(state: &SwarmState, graph: &NeighborGraph) -> Option<DistanceStats> {
    let agents = state.agents();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, j) in graph.pairs() {
        let d = agents[i].position.distance(&agents[j].position);
        min = min.min(d);
        max = max.max(d);
        sum += d;
        count += 1;
    }
    if count == 0 {
        return None;
    }
    // Clamp guards the ordering against rounding in the mean.
    let mean = (sum / count as f64).clamp(min, max);
    Some(DistanceStats { min, mean, max })
}

pub fn average_speed(state: &SwarmState) -> f64 {
    let sum: f64 = state.velocities().map(|v| v.norm()).sum();
    sum / state.len() as f64
}

pub fn centroid(state: &SwarmState) -> Vector {
    (1.0 / state.len() as f64) * state.positions().sum::<Vector>()
}

/// Largest distance from an agent to the flock centroid.
pub fn cohesion_radius(state: &SwarmState) -> f64 {
    let c = centroid(state);
    state.positions().map(|p| p.distance(&c)).fold(0.0, f64::max)
}

/// Population variance of the distances over all unordered agent pairs.
pub fn pairwise_distance_variance(state: &SwarmState) -> f64 {
    let positions: Vec<Vector> = state.positions().collect();
    let n = positions.len();
    let mut distances = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            distances.push(positions[i].distance(&positions[j]));
        }
    }
    variance(&distances)
}

/// Two-pass population variance; zero for fewer than two samples.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    var.max(0.0)
}

/// One row of the per-timestep metrics series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub time: f64,
    pub gamma: Option<f64>,
    pub distances: Option<DistanceStats>,
    pub speed_mean: f64,
    pub cohesion_radius: f64,
    pub pairwise_dist_variance: f64,
}

impl MetricsRow {
    pub fn compute(state: &SwarmState, graph: &NeighborGraph) -> Self {
        MetricsRow {
            time: state.time(),
            gamma: alignment_metric(state, graph),
            distances: pair_distance_stats(state, graph),
            speed_mean: average_speed(state),
            cohesion_radius: cohesion_radius(state),
            pairwise_dist_variance: pairwise_distance_variance(state),
        }
    }

    pub fn dist_mean(&self) -> Option<f64> {
        self.distances.map(|d| d.mean)
    }
}

/// Rows with `from <= time <= to`, allowing for rounding in the sample times.
pub fn window(rows: &[MetricsRow], from: f64, to: f64) -> impl Iterator<Item = &MetricsRow> {
    const SLACK: f64 = 1e-9;
    rows.iter()
        .filter(move |r| r.time >= from - SLACK && r.time <= to + SLACK)
}

/// Mean of `value` over a time window, skipping rows where it is undefined.
pub fn window_mean(rows: &[MetricsRow], from: f64, to: f64, value: impl Fn(&MetricsRow) -> Option<f64>) -> Option<f64> {
    let values: Vec<f64> = window(rows, from, to).filter_map(value).collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Population standard deviation divided by the mean.
pub fn relative_std(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean != 0.0).then(|| variance(values).sqrt() / mean.abs())
}
