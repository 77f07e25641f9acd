//! Control laws and the smooth saturation map.

use crate::error::{FlockError, Result};
use crate::gains::{alignment_gain, cohesion_separation_gain};
use crate::state::{ModelParams, SwarmState, Variant, Vector};
use crate::COINCIDENCE_TOLERANCE;

/// Smooth saturation `limit * tanh(|cmd| / limit) * cmd / |cmd|`, with the
/// zero vector mapped to itself.
pub fn saturate(cmd: Vector, limit: f64) -> Vector {
    let n = cmd.norm();
    if n == 0.0 {
        return Vector::ZERO;
    }
    let mut out = (limit * (n / limit).tanh() / n) * cmd;
    // Once tanh rounds to 1 the norm can land a few ulps above the limit.
    while out.norm() > limit {
        out = (1.0 - f64::EPSILON) * out;
    }
    out
}

/// An unsaturated command together with the value actually applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub raw: Vector,
    pub saturated: Vector,
}

impl ControlCommand {
    pub fn new(raw: Vector, limit: f64) -> Self {
        ControlCommand {
            raw,
            saturated: saturate(raw, limit),
        }
    }
}

fn check_index(state: &SwarmState, agent: usize) -> Result<()> {
    if agent >= state.len() {
        return Err(FlockError::AgentIndex { agent, n: state.len() });
    }
    Ok(())
}

/// Relative position `p_j - p_i` and its length, rejecting coincident pairs.
fn offset(state: &SwarmState, i: usize, j: usize) -> Result<(Vector, f64)> {
    check_index(state, j)?;
    let rel = state.agent(j).position - state.agent(i).position;
    let dist = rel.norm();
    if dist < COINCIDENCE_TOLERANCE {
        return Err(FlockError::Coincident {
            i: i.min(j),
            j: i.max(j),
            distance: dist,
            time: state.time(),
        });
    }
    Ok((rel, dist))
}

/// Sum of `psi(|p_j - p_i|) (p_j - p_i)` over the neighbours.
fn cohesion_separation(state: &SwarmState, i: usize, neighbors: &[usize], delta: f64) -> Result<Vector> {
    let degree = neighbors.len();
    let mut acc = Vector::ZERO;
    for &j in neighbors {
        let (rel, dist) = offset(state, i, j)?;
        acc += cohesion_separation_gain(dist, delta, degree)? * rel;
    }
    Ok(acc)
}

/// Velocity-alignment baseline: cohesion-separation plus the summed relative
/// velocities of the neighbours. Unsaturated; zero for an empty neighbourhood.
pub fn velocity_based_control(
    state: &SwarmState,
    i: usize,
    neighbors: &[usize],
    params: &ModelParams,
) -> Result<Vector> {
    check_index(state, i)?;
    let mut u = cohesion_separation(state, i, neighbors, params.delta)?;
    let vi = state.agent(i).velocity;
    for &j in neighbors {
        u += state.agent(j).velocity - vi;
    }
    Ok(u)
}

/// Position-based law evaluated at the state's own time.
///
/// The alignment gain is undefined at `t = 0`, so a state at the origin of
/// time with a non-empty neighbourhood yields a domain error.
pub fn position_based_control(
    state: &SwarmState,
    i: usize,
    neighbors: &[usize],
    params: &ModelParams,
    thresholded: bool,
) -> Result<Vector> {
    position_based_control_at(state, i, neighbors, params, thresholded, state.time())
}

/// Position-based law with the alignment gain evaluated at time `t`:
///
/// `sum_j (psi_ij + phi) (p_j - p_i) - phi * sum_j (p_j(0) - p_i(0))`.
pub fn position_based_control_at(
    state: &SwarmState,
    i: usize,
    neighbors: &[usize],
    params: &ModelParams,
    thresholded: bool,
    t: f64,
) -> Result<Vector> {
    check_index(state, i)?;
    if neighbors.is_empty() {
        return Ok(Vector::ZERO);
    }
    let degree = neighbors.len();
    let phi = alignment_gain(t, degree, params.k, thresholded)?;
    let imprint = state.initial_positions();
    let mut current = Vector::ZERO;
    let mut initial = Vector::ZERO;
    for &j in neighbors {
        let (rel, dist) = offset(state, i, j)?;
        let psi = cohesion_separation_gain(dist, params.delta, degree)?;
        current += (psi + phi) * rel;
        initial += imprint[j] - imprint[i];
    }
    Ok(current - phi * initial)
}

/// Raw control of agent `i` under `params.variant`, with the position-based
/// gain evaluated at time `t`.
pub fn control_input(
    state: &SwarmState,
    i: usize,
    neighbors: &[usize],
    params: &ModelParams,
    t: f64,
) -> Result<Vector> {
    match params.variant {
        Variant::VelocityBased => velocity_based_control(state, i, neighbors, params),
        Variant::PositionThreshold => position_based_control_at(state, i, neighbors, params, true, t),
        Variant::PositionNoThreshold => position_based_control_at(state, i, neighbors, params, false, t),
    }
}
