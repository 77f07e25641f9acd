//! Time stepping: neighbourhoods, synchronous control evaluation and
//! saturated semi-implicit Euler integration of the double integrator.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::control::{control_input, saturate};
use crate::error::{FlockError, Result};
use crate::state::{AgentState, Dim, ModelParams, SwarmState, Vector};
use crate::COINCIDENCE_TOLERANCE;

/// Below this many agents the per-agent control loop stays on one thread.
const PARALLEL_MIN_AGENTS: usize = 128;

/// Interaction graph `N_i = { j != i : |p_j - p_i| <= r }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    lists: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.lists[i].len()
    }

    /// Number of agents (vertices).
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Unordered neighbour pairs `(i, j)` with `i < j`, each once.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.lists
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }
}

/// Closest pair seen during the all-pairs sweep, if it is below tolerance.
struct Sweep {
    graph: NeighborGraph,
    coincident: Option<(usize, usize, f64)>,
}

fn sweep(state: &SwarmState, radius: f64) -> Sweep {
    let agents = state.agents();
    let n = agents.len();
    let mut lists = vec![Vec::new(); n];
    let mut coincident = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = agents[i].position.distance(&agents[j].position);
            if d < COINCIDENCE_TOLERANCE && coincident.is_none() {
                coincident = Some((i, j, d));
            }
            if d <= radius {
                lists[i].push(j);
                lists[j].push(i);
            }
        }
    }
    Sweep {
        graph: NeighborGraph { lists },
        coincident,
    }
}

/// All-pairs neighbourhood computation; the boundary `d = r` is inclusive.
pub fn compute_neighbors(state: &SwarmState, radius: f64) -> NeighborGraph {
    sweep(state, radius).graph
}

/// Neighbourhoods of `state`, failing if any two agents coincide.
pub(crate) fn checked_neighbors(state: &SwarmState, radius: f64) -> Result<NeighborGraph> {
    let Sweep { graph, coincident } = sweep(state, radius);
    match coincident {
        Some((i, j, distance)) => Err(FlockError::Coincident {
            i,
            j,
            distance,
            time: state.time(),
        }),
        None => Ok(graph),
    }
}

/// One synchronous step of length `params.dt`.
///
/// Every agent's control is computed from the pre-step snapshot, saturated to
/// `u_max`, integrated into the velocity (then saturated to `v_max`) and the
/// new velocity is integrated into the position. The position-based gain is
/// evaluated at the end of the step, `t + dt`, so it is never asked for `t = 0`.
pub fn step(state: &SwarmState, params: &ModelParams) -> Result<SwarmState> {
    let graph = checked_neighbors(state, params.radius)?;
    let t_eval = state.time() + params.dt;
    let advance = |i: usize| -> Result<AgentState> {
        let raw = control_input(state, i, graph.neighbors(i), params, t_eval)?;
        let u = saturate(raw, params.u_max);
        let a = state.agent(i);
        let velocity = saturate(a.velocity + params.dt * u, params.v_max);
        let position = a.position + params.dt * velocity;
        if !position.is_finite() || !velocity.is_finite() {
            return Err(FlockError::NonFinite("integrated agent state"));
        }
        Ok(AgentState { position, velocity })
    };
    let n = state.len();
    let agents: Result<Vec<AgentState>> = if n >= PARALLEL_MIN_AGENTS {
        (0..n).into_par_iter().map(advance).collect()
    } else {
        (0..n).map(advance).collect()
    };
    Ok(state.successor(t_eval, agents?))
}

/// Number of steps needed to reach `t_end` from zero.
pub fn step_count(params: &ModelParams) -> u64 {
    // Tolerate representation error so that e.g. 100 / 0.05 is 2000, not 2001.
    let ratio = params.t_end / params.dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as u64
    } else {
        ratio.ceil() as u64
    }
}

/// Snapshots of a run at a fixed sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<SwarmState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(SwarmState::time)
    }

    pub fn last(&self) -> Option<&SwarmState> {
        self.snapshots.last()
    }
}

/// Runs from `initial` until `t_end`, handing every recorded snapshot to
/// `observe` as it is produced.
///
/// Snapshots are recorded every `decimation` steps, plus the initial and the
/// final state. Times are set to `t0 + steps * dt` so that they do not
/// accumulate rounding error. On failure the error carries the index of the
/// failing step (1-based); snapshots before it have already been observed.
pub fn run_with<F>(initial: &SwarmState, params: &ModelParams, decimation: usize, mut observe: F) -> Result<SwarmState>
where
    F: FnMut(&SwarmState),
{
    params.validate()?;
    if decimation == 0 {
        return Err(FlockError::invalid("decimation", "must be >= 1"));
    }
    let t0 = initial.time();
    let steps = step_count(params);
    let mut state = initial.clone();
    observe(&state);
    for s in 1..=steps {
        let next = step(&state, params).map_err(|e| FlockError::StepFailed {
            step: s,
            source: Box::new(e),
        })?;
        state = next.at_time(t0 + s as f64 * params.dt);
        if s % decimation as u64 == 0 || s == steps {
            observe(&state);
        }
    }
    Ok(state)
}

/// Runs from `initial` and collects the recorded snapshots.
pub fn run(initial: &SwarmState, params: &ModelParams, decimation: usize) -> Result<Trajectory> {
    let mut snapshots = Vec::new();
    run_with(initial, params, decimation, |s| snapshots.push(s.clone()))?;
    Ok(Trajectory { snapshots })
}

/// Random initial swarm: positions uniform in `[0, box_size]^d`, velocity
/// directions uniform on the circle (sphere), speeds uniform in
/// `[0, v_init_max]`.
///
/// The generator is ChaCha8 seeded from `seed`. All positions are drawn
/// first, agent by agent, then all velocities in the same order; for each
/// velocity the direction is drawn before the speed.
pub fn sample_initial(n: usize, box_size: f64, v_init_max: f64, seed: u64, dim: Dim) -> Result<SwarmState> {
    if n < 2 {
        return Err(FlockError::TooFewAgents(n));
    }
    if !(box_size > 0.0) || !box_size.is_finite() {
        return Err(FlockError::invalid("box", format!("must be > 0, got {box_size}")));
    }
    if !(v_init_max >= 0.0) || !v_init_max.is_finite() {
        return Err(FlockError::invalid(
            "v_init_max",
            format!("must be >= 0, got {v_init_max}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Vector> = (0..n)
        .map(|_| match dim {
            Dim::Two => Vector::new2(rng.gen_range(0.0..=box_size), rng.gen_range(0.0..=box_size)),
            Dim::Three => Vector::new3(
                rng.gen_range(0.0..=box_size),
                rng.gen_range(0.0..=box_size),
                rng.gen_range(0.0..=box_size),
            ),
        })
        .collect();
    let velocities: Vec<Vector> = (0..n)
        .map(|_| {
            let direction = match dim {
                Dim::Two => {
                    let a = rng.gen_range(0.0..TAU);
                    Vector::new2(a.cos(), a.sin())
                }
                Dim::Three => {
                    // Uniform on the sphere: z uniform in [-1, 1], azimuth uniform.
                    let z: f64 = rng.gen_range(-1.0..=1.0);
                    let a = rng.gen_range(0.0..TAU);
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    Vector::new3(s * a.cos(), s * a.sin(), z)
                }
            };
            let speed = rng.gen_range(0.0..=v_init_max);
            speed * direction
        })
        .collect();
    let agents = positions
        .into_iter()
        .zip(velocities)
        .map(|(p, v)| AgentState::new(p, v))
        .collect();
    SwarmState::new(dim, agents)
}
