//! Differential-drive replay of the nine-robot experiment.
//!
//! Each robot carries a virtual double-integrator "shadow": its position is
//! the robot's position and its velocity is the planar velocity the robot is
//! currently commanded to drive. The position-based law accelerates the
//! shadow, and the resulting desired velocity is turned into a forward speed
//! and a turn rate for the unicycle.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{position_based_control_at, saturate};
use crate::error::{FlockError, Result};
use crate::metrics::alignment_metric;
use crate::sim::{checked_neighbors, step_count};
use crate::state::{AgentState, Dim, ModelParams, SwarmState, Variant, Vector};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Planar pose and forward speed of one robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnicycleState {
    pub position: Vector,
    /// Heading in `(-pi, pi]`.
    pub heading: f64,
    pub linear_speed: f64,
}

impl UnicycleState {
    pub fn new(position: Vector, heading: f64) -> Self {
        UnicycleState {
            position,
            heading: wrap_angle(heading),
            linear_speed: 0.0,
        }
    }

    /// Velocity the robot is driving at.
    pub fn planar_velocity(&self) -> Vector {
        Vector::new2(
            self.linear_speed * self.heading.cos(),
            self.linear_speed * self.heading.sin(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnicycleLimits {
    /// m/s
    pub v_lin_max: f64,
    /// rad/s
    pub omega_max: f64,
}

impl UnicycleLimits {
    pub fn new(v_lin_max: f64, omega_max: f64) -> Result<Self> {
        if !(v_lin_max > 0.0) || !v_lin_max.is_finite() {
            return Err(FlockError::invalid(
                "v_lin_max",
                format!("must be > 0, got {v_lin_max}"),
            ));
        }
        if !(omega_max > 0.0) || !omega_max.is_finite() {
            return Err(FlockError::invalid(
                "omega_max",
                format!("must be > 0, got {omega_max}"),
            ));
        }
        Ok(UnicycleLimits { v_lin_max, omega_max })
    }
}

impl Default for UnicycleLimits {
    /// 0.15 m/s and 0.55 rad/s.
    fn default() -> Self {
        UnicycleLimits {
            v_lin_max: 0.15,
            omega_max: 0.55,
        }
    }
}

/// Maps a desired planar velocity to `(v, omega)`.
///
/// The forward speed is the projection of the desired velocity on the
/// heading, never negative; the turn rate is proportional to the heading
/// error. Both are clamped to `limits`.
pub fn si_to_unicycle(desired: Vector, heading: f64, limits: &UnicycleLimits, k_omega: f64) -> (f64, f64) {
    let speed = desired.norm();
    if speed == 0.0 {
        return (0.0, 0.0);
    }
    let error = wrap_angle(desired.y().atan2(desired.x()) - heading);
    let v = (speed * error.cos()).clamp(0.0, limits.v_lin_max);
    let omega = (k_omega * error).clamp(-limits.omega_max, limits.omega_max);
    (v, omega)
}

/// Unicycle kinematics over `dt`, turning first and then driving along the
/// new heading.
pub fn unicycle_step(state: &UnicycleState, v: f64, omega: f64, dt: f64) -> UnicycleState {
    let heading = wrap_angle(state.heading + dt * omega);
    UnicycleState {
        position: state.position + (dt * v) * Vector::new2(heading.cos(), heading.sin()),
        heading,
        linear_speed: v,
    }
}

/// Configuration of a replay.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayConfig {
    pub n: usize,
    /// Side of the square start region, centred in the arena (m).
    pub start_region: f64,
    /// Arena width and height (m), centred on the origin.
    pub arena: (f64, f64),
    /// Flocking parameters; the variant is always the thresholded law.
    pub params: ModelParams,
    pub limits: UnicycleLimits,
    /// Heading-error gain (1/s).
    pub k_omega: f64,
    pub seed: u64,
}

impl ReplayConfig {
    /// Nine robots in a 1 m square inside a 3.2 m x 2.0 m arena.
    pub fn nine_robots(seed: u64) -> Self {
        ReplayConfig {
            n: 9,
            start_region: 1.0,
            arena: (3.2, 2.0),
            params: ModelParams::experiment(),
            limits: UnicycleLimits::default(),
            k_omega: 2.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        UnicycleLimits::new(self.limits.v_lin_max, self.limits.omega_max)?;
        if self.n < 2 {
            return Err(FlockError::TooFewAgents(self.n));
        }
        if !(self.k_omega > 0.0) || !self.k_omega.is_finite() {
            return Err(FlockError::invalid(
                "k_omega",
                format!("must be > 0, got {}", self.k_omega),
            ));
        }
        if !(self.start_region > 0.0) {
            return Err(FlockError::invalid("start_region", "must be > 0"));
        }
        Ok(())
    }

    /// Random robots at rest: positions uniform in the start region, headings
    /// uniform. Positions are drawn for every robot before any heading.
    pub fn sample_robots(&self) -> Vec<UnicycleState> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let half = self.start_region / 2.0;
        let positions: Vec<Vector> = (0..self.n)
            .map(|_| Vector::new2(rng.gen_range(-half..=half), rng.gen_range(-half..=half)))
            .collect();
        positions
            .into_iter()
            .map(|p| UnicycleState::new(p, rng.gen_range(-PI..PI)))
            .collect()
    }
}

/// Robots after one control period, with the commands applied during it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayFrame {
    pub time: f64,
    pub robots: Vec<UnicycleState>,
    pub v_cmd: Vec<f64>,
    pub omega_cmd: Vec<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallViolation {
    pub robot: usize,
    pub time: f64,
    pub position: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub imprint: Vec<Vector>,
    pub frames: Vec<ReplayFrame>,
    /// First time each robot left the arena, if it did.
    pub wall_violations: Vec<WallViolation>,
}

impl Replay {
    /// The double-integrator view of a frame, for computing metrics.
    pub fn shadow_state(&self, frame: &ReplayFrame) -> Result<SwarmState> {
        shadow(&frame.robots, &self.imprint, frame.time)
    }

    pub fn final_gamma(&self) -> Option<f64> {
        self.frames.last().and_then(|f| f.gamma)
    }
}

fn shadow(robots: &[UnicycleState], imprint: &[Vector], time: f64) -> Result<SwarmState> {
    let agents = robots
        .iter()
        .map(|r| AgentState::new(r.position, r.planar_velocity()))
        .collect();
    SwarmState::with_imprint(Dim::Two, time, agents, imprint.to_vec())
}

/// Seeded nine-robot replay with the experiment's parameters.
pub fn replay_experiment(seed: u64) -> Result<Replay> {
    let config = ReplayConfig::nine_robots(seed);
    replay_from(&config, config.sample_robots())
}

/// Replays from explicit initial robots; their positions become the imprint.
pub fn replay_from(config: &ReplayConfig, initial: Vec<UnicycleState>) -> Result<Replay> {
    config.validate()?;
    let params = ModelParams {
        variant: Variant::PositionThreshold,
        ..config.params
    };
    let imprint: Vec<Vector> = initial.iter().map(|r| r.position).collect();
    let n = initial.len();
    let dt = params.dt;
    let steps = step_count(&params);
    let half_w = config.arena.0 / 2.0;
    let half_h = config.arena.1 / 2.0;

    let mut frames = Vec::with_capacity(steps as usize + 1);
    let mut violations: Vec<Option<WallViolation>> = vec![None; n];
    let mut robots = initial;
    let mut time = 0.0;
    for s in 0..=steps {
        let state = shadow(&robots, &imprint, time)?;
        let graph = checked_neighbors(&state, params.radius).map_err(|e| FlockError::StepFailed {
            step: s,
            source: Box::new(e),
        })?;
        let gamma = alignment_metric(&state, &graph);
        if s == 0 {
            frames.push(ReplayFrame {
                time,
                robots: robots.clone(),
                v_cmd: vec![0.0; n],
                omega_cmd: vec![0.0; n],
                gamma,
            });
        } else {
            frames.last_mut().expect("frame pushed").gamma = gamma;
        }
        if s == steps {
            break;
        }

        let t_eval = time + dt;
        let mut v_cmd = Vec::with_capacity(n);
        let mut omega_cmd = Vec::with_capacity(n);
        for (i, robot) in robots.iter().enumerate() {
            let raw = position_based_control_at(&state, i, graph.neighbors(i), &params, true, t_eval).map_err(|e| {
                FlockError::StepFailed {
                    step: s + 1,
                    source: Box::new(e),
                }
            })?;
            let u = saturate(raw, params.u_max);
            let desired = saturate(state.agent(i).velocity + dt * u, params.v_max);
            let (v, omega) = si_to_unicycle(desired, robot.heading, &config.limits, config.k_omega);
            v_cmd.push(v);
            omega_cmd.push(omega);
        }
        robots = robots
            .iter()
            .zip(v_cmd.iter().zip(&omega_cmd))
            .map(|(r, (&v, &w))| unicycle_step(r, v, w, dt))
            .collect();
        time = (s + 1) as f64 * dt;
        for (i, r) in robots.iter().enumerate() {
            let p = r.position;
            if violations[i].is_none() && (p.x().abs() > half_w || p.y().abs() > half_h) {
                violations[i] = Some(WallViolation {
                    robot: i,
                    time,
                    position: p,
                });
            }
        }
        frames.push(ReplayFrame {
            time,
            robots: robots.clone(),
            v_cmd,
            omega_cmd,
            gamma: None,
        });
    }
    Ok(Replay {
        imprint,
        frames,
        wall_violations: violations.into_iter().flatten().collect(),
    })
}
