//! Value types shared by every module: vectors, agent and swarm snapshots,
//! and the model parameters.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{FlockError, Result};

/// Spatial dimension of a swarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> Option<Dim> {
        match d {
            2 => Some(Dim::Two),
            3 => Some(Dim::Three),
            _ => None,
        }
    }
}

/// Euclidean vector in two or three dimensions.
///
/// Planar vectors keep a zero third component, so the same type serves both
/// dimensions and every operation below is dimension agnostic.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector([f64; 3]);

impl Vector {
    pub const ZERO: Vector = Vector([0.0; 3]);

    pub const fn new2(x: f64, y: f64) -> Self {
        Vector([x, y, 0.0])
    }

    pub const fn new3(x: f64, y: f64, z: f64) -> Self {
        Vector([x, y, z])
    }

    /// Builds a vector from 2 or 3 components.
    pub fn from_slice(components: &[f64]) -> Option<Self> {
        match *components {
            [x, y] => Some(Vector::new2(x, y)),
            [x, y, z] => Some(Vector::new3(x, y, z)),
            _ => None,
        }
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (*other - *self).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0.0; 3]
    }
}

/// Euclidean norm of `v`.
pub fn norm(v: &Vector) -> f64 {
    v.norm()
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        Vector([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        Vector([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: Vector) -> Vector {
        Vector([self * rhs.0[0], self * rhs.0[1], self * rhs.0[2]])
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        rhs * self
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, rhs: Vector) {
        *self = *self + rhs;
    }
}

impl SubAssign for Vector {
    fn sub_assign(&mut self, rhs: Vector) {
        *self = *self - rhs;
    }
}

impl Sum for Vector {
    fn sum<I: Iterator<Item = Vector>>(iter: I) -> Vector {
        iter.fold(Vector::ZERO, |acc, v| acc + v)
    }
}

/// Position (m) and velocity (m/s) of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentState {
    pub position: Vector,
    pub velocity: Vector,
}

impl AgentState {
    pub fn new(position: Vector, velocity: Vector) -> Self {
        AgentState { position, velocity }
    }
}

/// Immutable snapshot of a swarm.
///
/// Agent identity is the index into [`SwarmState::agents`]. The initial
/// positions (the memory imprint used by the position-based law) are fixed
/// at construction and shared by every state derived from this one.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    time: f64,
    dim: Dim,
    agents: Vec<AgentState>,
    initial_positions: Arc<[Vector]>,
}

impl SwarmState {
    /// Swarm at `t = 0`; the current positions become the imprint.
    pub fn new(dim: Dim, agents: Vec<AgentState>) -> Result<Self> {
        let imprint: Vec<Vector> = agents.iter().map(|a| a.position).collect();
        SwarmState::with_imprint(dim, 0.0, agents, imprint)
    }

    /// Swarm at an arbitrary time with an explicit imprint.
    pub fn with_imprint(dim: Dim, time: f64, agents: Vec<AgentState>, initial_positions: Vec<Vector>) -> Result<Self> {
        if agents.len() < 2 {
            return Err(FlockError::TooFewAgents(agents.len()));
        }
        if initial_positions.len() != agents.len() {
            return Err(FlockError::ImprintLength {
                expected: agents.len(),
                got: initial_positions.len(),
            });
        }
        if !time.is_finite() || time < 0.0 {
            return Err(FlockError::invalid(
                "time",
                format!("must be finite and >= 0, got {time}"),
            ));
        }
        for (i, a) in agents.iter().enumerate() {
            if !a.position.is_finite() || !a.velocity.is_finite() {
                return Err(FlockError::NonFinite("agent state"));
            }
            if dim == Dim::Two && (a.position.z() != 0.0 || a.velocity.z() != 0.0) {
                return Err(FlockError::DimensionMismatch {
                    what: "agent state",
                    agent: i,
                });
            }
        }
        for (i, p) in initial_positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(FlockError::NonFinite("initial positions"));
            }
            if dim == Dim::Two && p.z() != 0.0 {
                return Err(FlockError::DimensionMismatch {
                    what: "initial positions",
                    agent: i,
                });
            }
        }
        Ok(SwarmState {
            time,
            dim,
            agents,
            initial_positions: initial_positions.into(),
        })
    }

    /// Successor state sharing this state's imprint. Callers guarantee the
    /// agent list has the same length and holds finite values.
    pub(crate) fn successor(&self, time: f64, agents: Vec<AgentState>) -> SwarmState {
        debug_assert_eq!(agents.len(), self.agents.len());
        SwarmState {
            time,
            dim: self.dim,
            agents,
            initial_positions: Arc::clone(&self.initial_positions),
        }
    }

    pub(crate) fn at_time(mut self, time: f64) -> SwarmState {
        self.time = time;
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    /// Always false: a swarm holds at least two agents.
    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentState {
        &self.agents[i]
    }

    pub fn initial_positions(&self) -> &[Vector] {
        &self.initial_positions
    }

    pub fn positions(&self) -> impl Iterator<Item = Vector> + '_ {
        self.agents.iter().map(|a| a.position)
    }

    pub fn velocities(&self) -> impl Iterator<Item = Vector> + '_ {
        self.agents.iter().map(|a| a.velocity)
    }
}

/// Which control law drives the agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Cohesion-separation plus direct relative-velocity alignment.
    VelocityBased,
    /// Position-only alignment with the persistence floor `k * degree`.
    PositionThreshold,
    /// Position-only alignment whose gain decays as `degree / t` forever.
    PositionNoThreshold,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::VelocityBased,
        Variant::PositionThreshold,
        Variant::PositionNoThreshold,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::VelocityBased => "v-based",
            Variant::PositionThreshold => "p-thr",
            Variant::PositionNoThreshold => "p-nothr",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v-based" | "v" | "velocity" => Ok(Variant::VelocityBased),
            "p-thr" | "p" | "position" => Ok(Variant::PositionThreshold),
            "p-nothr" | "p-no-thr" => Ok(Variant::PositionNoThreshold),
            other => Err(format!("unknown model `{other}` (expected v-based, p-thr or p-nothr)")),
        }
    }
}

/// Swarm-global model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Equilibrium distance scale (m); spacing is `delta * degree`.
    pub delta: f64,
    /// Inverse of the alignment-gain switch time (1/s).
    pub k: f64,
    /// Interaction radius (m).
    pub radius: f64,
    /// Speed limit (m/s).
    pub v_max: f64,
    /// Acceleration limit (m/s^2).
    pub u_max: f64,
    pub variant: Variant,
    /// Integration step (s).
    pub dt: f64,
    /// Run length (s).
    pub t_end: f64,
}

impl ModelParams {
    /// The 50-agent planar study: `r = 7.5`, `k = 0.1`, `v_max = 2.5`,
    /// `u_max = 5`, 100 s at `dt = 0.05`.
    pub fn simulation(variant: Variant, delta: f64) -> Self {
        ModelParams {
            delta,
            k: 0.1,
            radius: 7.5,
            v_max: 2.5,
            u_max: 5.0,
            variant,
            dt: 0.05,
            t_end: 100.0,
        }
    }

    /// The nine-robot experiment: `r = 0.75`, `delta = 0.12`, `k = 0.15`,
    /// `v_max = 0.15`, `u_max = 0.5`, 120 s at a 0.033 s control period.
    pub fn experiment() -> Self {
        ModelParams {
            delta: 0.12,
            k: 0.15,
            radius: 0.75,
            v_max: 0.15,
            u_max: 0.5,
            variant: Variant::PositionThreshold,
            dt: 0.033,
            t_end: 120.0,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, value: f64, ok: bool, rule: &str| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(FlockError::invalid(name, format!("{rule} violated (got {value})")))
            }
        };
        check("delta", self.delta, self.delta >= 0.0, "delta >= 0")?;
        check("k", self.k, self.k > 0.0, "k > 0")?;
        check("radius", self.radius, self.radius > 0.0, "radius > 0")?;
        check("v_max", self.v_max, self.v_max > 0.0, "v_max > 0")?;
        check("u_max", self.u_max, self.u_max > 0.0, "u_max > 0")?;
        check("dt", self.dt, self.dt > 0.0, "dt > 0")?;
        check("t_end", self.t_end, self.t_end >= self.dt, "t_end >= dt")?;
        Ok(())
    }
}
