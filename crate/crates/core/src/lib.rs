//! Deterministic multi-agent flocking.
//!
//! Agents follow double-integrator dynamics and are driven by one of three
//! control laws: a velocity-alignment baseline, and a position-only law that
//! infers relative velocity from the drift of current relative positions away
//! from the initial ones, with or without a persistence floor on its gain.
//!
//! The crate is organised bottom-up:
//!
//! * [`state`] holds the value types shared by everything else,
//! * [`gains`] and [`control`] hold the scalar gains and control laws,
//! * [`sim`] advances a swarm (neighbourhoods, synchronous update, integration),
//! * [`metrics`] computes the flocking observables,
//! * [`unicycle`] replays the nine-robot differential-drive experiment,
//! * [`scenario`] parses configurations, runs scenarios and writes CSV files.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod gains;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod state;
pub mod unicycle;

pub use control::{position_based_control, saturate, velocity_based_control, ControlCommand};
pub use error::{FlockError, Result};
pub use gains::{alignment_gain, cohesion_separation_gain};
pub use metrics::{DistanceStats, MetricsRow};
pub use sim::{compute_neighbors, run, sample_initial, step, NeighborGraph, Trajectory};
pub use state::{AgentState, Dim, ModelParams, SwarmState, Variant, Vector};

/// Version string written into summary files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Two agents closer than this (m) are treated as coincident and abort the run.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-9;
