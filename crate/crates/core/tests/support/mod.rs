#![allow(dead_code)]

pub mod oracle;

use flock_core::{AgentState, Dim, SwarmState, Vector};
use rand::Rng;

/// Writes straight to stderr so the line shows up even when the test
/// harness captures output.
pub fn emit(line: &str) {
    use std::io::Write;
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

/// Random planar swarm with an independent random imprint.
pub fn random_state(rng: &mut impl Rng, n: usize, extent: f64, speed: f64, time: f64) -> SwarmState {
    let mut point = |scale: f64, centred: bool| {
        let off = if centred { scale } else { 0.0 };
        Vector::new2(
            rng.gen_range(0.0..2.0 * scale) - off,
            rng.gen_range(0.0..2.0 * scale) - off,
        )
    };
    let agents: Vec<AgentState> = (0..n)
        .map(|_| AgentState::new(point(extent / 2.0, false), point(speed, true)))
        .collect();
    let imprint: Vec<Vector> = (0..n).map(|_| point(extent / 2.0, false)).collect();
    SwarmState::with_imprint(Dim::Two, time, agents, imprint).unwrap()
}

pub fn xy(v: Vector) -> [f64; 2] {
    [v.x(), v.y()]
}
