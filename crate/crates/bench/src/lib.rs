//! Shared fixtures for the criterion benchmarks.

use flock_core::{sample_initial, Dim, ModelParams, SwarmState, Variant};

/// Seeded planar swarm in the 25 m box used by the simulation study.
pub fn study_swarm(n: usize, seed: u64) -> SwarmState {
    sample_initial(n, 25.0, 1.0, seed, Dim::Two).expect("valid sampling parameters")
}

/// Study parameters at the calibrated spacing 0.4.
pub fn study_params(variant: Variant) -> ModelParams {
    ModelParams::simulation(variant, 0.4)
}
