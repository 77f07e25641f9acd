//! Scalar gains of the flocking laws.

use crate::error::{FlockError, Result};

/// Cohesion-separation gain `1 - delta * degree / distance`.
///
/// Negative (repulsive) below the equilibrium spacing `delta * degree`, zero
/// at it, positive (attractive) above it, and bounded above by 1.
pub fn cohesion_separation_gain(distance: f64, delta: f64, degree: usize) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(FlockError::Domain {
            function: "cohesion-separation gain",
            argument: "distance",
            value: distance,
        });
    }
    Ok(1.0 - delta * degree as f64 / distance)
}

/// Time-dependent alignment gain of the position-based law.
///
/// `degree / t` up to `t = 1/k`. Past that instant the thresholded gain holds
/// at `k * degree`; the unthresholded one keeps decaying.
pub fn alignment_gain(t: f64, degree: usize, k: f64, thresholded: bool) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FlockError::Domain {
            function: "alignment gain",
            argument: "t",
            value: t,
        });
    }
    let degree = degree as f64;
    if thresholded && t > 1.0 / k {
        Ok(k * degree)
    } else {
        Ok(degree / t)
    }
}
