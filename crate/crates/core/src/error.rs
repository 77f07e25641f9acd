use thiserror::Error;

pub type Result<T, E = FlockError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlockError {
    #[error("a swarm needs at least 2 agents, got {0}")]
    TooFewAgents(usize),

    #[error("expected {expected} initial positions, got {got}")]
    ImprintLength { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{what}: agent {agent} has a non-zero z component in a 2-D swarm")]
    DimensionMismatch { what: &'static str, agent: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("{function} is undefined for {argument} = {value}")]
    Domain {
        function: &'static str,
        argument: &'static str,
        value: f64,
    },

    #[error("agent {agent} index out of range for a swarm of {n}")]
    AgentIndex { agent: usize, n: usize },

    #[error("agents {i} and {j} coincide (distance {distance:e} m) at t = {time} s")]
    Coincident {
        i: usize,
        j: usize,
        distance: f64,
        time: f64,
    },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: u64,
        #[source]
        source: Box<FlockError>,
    },
}

impl FlockError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        FlockError::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    /// Simulation time of the fault, when the error carries one.
    pub fn time(&self) -> Option<f64> {
        match self {
            FlockError::Coincident { time, .. } => Some(*time),
            FlockError::StepFailed { source, .. } => source.time(),
            _ => None,
        }
    }
}
