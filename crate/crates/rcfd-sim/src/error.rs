use thiserror::Error;

/// Configuration and setup failures of a simulation run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("grid size must be at least 2, got {0}")]
    GridTooSmall(usize),
    #[error("node count must be at least 2, got {0}")]
    TooFewNodes(usize),
    #[error("geometry parameter {name} must be positive, got {value}")]
    NonPositiveGeometry { name: &'static str, value: f64 },
    #[error("loss probability must lie in [0, 1], got {0}")]
    InvalidLossProbability(f64),
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("simulation time {t_sim} s does not exceed the transient window {transient} s")]
    SimulationTooShort { t_sim: f64, transient: f64 },
    #[error("invalid PHY timing table")]
    InvalidTimings,
    #[error(
        "subcarrier map capacity exceeded: {nodes} nodes but modulation order {m} \
         over {s} subcarriers only maps {capacity}"
    )]
    MapCapacity {
        nodes: usize,
        m: u16,
        s: u16,
        capacity: usize,
    },
    #[error("data-rate/payload combination rejected: {0}")]
    Analytic(#[from] rcfd_analytic::AnalyticError),
    #[error("subcarrier mapping rejected: {0}")]
    Core(#[from] rcfd_core::CoreError),
}
