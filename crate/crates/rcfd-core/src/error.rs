use crate::mapping::{NodeId, Slot};

/// Errors surfaced by the protocol primitives.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error("subcarrier count {0} must be even and at least 2")]
    InvalidSubcarrierCount(u16),
    #[error("modulation order {0} must be at least 1")]
    InvalidModulationOrder(u16),
    #[error("{nodes} nodes exceed mapping capacity {capacity}")]
    CapacityExceeded { nodes: usize, capacity: usize },
    #[error("node {0:?} is not mapped")]
    UnmappedNode(NodeId),
    #[error("chosen slot {0:?} missing from the round-1 heard set (self-hearing violated)")]
    ChosenNotHeard(Slot),
    #[error("no RTS heard in round 2")]
    NoRtsHeard,
    #[error("slot {0:?} does not belong to any mapped node")]
    UnknownSlot(Slot),
}
