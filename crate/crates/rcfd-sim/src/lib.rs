//! Deterministic discrete-event simulator for MAC-layer channel access
//! in full-duplex ad hoc networks: grid and random topologies, a
//! range-cutoff channel with optional Bernoulli erasures, on/off CBR
//! traffic, and per-node state machines for the five protocols under
//! comparison (RCFD, BACK2F, FD MAC, and the two DCF variants).

mod back2f_node;
mod config;
mod engine;
mod error;
mod freq;
mod metrics;
mod rcfd_node;
mod topology;

pub use config::{Protocol, SimConfig};
pub use engine::run;
pub use error::SimError;
pub use metrics::{jain_index, offered_traffic, SimMetrics};
pub use topology::{build_grid, build_random, Topology};
