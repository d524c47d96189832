//! Core logic of the RCFD channel access scheme: contention for a
//! full-duplex wireless channel carried out over OFDM subcarriers.
//!
//! Nodes contend in three consecutive frequency-domain rounds. In the
//! first round every contender announces itself on a random subcarrier
//! slot; the node that picked the lowest-ordered slot among those it
//! heard becomes a primary transmitter (PT). In the second round each
//! PT advertises itself and its intended receiver (the RTS), which
//! elects RTS receivers (RR). In the third round each RR authorizes
//! exactly one PT (the CTS). After the third round every node decides
//! locally whether to transmit, and an RR that also has a packet for
//! its PT may transmit simultaneously, yielding a full-duplex exchange.
//!
//! Everything in this crate is a pure function over value types; the
//! event-driven simulator and the analytical models build on top of it.

mod contention;
mod defer;
mod error;
mod mapping;
mod resolve;

pub use contention::{
    decide_transmission, elect_pt, elect_rr, round1_pick, round2_emission, round3_emission,
    select_cts_recipient, ContentionObservation, NodeRole, TxDecision,
};
pub use defer::{deferring_update, DeferEvent, DeferState};
pub use error::CoreError;
pub use mapping::{NodeId, Slot, SubcarrierMap};
pub use resolve::{
    resolve_contention, resolve_contention_with_fading, ContentionOutcome, NodeInput,
};
