//! Simulation-ready MAC state machines for the four comparison
//! protocols: IEEE 802.11 DCF (basic and RTS/CTS), FD MAC and BACK2F.
//! All machines consume the same [`MacTimings`] table and the same
//! queue/discard policies, so the protocols are compared over an
//! identical physical layer.

mod back2f;
mod backoff;
mod dcf;
mod frame;
mod queue;

pub use back2f::{Back2fPhase, Back2fRoundState};
pub use backoff::BackoffState;
pub use dcf::{DcfFsm, DcfVariant, FdPairingRule, MacCommand, MacEvent, TimerKind};
pub use frame::{us_to_ns, Frame, FrameKind, MacTimings};
pub use queue::{DiscardReason, Ns, Packet, TxQueue};
