//! Engine-facing plumbing shared by the frequency-domain contention
//! nodes (RCFD and BACK2F): wake-up tokens, command outputs and the
//! carrier view.
//!
//! Timer ownership mirrors the DCF machine contract: nodes remember the
//! deadline they armed per wake kind and ignore a wake whose timestamp
//! no longer matches (stale fires need no cancellation protocol).

use rcfd_core::Slot;
use rcfd_mac::{DiscardReason, Frame, Ns, Packet};

/// Wake-up kinds a frequency-contention node can arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FreqEv {
    ScanEnd,
    Round1End,
    Round2End,
    Round3End,
    /// The primary data an RTS receiver is waiting for is overdue.
    ExchangeTimeout,
    /// ACK for our primary data is overdue.
    AckPrimary,
    /// ACK for our full-duplex secondary data is overdue.
    AckSecondary,
    DeferTimeout,
    /// Probe the carrier shortly after an overheard RTS's contention
    /// would have granted: no data on the air means no exchange to
    /// defer for.
    GrantCheck,
}

pub(crate) const FREQ_EVS: usize = 9;

pub(crate) fn ev_index(ev: FreqEv) -> usize {
    match ev {
        FreqEv::ScanEnd => 0,
        FreqEv::Round1End => 1,
        FreqEv::Round2End => 2,
        FreqEv::Round3End => 3,
        FreqEv::ExchangeTimeout => 4,
        FreqEv::AckPrimary => 5,
        FreqEv::AckSecondary => 6,
        FreqEv::DeferTimeout => 7,
        FreqEv::GrantCheck => 8,
    }
}

/// Whether a round-end wake carries the slots heard in that round.
pub(crate) fn is_round_end(ev: FreqEv) -> Option<u8> {
    match ev {
        FreqEv::Round1End => Some(1),
        FreqEv::Round2End => Some(2),
        FreqEv::Round3End => Some(3),
        _ => None,
    }
}

/// Output of a frequency-contention node towards the engine.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SimCmd {
    Wake { ev: FreqEv, at: Ns },
    /// Emit contention symbols: one round window starting at `start`,
    /// carrying `slots` towards every in-range listener.
    EmitRound { round: u8, start: Ns, slots: Vec<Slot> },
    Transmit { frame: Frame, at: Ns },
    Delivered { packet: Packet, at: Ns },
    Dropped {
        packet: Packet,
        reason: DiscardReason,
        at: Ns,
    },
}

/// Carrier state the engine exposes to a node at every call.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BusyView {
    /// Some in-range (or own) full-channel frame is on the air.
    pub frames: bool,
    /// Some in-range contention-round emission is on the air.
    pub rounds: bool,
}

impl BusyView {
    pub fn any(self) -> bool {
        self.frames || self.rounds
    }
}
