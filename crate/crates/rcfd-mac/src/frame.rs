//! On-air frame descriptions and the integer-nanosecond timing table
//! every protocol consumes (the fair-comparison contract: one physical
//! layer for all five schemes).

use rcfd_analytic::PhyTimings;

use crate::queue::{Ns, Packet};

/// Convert microseconds to integer nanoseconds, rounding to the
/// nearest nanosecond (all table values convert exactly).
pub fn us_to_ns(us: f64) -> Ns {
    (us * 1000.0).round() as Ns
}

/// PHY timing table in integer nanoseconds, plus the data-frame
/// duration for the configured payload/rate.
#[derive(Debug, Clone, Copy)]
pub struct MacTimings {
    pub sifs: Ns,
    pub difs: Ns,
    pub slot: Ns,
    pub ack: Ns,
    pub rts: Ns,
    pub cts: Ns,
    pub prop: Ns,
    pub round: Ns,
    pub scan: Ns,
    pub header: Ns,
    /// Data frame on-air time (header + payload).
    pub data: Ns,
}

impl MacTimings {
    pub fn from_phy(phy: &PhyTimings, data_us: f64) -> Self {
        Self {
            sifs: us_to_ns(phy.t_sifs),
            difs: us_to_ns(phy.t_difs),
            slot: us_to_ns(phy.t_slot),
            ack: us_to_ns(phy.t_ack),
            rts: us_to_ns(phy.t_rts),
            cts: us_to_ns(phy.t_cts),
            prop: us_to_ns(phy.t_p),
            round: us_to_ns(phy.t_round),
            scan: us_to_ns(phy.t_scan),
            header: us_to_ns(phy.t_header),
            data: us_to_ns(data_us),
        }
    }

    /// Time from the end of a data frame until its ACK is fully
    /// received, plus one slot of guard: the ACK timeout.
    pub fn ack_timeout(&self) -> Ns {
        self.sifs + self.ack + 2 * self.prop + self.slot
    }

    /// Time from the end of an RTS until its CTS is fully received,
    /// plus one slot of guard: the CTS timeout.
    pub fn cts_timeout(&self) -> Ns {
        self.sifs + self.cts + 2 * self.prop + self.slot
    }
}

/// Frame type on the air.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Rts,
    Cts,
    Data(Packet),
    Ack,
}

/// A time-domain frame transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub src: usize,
    pub dst: usize,
    /// On-air duration.
    pub duration: Ns,
    /// Channel time the rest of the exchange will occupy after this
    /// frame ends; third parties set their NAV to it.
    pub nav: Ns,
}

impl Frame {
    pub fn rts(t: &MacTimings, src: usize, dst: usize) -> Self {
        Frame {
            kind: FrameKind::Rts,
            src,
            dst,
            duration: t.rts,
            // CTS + data + ACK, each preceded by SIFS and followed by
            // a propagation delay
            nav: 3 * (t.sifs + t.prop) + t.cts + t.data + t.ack,
        }
    }

    pub fn cts(t: &MacTimings, src: usize, dst: usize) -> Self {
        Frame {
            kind: FrameKind::Cts,
            src,
            dst,
            duration: t.cts,
            nav: 2 * (t.sifs + t.prop) + t.data + t.ack,
        }
    }

    pub fn data(t: &MacTimings, packet: Packet) -> Self {
        Frame {
            kind: FrameKind::Data(packet),
            src: packet.src,
            dst: packet.dst,
            duration: t.data,
            nav: t.sifs + t.prop + t.ack,
        }
    }

    pub fn ack(t: &MacTimings, src: usize, dst: usize) -> Self {
        Frame {
            kind: FrameKind::Ack,
            src,
            dst,
            duration: t.ack,
            nav: 0,
        }
    }
}
