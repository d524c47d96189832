//! Per-node BACK2F access procedure: idle scan, two frequency-domain
//! backoff rounds with residual carrying, then a half-duplex data
//! exchange. No RTS/CTS and no deferring — the protocol contends only
//! within what each node can hear.

use std::collections::BTreeSet;

use rand::Rng;
use rcfd_core::Slot;
use rcfd_mac::{Back2fRoundState, DiscardReason, Frame, FrameKind, MacTimings, Ns, Packet, TxQueue};

use crate::freq::{ev_index, BusyView, FreqEv, SimCmd, FREQ_EVS};

/// BACK2F state machine for one node, advanced by the simulation
/// engine. Contention-round wakes reuse the RCFD wake tokens (rounds 1
/// and 2 only).
#[derive(Debug)]
pub(crate) struct Back2fNode {
    id: usize,
    t: MacTimings,
    n_tx_max: u32,
    delta_max: Ns,
    queue: TxQueue,
    current: Option<Packet>,
    retries: u32,
    back: Back2fRoundState,
    contending: bool,
    awaiting_ack: bool,
    timer_at: [Option<Ns>; FREQ_EVS],
}

impl Back2fNode {
    pub fn new(
        id: usize,
        subcarriers: u32,
        t: MacTimings,
        n_tx_max: u32,
        q_max: usize,
        delta_max: Ns,
    ) -> Self {
        Back2fNode {
            id,
            t,
            n_tx_max,
            delta_max,
            queue: TxQueue::new(q_max, delta_max),
            current: None,
            retries: 0,
            back: Back2fRoundState::new(subcarriers),
            contending: false,
            awaiting_ack: false,
            timer_at: [None; FREQ_EVS],
        }
    }

    pub fn pending_packets(&self) -> usize {
        self.queue.len() + self.current.is_some() as usize
    }

    fn arm(&mut self, ev: FreqEv, at: Ns, out: &mut Vec<SimCmd>) {
        self.timer_at[ev_index(ev)] = Some(at);
        out.push(SimCmd::Wake { ev, at });
    }

    fn disarm(&mut self, ev: FreqEv) {
        self.timer_at[ev_index(ev)] = None;
    }

    fn try_scan(&mut self, now: Ns, busy: BusyView, out: &mut Vec<SimCmd>) {
        if self.contending
            || self.awaiting_ack
            || busy.any()
            || self.timer_at[ev_index(FreqEv::ScanEnd)].is_some()
            || (self.current.is_none() && self.queue.is_empty())
        {
            return;
        }
        self.arm(FreqEv::ScanEnd, now + self.t.scan, out);
    }

    pub fn packet_arrived(&mut self, packet: Packet, now: Ns, busy: BusyView) -> Vec<SimCmd> {
        let mut out = Vec::new();
        if let Some(over) = self.queue.push(packet) {
            out.push(SimCmd::Dropped {
                packet: over,
                reason: DiscardReason::QueueOverflow,
                at: now,
            });
            return out;
        }
        self.try_scan(now, busy, &mut out);
        out
    }

    pub fn busy_changed(&mut self, now: Ns, busy: BusyView) -> Vec<SimCmd> {
        let mut out = Vec::new();
        if busy.any() {
            self.disarm(FreqEv::ScanEnd);
        } else {
            self.try_scan(now, busy, &mut out);
        }
        out
    }

    /// Non-contenders only sense round emissions as a busy carrier.
    pub fn round_started(&mut self) {
        self.disarm(FreqEv::ScanEnd);
    }

    pub fn wake<R: Rng + ?Sized>(
        &mut self,
        ev: FreqEv,
        now: Ns,
        heard: Option<&BTreeSet<Slot>>,
        busy: BusyView,
        rng: &mut R,
    ) -> Vec<SimCmd> {
        let mut out = Vec::new();
        if self.timer_at[ev_index(ev)] != Some(now) {
            return out;
        }
        self.disarm(ev);
        match ev {
            FreqEv::ScanEnd => self.start_contention(now, rng, &mut out),
            FreqEv::Round1End => {
                let minback = heard
                    .unwrap()
                    .iter()
                    .map(|s| s.subcarrier as u32)
                    .min()
                    .unwrap_or(0);
                if self.back.on_round1(minback) {
                    let b2 = self.back.round2_subcarrier(rng);
                    out.push(SimCmd::EmitRound {
                        round: 2,
                        start: now,
                        slots: vec![Slot::new(b2 as u16, 0)],
                    });
                    self.arm(FreqEv::Round2End, now + self.t.round, &mut out);
                } else {
                    self.contending = false;
                    self.try_scan(now, busy, &mut out);
                }
            }
            FreqEv::Round2End => {
                let min2 = heard
                    .unwrap()
                    .iter()
                    .map(|s| s.subcarrier as u32)
                    .min()
                    .unwrap_or(0);
                self.contending = false;
                if self.back.on_round2(min2) {
                    out.push(SimCmd::Transmit {
                        frame: Frame::data(&self.t, self.current.unwrap()),
                        at: now,
                    });
                    self.awaiting_ack = true;
                } else {
                    self.try_scan(now, busy, &mut out);
                }
            }
            FreqEv::AckPrimary => {
                self.awaiting_ack = false;
                self.back.on_transmit_done();
                self.retries += 1;
                if self.retries >= self.n_tx_max {
                    if let Some(packet) = self.current.take() {
                        out.push(SimCmd::Dropped {
                            packet,
                            reason: DiscardReason::RetryLimit,
                            at: now,
                        });
                    }
                    self.retries = 0;
                }
                self.try_scan(now, busy, &mut out);
            }
            _ => {}
        }
        out
    }

    fn start_contention<R: Rng + ?Sized>(&mut self, now: Ns, rng: &mut R, out: &mut Vec<SimCmd>) {
        if self.current.is_none() {
            let (expired, next) = self.queue.pop_fresh(now);
            for packet in expired {
                out.push(SimCmd::Dropped {
                    packet,
                    reason: DiscardReason::AgeLimit,
                    at: now,
                });
            }
            self.current = next;
            self.retries = 0;
        } else if now.saturating_sub(self.current.unwrap().created) > self.delta_max {
            out.push(SimCmd::Dropped {
                packet: self.current.take().unwrap(),
                reason: DiscardReason::AgeLimit,
                at: now,
            });
            self.retries = 0;
            let (expired, next) = self.queue.pop_fresh(now);
            for packet in expired {
                out.push(SimCmd::Dropped {
                    packet,
                    reason: DiscardReason::AgeLimit,
                    at: now,
                });
            }
            self.current = next;
        }
        if self.current.is_none() {
            return;
        }
        self.contending = true;
        let b = self.back.round1_subcarrier(rng);
        out.push(SimCmd::EmitRound {
            round: 1,
            start: now,
            slots: vec![Slot::new(b as u16, 0)],
        });
        self.arm(FreqEv::Round1End, now + self.t.round, out);
    }

    pub fn decoded(&mut self, frame: Frame, now: Ns, busy: BusyView) -> Vec<SimCmd> {
        let mut out = Vec::new();
        match frame.kind {
            FrameKind::Data(packet) if frame.dst == self.id => {
                out.push(SimCmd::Delivered { packet, at: now });
                out.push(SimCmd::Transmit {
                    frame: Frame::ack(&self.t, self.id, frame.src),
                    at: now + self.t.sifs,
                });
            }
            FrameKind::Ack if frame.dst == self.id => {
                if self.awaiting_ack && self.current.map(|p| p.dst) == Some(frame.src) {
                    self.awaiting_ack = false;
                    self.disarm(FreqEv::AckPrimary);
                    self.back.on_transmit_done();
                    self.current = None;
                    self.retries = 0;
                    self.try_scan(now, busy, &mut out);
                }
            }
            _ => {}
        }
        out
    }

    pub fn tx_ended(&mut self, frame: Frame, now: Ns) -> Vec<SimCmd> {
        let mut out = Vec::new();
        if matches!(frame.kind, FrameKind::Data(_)) && self.awaiting_ack {
            self.arm(FreqEv::AckPrimary, now + self.t.ack_timeout(), &mut out);
        }
        out
    }
}
