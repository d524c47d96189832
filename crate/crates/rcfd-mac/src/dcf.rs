//! Event-driven CSMA/CA state machine covering the IEEE 802.11 DCF
//! (basic and RTS/CTS) and the FD MAC extension.
//!
//! The machine is advanced by the simulation engine: the engine owns
//! physical-carrier tracking (a node's own transmissions count as
//! busy), frame decoding, timers and the event clock; the machine
//! reacts to [`MacEvent`]s with [`MacCommand`]s. All times are integer
//! nanoseconds.

use rand::Rng;

use crate::backoff::BackoffState;
use crate::frame::{Frame, FrameKind, MacTimings};
use crate::queue::{DiscardReason, Ns, Packet, TxQueue};

/// Which protocol the state machine runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcfVariant {
    Basic,
    RtsCts,
    FdMac(FdPairingRule),
}

/// How an FD MAC receiver searches its queue for a packet destined to
/// the RTS sender.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdPairingRule {
    /// Only the head of the queue is eligible (analysis assumption).
    HeadOnly,
    /// The whole queue is scanned (the simulation relaxation).
    FullQueue,
}

/// Timers the machine may arm; at most one instance per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimerKind {
    /// Backoff would reach zero (armed only while the medium is idle).
    Backoff,
    /// CTS answer to our RTS is overdue.
    CtsTimeout,
    /// ACK for a data frame we sent is overdue.
    AckTimeout,
    /// Primary data after our CTS is overdue (receiver side).
    ExchangeTimeout,
    /// NAV interval set by an overheard frame expires.
    NavExpiry,
}

const TIMER_KINDS: usize = 5;

fn timer_index(kind: TimerKind) -> usize {
    match kind {
        TimerKind::Backoff => 0,
        TimerKind::CtsTimeout => 1,
        TimerKind::AckTimeout => 2,
        TimerKind::ExchangeTimeout => 3,
        TimerKind::NavExpiry => 4,
    }
}

/// Input from the engine.
#[derive(Debug, Clone, Copy)]
pub enum MacEvent {
    /// Physical carrier turned on (any in-range or own transmission).
    MediumBusy,
    /// Physical carrier turned off.
    MediumIdle,
    /// A frame was fully received and decoded (addressed or overheard).
    Decoded(Frame),
    /// Our own transmission of this frame just ended.
    TxEnded(Frame),
    /// A previously armed timer reached its deadline.
    Timer(TimerKind),
}

/// Output to the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacCommand {
    /// Arm (or re-arm) the timer of this kind at the absolute time.
    SetTimer { kind: TimerKind, at: Ns },
    /// Start transmitting the frame at the absolute time.
    TransmitAt { frame: Frame, at: Ns },
    /// A data packet addressed to this node was received intact.
    Delivered { packet: Packet, at: Ns },
    /// A packet left the system undelivered.
    Dropped {
        packet: Packet,
        reason: DiscardReason,
        at: Ns,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MainState {
    /// No packet in service.
    Idle,
    /// Packet in service, backoff in progress.
    Access,
    /// RTS sent, waiting for the CTS.
    AwaitCts,
    /// Data frame scheduled or on the air.
    SendingData,
    /// Data sent, waiting for the ACK.
    AwaitAck,
}

/// CSMA/CA state machine for one node.
#[derive(Debug)]
pub struct DcfFsm {
    node: usize,
    variant: DcfVariant,
    t: MacTimings,
    n_tx_max: u32,
    delta_max: Ns,
    queue: TxQueue,
    backoff: BackoffState,
    state: MainState,
    current: Option<Packet>,
    /// Peer of the exchange we joined as receiver (we sent it a CTS).
    rx_peer: Option<usize>,
    /// FD secondary packet in flight and its peer.
    secondary: Option<(Packet, usize)>,
    carrier_busy: bool,
    nav_until: Ns,
    /// Pending deadline per timer kind; stale fires are ignored.
    timer_at: [Option<Ns>; TIMER_KINDS],
    /// When the current backoff countdown was armed.
    backoff_armed_at: Ns,
}

impl DcfFsm {
    pub fn new(
        node: usize,
        variant: DcfVariant,
        t: MacTimings,
        w_initial: u32,
        stage_cap: u32,
        n_tx_max: u32,
        q_max: usize,
        delta_max: Ns,
    ) -> Self {
        Self {
            node,
            variant,
            t,
            n_tx_max,
            delta_max,
            queue: TxQueue::new(q_max, delta_max),
            backoff: BackoffState::new(w_initial, stage_cap),
            state: MainState::Idle,
            current: None,
            rx_peer: None,
            secondary: None,
            carrier_busy: false,
            nav_until: 0,
            timer_at: [None; TIMER_KINDS],
            backoff_armed_at: 0,
        }
    }

    pub fn node(&self) -> usize {
        self.node
    }

    /// Read-only view of the backoff bookkeeping.
    pub fn backoff(&self) -> &BackoffState {
        &self.backoff
    }

    /// Packets waiting plus the one in service plus a secondary in
    /// flight (for conservation accounting).
    pub fn pending_packets(&self) -> usize {
        self.queue.len()
            + self.current.is_some() as usize
            + self.secondary.is_some() as usize
    }

    fn uses_rts(&self) -> bool {
        !matches!(self.variant, DcfVariant::Basic)
    }

    fn set_timer(&mut self, kind: TimerKind, at: Ns, out: &mut Vec<MacCommand>) {
        self.timer_at[timer_index(kind)] = Some(at);
        out.push(MacCommand::SetTimer { kind, at });
    }

    fn clear_timer(&mut self, kind: TimerKind) {
        self.timer_at[timer_index(kind)] = None;
    }

    /// Hand a freshly generated packet to the MAC.
    pub fn enqueue<R: Rng + ?Sized>(
        &mut self,
        packet: Packet,
        now: Ns,
        rng: &mut R,
    ) -> Vec<MacCommand> {
        let mut out = Vec::new();
        if let Some(over) = self.queue.push(packet) {
            out.push(MacCommand::Dropped {
                packet: over,
                reason: DiscardReason::QueueOverflow,
                at: now,
            });
            return out;
        }
        if self.state == MainState::Idle {
            self.next_packet(now, rng, &mut out);
            self.try_schedule(now, &mut out);
        }
        out
    }

    /// Advance the machine with one event.
    pub fn handle<R: Rng + ?Sized>(
        &mut self,
        event: MacEvent,
        now: Ns,
        rng: &mut R,
    ) -> Vec<MacCommand> {
        let mut out = Vec::new();
        match event {
            MacEvent::MediumBusy => {
                self.carrier_busy = true;
                self.freeze_backoff(now);
            }
            MacEvent::MediumIdle => {
                self.carrier_busy = false;
                self.try_schedule(now, &mut out);
            }
            MacEvent::Timer(kind) => {
                if self.timer_at[timer_index(kind)] != Some(now) {
                    return out; // stale
                }
                self.clear_timer(kind);
                self.on_timer(kind, now, rng, &mut out);
            }
            MacEvent::TxEnded(frame) => self.on_tx_ended(frame, now, &mut out),
            MacEvent::Decoded(frame) => self.on_decoded(frame, now, rng, &mut out),
        }
        out
    }

    fn on_timer<R: Rng + ?Sized>(
        &mut self,
        kind: TimerKind,
        now: Ns,
        rng: &mut R,
        out: &mut Vec<MacCommand>,
    ) {
        match kind {
            TimerKind::Backoff => self.attempt(now, rng, out),
            TimerKind::CtsTimeout => {
                if self.state == MainState::AwaitCts {
                    self.on_attempt_failed(now, rng, out);
                }
            }
            TimerKind::AckTimeout => {
                if let Some((packet, _)) = self.secondary.take() {
                    // the FD secondary was not acknowledged; requeue it
                    self.queue.push_front(packet);
                } else if self.state == MainState::AwaitAck {
                    self.on_attempt_failed(now, rng, out);
                }
            }
            TimerKind::ExchangeTimeout => {
                if self.rx_peer.is_some() {
                    self.rx_peer = None;
                    self.after_overlay(now, rng, out);
                }
            }
            TimerKind::NavExpiry => self.try_schedule(now, out),
        }
    }

    fn on_tx_ended(&mut self, frame: Frame, now: Ns, out: &mut Vec<MacCommand>) {
        match frame.kind {
            FrameKind::Rts => {
                if self.state == MainState::AwaitCts {
                    self.set_timer(TimerKind::CtsTimeout, now + self.t.cts_timeout(), out);
                }
            }
            FrameKind::Data(packet) => {
                if self.secondary.map(|(p, _)| p.id) == Some(packet.id) {
                    self.set_timer(TimerKind::AckTimeout, now + self.t.ack_timeout(), out);
                } else if self.state == MainState::SendingData {
                    self.state = MainState::AwaitAck;
                    self.set_timer(TimerKind::AckTimeout, now + self.t.ack_timeout(), out);
                }
            }
            FrameKind::Cts | FrameKind::Ack => {}
        }
    }

    fn on_decoded<R: Rng + ?Sized>(
        &mut self,
        frame: Frame,
        now: Ns,
        rng: &mut R,
        out: &mut Vec<MacCommand>,
    ) {
        if frame.dst != self.node && frame.src != self.node {
            // overheard: NAV bookkeeping only (RTS/CTS variants)
            if self.uses_rts() && frame.nav > 0 {
                let until = now + frame.nav;
                if until > self.nav_until {
                    self.nav_until = until;
                    self.freeze_backoff(now);
                    self.set_timer(TimerKind::NavExpiry, until, out);
                }
            }
            return;
        }
        if frame.dst != self.node {
            return;
        }
        match frame.kind {
            FrameKind::Rts => self.on_rts(frame.src, now, out),
            FrameKind::Cts => {
                if self.state == MainState::AwaitCts
                    && self.current.map(|p| p.dst) == Some(frame.src)
                {
                    self.clear_timer(TimerKind::CtsTimeout);
                    self.state = MainState::SendingData;
                    let data = Frame::data(&self.t, self.current.unwrap());
                    out.push(MacCommand::TransmitAt {
                        frame: data,
                        at: now + self.t.sifs,
                    });
                }
            }
            FrameKind::Data(packet) => {
                out.push(MacCommand::TransmitAt {
                    frame: Frame::ack(&self.t, self.node, frame.src),
                    at: now + self.t.sifs,
                });
                out.push(MacCommand::Delivered { packet, at: now });
                if self.rx_peer == Some(frame.src) {
                    self.rx_peer = None;
                    self.clear_timer(TimerKind::ExchangeTimeout);
                    self.after_overlay(now, rng, out);
                }
            }
            FrameKind::Ack => {
                if self.secondary.map(|(_, peer)| peer) == Some(frame.src) {
                    self.secondary = None;
                    self.clear_timer(TimerKind::AckTimeout);
                } else if self.state == MainState::AwaitAck
                    && self.current.map(|p| p.dst) == Some(frame.src)
                {
                    self.clear_timer(TimerKind::AckTimeout);
                    self.backoff.on_reset(rng);
                    self.current = None;
                    self.state = MainState::Idle;
                    self.next_packet(now, rng, out);
                    self.try_schedule(now, out);
                }
            }
        }
    }

    /// Receiver side of an RTS addressed to us. Virtual carrier sense
    /// applies: a station whose NAV marks the medium busy must not
    /// answer with a CTS.
    fn on_rts(&mut self, peer: usize, now: Ns, out: &mut Vec<MacCommand>) {
        if !self.uses_rts()
            || self.rx_peer.is_some()
            || now < self.nav_until
            || !matches!(self.state, MainState::Idle | MainState::Access)
        {
            return;
        }
        self.rx_peer = Some(peer);
        out.push(MacCommand::TransmitAt {
            frame: Frame::cts(&self.t, self.node, peer),
            at: now + self.t.sifs,
        });
        if let DcfVariant::FdMac(rule) = self.variant {
            let packet = self.take_packet_for(peer, rule);
            if let Some(packet) = packet {
                self.secondary = Some((packet, peer));
                out.push(MacCommand::TransmitAt {
                    frame: Frame::data(&self.t, packet),
                    at: now + 2 * self.t.sifs + self.t.cts,
                });
            }
        }
        // primary data should be decoded at
        // cts_end + prop + sifs + data + prop; one slot of guard
        let deadline = now
            + self.t.sifs
            + self.t.cts
            + 2 * self.t.prop
            + self.t.sifs
            + self.t.data
            + self.t.slot;
        self.set_timer(TimerKind::ExchangeTimeout, deadline, out);
    }

    fn take_packet_for(&mut self, peer: usize, rule: FdPairingRule) -> Option<Packet> {
        if self.current.map(|p| p.dst) == Some(peer) {
            self.state = MainState::Idle;
            return self.current.take();
        }
        match rule {
            FdPairingRule::HeadOnly => {
                if self.current.is_none() && self.queue.head_dst() == Some(peer) {
                    self.queue.take_for(peer)
                } else {
                    None
                }
            }
            FdPairingRule::FullQueue => self.queue.take_for(peer),
        }
    }

    /// Backoff reached zero: transmit (or drop a stale packet first).
    fn attempt<R: Rng + ?Sized>(&mut self, now: Ns, rng: &mut R, out: &mut Vec<MacCommand>) {
        if self.state != MainState::Access {
            return;
        }
        let packet = match self.current {
            Some(p) => p,
            None => return,
        };
        if now.saturating_sub(packet.created) > self.delta_max {
            self.current = None;
            out.push(MacCommand::Dropped {
                packet,
                reason: DiscardReason::AgeLimit,
                at: now,
            });
            self.backoff.on_reset(rng);
            self.state = MainState::Idle;
            self.next_packet(now, rng, out);
            self.try_schedule(now, out);
            return;
        }
        let frame = if self.uses_rts() {
            self.state = MainState::AwaitCts;
            Frame::rts(&self.t, self.node, packet.dst)
        } else {
            self.state = MainState::SendingData;
            Frame::data(&self.t, packet)
        };
        out.push(MacCommand::TransmitAt { frame, at: now });
    }

    fn on_attempt_failed<R: Rng + ?Sized>(
        &mut self,
        now: Ns,
        rng: &mut R,
        out: &mut Vec<MacCommand>,
    ) {
        self.backoff.on_failure(rng);
        if self.backoff.retries >= self.n_tx_max {
            if let Some(packet) = self.current.take() {
                out.push(MacCommand::Dropped {
                    packet,
                    reason: DiscardReason::RetryLimit,
                    at: now,
                });
            }
            self.backoff.on_reset(rng);
            self.state = MainState::Idle;
            self.next_packet(now, rng, out);
        } else {
            self.state = MainState::Access;
        }
        self.try_schedule(now, out);
    }

    /// Pull the next serviceable packet into `current`.
    fn next_packet<R: Rng + ?Sized>(&mut self, now: Ns, rng: &mut R, out: &mut Vec<MacCommand>) {
        if self.current.is_some() {
            self.state = MainState::Access;
            return;
        }
        let (expired, next) = self.queue.pop_fresh(now);
        for packet in expired {
            out.push(MacCommand::Dropped {
                packet,
                reason: DiscardReason::AgeLimit,
                at: now,
            });
        }
        match next {
            Some(packet) => {
                self.current = Some(packet);
                self.backoff.draw(rng);
                self.state = MainState::Access;
            }
            None => self.state = MainState::Idle,
        }
    }

    /// Arm the backoff timer when every busy condition is clear.
    fn try_schedule(&mut self, now: Ns, out: &mut Vec<MacCommand>) {
        if self.state != MainState::Access
            || self.current.is_none()
            || self.rx_peer.is_some()
            || self.carrier_busy
            || now < self.nav_until
            || self.timer_at[timer_index(TimerKind::Backoff)].is_some()
        {
            return;
        }
        self.backoff_armed_at = now;
        let at = now + self.t.difs + self.backoff.counter as Ns * self.t.slot;
        self.set_timer(TimerKind::Backoff, at, out);
    }

    /// Medium turned busy: bank the slots that elapsed and stop the
    /// countdown (freeze semantics).
    fn freeze_backoff(&mut self, now: Ns) {
        if self.timer_at[timer_index(TimerKind::Backoff)].is_none() {
            return;
        }
        self.clear_timer(TimerKind::Backoff);
        let countdown_start = self.backoff_armed_at + self.t.difs;
        if now > countdown_start {
            let slots = ((now - countdown_start) / self.t.slot) as u32;
            self.backoff.counter -= slots.min(self.backoff.counter);
        }
    }

    fn after_overlay<R: Rng + ?Sized>(&mut self, now: Ns, rng: &mut R, out: &mut Vec<MacCommand>) {
        if self.current.is_none() {
            self.next_packet(now, rng, out);
        }
        self.try_schedule(now, out);
    }
}
