//! Per-node RCFD access procedure: idle scan, the three frequency-
//! domain contention rounds, the granted (possibly full-duplex) data
//! exchange, and CTS-triggered deferring for asynchronous access.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rcfd_core::{
    decide_transmission, deferring_update, elect_pt, elect_rr, round1_pick, round2_emission,
    round3_emission, select_cts_recipient, ContentionObservation, DeferEvent, DeferState, NodeId,
    NodeRole, Slot, SubcarrierMap, TxDecision,
};
use rcfd_mac::{DiscardReason, Frame, FrameKind, MacTimings, Ns, Packet, TxQueue};

use crate::freq::{ev_index, BusyView, FreqEv, SimCmd, FREQ_EVS};

/// One contention this node takes part in, as contender or as listener
/// anchored to an overheard round 1.
#[derive(Debug)]
struct Contention {
    /// Start of this contention's round 1, anchoring the round windows.
    start: Ns,
    contender: bool,
    my_slot: Slot,
    is_pt: bool,
    obs: ContentionObservation,
    /// PT this node answered with a CTS.
    cts_to: Option<NodeId>,
}

/// RCFD state machine for one node, advanced by the simulation engine.
#[derive(Debug)]
pub(crate) struct RcfdNode {
    id: usize,
    map: Arc<SubcarrierMap>,
    t: MacTimings,
    n_tx_max: u32,
    delta_max: Ns,
    queue: TxQueue,
    current: Option<Packet>,
    retries: u32,
    ctx: Option<Contention>,
    /// Primary data on the air, ACK pending.
    awaiting_ack: bool,
    /// Full-duplex secondary data on the air and its peer.
    secondary: Option<(Packet, usize)>,
    /// PT whose primary data we are waiting for after sending a CTS.
    expect_data_from: Option<usize>,
    defer: DeferState,
    /// A CTS was heard: only the exchange's ACK or the guard timeout
    /// may clear the defer (the data sender can be hidden from us).
    defer_hard: bool,
    /// Nodes whose ACK would end the exchange(s) we defer for.
    defer_sources: BTreeSet<usize>,
    timer_at: [Option<Ns>; FREQ_EVS],
    dbg: [u64; 13],
}

impl RcfdNode {
    pub fn new(
        id: usize,
        map: Arc<SubcarrierMap>,
        t: MacTimings,
        n_tx_max: u32,
        q_max: usize,
        delta_max: Ns,
    ) -> Self {
        RcfdNode {
            id,
            map,
            t,
            n_tx_max,
            delta_max,
            queue: TxQueue::new(q_max, delta_max),
            current: None,
            retries: 0,
            ctx: None,
            awaiting_ack: false,
            secondary: None,
            expect_data_from: None,
            defer: DeferState::Clear,
            defer_hard: false,
            defer_sources: BTreeSet::new(),
            timer_at: [None; FREQ_EVS],
            dbg: [0; 13],
        }
    }

    pub fn pending_packets(&self) -> usize {
        self.queue.len() + self.current.is_some() as usize + self.secondary.is_some() as usize
    }

    fn arm(&mut self, ev: FreqEv, at: Ns, out: &mut Vec<SimCmd>) {
        self.timer_at[ev_index(ev)] = Some(at);
        out.push(SimCmd::Wake { ev, at });
    }

    fn disarm(&mut self, ev: FreqEv) {
        self.timer_at[ev_index(ev)] = None;
    }

    fn exchanging(&self) -> bool {
        self.awaiting_ack || self.secondary.is_some() || self.expect_data_from.is_some()
    }

    /// Arm the idle-scan timer when every precondition holds.
    fn try_scan(&mut self, now: Ns, busy: BusyView, out: &mut Vec<SimCmd>) {
        if self.ctx.is_some()
            || self.exchanging()
            || self.defer == DeferState::Deferred
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

    /// The carrier changed at this node (frame or round emission edge).
    pub fn busy_changed(&mut self, now: Ns, busy: BusyView) -> Vec<SimCmd> {
        let mut out = Vec::new();
        if busy.any() {
            // an interrupted scan has to start over
            self.disarm(FreqEv::ScanEnd);
        } else {
            self.try_scan(now, busy, &mut out);
        }
        out
    }

    /// Hold off channel access for the exchange announced by overheard
    /// contention emissions. A heard CTS makes the defer hard: the data
    /// sender may be hidden, so only the exchange's ACK or the guard
    /// timeout clears it. An RTS alone leaves the grant uncertain, so a
    /// soft defer probes the carrier at `check_at` (just after the data
    /// would have started) and clears early when nothing follows.
    fn start_defer<I: IntoIterator<Item = Slot>>(
        &mut self,
        announce_slots: I,
        hard: bool,
        rounds_left: Ns,
        check_at: Option<Ns>,
        now: Ns,
        out: &mut Vec<SimCmd>,
    ) {
        self.defer = deferring_update(self.defer, DeferEvent::HeardCts);
        self.defer_hard |= hard;
        self.trace(now, &format!("defer hard={hard} check={check_at:?}"));
        self.dbg[if hard { 8 } else { 7 }] += 1;
        for slot in announce_slots {
            // the lower-half slot names the emitting node; ignore
            // bleed-in slots that map to nothing, and our own emissions
            if self.map.in_set1(slot) {
                if let Ok(peer) = self.map.node_at_f1(slot) {
                    if peer.0 != self.id {
                        self.defer_sources.insert(peer.0);
                    }
                }
            }
        }
        match check_at {
            Some(at) => self.arm(FreqEv::GrantCheck, at, out),
            // a defer without its own probe must not be cleared by a
            // stale probe armed for an earlier, weaker trigger
            None if hard => self.disarm(FreqEv::GrantCheck),
            None => {}
        }
        // a CTS marks a real exchange and restarts the guard; an RTS
        // alone never extends a running one, or back-to-back failed
        // grants nearby would pin us down forever
        if hard || self.timer_at[ev_index(FreqEv::DeferTimeout)].is_none() {
            self.arm(
                FreqEv::DeferTimeout,
                now + rounds_left * self.t.round
                    + self.t.data
                    + self.t.sifs
                    + self.t.ack
                    + 3 * self.t.prop
                    + self.t.slot,
                out,
            );
        }
    }

    /// An in-range node opened a contention round; join as a listener
    /// when this is a round 1 and the node is free to take part. An
    /// overheard RTS or CTS round of a contention we are not part of
    /// announces a data exchange we might disturb, so it defers us.
    pub fn round_started(
        &mut self,
        round: u8,
        window_start: Ns,
        slots: &[Slot],
        now: Ns,
        busy: BusyView,
    ) -> Vec<SimCmd> {
        let mut out = Vec::new();
        self.disarm(FreqEv::ScanEnd);
        if round != 1 {
            if let Some(ctx) = &self.ctx {
                let my_start = ctx.start + (round as Ns - 1) * self.t.round;
                let my_end = my_start + self.t.round;
                let e_end = window_start + self.t.round;
                if window_start < my_end && my_start < e_end {
                    // our own contention (or one bleeding into its
                    // windows): the full observation is judged at round 3
                    return out;
                }
                // a contention whose windows never intersect ours is
                // granting an exchange we cannot observe: abandon ours
                self.ctx = None;
                self.dbg[6] += 1;
                self.disarm(FreqEv::Round1End);
                self.disarm(FreqEv::Round2End);
                self.disarm(FreqEv::Round3End);
            }
            if round == 3 {
                self.start_defer(slots.iter().copied(), true, 0, None, now, &mut out);
            } else {
                let check = window_start + 2 * self.t.round + self.t.prop + self.t.slot;
                self.start_defer(slots.iter().copied(), false, 1, Some(check), now, &mut out);
            }
            return out;
        }
        // deferring restrains this node's own channel access, not its
        // ability to answer a request: a soft-deferred node may still
        // listen and serve as RR (any exchange it soft-defers for would
        // show as a busy carrier here), while a hard defer marks a
        // possibly hidden exchange its ACK could disturb
        if self.ctx.is_some()
            || self.exchanging()
            || (self.defer == DeferState::Deferred && self.defer_hard)
            || busy.frames
        {
            return out;
        }
        self.ctx = Some(Contention {
            start: window_start,
            contender: false,
            my_slot: Slot::new(0, 0),
            is_pt: false,
            obs: ContentionObservation::default(),
            cts_to: None,
        });
        for (k, ev) in [FreqEv::Round1End, FreqEv::Round2End, FreqEv::Round3End]
            .into_iter()
            .enumerate()
        {
            self.arm(ev, window_start + (k as Ns + 1) * self.t.round, &mut out);
        }
        out
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
            return out; // stale
        }
        self.disarm(ev);
        match ev {
            FreqEv::ScanEnd => self.start_contention(now, rng, &mut out),
            FreqEv::Round1End => self.on_round1(now, heard.unwrap(), &mut out),
            FreqEv::Round2End => self.on_round2(now, heard.unwrap(), &mut out),
            FreqEv::Round3End => self.on_round3(now, heard.unwrap(), busy, &mut out),
            FreqEv::ExchangeTimeout => {
                if self.expect_data_from.is_some() && busy.frames {
                    // a frame is on the air: presumably the granted
                    // data, so keep waiting for its full duration
                    self.arm(
                        FreqEv::ExchangeTimeout,
                        now + self.t.data + self.t.prop,
                        &mut out,
                    );
                } else {
                    self.expect_data_from = None;
                    self.try_scan(now, busy, &mut out);
                }
            }
            FreqEv::AckPrimary => {
                self.awaiting_ack = false;
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
            FreqEv::AckSecondary => {
                if let Some((packet, _)) = self.secondary.take() {
                    // abandoned without consuming a retry, bounded by
                    // the age limit
                    self.queue.push_front(packet);
                }
                self.try_scan(now, busy, &mut out);
            }
            FreqEv::DeferTimeout => {
                self.trace(now, "defertimeout clear");
                self.defer = deferring_update(self.defer, DeferEvent::Timeout);
                self.defer_hard = false;
                self.defer_sources.clear();
                self.disarm(FreqEv::GrantCheck);
                self.try_scan(now, busy, &mut out);
            }
            FreqEv::GrantCheck => {
                // no data frame on the air right after the overheard
                // contention would have granted: nothing started (or the
                // sender is hidden, which the interference counter and
                // the guard timeout keep honest), so stop deferring
                if self.defer == DeferState::Deferred && !busy.frames {
                    self.trace(now, "grantcheck clear");
                    self.dbg[9] += 1;
                    self.defer = deferring_update(self.defer, DeferEvent::Timeout);
                    self.defer_hard = false;
                    self.defer_sources.clear();
                    self.disarm(FreqEv::DeferTimeout);
                    self.try_scan(now, busy, &mut out);
                }
            }
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
            // fall through to serve the next packet, if any, right away
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
        let Some(_) = self.current else {
            return;
        };
        let my_slot = round1_pick(&self.map, rng);
        self.ctx = Some(Contention {
            start: now,
            contender: true,
            my_slot,
            is_pt: false,
            obs: ContentionObservation::default(),
            cts_to: None,
        });
        self.dbg[0] += 1;
        self.trace(now, &format!("contend dst={:?}", self.current.map(|p| p.dst)));
        out.push(SimCmd::EmitRound {
            round: 1,
            start: now,
            slots: vec![my_slot],
        });
        for (k, ev) in [FreqEv::Round1End, FreqEv::Round2End, FreqEv::Round3End]
            .into_iter()
            .enumerate()
        {
            self.arm(ev, now + (k as Ns + 1) * self.t.round, out);
        }
    }

    fn on_round1(&mut self, now: Ns, heard: &BTreeSet<Slot>, out: &mut Vec<SimCmd>) {
        let Some(ctx) = self.ctx.as_mut() else { return };
        ctx.obs.round1_heard = heard.clone();
        if !ctx.contender {
            return;
        }
        ctx.is_pt = elect_pt(ctx.my_slot, heard).unwrap_or(false);
        if ctx.is_pt {
            self.dbg[1] += 1;
            let dest = NodeId(self.current.unwrap().dst);
            if let Ok(slots) = round2_emission(&self.map, NodeId(self.id), dest) {
                out.push(SimCmd::EmitRound {
                    round: 2,
                    start: now,
                    slots: slots.to_vec(),
                });
            }
        }
    }

    fn on_round2(&mut self, now: Ns, heard: &BTreeSet<Slot>, out: &mut Vec<SimCmd>) {
        let map = self.map.clone();
        let Some(ctx) = self.ctx.as_mut() else { return };
        for &slot in heard {
            if map.in_set1(slot) {
                ctx.obs.round2_heard_set1.insert(slot);
            } else {
                ctx.obs.round2_heard_set2.insert(slot);
            }
        }
        let is_rr = elect_rr(&map, NodeId(self.id), ctx.is_pt, &ctx.obs).unwrap_or(false);
        if !is_rr {
            return;
        }
        // the CTS goes to the lowest-mapped RTS sender heard; bleed-in
        // slots from a misaligned contention may not map to any node,
        // in which case the node stays a bystander
        let Ok(recipient) = select_cts_recipient(&map, &ctx.obs) else {
            return;
        };
        ctx.cts_to = Some(recipient);
        self.dbg[4] += 1;
        if let Ok(slots) = round3_emission(&map, NodeId(self.id), recipient) {
            out.push(SimCmd::EmitRound {
                round: 3,
                start: now,
                slots: slots.to_vec(),
            });
        }
    }

    fn on_round3(
        &mut self,
        now: Ns,
        heard: &BTreeSet<Slot>,
        busy: BusyView,
        out: &mut Vec<SimCmd>,
    ) {
        let map = self.map.clone();
        let Some(mut ctx) = self.ctx.take() else { return };
        for &slot in heard {
            if map.in_set1(slot) {
                ctx.obs.round3_heard_set1.insert(slot);
            } else {
                ctx.obs.round3_heard_set2.insert(slot);
            }
        }
        let mut transmitting = false;
        self.trace(
            now,
            &format!(
                "round3 contender={} is_pt={} cts_to={:?} r2s1={:?} r3s1={:?} r3s2={:?}",
                ctx.contender, ctx.is_pt, ctx.cts_to,
                ctx.obs.round2_heard_set1, ctx.obs.round3_heard_set1, ctx.obs.round3_heard_set2
            ),
        );
        if ctx.contender && ctx.is_pt {
            let dest = self.current.map(|p| NodeId(p.dst));
            let decision = decide_transmission(
                &map,
                NodeId(self.id),
                NodeRole::PrimaryTransmitter,
                dest,
                &ctx.obs,
            )
            .unwrap_or(TxDecision::Hold);
            // final carrier check: data from an interleaved contention
            // granted a round earlier may already be on the air
            if matches!(decision, TxDecision::TransmitPrimary(_)) && !busy.frames {
                out.push(SimCmd::Transmit {
                    frame: Frame::data(&self.t, self.current.unwrap()),
                    at: now,
                });
                self.awaiting_ack = true;
                transmitting = true;
                self.trace(now, &format!("tx primary dst={}", self.current.unwrap().dst));
                self.dbg[2] += 1;
            } else {
                self.dbg[3] += 1;
            }
        } else if let Some(recipient) = ctx.cts_to {
            // RTS receiver: always expect the primary; additionally
            // clear a secondary towards the PT when the full-duplex
            // conditions hold and a packet for it is queued
            // the PT is in range, so its data (due immediately) is
            // carrier-sensed: probe one slot in and give up right away
            // when nothing started, instead of idling a full data time
            self.expect_data_from = Some(recipient.0);
            self.arm(FreqEv::ExchangeTimeout, now + self.t.prop + self.t.slot, out);
            let have_packet = self.current.map(|p| p.dst) == Some(recipient.0)
                || self.queue.contains_for(recipient.0);
            if !have_packet {
                self.dbg[12] += 1;
            }
            if have_packet {
                let decision = decide_transmission(
                    &map,
                    NodeId(self.id),
                    NodeRole::RtsReceiver,
                    Some(recipient),
                    &ctx.obs,
                )
                .unwrap_or(TxDecision::Hold);
                if !matches!(decision, TxDecision::TransmitSecondaryFd(_)) {
                    let want = map.f1(recipient).ok();
                    let r2_clean = ctx.obs.round2_heard_set1.iter().copied().collect::<Vec<_>>()
                        == want.iter().copied().collect::<Vec<_>>();
                    if !r2_clean {
                        self.dbg[10] += 1;
                    } else {
                        self.dbg[11] += 1;
                    }
                }
                if let TxDecision::TransmitSecondaryFd(_) = decision {
                    let packet = if self.current.map(|p| p.dst) == Some(recipient.0) {
                        self.retries = 0;
                        self.current.take().unwrap()
                    } else {
                        self.queue.take_for(recipient.0).unwrap()
                    };
                    self.secondary = Some((packet, recipient.0));
                    self.dbg[5] += 1;
                    out.push(SimCmd::Transmit {
                        frame: Frame::data(&self.t, packet),
                        at: now,
                    });
                }
            }
            transmitting = true; // engaged in the exchange either way
        }
        if !(transmitting && ctx.cts_to.is_none()) {
            // asynchronous-access rule: an overheard RTS or CTS that is
            // not part of our own exchange means a data exchange we
            // might disturb may be starting; hold off until its ACK or
            // a guard timeout. This also applies to a node engaged as
            // RR: a parallel grant it witnessed must keep it off the
            // channel after its own exchange ends.
            let ours = [Some(NodeId(self.id)), ctx.cts_to];
            let foreign = |slot: &&Slot| !ours.contains(&map.node_at_f1(**slot).ok());
            let cts: Vec<Slot> = ctx.obs.round3_heard_set1.iter().filter(foreign).copied().collect();
            let rts: Vec<Slot> = ctx.obs.round2_heard_set1.iter().filter(foreign).copied().collect();
            if !cts.is_empty() {
                let announce = rts.iter().chain(cts.iter()).copied().collect::<Vec<_>>();
                // every granted PT (named by an upper-half CTS slot)
                // whose RTS we heard is in range, so its data would be
                // carrier-sensed here: probe one slot after the grant
                // and stop deferring when nothing started. A grant to a
                // PT we never heard may start hidden data, so no probe.
                let all_granted_visible = ctx
                    .obs
                    .round3_heard_set2
                    .iter()
                    .filter(|slot| !ours.contains(&map.node_at_f2(**slot).ok()))
                    .all(|slot| {
                        map.node_at_f2(*slot)
                            .and_then(|pt| map.f1(pt))
                            .map(|f1| ctx.obs.round2_heard_set1.contains(&f1))
                            .unwrap_or(false)
                    });
                let check = all_granted_visible.then(|| now + self.t.prop + self.t.slot);
                self.start_defer(announce, true, 0, check, now, out);
            } else if !rts.is_empty() {
                let check = now + self.t.prop + self.t.slot;
                self.start_defer(rts, false, 0, Some(check), now, out);
            } else if !transmitting {
                self.try_scan(now, busy, out);
            }
        }
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
                if self.expect_data_from == Some(frame.src) {
                    self.expect_data_from = None;
                    self.disarm(FreqEv::ExchangeTimeout);
                }
            }
            FrameKind::Ack if frame.dst == self.id => {
                if self.secondary.map(|(_, peer)| peer) == Some(frame.src) {
                    self.secondary = None;
                    self.disarm(FreqEv::AckSecondary);
                    self.try_scan(now, busy, &mut out);
                } else if self.awaiting_ack && self.current.map(|p| p.dst) == Some(frame.src) {
                    self.awaiting_ack = false;
                    self.disarm(FreqEv::AckPrimary);
                    self.current = None;
                    self.retries = 0;
                    self.try_scan(now, busy, &mut out);
                }
            }
            FrameKind::Ack => {
                // overheard ACK: clear the defer only when it ends an
                // exchange we actually deferred for
                if self.defer == DeferState::Deferred && self.defer_sources.contains(&frame.src) {
                    self.trace(now, &format!("ack clear src={}", frame.src));
                    self.defer = deferring_update(self.defer, DeferEvent::HeardAck);
                    self.defer_hard = false;
                    self.defer_sources.clear();
                    self.disarm(FreqEv::DeferTimeout);
                    self.disarm(FreqEv::GrantCheck);
                    self.try_scan(now, busy, &mut out);
                }
            }
            _ => {}
        }
        out
    }

    fn trace(&self, now: Ns, msg: &str) {
        if std::env::var("RCFD_TRACE_NODE").ok().as_deref() == Some(&self.id.to_string()) {
            eprintln!("[{now}] n{} {msg}", self.id);
        }
    }

    #[allow(dead_code)]
    pub fn debug_summary(&self) -> String {
        format!(
            "q={} cur={:?} ctx={} ack={} sec={:?} exp={:?} defer={:?} src={:?} timers={:?} dbg[cont,pt,tx,hold,cts,sec,abort,soft,hard,chk,r2x,r3x,nopkt]={:?}",
            self.queue.len(),
            self.current.map(|p| p.dst),
            self.ctx.is_some(),
            self.awaiting_ack,
            self.secondary.map(|(_, p)| p),
            self.expect_data_from,
            self.defer,
            self.defer_sources,
            self.timer_at,
            self.dbg,
        )
    }

    pub fn tx_ended(&mut self, frame: Frame, now: Ns) -> Vec<SimCmd> {
        let mut out = Vec::new();
        if let FrameKind::Data(packet) = frame.kind {
            if self.secondary.map(|(p, _)| p.id) == Some(packet.id) {
                self.arm(FreqEv::AckSecondary, now + self.t.ack_timeout(), &mut out);
            } else if self.awaiting_ack {
                self.arm(FreqEv::AckPrimary, now + self.t.ack_timeout(), &mut out);
            }
        }
        out
    }
}
