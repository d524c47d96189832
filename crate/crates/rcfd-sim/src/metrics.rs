//! Per-run performance accounting: normalized throughput, average
//! delay over delivered and discarded packets, Jain's fairness index
//! and the raw event counters.

use std::collections::BTreeMap;

use rcfd_mac::{DiscardReason, Ns};

use crate::config::SimConfig;
use crate::topology::Topology;

/// Offered traffic G in bit/s: one CBR application per directed
/// in-range pair, each ON a fraction T_ON / (T_ON + T_OFF) of the time.
pub fn offered_traffic(topology: &Topology, cfg: &SimConfig) -> f64 {
    cfg.r_s_bps * topology.directed_pairs() as f64 * cfg.t_on / (cfg.t_on + cfg.t_off)
}

/// Jain's fairness index over per-node counts; 1 for perfect equality,
/// 1/N when a single node takes everything.
pub fn jain_index(per_node: &[u64]) -> f64 {
    let n = per_node.len() as f64;
    let sum: f64 = per_node.iter().map(|&p| p as f64).sum();
    let sum_sq: f64 = per_node.iter().map(|&p| (p as f64) * (p as f64)).sum();
    if sum_sq == 0.0 {
        return 1.0; // no traffic anywhere: trivially fair
    }
    sum * sum / (n * sum_sq)
}

/// Aggregate results of one run. Rates and the fairness index cover
/// only packets generated after the transient window; the raw counters
/// cover the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    /// Normalized system throughput (delivered payload bits over
    /// measurement time and offered traffic).
    pub gamma: f64,
    /// Average delay in seconds over delivered and discarded packets.
    pub delta: f64,
    /// Jain's fairness index over packets successfully received per
    /// node.
    pub jain: f64,
    /// Offered traffic G in bit/s.
    pub offered: f64,
    pub generated: u64,
    pub delivered: u64,
    pub dropped_retry: u64,
    pub dropped_overflow: u64,
    pub dropped_age: u64,
    /// Packets still queued or in flight when the run ended.
    pub pending: u64,
    /// Data frames lost at their destination to a protocol conflict:
    /// the destination was simultaneously addressed by another in-range
    /// transmission, or was itself transmitting without full-duplex
    /// capability.
    pub data_collisions: u64,
    /// Data frames lost at their destination to overlapping in-range
    /// traffic addressed to somebody else (cross-domain interference,
    /// not a protocol conflict).
    pub data_interference: u64,
    /// Data frames erased at their destination by the Bernoulli channel.
    pub data_erasures: u64,
    /// Data frames that reached their destination's decoder (intact or
    /// not).
    pub data_rx_attempts: u64,
}

#[derive(Debug, Clone, Copy)]
struct PacketInfo {
    dst: usize,
    created: Ns,
    bits: u64,
}

/// Ledger of every packet's life cycle, folded into [`SimMetrics`] at
/// the end of a run.
#[derive(Debug, Default)]
pub(crate) struct Ledger {
    packets: BTreeMap<u64, PacketInfo>,
    delivered: BTreeMap<u64, Ns>,
    dropped: BTreeMap<u64, (DiscardReason, Ns)>,
    pub data_collisions: u64,
    pub data_interference: u64,
    pub data_erasures: u64,
    pub data_rx_attempts: u64,
}

impl Ledger {
    pub fn on_generated(&mut self, id: u64, dst: usize, created: Ns, bits: u64) {
        self.packets.insert(id, PacketInfo { dst, created, bits });
    }

    /// Record a delivery; duplicates (retransmissions after a lost ACK)
    /// are ignored.
    pub fn on_delivered(&mut self, id: u64, at: Ns) {
        self.delivered.entry(id).or_insert(at);
    }

    /// Record a drop, unless an earlier (re)transmission of the packet
    /// already made it through.
    pub fn on_dropped(&mut self, id: u64, reason: DiscardReason, at: Ns) {
        if !self.delivered.contains_key(&id) {
            self.dropped.entry(id).or_insert((reason, at));
        }
    }

    pub fn finish(
        &self,
        topology: &Topology,
        cfg: &SimConfig,
        pending: u64,
    ) -> SimMetrics {
        let offered = offered_traffic(topology, cfg);
        let transient = cfg.transient_ns();
        let window_s = cfg.t_sim - cfg.t_s_max;
        let in_window = |id: &u64| self.packets[id].created >= transient;

        let mut bits = 0u64;
        let mut per_node = vec![0u64; topology.len()];
        for (id, _) in self.delivered.iter().filter(|(id, _)| in_window(id)) {
            let info = self.packets[id];
            bits += info.bits;
            per_node[info.dst] += 1;
        }

        let mut delay_sum = 0.0;
        let mut delay_count = 0u64;
        for (id, at) in self
            .delivered
            .iter()
            .chain(self.dropped.iter().map(|(id, (_, at))| (id, at)))
        {
            if in_window(id) {
                delay_sum += (at - self.packets[id].created) as f64 / 1e9;
                delay_count += 1;
            }
        }

        let mut dropped_by = [0u64; 3];
        for (reason, _) in self.dropped.values() {
            let idx = match reason {
                DiscardReason::RetryLimit => 0,
                DiscardReason::QueueOverflow => 1,
                DiscardReason::AgeLimit => 2,
            };
            dropped_by[idx] += 1;
        }

        SimMetrics {
            gamma: if offered > 0.0 {
                bits as f64 / window_s / offered
            } else {
                0.0
            },
            delta: if delay_count > 0 {
                delay_sum / delay_count as f64
            } else {
                0.0
            },
            jain: jain_index(&per_node),
            offered,
            generated: self.packets.len() as u64,
            delivered: self.delivered.len() as u64,
            dropped_retry: dropped_by[0],
            dropped_overflow: dropped_by[1],
            dropped_age: dropped_by[2],
            pending,
            data_collisions: self.data_collisions,
            data_interference: self.data_interference,
            data_erasures: self.data_erasures,
            data_rx_attempts: self.data_rx_attempts,
        }
    }
}
