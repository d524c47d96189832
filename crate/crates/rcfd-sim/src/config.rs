//! Per-run configuration: protocol choice, PHY timings, payload/rate,
//! traffic model and the simulation horizon.

use rcfd_analytic::{t_data, PhyTimings, TDataMode};
use rcfd_mac::{us_to_ns, MacTimings, Ns};

use crate::error::SimError;
use crate::topology::Topology;

/// MAC protocol under simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Dcf,
    DcfRtsCts,
    FdMac,
    Back2f,
    Rcfd,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::Dcf,
        Protocol::DcfRtsCts,
        Protocol::FdMac,
        Protocol::Back2f,
        Protocol::Rcfd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Dcf => "dcf",
            Protocol::DcfRtsCts => "dcf-rtscts",
            Protocol::FdMac => "fdmac",
            Protocol::Back2f => "back2f",
            Protocol::Rcfd => "rcfd",
        }
    }
}

/// All knobs of one simulation run. Defaults reproduce the simulation
/// parameter table (times in seconds unless noted).
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub phy: PhyTimings,
    /// Payload length in bytes.
    pub l_bytes: u32,
    /// PHY data rate in Mbit/s.
    pub r_mbps: u32,
    pub tdata_mode: TDataMode,
    /// Application start-time rate (1/s).
    pub lambda_s: f64,
    /// Latest application start (s); also the transient window removed
    /// from the metrics.
    pub t_s_max: f64,
    /// Mean ON period (s).
    pub t_on: f64,
    /// Mean OFF period (s).
    pub t_off: f64,
    /// Source rate during ON (bit/s).
    pub r_s_bps: f64,
    /// Simulated time (s).
    pub t_sim: f64,
    pub n_tx_max: u32,
    pub q_max: usize,
    /// Age discard threshold (s).
    pub delta_max: f64,
    /// Bernoulli erasure probability per frame and receiver.
    pub loss_p: f64,
    /// RCFD subcarrier modulation order; `None` picks the smallest one
    /// fitting the node count.
    pub modulation_order: Option<u16>,
    pub seed: u64,
}

impl SimConfig {
    /// Simulation-parameter-table defaults for one protocol and
    /// payload/rate working point.
    pub fn new(protocol: Protocol, l_bytes: u32, r_mbps: u32) -> Self {
        SimConfig {
            protocol,
            phy: PhyTimings::analysis_defaults(),
            l_bytes,
            r_mbps,
            tdata_mode: TDataMode::OfdmExact,
            lambda_s: 0.5,
            t_s_max: 5.0,
            t_on: 0.1,
            t_off: 0.1,
            r_s_bps: 1_000_000.0,
            t_sim: 20.0,
            n_tx_max: 7,
            q_max: 1000,
            delta_max: 1.0,
            loss_p: 0.0,
            modulation_order: None,
            seed: 0,
        }
    }

    /// Structured scenario, case I: long packets at the lowest rate.
    pub fn grid_case_i(protocol: Protocol) -> Self {
        Self::new(protocol, 1000, 6)
    }

    /// Structured scenario, case II: short packets at the highest rate.
    pub fn grid_case_ii(protocol: Protocol) -> Self {
        Self::new(protocol, 200, 54)
    }

    /// Random scenario working point (erasures at the 90% design
    /// point).
    pub fn random_scenario(protocol: Protocol) -> Self {
        let mut cfg = Self::new(protocol, 500, 18);
        cfg.loss_p = 0.1;
        cfg
    }

    pub fn validate(&self, topology: &Topology) -> Result<(), SimError> {
        if !self.phy.validate() {
            return Err(SimError::InvalidTimings);
        }
        if !(0.0..=1.0).contains(&self.loss_p) {
            return Err(SimError::InvalidLossProbability(self.loss_p));
        }
        for (name, value) in [
            ("lambda_s", self.lambda_s),
            ("t_on", self.t_on),
            ("t_off", self.t_off),
            ("r_s_bps", self.r_s_bps),
            ("t_sim", self.t_sim),
            ("delta_max", self.delta_max),
        ] {
            if value <= 0.0 {
                return Err(SimError::NonPositiveParameter { name, value });
            }
        }
        if self.t_sim <= self.t_s_max {
            return Err(SimError::SimulationTooShort {
                t_sim: self.t_sim,
                transient: self.t_s_max,
            });
        }
        if self.protocol == Protocol::Rcfd {
            self.resolved_modulation_order(topology.len())?;
        }
        t_data(self.l_bytes, self.r_mbps, self.tdata_mode)?;
        Ok(())
    }

    /// Modulation order actually used for the RCFD subcarrier map.
    pub fn resolved_modulation_order(&self, nodes: usize) -> Result<u16, SimError> {
        let s = self.phy.subcarriers as u16;
        let fits = |m: u16| m as usize * s as usize / 2 >= nodes;
        match self.modulation_order {
            Some(m) if fits(m) => Ok(m),
            Some(m) => Err(SimError::MapCapacity {
                nodes,
                m,
                s,
                capacity: m as usize * s as usize / 2,
            }),
            None => Ok((1..).find(|&m| fits(m)).unwrap()),
        }
    }

    /// Integer-nanosecond timing table for this working point.
    pub fn mac_timings(&self) -> Result<MacTimings, SimError> {
        let data_us = t_data(self.l_bytes, self.r_mbps, self.tdata_mode)?;
        Ok(MacTimings::from_phy(&self.phy, data_us))
    }

    pub fn t_sim_ns(&self) -> Ns {
        us_to_ns(self.t_sim * 1e6)
    }

    pub fn transient_ns(&self) -> Ns {
        us_to_ns(self.t_s_max * 1e6)
    }

    pub fn delta_max_ns(&self) -> Ns {
        us_to_ns(self.delta_max * 1e6)
    }
}
