use crate::back2f::back2f_stationary;
use crate::bianchi::bianchi_fixed_point;
use crate::error::AnalyticError;
use crate::tdata::{t_data, TDataMode};
use crate::timings::PhyTimings;

/// Protocol a throughput figure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    DcfBasic,
    DcfRtsCts,
    FdMac,
    Back2f,
    Rcfd,
}

impl Protocol {
    pub fn label(&self) -> &'static str {
        match self {
            Protocol::DcfBasic => "dcf-basic",
            Protocol::DcfRtsCts => "dcf-rtscts",
            Protocol::FdMac => "fdmac",
            Protocol::Back2f => "back2f",
            Protocol::Rcfd => "rcfd",
        }
    }
}

/// Normalized saturation throughput together with the intermediate
/// quantities it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub protocol: Protocol,
    pub n: u32,
    pub l_bytes: u32,
    pub r_mbps: u32,
    /// Normalized saturation throughput; may exceed 1 for FD-capable
    /// protocols.
    pub eta: f64,
    pub p_tr: f64,
    pub p_s: f64,
    pub p_s_hd: Option<f64>,
    pub p_s_fd: Option<f64>,
    /// Cycle durations (µs): success, collision, payload.
    pub t_success: f64,
    pub t_collision: f64,
    pub t_d: f64,
    /// Set when P_s was reported as 1 by convention because no
    /// transmission ever occurs (tau = 0).
    pub p_s_undefined: bool,
}

/// Eqs. (8)-(9): probability that some station transmits in a slot and
/// that such a transmission succeeds. At tau = 0 the conditional P_s
/// is undefined; it is reported as 1 (flagged) so throughput formulas
/// evaluate to 0 cleanly.
pub fn ptr_ps(n: u32, tau: f64) -> (f64, f64, bool) {
    assert!((0.0..=1.0).contains(&tau) && n >= 1);
    let p_tr = 1.0 - (1.0 - tau).powi(n as i32);
    if p_tr == 0.0 {
        return (0.0, 1.0, true);
    }
    let p_s = n as f64 * tau * (1.0 - tau).powi(n as i32 - 1) / p_tr;
    (p_tr, p_s, false)
}

/// Success/collision cycle durations (Eqs. 11-12 basic, 13-14 RTS/CTS).
fn dcf_cycle(t: &PhyTimings, t_d: f64, rts_cts: bool) -> (f64, f64) {
    if rts_cts {
        (
            t.t_difs + t.t_rts + t.t_cts + t_d + 3.0 * t.t_sifs + t.t_ack + 4.0 * t.t_p,
            t.t_difs + t.t_rts + t.t_p,
        )
    } else {
        (
            t.t_difs + t_d + t.t_sifs + t.t_ack + 2.0 * t.t_p,
            t.t_difs + t_d + t.t_p,
        )
    }
}

/// Eq. (10): saturation throughput of the 802.11 DCF, with or without
/// the RTS/CTS handshake.
pub fn eta_dcf(
    n: u32,
    timings: &PhyTimings,
    l_bytes: u32,
    r_mbps: u32,
    rts_cts: bool,
    mode: TDataMode,
) -> Result<ThroughputReport, AnalyticError> {
    let t_d = t_data(l_bytes, r_mbps, mode)?;
    let sol = bianchi_fixed_point(n, timings.w_initial, timings.stage_cap)?;
    let (p_tr, p_s, undefined) = ptr_ps(n, sol.tau);
    let (t_s, t_c) = dcf_cycle(timings, t_d, rts_cts);
    let denom = (1.0 - p_tr) * timings.t_slot + p_tr * p_s * t_s + p_tr * (1.0 - p_s) * t_c;
    Ok(ThroughputReport {
        protocol: if rts_cts {
            Protocol::DcfRtsCts
        } else {
            Protocol::DcfBasic
        },
        n,
        l_bytes,
        r_mbps,
        eta: p_tr * p_s * t_d / denom,
        p_tr,
        p_s,
        p_s_hd: None,
        p_s_fd: None,
        t_success: t_s,
        t_collision: t_c,
        t_d,
        p_s_undefined: undefined,
    })
}

/// Eqs. (15)-(18): saturation throughput of FD MAC. The cycle
/// durations are the RTS/CTS ones; a success carries T_d once (HD) or
/// twice (FD pair).
pub fn eta_fd(
    n: u32,
    timings: &PhyTimings,
    l_bytes: u32,
    r_mbps: u32,
    mode: TDataMode,
) -> Result<ThroughputReport, AnalyticError> {
    if n < 2 {
        return Err(AnalyticError::InvalidN { n, required: 2 });
    }
    let t_d = t_data(l_bytes, r_mbps, mode)?;
    let sol = bianchi_fixed_point(n, timings.w_initial, timings.stage_cap)?;
    let tau = sol.tau;
    let (p_tr, p_s, undefined) = ptr_ps(n, tau);
    let nf = n as f64;
    let denom_b = 1.0 - (1.0 - tau).powi(n as i32);
    let p_s_fd =
        nf * tau * (1.0 - tau).powi(n as i32 - 2) * (2.0 - tau) / (2.0 * (nf - 1.0) * denom_b);
    let p_s_hd =
        nf * (nf - 2.0) * tau * (1.0 - tau).powi(n as i32 - 1) / ((nf - 1.0) * denom_b);
    let (t_s, t_c) = dcf_cycle(timings, t_d, true);
    let denom = (1.0 - p_tr) * timings.t_slot + p_tr * p_s * t_s + p_tr * (1.0 - p_s) * t_c;
    Ok(ThroughputReport {
        protocol: Protocol::FdMac,
        n,
        l_bytes,
        r_mbps,
        eta: (t_d * p_tr * p_s_hd + 2.0 * t_d * p_tr * p_s_fd) / denom,
        p_tr,
        p_s,
        p_s_hd: Some(p_s_hd),
        p_s_fd: Some(p_s_fd),
        t_success: t_s,
        t_collision: t_c,
        t_d,
        p_s_undefined: undefined,
    })
}

/// Eqs. (21)-(23): saturation throughput of BACK2F, driven by the
/// Markov-chain success probability.
pub fn eta_back2f(
    n: u32,
    s: u32,
    timings: &PhyTimings,
    l_bytes: u32,
    r_mbps: u32,
    mode: TDataMode,
) -> Result<ThroughputReport, AnalyticError> {
    let t_d = t_data(l_bytes, r_mbps, mode)?;
    let stationary = back2f_stationary(n, s)?;
    eta_back2f_with_ps(n, stationary.p_s, timings, l_bytes, r_mbps, t_d)
}

/// Eq. (21) with an externally supplied P_s (used by tests to explore
/// the collision-free limit).
pub fn eta_back2f_with_ps(
    n: u32,
    p_s: f64,
    timings: &PhyTimings,
    l_bytes: u32,
    r_mbps: u32,
    t_d: f64,
) -> Result<ThroughputReport, AnalyticError> {
    let t = timings;
    let t_s = t.t_difs + 2.0 * t.t_round + t_d + t.t_sifs + t.t_ack + 2.0 * t.t_p;
    let t_c = t.t_difs + 2.0 * t.t_round + t_d + t.t_p;
    Ok(ThroughputReport {
        protocol: Protocol::Back2f,
        n,
        l_bytes,
        r_mbps,
        eta: p_s * t_d / (p_s * t_s + (1.0 - p_s) * t_c),
        p_tr: 1.0,
        p_s,
        p_s_hd: None,
        p_s_fd: None,
        t_success: t_s,
        t_collision: t_c,
        t_d,
        p_s_undefined: false,
    })
}

/// Eqs. (24)-(26): saturation throughput of RCFD. There are no idle
/// slots and no collisions; an exchange is full-duplex with
/// probability 1/(N-1).
pub fn eta_rcfd(
    n: u32,
    timings: &PhyTimings,
    l_bytes: u32,
    r_mbps: u32,
    mode: TDataMode,
) -> Result<ThroughputReport, AnalyticError> {
    if n < 2 {
        return Err(AnalyticError::InvalidN { n, required: 2 });
    }
    let t_d = t_data(l_bytes, r_mbps, mode)?;
    let t = timings;
    let p_s_fd = 1.0 / (n as f64 - 1.0);
    let p_s_hd = 1.0 - p_s_fd;
    let t_s =
        t.t_difs + 3.0 * t.t_round + t.t_header + t_d + t.t_sifs + t.t_ack + 2.0 * t.t_p;
    Ok(ThroughputReport {
        protocol: Protocol::Rcfd,
        n,
        l_bytes,
        r_mbps,
        eta: (t_d * p_s_hd + 2.0 * t_d * p_s_fd) / t_s,
        p_tr: 1.0,
        p_s: 1.0,
        p_s_hd: Some(p_s_hd),
        p_s_fd: Some(p_s_fd),
        t_success: t_s,
        t_collision: t_s,
        t_d,
        p_s_undefined: false,
    })
}
