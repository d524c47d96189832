/// PHY/MAC timing parameters and contention constants shared by all
/// analytical models. Durations are in microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyTimings {
    pub t_ack: f64,
    pub t_rts: f64,
    pub t_cts: f64,
    pub t_sifs: f64,
    pub t_difs: f64,
    /// Propagation delay.
    pub t_p: f64,
    /// Idle backoff slot.
    pub t_slot: f64,
    /// Duration of one frequency-domain contention round.
    pub t_round: f64,
    /// Channel scanning time before frequency-domain contention;
    /// equal to t_difs for a fair comparison across protocols.
    pub t_scan: f64,
    /// RCFD header time (Eq. 26 only); unspecified in the source,
    /// defaults to 0 per the calibration fit.
    pub t_header: f64,
    /// Initial contention window W.
    pub w_initial: u32,
    /// Backoff stage cap m.
    pub stage_cap: u32,
    /// Number of OFDM subcarriers usable for contention.
    pub subcarriers: u32,
}

impl PhyTimings {
    /// Values from the theoretical-analysis parameter table
    /// (IEEE 802.11g at desk scale).
    pub fn analysis_defaults() -> Self {
        PhyTimings {
            t_ack: 50.0,
            t_rts: 58.0,
            t_cts: 50.0,
            t_sifs: 10.0,
            t_difs: 28.0,
            t_p: 1.0,
            t_slot: 9.0,
            t_round: 6.0,
            t_scan: 28.0,
            t_header: 0.0,
            w_initial: 16,
            stage_cap: 6,
            subcarriers: 52,
        }
    }

    /// Time from the start of a channel access attempt to the data
    /// transmission: scanning plus the three contention rounds.
    pub fn t_access(&self) -> f64 {
        self.t_scan + 3.0 * self.t_round
    }

    pub fn validate(&self) -> bool {
        let d = [
            self.t_ack,
            self.t_rts,
            self.t_cts,
            self.t_sifs,
            self.t_difs,
            self.t_p,
            self.t_slot,
            self.t_round,
            self.t_scan,
            self.t_header,
        ];
        d.iter().all(|&x| x >= 0.0 && x.is_finite())
            && self.w_initial >= 1
            && self.subcarriers >= 2
    }
}

impl Default for PhyTimings {
    fn default() -> Self {
        Self::analysis_defaults()
    }
}
