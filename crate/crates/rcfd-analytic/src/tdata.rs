use crate::error::AnalyticError;

/// How the payload transmission time T_d is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TDataMode {
    /// 802.11g OFDM frame arithmetic: preamble + signal field plus
    /// data symbols covering service bits, payload and tail.
    OfdmExact,
    /// OFDM-exact plus a fixed 40 µs offset; reproduces the
    /// throughput tables of the source analysis (T_d = 1400 µs at
    /// L = 1000 B, R = 6 Mbit/s).
    Calibrated,
    /// Fixed value in µs, bypassing the frame arithmetic.
    Override(f64),
}

/// Data bits carried by one 4 µs OFDM symbol at each supported rate.
fn bits_per_symbol(r_mbps: u32) -> Option<u32> {
    Some(match r_mbps {
        6 => 24,
        9 => 36,
        12 => 48,
        18 => 72,
        24 => 96,
        36 => 144,
        48 => 192,
        54 => 216,
        _ => return None,
    })
}

/// Transmission time T_d in µs of an L-byte payload at R Mbit/s.
pub fn t_data(l_bytes: u32, r_mbps: u32, mode: TDataMode) -> Result<f64, AnalyticError> {
    if let TDataMode::Override(v) = mode {
        return Ok(v);
    }
    if l_bytes == 0 {
        return Err(AnalyticError::EmptyPayload);
    }
    let bps = bits_per_symbol(r_mbps).ok_or(AnalyticError::UnsupportedRate(r_mbps))?;
    let bits = 16 + 8 * l_bytes + 6; // service + payload + tail
    let symbols = bits.div_ceil(bps);
    let exact = 20 + 4 * symbols;
    Ok(match mode {
        TDataMode::OfdmExact => exact as f64,
        TDataMode::Calibrated => exact as f64 + 40.0,
        TDataMode::Override(_) => unreachable!(),
    })
}
