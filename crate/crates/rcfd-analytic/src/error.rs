#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("unsupported PHY rate {0} Mbit/s (802.11g OFDM rates only)")]
    UnsupportedRate(u32),
    #[error("payload length must be positive")]
    EmptyPayload,
    #[error("protocol requires N >= {required}, got {n}")]
    InvalidN { n: u32, required: u32 },
    #[error("{what} did not converge within {iterations} iterations (defect {defect:e})")]
    NonConvergence {
        what: &'static str,
        iterations: u32,
        defect: f64,
    },
}
