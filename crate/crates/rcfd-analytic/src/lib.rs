//! Analytical saturation-throughput models for full-duplex MAC
//! protocols: the Bianchi backoff model for the 802.11 DCF (basic and
//! RTS/CTS) extended to FD MAC, an original Markov chain for BACK2F's
//! two frequency-domain contention rounds, and the closed form for
//! RCFD.
//!
//! Probability factors are generic over the [`Scalar`] type, so they
//! can be evaluated in `f64` for production use or in exact rational
//! arithmetic ([`Rational`]) when comparing against brute-force
//! enumerations.

mod back2f;
mod bianchi;
mod error;
mod scalar;
mod tdata;
mod throughput;
mod timings;

pub use back2f::{
    back2f_stationary, p_a_given_kbl, p_i_given_akbl, p_j_given_i, Back2fStationary, MarkovState,
};
pub use bianchi::{bianchi_fixed_point, BianchiSolution};
pub use error::AnalyticError;
pub use scalar::{binomial, powu, Scalar};
pub use tdata::{t_data, TDataMode};
pub use throughput::{
    eta_back2f, eta_back2f_with_ps, eta_dcf, eta_fd, eta_rcfd, ptr_ps, Protocol, ThroughputReport,
};
pub use timings::PhyTimings;

/// Exact rational scalar for zero-rounding-error evaluations.
pub type Rational = num_rational::BigRational;
