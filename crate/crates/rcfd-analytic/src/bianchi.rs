use crate::error::AnalyticError;

/// Fixed point of the saturation backoff model for the 802.11 DCF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BianchiSolution {
    /// Probability that a station transmits in a randomly chosen slot.
    pub tau: f64,
    /// Conditional collision probability seen by a transmitting station.
    pub p: f64,
    /// Fixed-point defect |tau - f(p(tau))|.
    pub residual: f64,
}

/// tau as a function of the collision probability. The closed form
/// tau = 2(1-2p) / [(1-2p)(W+1) + pW(1-(2p)^m)] is rewritten with the
/// geometric sum 1-(2p)^m = (1-2p) * sum_{i<m} (2p)^i, which removes
/// the removable singularity at p = 1/2.
fn tau_of_p(p: f64, w: u32, m: u32) -> f64 {
    let mut geo = 0.0;
    let mut pow = 1.0;
    for _ in 0..m {
        geo += pow;
        pow *= 2.0 * p;
    }
    2.0 / ((w as f64 + 1.0) + p * w as f64 * geo)
}

/// Solve the coupled equations tau = f(p), p = 1 - (1-tau)^(N-1) by
/// bisection on tau; g(tau) = tau - f(p(tau)) is strictly increasing.
pub fn bianchi_fixed_point(n: u32, w: u32, m: u32) -> Result<BianchiSolution, AnalyticError> {
    assert!(n >= 1 && w >= 1);
    let g = |tau: f64| {
        let p = 1.0 - (1.0 - tau).powi(n as i32 - 1);
        tau - tau_of_p(p, w, m)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let p = 1.0 - (1.0 - tau).powi(n as i32 - 1);
    let residual = (tau - tau_of_p(p, w, m)).abs();
    if residual >= 1e-10 {
        return Err(AnalyticError::NonConvergence {
            what: "Bianchi fixed point",
            iterations: 200,
            defect: residual,
        });
    }
    Ok(BianchiSolution { tau, p, residual })
}
