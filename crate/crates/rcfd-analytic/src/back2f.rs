//! Markov-chain analysis of the BACK2F frequency-domain backoff
//! scheme. The chain tracks (x, c, y): how many nodes won the first
//! contention round, the lowest subcarrier of that round, and how many
//! nodes won the second round. Transition probabilities factorize as
//! p_{j|i} * p_{i|a,k,b,l} * p_{a|k,b,l}; the three factors are
//! implemented exactly as printed and are generic over the scalar so
//! they can be evaluated without rounding error.

use crate::error::AnalyticError;
use crate::scalar::{binomial_s, powu, Scalar};

/// State of the BACK2F chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarkovState {
    /// Nodes that won round 1 (1..=N).
    pub x: u32,
    /// Lowest-frequency subcarrier of round 1 (0..S).
    pub c: u32,
    /// Nodes that won round 2 (1..=x).
    pub y: u32,
}

/// P{y = j | x = i}: j of the i first-round winners pick the lowest
/// subcarrier of the second round.
pub fn p_j_given_i<T: Scalar>(i: u32, j: u32, s: u32) -> T {
    if j < 1 || j > i {
        return T::zero();
    }
    if j == i {
        return powu(T::ratio(1, s as u64), i - 1);
    }
    // sum over the winning subcarrier c of round 2 (the last one can
    // only produce j = i)
    let mut sum = T::zero();
    for c in 0..s - 1 {
        sum = sum + powu(T::ratio((s - c - 1) as u64, s as u64), i - j);
    }
    binomial_s::<T>(i, j) * powu(T::ratio(1, s as u64), j) * sum
}

/// P{x(t) = i | c(t) = a, previous state (k, b, l)}: Eq. (44).
pub fn p_i_given_akbl<T: Scalar>(i: u32, a: u32, k: u32, b: u32, l: u32, n: u32, s: u32) -> T {
    if i < 1 || i > n || a >= s || b >= s || l > k || k > n {
        return T::zero();
    }
    if k != l {
        // scenario I: k-l nodes sit at 0, the l round-2 winners redraw
        if a != 0 || i < k - l || i > k {
            return T::zero();
        }
        let m = i + l - k;
        return binomial_s::<T>(l, m)
            * powu(T::ratio(1, s as u64), m)
            * powu(T::ratio((s - 1) as u64, s as u64), k - i);
    }
    if k == n {
        // scenario III: all N nodes redraw; conditioned on min = a
        let sa = (s - a) as u64;
        let num = binomial_s::<T>(n, i)
            * powu(T::ratio(1, sa), i)
            * powu(T::ratio(sa - 1, sa), n - i);
        let den = T::one() - powu(T::ratio(sa - 1, sa), n);
        return num / den;
    }
    // scenario II: k = l != N; group A = N-k round-1 losers with
    // residual backoff in 1..=S-b-1, group B = k round-2 winners
    // redrawing in 0..=S-1
    if a == 0 {
        if i > k {
            return T::zero();
        }
        let num = binomial_s::<T>(k, i)
            * powu(T::ratio(1, s as u64), i)
            * powu(T::ratio((s - 1) as u64, s as u64), k - i);
        let den = T::one() - powu(T::ratio((s - 1) as u64, s as u64), k);
        num / den
    } else if a == s - b - 1 {
        if i < n - k {
            return T::zero();
        }
        let m = i - (n - k);
        let bp = (b + 1) as u64;
        binomial_s::<T>(k, m)
            * powu(T::ratio(1, bp), m)
            * powu(T::ratio(bp - 1, bp), n - i)
    } else if a < s - b - 1 {
        // both groups can hold the minimum a; sum over the split
        let pa = (s - b - a) as u64; // group A values >= a among 1..=S-b-1
        let pb = (s - a) as u64; // group B values >= a among 0..=S-1
        let mut num = T::zero();
        let lo = i.saturating_sub(k);
        let hi = (n - k).min(i);
        for nn in lo..=hi {
            num = num
                + binomial_s::<T>(n - k, nn)
                    * powu(T::ratio(1, pa), nn)
                    * powu(T::ratio(pa - 1, pa), n - k - nn)
                    * binomial_s::<T>(k, i - nn)
                    * powu(T::ratio(1, pb), i - nn)
                    * powu(T::ratio(pb - 1, pb), k + nn - i);
        }
        let den = T::one()
            - powu(T::ratio(pb - 1, pb), k) * powu(T::ratio(pa - 1, pa), n - k);
        num / den
    } else {
        T::zero()
    }
}

/// P{c(t) = a | previous state (k, b, l)}: Eq. (52).
pub fn p_a_given_kbl<T: Scalar>(a: u32, k: u32, b: u32, l: u32, n: u32, s: u32) -> T {
    if a >= s || b >= s || l > k || k > n {
        return T::zero();
    }
    if k != l {
        return if a == 0 { T::one() } else { T::zero() };
    }
    if k == n {
        return powu(T::ratio((s - a) as u64, s as u64), n)
            - powu(T::ratio((s - a - 1) as u64, s as u64), n);
    }
    // k = l != N
    if a == 0 {
        T::one() - powu(T::ratio((s - 1) as u64, s as u64), k)
    } else if a <= s - b - 1 {
        let sb = (s - b - 1) as u64; // group A support size
        powu(T::ratio((s - a) as u64, s as u64), k)
            * powu(T::ratio(sb - (a - 1) as u64, sb), n - k)
            - powu(T::ratio((s - a - 1) as u64, s as u64), k)
                * powu(T::ratio(sb - a as u64, sb), n - k)
    } else {
        T::zero()
    }
}

/// Stationary distribution of the BACK2F chain and the derived success
/// probability P_s = sum_{i,a} pi(i, a, 1).
#[derive(Debug, Clone)]
pub struct Back2fStationary {
    n: u32,
    s: u32,
    pi: Vec<f64>,
    pub p_s: f64,
    pub iterations: u32,
}

impl Back2fStationary {
    fn pair_index(i: u32, j: u32) -> usize {
        (i as usize * (i as usize - 1)) / 2 + (j as usize - 1)
    }

    fn index(&self, st: MarkovState) -> usize {
        self.s as usize * Self::pair_index(st.x, st.y) + st.c as usize
    }

    pub fn pi(&self, st: MarkovState) -> f64 {
        assert!(st.y >= 1 && st.y <= st.x && st.x <= self.n && st.c < self.s);
        self.pi[self.index(st)]
    }

    /// All states of the candidate space with their stationary mass.
    pub fn iter(&self) -> impl Iterator<Item = (MarkovState, f64)> + '_ {
        (1..=self.n).flat_map(move |x| {
            (1..=x).flat_map(move |y| {
                (0..self.s).map(move |c| {
                    let st = MarkovState { x, c, y };
                    (st, self.pi[self.index(st)])
                })
            })
        })
    }
}

/// Binomial pmf over 0..=n of hits at probability `p`.
fn binom_pmf(n: u32, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|m| {
            binomial_s::<f64>(n, m) * powu(p, m) * powu(1.0 - p, n - m)
        })
        .collect()
}

/// Row of the aggregated transition kernel for a source scenario-II
/// class (k = l != N, round-1 minimum b): probability of landing in
/// (x = i, c = a), laid out as (i-1)*S + a. Built from the same
/// formulas as [`p_i_given_akbl`]/[`p_a_given_kbl`], with the Eq. (42)
/// inner sum evaluated as a convolution of the two binomial pmfs.
fn scenario2_row(k: u32, b: u32, n: u32, s: u32) -> Vec<f64> {
    let mut row = vec![0.0; (n * s) as usize];
    let col = |i: u32, a: u32| ((i - 1) * s + a) as usize;
    for a in 0..=(s - b - 1).min(s - 1) {
        let pa: f64 = p_a_given_kbl(a, k, b, k, n, s);
        if pa == 0.0 {
            continue;
        }
        if a == 0 || a == s - b - 1 {
            for i in 1..=n {
                row[col(i, a)] = pa * p_i_given_akbl::<f64>(i, a, k, b, k, n, s);
            }
        } else {
            // joint pmf of winners from group A (residuals >= a,
            // support size S-b-a) and group B (redraws >= a, support
            // size S-a), conditioned on at least one hit
            let ga = binom_pmf(n - k, 1.0 / (s - b - a) as f64);
            let gb = binom_pmf(k, 1.0 / (s - a) as f64);
            let miss = ga[0] * gb[0];
            for (na, wa) in ga.iter().enumerate() {
                for (nb, wb) in gb.iter().enumerate() {
                    let i = na + nb;
                    if i >= 1 {
                        row[col(i as u32, a)] += pa * wa * wb / (1.0 - miss);
                    }
                }
            }
        }
    }
    row
}

/// Solve for the stationary distribution by power iteration on the
/// factorized kernel; the dense transition matrix is never formed.
pub fn back2f_stationary(n: u32, s: u32) -> Result<Back2fStationary, AnalyticError> {
    assert!(n >= 1 && s >= 2);
    let tri = (n as usize * (n as usize + 1)) / 2;
    let states = tri * s as usize;
    let su = s as usize;

    // p_{j|i} lookup, row-summed to 1
    let pji: Vec<Vec<f64>> = (0..=n)
        .map(|i| (0..=i).map(|j| p_j_given_i::<f64>(i, j, s)).collect())
        .collect();

    // scenario-I kernels: landing x-distribution per (k, l), a = 0 only
    let k1: Vec<Vec<Vec<f64>>> = (0..=n)
        .map(|k| {
            (0..k)
                .map(|l| {
                    (1..=n)
                        .map(|i| p_i_given_akbl::<f64>(i, 0, k, 0, l, n, s))
                        .collect()
                })
                .collect()
        })
        .collect();
    // scenario-II kernels per (k, b); b = S-1 is unreachable for k < N
    let k2: Vec<Vec<f64>> = (1..n)
        .flat_map(|k| (0..s - 1).map(move |b| (k, b)))
        .map(|(k, b)| scenario2_row(k, b, n, s))
        .collect();
    // scenario-III kernel (k = l = N; independent of b)
    let mut k3 = vec![0.0; (n * s) as usize];
    for a in 0..s {
        let pa: f64 = p_a_given_kbl(a, n, 0, n, n, s);
        for i in 1..=n {
            k3[((i - 1) * s + a) as usize] = pa * p_i_given_akbl::<f64>(i, a, n, 0, n, n, s);
        }
    }

    // uniform start over the valid candidate space
    let mut pi = vec![0.0f64; states];
    let mut valid = 0usize;
    for x in 1..=n {
        for y in 1..=x {
            for c in 0..s {
                if c == s - 1 && x != n {
                    continue;
                }
                pi[su * Back2fStationary::pair_index(x, y) + c as usize] = 1.0;
                valid += 1;
            }
        }
    }
    for v in &mut pi {
        *v /= valid as f64;
    }

    let cap = 10_000;
    let mut m = vec![0.0f64; (n * s) as usize];
    for it in 0..cap {
        for v in &mut m {
            *v = 0.0;
        }
        // scenario II sources
        let mut row_idx = 0;
        for k in 1..n {
            for b in 0..s - 1 {
                let w = pi[su * Back2fStationary::pair_index(k, k) + b as usize];
                if w > 0.0 {
                    let row = &k2[row_idx];
                    for (mv, rv) in m.iter_mut().zip(row) {
                        *mv += w * rv;
                    }
                }
                row_idx += 1;
            }
        }
        // scenario III source
        let w3: f64 = (0..su)
            .map(|b| pi[su * Back2fStationary::pair_index(n, n) + b])
            .sum();
        if w3 > 0.0 {
            for (mv, rv) in m.iter_mut().zip(&k3) {
                *mv += w3 * rv;
            }
        }
        // scenario I sources (land on a = 0)
        for k in 2..=n {
            for l in 1..k {
                let w: f64 = (0..su)
                    .map(|b| pi[su * Back2fStationary::pair_index(k, l) + b])
                    .sum();
                if w > 0.0 {
                    for i in 1..=n {
                        m[((i - 1) * s) as usize] += w * k1[k as usize][l as usize][i as usize - 1];
                    }
                }
            }
        }
        // expand back to the full state space and measure the change
        let mut diff = 0.0;
        for i in 1..=n {
            for a in 0..s {
                let mass = m[((i - 1) * s + a) as usize];
                for j in 1..=i {
                    let idx = su * Back2fStationary::pair_index(i, j) + a as usize;
                    let next = pji[i as usize][j as usize] * mass;
                    diff += (next - pi[idx]).abs();
                    pi[idx] = next;
                }
            }
        }
        if diff < 1e-10 {
            let p_s = (1..=n)
                .flat_map(|i| (0..s).map(move |a| (i, a)))
                .map(|(i, a)| pi[su * Back2fStationary::pair_index(i, 1) + a as usize])
                .sum();
            return Ok(Back2fStationary {
                n,
                s,
                pi,
                p_s,
                iterations: it + 1,
            });
        }
    }
    Err(AnalyticError::NonConvergence {
        what: "BACK2F stationary distribution",
        iterations: cap,
        defect: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use approx::assert_relative_eq;

    fn rat(n: u64, d: u64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn p_j_examples() {
        assert_eq!(p_j_given_i::<Rational>(1, 1, 52), rat(1, 1));
        assert_eq!(p_j_given_i::<Rational>(2, 2, 52), rat(1, 52));
        // brute force over 4^3 draws: 18 outcomes with exactly two at
        // the minimum
        assert_eq!(p_j_given_i::<Rational>(3, 2, 4), rat(18, 64));
        assert_eq!(p_j_given_i::<Rational>(3, 4, 4), rat(0, 1));
    }

    #[test]
    fn p_i_examples() {
        // scenario I can only produce a = 0
        assert_eq!(p_i_given_akbl::<f64>(2, 1, 3, 0, 1, 5, 4), 0.0);
        // k=3, l=1, a=0, i=2: the two group-B nodes win, the group-C
        // node avoids 0
        assert_eq!(p_i_given_akbl::<Rational>(2, 0, 3, 0, 1, 5, 4), rat(3, 4));
        // k=l=N=2, a=0: conditional binomial
        assert_eq!(p_i_given_akbl::<Rational>(2, 0, 2, 0, 2, 2, 4), rat(1, 7));
    }

    #[test]
    fn p_a_examples() {
        assert_eq!(p_a_given_kbl::<Rational>(0, 3, 1, 1, 5, 4), rat(1, 1));
        assert_eq!(p_a_given_kbl::<Rational>(2, 3, 1, 1, 5, 4), rat(0, 1));
        // k=l=N=2, S=4, a=1: (3/4)^2 - (2/4)^2
        assert_eq!(p_a_given_kbl::<Rational>(1, 2, 0, 2, 2, 4), rat(5, 16));
    }

    #[test]
    fn distributions_sum_to_one() {
        for n in 1..=5u32 {
            for s in [4u32, 6, 8] {
                for i in 1..=n {
                    let total: f64 = (1..=i).map(|j| p_j_given_i::<f64>(i, j, s)).sum();
                    assert_relative_eq!(total, 1.0, epsilon = 1e-9);
                }
                for k in 1..=n {
                    for l in 1..=k {
                        for b in 0..s {
                            if b == s - 1 && k != n {
                                continue;
                            }
                            let pa_sum: f64 =
                                (0..s).map(|a| p_a_given_kbl::<f64>(a, k, b, l, n, s)).sum();
                            assert_relative_eq!(pa_sum, 1.0, epsilon = 1e-9);
                            for a in 0..s {
                                let pa: f64 = p_a_given_kbl(a, k, b, l, n, s);
                                if pa == 0.0 {
                                    continue;
                                }
                                let pi_sum: f64 = (1..=n)
                                    .map(|i| p_i_given_akbl::<f64>(i, a, k, b, l, n, s))
                                    .sum();
                                assert_relative_eq!(pi_sum, 1.0, epsilon = 1e-9);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lone_node_always_succeeds() {
        for s in [2u32, 4, 52] {
            let st = back2f_stationary(1, s).unwrap();
            assert_relative_eq!(st.p_s, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn stationary_is_a_distribution() {
        let st = back2f_stationary(4, 6).unwrap();
        let total: f64 = st.iter().map(|(_, p)| p).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        assert!(st.iter().all(|(_, p)| p >= 0.0));
        // unreachable corner: c = S-1 with x < N carries no mass
        for x in 1..4 {
            for y in 1..=x {
                assert_eq!(st.pi(MarkovState { x, c: 5, y }), 0.0);
            }
        }
    }

    #[test]
    fn kernel_row_matches_direct_formula() {
        // the convolution-built scenario-II row must agree with the
        // printed per-entry expression
        let (n, s) = (6u32, 8u32);
        for k in 1..n {
            for b in 0..s - 1 {
                let row = scenario2_row(k, b, n, s);
                for a in 0..s {
                    for i in 1..=n {
                        let direct = p_a_given_kbl::<f64>(a, k, b, k, n, s)
                            * p_i_given_akbl::<f64>(i, a, k, b, k, n, s);
                        assert_relative_eq!(
                            row[((i - 1) * s + a) as usize],
                            direct,
                            epsilon = 1e-12,
                            max_relative = 1e-9
                        );
                    }
                }
            }
        }
    }
}
