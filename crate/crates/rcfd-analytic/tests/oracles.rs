//! Independent oracles: Monte Carlo simulations of the underlying
//! random processes and exact-rational brute-force enumerations, all
//! checked against the closed-form implementations.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rcfd_analytic::{
    back2f_stationary, bianchi_fixed_point, eta_dcf, p_a_given_kbl, p_i_given_akbl, p_j_given_i,
    ptr_ps, PhyTimings, Rational, Scalar, TDataMode,
};

/// Standard error from batch means (the sequences are autocorrelated).
fn batch_se(samples: &[f64], batches: usize) -> (f64, f64) {
    let bs = samples.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| samples[b * bs..(b + 1) * bs].iter().sum::<f64>() / bs as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}

/// Monte Carlo of the single-station Bianchi backoff chain: the
/// station sees a collision with the fixed-point probability p on each
/// attempt; the long-run fraction of slots spent transmitting must
/// match tau.
#[test]
fn bianchi_tau_monte_carlo() {
    let (n, w, m) = (10u32, 16u32, 6u32);
    let sol = bianchi_fixed_point(n, w, m).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0xb1a2c41);
    let slots = 10_000_000usize;
    let mut samples = Vec::with_capacity(slots);
    let mut stage = 0u32;
    let mut counter = rng.gen_range(0..w);
    for _ in 0..slots {
        if counter == 0 {
            samples.push(1.0);
            stage = if rng.gen_bool(sol.p) {
                (stage + 1).min(m)
            } else {
                0
            };
            counter = rng.gen_range(0..w * 2u32.pow(stage));
        } else {
            samples.push(0.0);
            counter -= 1;
        }
    }
    let (tau_hat, se) = batch_se(&samples, 1000);
    assert!(
        (tau_hat - sol.tau).abs() <= 3.0 * se,
        "tau_hat={tau_hat}, tau={}, se={se}",
        sol.tau
    );
}

/// Renewal-reward Monte Carlo of Eq. (10): sample slot outcomes with
/// the model probabilities and compare the empirical throughput.
#[test]
fn eta_dcf_renewal_reward_monte_carlo() {
    let t = PhyTimings::analysis_defaults();
    let report = eta_dcf(10, &t, 1000, 6, false, TDataMode::Calibrated).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0xdcf0);
    let (mut busy_time, mut payload) = (0.0f64, 0.0f64);
    for _ in 0..10_000_000 {
        let u: f64 = rng.gen();
        if u < 1.0 - report.p_tr {
            busy_time += t.t_slot;
        } else if u < 1.0 - report.p_tr + report.p_tr * report.p_s {
            busy_time += report.t_success;
            payload += report.t_d;
        } else {
            busy_time += report.t_collision;
        }
    }
    let eta_hat = payload / busy_time;
    assert!(
        (eta_hat - report.eta).abs() / report.eta <= 0.005,
        "eta_hat={eta_hat}, eta={}",
        report.eta
    );
}

#[test]
fn ptr_ps_matches_binomial_enumeration() {
    // N=3, tau=0.2: enumerate the 2^3 transmit patterns
    let tau = 0.2f64;
    let n = 3;
    let mut p_any = 0.0;
    let mut p_single = 0.0;
    for mask in 0u32..1 << n {
        let k = mask.count_ones();
        let prob = tau.powi(k as i32) * (1.0 - tau).powi((n - k) as i32);
        if k >= 1 {
            p_any += prob;
        }
        if k == 1 {
            p_single += prob;
        }
    }
    let (p_tr, p_s, _) = ptr_ps(n, tau);
    assert!((p_tr - p_any).abs() < 1e-12);
    assert!((p_s - p_single / p_any).abs() < 1e-12);
}

/// Monte Carlo of the BACK2F round dynamics (Algorithm 1 under
/// saturation): round-1 losers keep the residual backoff, round-2
/// losers sit at 0, round-2 winners redraw.
#[test]
fn back2f_ps_matches_chain_model_monte_carlo() {
    // Simulate the per-slot model the Markov chain describes: round-1
    // losers hold a residual backoff uniform on {1..S-b-1} given the
    // round-1 minimum b, round-2 losers sit at 0, round-2 winners
    // redraw uniformly. The chain's stationary P_s must match this
    // independent simulation within Monte Carlo error.
    let (n, s) = (3usize, 4u32);
    let stationary = back2f_stationary(n as u32, s).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0xbac2f);
    let mut myback: Vec<u32> = (0..n).map(|_| rng.gen_range(0..s)).collect();
    let slots = 1_000_000usize;
    let mut samples = Vec::with_capacity(slots);
    for _ in 0..slots {
        let minback = *myback.iter().min().unwrap();
        let winners: Vec<usize> = (0..n).filter(|&i| myback[i] == minback).collect();
        for v in myback.iter_mut() {
            if *v > minback {
                *v = rng.gen_range(1..s - minback); // fresh residual
            }
        }
        let round2: Vec<u32> = winners.iter().map(|_| rng.gen_range(0..s)).collect();
        let min2 = *round2.iter().min().unwrap();
        let mut second = 0;
        for (w, &v) in winners.iter().zip(&round2) {
            if v == min2 {
                second += 1;
                myback[*w] = rng.gen_range(0..s); // transmitted, new packet
            } else {
                myback[*w] = 0; // lost round 2
            }
        }
        samples.push(if second == 1 { 1.0 } else { 0.0 });
    }
    let (ps_hat, se) = batch_se(&samples, 1000);
    assert!(
        (ps_hat - stationary.p_s).abs() <= 3.0 * se,
        "ps_hat={ps_hat}, P_s={}, se={se}",
        stationary.p_s
    );
}

#[test]
fn back2f_chain_approximates_literal_algorithm() {
    // In the literal algorithm a round-1 loser *carries* its decremented
    // backoff, so after several consecutive losses its residual support
    // shrinks below {1..S-b-1}; the chain state (x, c, y) cannot see
    // that, which makes the chain a (tight) approximation of the real
    // dynamics. Measured gap at this worst case (tiny S): ~0.006
    // absolute; at S = 52 it is below 0.002.
    let (n, s) = (3usize, 4u32);
    let stationary = back2f_stationary(n as u32, s).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0xbac2f);
    let mut myback: Vec<u32> = (0..n).map(|_| rng.gen_range(0..s)).collect();
    let slots = 1_000_000usize;
    let mut successes = 0usize;
    for _ in 0..slots {
        let minback = *myback.iter().min().unwrap();
        let winners: Vec<usize> = (0..n).filter(|&i| myback[i] == minback).collect();
        for v in myback.iter_mut() {
            *v -= minback;
        }
        let round2: Vec<u32> = winners.iter().map(|_| rng.gen_range(0..s)).collect();
        let min2 = *round2.iter().min().unwrap();
        let mut second = 0;
        for (w, &v) in winners.iter().zip(&round2) {
            if v == min2 {
                second += 1;
                myback[*w] = rng.gen_range(0..s); // transmitted, new packet
            } else {
                myback[*w] = 0; // lost round 2
            }
        }
        if second == 1 {
            successes += 1;
        }
    }
    let ps_hat = successes as f64 / slots as f64;
    assert!(
        (ps_hat - stationary.p_s).abs() <= 0.01,
        "ps_hat={ps_hat}, P_s={}",
        stationary.p_s
    );
}

fn rat(n: u64, d: u64) -> Rational {
    Rational::ratio(n, d)
}

/// Enumerate the draw process behind Eqs. (44)/(52) exactly and
/// compare the joint distribution of (a, i) with the factorized
/// closed forms, in rational arithmetic (zero tolerance).
fn check_joint_exact(n: u32, s: u32, k: u32, b: u32, l: u32) {
    // group A: n-k round-1 losers, residual in 1..=s-b-1
    // group B: k-l round-2 losers stuck at 0 (only when k != l)
    // group C: l (k != l) or k (k == l) round-2 winners redraw 0..=s-1
    let a_nodes = (n - k) as usize;
    let c_nodes = if k == l { k as usize } else { l as usize };
    let a_support = (s - b - 1) as u64;
    let mut joint = vec![vec![Rational::zero(); n as usize + 1]; s as usize];
    let total_combos = a_support.pow(a_nodes as u32) * (s as u64).pow(c_nodes as u32);
    let weight = rat(1, total_combos);
    let mut a_draw = vec![1u32; a_nodes];
    loop {
        let mut c_draw = vec![0u32; c_nodes];
        loop {
            let mut min = u32::MAX;
            if k != l {
                min = 0; // group B sits at 0
            }
            for &v in &a_draw {
                min = min.min(v);
            }
            for &v in &c_draw {
                min = min.min(v);
            }
            let mut count = if k != l { k - l } else { 0 };
            if k != l && min != 0 {
                unreachable!();
            }
            for &v in &a_draw {
                if v == min {
                    count += 1;
                }
            }
            for &v in &c_draw {
                if v == min {
                    count += 1;
                }
            }
            joint[min as usize][count as usize] =
                joint[min as usize][count as usize].clone() + weight.clone();
            // advance c_draw
            let mut idx = 0;
            loop {
                if idx == c_nodes {
                    break;
                }
                c_draw[idx] += 1;
                if c_draw[idx] < s {
                    break;
                }
                c_draw[idx] = 0;
                idx += 1;
            }
            if idx == c_nodes {
                break;
            }
        }
        // advance a_draw over 1..=s-b-1
        let mut idx = 0;
        loop {
            if idx == a_nodes {
                break;
            }
            a_draw[idx] += 1;
            if a_draw[idx] <= s - b - 1 {
                break;
            }
            a_draw[idx] = 1;
            idx += 1;
        }
        if idx == a_nodes {
            break;
        }
    }
    for a in 0..s {
        for i in 1..=n {
            let product = p_a_given_kbl::<Rational>(a, k, b, l, n, s)
                * p_i_given_akbl::<Rational>(i, a, k, b, l, n, s);
            assert_eq!(
                joint[a as usize][i as usize], product,
                "joint mismatch at a={a} i={i} for (n={n},s={s},k={k},b={b},l={l})"
            );
        }
    }
}

#[test]
fn eq44_eq52_match_exact_enumeration() {
    // scenario I (k != l)
    check_joint_exact(4, 4, 3, 0, 1);
    check_joint_exact(5, 4, 3, 1, 2);
    // scenario II (k = l != N), including the boundary b values
    check_joint_exact(4, 4, 2, 1, 2);
    check_joint_exact(4, 5, 2, 0, 2);
    check_joint_exact(5, 4, 3, 2, 3);
    // scenario III (k = l = N)
    check_joint_exact(3, 4, 3, 0, 3);
    check_joint_exact(4, 5, 4, 2, 4);
}

#[test]
fn p_j_matches_exact_enumeration() {
    for s in [3u32, 4] {
        for i in 1..=4u32 {
            let mut counts = vec![Rational::zero(); i as usize + 1];
            let weight = rat(1, (s as u64).pow(i));
            let mut draw = vec![0u32; i as usize];
            loop {
                let min = *draw.iter().min().unwrap();
                let j = draw.iter().filter(|&&v| v == min).count();
                counts[j] = counts[j].clone() + weight.clone();
                let mut idx = 0;
                loop {
                    if idx == i as usize {
                        break;
                    }
                    draw[idx] += 1;
                    if draw[idx] < s {
                        break;
                    }
                    draw[idx] = 0;
                    idx += 1;
                }
                if idx == i as usize {
                    break;
                }
            }
            for j in 1..=i {
                assert_eq!(counts[j as usize], p_j_given_i::<Rational>(i, j, s));
            }
        }
    }
}

/// One explicit application of the transition operator leaves the
/// stationary distribution unchanged.
#[test]
fn stationary_is_fixed_point_of_transition_operator() {
    let (n, s) = (3u32, 4u32);
    let st = back2f_stationary(n, s).unwrap();
    let mut next = std::collections::HashMap::new();
    for (src, mass) in st.iter() {
        if mass == 0.0 {
            continue;
        }
        for a in 0..s {
            let pa: f64 = p_a_given_kbl(a, src.x, src.c, src.y, n, s);
            if pa == 0.0 {
                continue;
            }
            for i in 1..=n {
                let pi_f: f64 = p_i_given_akbl(i, a, src.x, src.c, src.y, n, s);
                if pi_f == 0.0 {
                    continue;
                }
                for j in 1..=i {
                    let pj: f64 = p_j_given_i(i, j, s);
                    *next.entry((i, a, j)).or_insert(0.0) += mass * pa * pi_f * pj;
                }
            }
        }
    }
    for (state, mass) in st.iter() {
        let propagated = next.get(&(state.x, state.c, state.y)).copied().unwrap_or(0.0);
        assert!(
            (propagated - mass).abs() < 1e-8,
            "pi*P != pi at {state:?}: {propagated} vs {mass}"
        );
    }
}

/// Full transition rows sum to one for every valid source state.
#[test]
fn transition_rows_are_stochastic() {
    for (n, s) in [(3u32, 4u32), (4, 6), (5, 8)] {
        for k in 1..=n {
            for l in 1..=k {
                for b in 0..s {
                    if b == s - 1 && k != n {
                        continue;
                    }
                    let mut row = 0.0f64;
                    for a in 0..s {
                        for i in 1..=n {
                            for j in 1..=i {
                                let p: f64 = p_a_given_kbl::<f64>(a, k, b, l, n, s)
                                    * p_i_given_akbl::<f64>(i, a, k, b, l, n, s)
                                    * p_j_given_i::<f64>(i, j, s);
                                assert!((-1e-15..=1.0 + 1e-12).contains(&p));
                                row += p;
                            }
                        }
                    }
                    assert!(
                        (row - 1.0).abs() < 1e-9,
                        "row sum {row} at (n={n},s={s},k={k},b={b},l={l})"
                    );
                }
            }
        }
    }
}
