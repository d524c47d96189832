//! BACK2F per-node contention state: two rounds of frequency-domain
//! backoff with the residual-backoff persistence of Algorithm 1.

use rand::Rng;

/// Where a node stands inside one BACK2F contention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Back2fPhase {
    /// Waiting for the channel to be idle for T_difs.
    Scan,
    /// Emitting `myback` in the first round.
    Round1,
    /// Won round 1, emitting `myback2` in the second round.
    Round2,
    /// Won both rounds: transmitting data.
    Transmit,
}

/// Backoff state across BACK2F contentions. A round-1 loser carries
/// `myback - minback` into the next contention; a round-2 loser carries
/// zero; a node that transmitted redraws from scratch.
#[derive(Debug, Clone, Copy)]
pub struct Back2fRoundState {
    s: u32,
    pub myback: u32,
    pub myback2: u32,
    pub phase: Back2fPhase,
    fresh: bool,
}

impl Back2fRoundState {
    pub fn new(s: u32) -> Self {
        Self {
            s,
            myback: 0,
            myback2: 0,
            phase: Back2fPhase::Scan,
            fresh: true,
        }
    }

    /// Enter round 1 and return the subcarrier to signal on. Draws a
    /// fresh uniform value unless a residual is being carried.
    pub fn round1_subcarrier<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u32 {
        if self.fresh {
            self.myback = rng.gen_range(0..self.s);
            self.fresh = false;
        }
        self.phase = Back2fPhase::Round1;
        self.myback
    }

    /// Apply the observed round-1 minimum; returns whether the node
    /// advances to round 2.
    pub fn on_round1(&mut self, minback: u32) -> bool {
        debug_assert!(minback <= self.myback);
        self.myback -= minback;
        if self.myback == 0 {
            self.phase = Back2fPhase::Round2;
            true
        } else {
            self.phase = Back2fPhase::Scan;
            false
        }
    }

    /// Enter round 2 and return the subcarrier to signal on.
    pub fn round2_subcarrier<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u32 {
        self.myback2 = rng.gen_range(0..self.s);
        self.phase = Back2fPhase::Round2;
        self.myback2
    }

    /// Apply the observed round-2 minimum; returns whether the node
    /// transmits. A loser re-contends with `myback = 0`.
    pub fn on_round2(&mut self, min2: u32) -> bool {
        debug_assert!(min2 <= self.myback2);
        if self.myback2 == min2 {
            self.phase = Back2fPhase::Transmit;
            true
        } else {
            self.myback = 0;
            self.phase = Back2fPhase::Scan;
            false
        }
    }

    /// The data transmission finished (successfully or not): the next
    /// contention starts from a fresh uniform draw.
    pub fn on_transmit_done(&mut self) {
        self.fresh = true;
        self.phase = Back2fPhase::Scan;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn lone_node_always_wins_both_rounds() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut st = Back2fRoundState::new(52);
        for _ in 0..100 {
            let c1 = st.round1_subcarrier(&mut rng);
            assert!(st.on_round1(c1), "alone, own minimum always wins");
            let c2 = st.round2_subcarrier(&mut rng);
            assert!(st.on_round2(c2));
            st.on_transmit_done();
        }
    }

    #[test]
    fn identical_draws_collide() {
        // two nodes with equal myback and myback2 both reach Transmit
        let mut a = Back2fRoundState::new(8);
        let mut b = Back2fRoundState::new(8);
        a.myback = 3;
        b.myback = 3;
        assert!(a.on_round1(3) && b.on_round1(3));
        a.myback2 = 5;
        b.myback2 = 5;
        assert!(a.on_round2(5) && b.on_round2(5));
        assert_eq!(a.phase, Back2fPhase::Transmit);
        assert_eq!(b.phase, Back2fPhase::Transmit);
    }

    #[test]
    fn round1_loser_carries_residual() {
        let mut st = Back2fRoundState::new(8);
        st.myback = 5;
        st.fresh = false;
        assert!(!st.on_round1(2));
        assert_eq!(st.myback, 3);
        assert_eq!(st.phase, Back2fPhase::Scan);
        // residual survives into the next round 1 (no redraw)
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(st.round1_subcarrier(&mut rng), 3);
    }

    #[test]
    fn round2_loser_recontends_at_zero() {
        let mut st = Back2fRoundState::new(8);
        st.myback = 4;
        st.fresh = false;
        st.on_round1(4);
        st.myback2 = 6;
        assert!(!st.on_round2(1));
        assert_eq!(st.myback, 0);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(st.round1_subcarrier(&mut rng), 0);
    }
}
