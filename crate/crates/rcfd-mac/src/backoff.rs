//! Binary exponential backoff state shared by the DCF variants and
//! FD MAC.

use rand::Rng;

/// Backoff window, stage and retry bookkeeping. The contention window
/// is `W * 2^min(stage, stage_cap)`; the retry counter tracks attempts
/// toward the separate `N_tx,max` drop threshold.
#[derive(Debug, Clone, Copy)]
pub struct BackoffState {
    w_initial: u32,
    stage_cap: u32,
    pub stage: u32,
    pub counter: u32,
    pub retries: u32,
}

impl BackoffState {
    pub fn new(w_initial: u32, stage_cap: u32) -> Self {
        Self {
            w_initial,
            stage_cap,
            stage: 0,
            counter: 0,
            retries: 0,
        }
    }

    /// Current contention window.
    pub fn cw(&self) -> u32 {
        self.w_initial << self.stage.min(self.stage_cap)
    }

    /// Draw a fresh counter uniformly on `[0, cw - 1]`.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.counter = rng.gen_range(0..self.cw());
    }

    /// Record a failed attempt: doubles the window (up to the stage
    /// cap), bumps the retry count, and redraws.
    pub fn on_failure<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.stage += 1;
        self.retries += 1;
        self.draw(rng);
    }

    /// Reset after a success or a drop and draw for the next packet.
    pub fn on_reset<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.stage = 0;
        self.retries = 0;
        self.draw(rng);
    }
}
