//! Thompson Sampling over a discrete offer grid.
//!
//! Each arm keeps acceptance/rejection counts `(S, F)`. To pick an offer the
//! proposer samples `beta_a ~ Beta(S_a + 1, F_a + 1)` for every arm in arm
//! order, scores each arm by `u(T - offer_a) * beta_a`, and plays the
//! lowest-index argmax. The observed accept/reject then increments one
//! counter. All randomness comes from the caller's stream, so a run replays
//! exactly from its seed.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// Equally spaced offers `{0, T/k, 2T/k, ..., T}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferGrid {
    stake: f64,
    offers: Vec<f64>,
}

/// Default number of arms (an 11-point grid over tenths of the stake).
pub const DEFAULT_ARM_COUNT: usize = 11;

impl OfferGrid {
    pub fn new(stake: f64, arm_count: usize) -> Result<Self> {
        if !(stake.is_finite() && stake > 0.0) {
            return Err(Error::Invalid(format!("stake must be positive, got {stake}")));
        }
        if arm_count < 2 {
            return Err(Error::Invalid(format!(
                "offer grid needs at least 2 arms, got {arm_count}"
            )));
        }
        let k = (arm_count - 1) as f64;
        let offers = (0..arm_count).map(|i| stake * i as f64 / k).collect();
        Ok(OfferGrid { stake, offers })
    }

    pub fn stake(&self) -> f64 {
        self.stake
    }

    pub fn offers(&self) -> &[f64] {
        &self.offers
    }

    pub fn arm_count(&self) -> usize {
        self.offers.len()
    }

    /// Offer as a fraction of the stake.
    pub fn offer_frac(&self, arm: usize) -> f64 {
        self.offers[arm] / self.stake
    }
}

/// Acceptance/rejection counts for one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArmState {
    pub successes: u64,
    pub failures: u64,
}

impl ArmState {
    pub fn plays(&self) -> u64 {
        self.successes + self.failures
    }
}

/// The proposer's utility over its own share `T - offer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProposerUtility {
    /// `u(x) = x`.
    Linear,
    /// Gain branch of the responder's value function, `u(x) = x^alpha`.
    ResponderGain { alpha: f64 },
}

impl ProposerUtility {
    pub fn eval(&self, own_share: f64) -> f64 {
        match self {
            ProposerUtility::Linear => own_share,
            ProposerUtility::ResponderGain { alpha } => own_share.powf(*alpha),
        }
    }
}

/// Draw from `Beta(a, b)`. Deterministic given the stream state.
pub fn sample_beta(a: f64, b: f64, rng: &mut impl Rng) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    Beta::new(a, b).expect("valid beta parameters").sample(rng)
}

/// Per-arm posterior counts plus the grid they index into.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    grid: OfferGrid,
    arms: Vec<ArmState>,
}

impl BanditState {
    pub fn new(grid: OfferGrid) -> Self {
        let arms = vec![ArmState::default(); grid.arm_count()];
        BanditState { grid, arms }
    }

    pub fn grid(&self) -> &OfferGrid {
        &self.grid
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    /// Total plays across arms; equals the number of completed trials.
    pub fn total_plays(&self) -> u64 {
        self.arms.iter().map(ArmState::plays).sum()
    }

    /// Sample one posterior draw per arm, in arm order.
    pub fn sample_scores(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.arms
            .iter()
            .map(|arm| {
                sample_beta(arm.successes as f64 + 1.0, arm.failures as f64 + 1.0, rng)
            })
            .collect()
    }

    /// Select the arm maximizing `u(T - offer_a) * beta_a` for the given
    /// posterior draws. Ties go to the lowest arm index. This is the
    /// deterministic half of [`BanditState::select_offer`], split out so the
    /// scoring rule is testable with injected draws.
    pub fn select_with_draws(
        &self,
        proposer_u: &ProposerUtility,
        betas: &[f64],
    ) -> Result<(usize, f64)> {
        if betas.len() != self.arms.len() {
            return Err(Error::Invalid(format!(
                "expected {} posterior draws, got {}",
                self.arms.len(),
                betas.len()
            )));
        }
        let stake = self.grid.stake();
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (i, (&offer, &beta)) in self.grid.offers().iter().zip(betas).enumerate() {
            let score = proposer_u.eval(stake - offer) * beta;
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        Ok((best, self.grid.offers()[best]))
    }

    /// One Thompson-Sampling selection: exactly `arm_count` Beta draws from
    /// `rng` (in arm order), then the score argmax.
    pub fn select_offer(
        &self,
        proposer_u: &ProposerUtility,
        rng: &mut impl Rng,
    ) -> (usize, f64) {
        let betas = self.sample_scores(rng);
        self.select_with_draws(proposer_u, &betas)
            .expect("draw count matches arm count")
    }

    /// Record the responder's reaction to the last offer on `arm`.
    pub fn update(&mut self, arm: usize, accepted: bool) -> Result<()> {
        let state = self.arms.get_mut(arm).ok_or_else(|| {
            Error::Invalid(format!("arm index {arm} out of range"))
        })?;
        if accepted {
            state.successes += 1;
        } else {
            state.failures += 1;
        }
        Ok(())
    }
}
