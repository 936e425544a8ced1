//! The responder: accepts an offer iff its estimated utility gap is positive.
//!
//! The responder holds a distribution over expectation levels (its reference
//! point), values an offer `x` through the gamble of relative payoffs
//! `x - e`, and estimates the expected-utility gap with the sample-based
//! estimator. A strictly positive estimate means accept; zero or negative
//! means reject.

use rand::Rng;

use crate::emotion::{EmotionConfig, EmotionState, UtilityParams};
use crate::error::{Error, Result};
use crate::sbeu::{Estimator, EstimatorConfig, Gamble};

/// Distribution of the responder's expectation over a money grid in `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationBelief {
    stake: f64,
    grid: Vec<f64>,
    probabilities: Vec<f64>,
}

impl ExpectationBelief {
    /// Build a belief from explicit grid points and probabilities.
    pub fn new(stake: f64, grid: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if !(stake.is_finite() && stake > 0.0) {
            return Err(Error::Invalid(format!("stake must be positive, got {stake}")));
        }
        if grid.len() != probabilities.len() || grid.is_empty() {
            return Err(Error::Invalid(
                "belief grid and probabilities must be non-empty and aligned".into(),
            ));
        }
        if grid.iter().any(|&e| !(0.0..=stake).contains(&e)) {
            return Err(Error::Invalid(format!(
                "belief grid values must lie in [0, {stake}]"
            )));
        }
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::Invalid("belief probabilities must be positive".into()));
        }
        if (sum - 1.0).abs() > crate::sbeu::PROB_SUM_TOL {
            return Err(Error::Invalid(format!(
                "belief probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(ExpectationBelief {
            stake,
            grid,
            probabilities,
        })
    }

    /// Discretized Gaussian belief: density of `N(mean_frac*T, (sd_frac*T)^2)`
    /// evaluated on the uniform grid `{0, T/(n-1), ..., T}` and renormalized.
    pub fn gaussian(stake: f64, mean_frac: f64, sd_frac: f64, grid_size: usize) -> Result<Self> {
        if grid_size < 2 {
            return Err(Error::Invalid(format!(
                "belief grid needs at least 2 points, got {grid_size}"
            )));
        }
        if !(mean_frac > 0.0 && mean_frac < 1.0) {
            return Err(Error::Invalid(format!(
                "mean_frac must lie in (0, 1), got {mean_frac}"
            )));
        }
        if !(sd_frac.is_finite() && sd_frac > 0.0) {
            return Err(Error::Invalid(format!(
                "sd_frac must be positive, got {sd_frac}"
            )));
        }
        let mean = mean_frac * stake;
        let sd = sd_frac * stake;
        let step = stake / (grid_size - 1) as f64;
        let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 * step).collect();
        let densities: Vec<f64> = grid
            .iter()
            .map(|&e| {
                let z = (e - mean) / sd;
                (-0.5 * z * z).exp()
            })
            .collect();
        let total: f64 = densities.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Invalid(
                "all belief densities underflowed; widen sd_frac".into(),
            ));
        }
        let probabilities = densities.iter().map(|d| d / total).collect();
        ExpectationBelief::new(stake, grid, probabilities)
    }

    pub fn stake(&self) -> f64 {
        self.stake
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Accept or reject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// Immutable responder: belief, emotion-induced value parameters, and the
/// estimator budget. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct ResponderModel {
    belief: ExpectationBelief,
    params: UtilityParams,
    est_cfg: EstimatorConfig,
    emotion: EmotionState,
}

impl ResponderModel {
    /// The value parameters are derived from `emotion` via `cfg`, so they are
    /// consistent with the emotional state by construction.
    pub fn new(
        belief: ExpectationBelief,
        emotion: EmotionState,
        cfg: &EmotionConfig,
        est_cfg: EstimatorConfig,
    ) -> Result<Self> {
        est_cfg.validate()?;
        let params = cfg.params_for(emotion)?;
        Ok(ResponderModel {
            belief,
            params,
            est_cfg,
            emotion,
        })
    }

    pub fn belief(&self) -> &ExpectationBelief {
        &self.belief
    }

    pub fn params(&self) -> UtilityParams {
        self.params
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        self.est_cfg
    }

    pub fn emotion(&self) -> EmotionState {
        self.emotion
    }

    pub fn stake(&self) -> f64 {
        self.belief.stake()
    }

    /// Gamble of relative payoffs `offer - e` over the belief grid.
    /// Duplicate payoffs (impossible on a distinct grid) would be merged.
    pub fn offer_gamble(&self, offer: f64) -> Result<Gamble> {
        let t = self.belief.stake();
        if !(0.0..=t).contains(&offer) {
            return Err(Error::Invalid(format!(
                "offer {offer} outside [0, {t}]"
            )));
        }
        Gamble::new_merged(
            self.belief
                .grid()
                .iter()
                .zip(self.belief.probabilities())
                .map(|(&e, &p)| (offer - e, p)),
        )
    }

    /// One accept/reject decision. Consumes exactly `samples` categorical
    /// draws from `rng`; a fresh estimate is drawn on every call.
    pub fn decide(&self, offer: f64, rng: &mut impl Rng) -> Result<Decision> {
        let gamble = self.offer_gamble(offer)?;
        let params = self.params;
        let estimator = Estimator::new(&gamble, |z| params.value(z), &self.est_cfg)?;
        Ok(decision_from(estimator.estimate(rng)))
    }

    /// Precompute the per-offer estimator for repeated decisions on the same
    /// offer. Draw-for-draw identical to [`ResponderModel::decide`].
    pub fn prepare(&self, offer: f64) -> Result<PreparedOffer> {
        let gamble = self.offer_gamble(offer)?;
        let params = self.params;
        let estimator = Estimator::new(&gamble, |z| params.value(z), &self.est_cfg)?;
        Ok(PreparedOffer { offer, estimator })
    }
}

fn decision_from(estimate: f64) -> Decision {
    // Ties go to rejection: acceptance needs a strictly positive gap.
    if estimate > 0.0 {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// A responder decision table for one fixed offer.
#[derive(Debug, Clone)]
pub struct PreparedOffer {
    offer: f64,
    estimator: Estimator,
}

impl PreparedOffer {
    pub fn offer(&self) -> f64 {
        self.offer
    }

    pub fn decide(&self, rng: &mut impl Rng) -> Decision {
        decision_from(self.estimator.estimate(rng))
    }
}
