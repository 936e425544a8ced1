//! Reference-dependent value function with emotion-modulated loss aversion.
//!
//! Payoffs are valued relative to a reference point: a relative payoff
//! `z >= 0` is worth `z^alpha`, a relative loss `z < 0` is worth
//! `-lambda * (-z)^alpha`. The loss-aversion coefficient `lambda` depends on
//! the responder's emotional state: negative emotion raises it, positive
//! emotion lowers it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Induced emotional condition of the responder. Fixed for a whole experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmotionState {
    Neutral,
    Negative,
    Positive,
}

impl EmotionState {
    pub const ALL: [EmotionState; 3] = [
        EmotionState::Neutral,
        EmotionState::Negative,
        EmotionState::Positive,
    ];
}

impl fmt::Display for EmotionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EmotionState::Neutral => "neutral",
            EmotionState::Negative => "negative",
            EmotionState::Positive => "positive",
        };
        f.write_str(s)
    }
}

impl FromStr for EmotionState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neutral" => Ok(EmotionState::Neutral),
            "negative" => Ok(EmotionState::Negative),
            "positive" => Ok(EmotionState::Positive),
            other => Err(Error::Config(format!(
                "unknown emotion '{other}' (expected neutral, negative or positive)"
            ))),
        }
    }
}

/// Value-function parameters: loss aversion `lambda > 0` and curvature
/// exponent `alpha` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    pub loss_aversion: f64,
    pub curvature: f64,
}

impl UtilityParams {
    pub fn new(loss_aversion: f64, curvature: f64) -> Result<Self> {
        if !(loss_aversion.is_finite() && loss_aversion > 0.0) {
            return Err(Error::Invalid(format!(
                "loss aversion must be a positive finite number, got {loss_aversion}"
            )));
        }
        if !(curvature.is_finite() && curvature > 0.0 && curvature <= 1.0) {
            return Err(Error::Invalid(format!(
                "curvature exponent must lie in (0, 1], got {curvature}"
            )));
        }
        Ok(UtilityParams {
            loss_aversion,
            curvature,
        })
    }

    /// Subjective value of the relative payoff `z`.
    ///
    /// `value(0) = 0`, the sign of the result matches the sign of `z`, and
    /// the function is strictly increasing.
    pub fn value(&self, z: f64) -> f64 {
        if z >= 0.0 {
            z.powf(self.curvature)
        } else {
            -self.loss_aversion * (-z).powf(self.curvature)
        }
    }
}

/// Loss-aversion level per emotional state, plus the shared curvature.
///
/// The ordering `lambda_positive < lambda_neutral < lambda_negative` is the
/// model's core assumption and is enforced at every use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionConfig {
    pub lambda_neutral: f64,
    pub lambda_negative: f64,
    pub lambda_positive: f64,
    pub alpha: f64,
}

impl Default for EmotionConfig {
    fn default() -> Self {
        EmotionConfig {
            lambda_neutral: 2.25,
            lambda_negative: 4.5,
            lambda_positive: 1.0,
            alpha: 1.0,
        }
    }
}

impl EmotionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, l) in [
            ("lambda_neutral", self.lambda_neutral),
            ("lambda_negative", self.lambda_negative),
            ("lambda_positive", self.lambda_positive),
        ] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be a positive finite number, got {l}"
                )));
            }
        }
        if !(self.lambda_positive < self.lambda_neutral
            && self.lambda_neutral < self.lambda_negative)
        {
            return Err(Error::Config(format!(
                "loss-aversion ordering violated: need lambda_positive < lambda_neutral < \
                 lambda_negative, got {} / {} / {}",
                self.lambda_positive, self.lambda_neutral, self.lambda_negative
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Value-function parameters induced by `state`.
    pub fn params_for(&self, state: EmotionState) -> Result<UtilityParams> {
        self.validate()?;
        let lambda = match state {
            EmotionState::Neutral => self.lambda_neutral,
            EmotionState::Negative => self.lambda_negative,
            EmotionState::Positive => self.lambda_positive,
        };
        UtilityParams::new(lambda, self.alpha)
    }
}
