//! Sample-based expected utility over discrete gambles.
//!
//! Expected utility `E[u] = sum_o p(o) u(o)` is estimated with
//! self-normalized importance sampling: draw `s` outcomes from a proposal
//! distribution `q`, weight each by `w_i = p(o_i) / q(o_i)`, and return
//! `sum_i w_i u(o_i) / sum_j w_j`. The proposal is built to minimize the
//! estimator's mean-squared error at the given sample budget:
//!
//! ```text
//! q(o)  ∝  p(o) · m(o) · sqrt( (1 + m(o)·sqrt(s)) / (m(o)·sqrt(s)) )
//! m(o)  =  max(|u(o)|, epsilon)
//! ```
//!
//! The `epsilon` floor keeps the proposal's support equal to the gamble's
//! support: without it zero-utility outcomes would get zero proposal mass
//! and their importance weights would be undefined.
//!
//! Because the estimate is a convex combination of sampled utilities, it is
//! always inside `[min u, max u]` over the gamble's support, exactly.

use rand::Rng;

use crate::error::{Error, Result};

/// Discrete distribution over signed relative payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamble {
    outcomes: Vec<f64>,
    probabilities: Vec<f64>,
}

/// Tolerance on probability normalization.
pub const PROB_SUM_TOL: f64 = 1e-9;

impl Gamble {
    /// Build a gamble from `(outcome, probability)` pairs.
    ///
    /// Outcomes must be finite and distinct, probabilities strictly positive
    /// and summing to one within `1e-9`.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (outcomes, probabilities): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if outcomes.is_empty() {
            return Err(Error::Invalid("gamble must have at least one outcome".into()));
        }
        let mut sum = 0.0;
        for (&o, &p) in outcomes.iter().zip(&probabilities) {
            if !o.is_finite() {
                return Err(Error::Invalid(format!("non-finite outcome {o}")));
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Invalid(format!(
                    "outcome {o} has non-positive probability {p}"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Invalid(format!(
                "probabilities sum to {sum}, expected 1 within {PROB_SUM_TOL}"
            )));
        }
        let mut sorted = outcomes.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("duplicate outcome values".into()));
        }
        Ok(Gamble {
            outcomes,
            probabilities,
        })
    }

    /// Like [`Gamble::new`] but merges duplicate outcome values by summing
    /// their probabilities. Order of first occurrence is kept.
    pub fn new_merged(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut outcomes: Vec<f64> = Vec::new();
        let mut probabilities: Vec<f64> = Vec::new();
        for (o, p) in pairs {
            match outcomes.iter().position(|&x| x == o) {
                Some(i) => probabilities[i] += p,
                None => {
                    outcomes.push(o);
                    probabilities.push(p);
                }
            }
        }
        Gamble::new(outcomes.into_iter().zip(probabilities))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Estimator settings: sample budget and the utility-magnitude floor used
/// when building the proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Number of importance samples drawn per estimate (`s >= 1`).
    pub samples: u32,
    /// Floor on `|u(o)|` inside the proposal weights, in `(0, 1e-6]`.
    pub epsilon: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            samples: 10,
            epsilon: 1e-12,
        }
    }
}

impl EstimatorConfig {
    pub fn new(samples: u32) -> Result<Self> {
        let cfg = EstimatorConfig {
            samples,
            ..EstimatorConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Invalid("sample budget must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1e-6) {
            return Err(Error::Invalid(format!(
                "epsilon must lie in (0, 1e-6], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Proposal distribution aligned with a gamble's outcome list, with the
/// cumulative table used for inverse-CDF draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalDistribution {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ProposalDistribution {
    fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Invalid(format!(
                "proposal normalization constant degenerate: {total}"
            )));
        }
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut acc = 0.0;
        for &p in &probabilities {
            acc += p;
            cumulative.push(acc);
        }
        Ok(ProposalDistribution {
            probabilities,
            cumulative,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Draw one outcome index by inverse CDF. Consumes exactly one uniform.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        // Last bucket catches u >= cumulative tail lost to rounding.
        let n = self.cumulative.len();
        for (i, &c) in self.cumulative[..n - 1].iter().enumerate() {
            if u < c {
                return i;
            }
        }
        n - 1
    }
}

/// Build the MSE-optimal proposal for estimating `E[u]` over `g` with
/// `cfg.samples` draws. Deterministic.
pub fn build_qstar(
    g: &Gamble,
    u: impl Fn(f64) -> f64,
    cfg: &EstimatorConfig,
) -> Result<ProposalDistribution> {
    cfg.validate()?;
    let root_s = f64::from(cfg.samples).sqrt();
    let weights = g
        .outcomes
        .iter()
        .zip(&g.probabilities)
        .map(|(&o, &p)| {
            let m = u(o).abs().max(cfg.epsilon);
            p * m * ((1.0 + m * root_s) / (m * root_s)).sqrt()
        })
        .collect();
    ProposalDistribution::from_weights(weights)
}

/// Precomputed estimator for one `(gamble, utility, config)` triple.
///
/// Splitting construction from sampling lets callers that estimate the same
/// gamble many times (the responder, the oracle) pay the setup cost once.
/// `estimate` consumes exactly `samples` uniforms from the stream.
#[derive(Debug, Clone)]
pub struct Estimator {
    utilities: Vec<f64>,
    // importance weight p(o)/q(o) per outcome
    weights: Vec<f64>,
    proposal: ProposalDistribution,
    samples: u32,
    min_u: f64,
    max_u: f64,
}

impl Estimator {
    pub fn new(g: &Gamble, u: impl Fn(f64) -> f64, cfg: &EstimatorConfig) -> Result<Self> {
        let proposal = build_qstar(g, &u, cfg)?;
        let utilities: Vec<f64> = g.outcomes.iter().map(|&o| u(o)).collect();
        if utilities.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("utility function produced a non-finite value".into()));
        }
        let weights: Vec<f64> = g
            .probabilities
            .iter()
            .zip(proposal.probabilities())
            .map(|(&p, &q)| p / q)
            .collect();
        let min_u = utilities.iter().copied().fold(f64::INFINITY, f64::min);
        let max_u = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Estimator {
            utilities,
            weights,
            proposal,
            samples: cfg.samples,
            min_u,
            max_u,
        })
    }

    /// Self-normalized importance-sampling estimate of expected utility.
    pub fn estimate(&self, rng: &mut impl Rng) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for _ in 0..self.samples {
            let i = self.proposal.sample(rng);
            num += self.weights[i] * self.utilities[i];
            den += self.weights[i];
        }
        // Clamp defends the convex-combination bound against summation
        // rounding; mathematically num/den is already inside.
        (num / den).clamp(self.min_u, self.max_u)
    }

    pub fn proposal(&self) -> &ProposalDistribution {
        &self.proposal
    }

    pub fn utility_bounds(&self) -> (f64, f64) {
        (self.min_u, self.max_u)
    }
}

/// One-shot estimate of `E[u]` over `g`. Consumes exactly `cfg.samples`
/// categorical draws from `rng`.
pub fn estimate_eu(
    g: &Gamble,
    u: impl Fn(f64) -> f64,
    cfg: &EstimatorConfig,
    rng: &mut impl Rng,
) -> Result<f64> {
    Ok(Estimator::new(g, u, cfg)?.estimate(rng))
}

/// Exact expected utility `sum_o p(o) u(o)`; the estimator's ground truth.
pub fn true_eu(g: &Gamble, u: impl Fn(f64) -> f64) -> f64 {
    g.outcomes
        .iter()
        .zip(&g.probabilities)
        .map(|(&o, &p)| p * u(o))
        .sum()
}
