//! Brute-force ground truth and parameter calibration.
//!
//! The oracle estimates per-offer acceptance probabilities by Monte Carlo
//! over responder decisions, turns them into expected-reward curves (the
//! quantity the bandit implicitly maximizes), and searches a parameter grid
//! for configurations whose reward argmax per emotion lands on the target
//! arms.
//!
//! Every arm evaluation owns a stream keyed by `(master_seed, context, arm)`,
//! so results are identical no matter how evaluations are scheduled.

use rand::Rng;
use rayon::prelude::*;

use crate::bandit::{OfferGrid, ProposerUtility};
use crate::emotion::{EmotionConfig, EmotionState};
use crate::error::{Error, Result};
use crate::responder::{Decision, ExpectationBelief, ResponderModel};
use crate::sbeu::EstimatorConfig;
use crate::seeds::{stream, DOMAIN_ORACLE};

/// Minimum Monte Carlo replication count accepted by the oracle.
pub const MIN_REPS: u64 = 1_000;

/// One arm of a reward curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardPoint {
    pub offer: f64,
    pub p_accept: f64,
    pub std_err: f64,
    pub expected_reward: f64,
}

/// Expected reward per arm: `u(T - offer) * p_accept`, with Monte Carlo
/// standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardCurve {
    stake: f64,
    proposer_u: ProposerUtility,
    points: Vec<RewardPoint>,
}

impl RewardCurve {
    pub fn points(&self) -> &[RewardPoint] {
        &self.points
    }

    /// Lowest index maximizing expected reward.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if p.expected_reward > self.points[best].expected_reward {
                best = i;
            }
        }
        best
    }

    /// Gap between the best and second-best expected reward, in units of the
    /// gap's standard error. Degenerate zero-error estimates (p exactly 0
    /// or 1) use the plus-one-smoothed error so the ratio stays finite.
    pub fn argmax_gap_in_se(&self, reps: u64) -> f64 {
        let best = self.argmax();
        let mut second: Option<usize> = None;
        for i in 0..self.points.len() {
            if i == best {
                continue;
            }
            if second.is_none_or(|s| {
                self.points[i].expected_reward > self.points[s].expected_reward
            }) {
                second = Some(i);
            }
        }
        let Some(second) = second else {
            return f64::INFINITY;
        };
        let gap = self.points[best].expected_reward - self.points[second].expected_reward;
        let se = |p: &RewardPoint| {
            let reward_scale = self.proposer_u.eval(self.stake - p.offer);
            (reward_scale * smoothed_se(p.p_accept, reps)).abs()
        };
        let se_gap = (se(&self.points[best]).powi(2) + se(&self.points[second]).powi(2)).sqrt();
        if se_gap == 0.0 {
            if gap > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            gap / se_gap
        }
    }
}

fn binomial_se(p: f64, reps: u64) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

fn smoothed_se(p: f64, reps: u64) -> f64 {
    let n = reps as f64;
    let p = p.clamp(1.0 / (n + 2.0), 1.0 - 1.0 / (n + 2.0));
    binomial_se(p, reps)
}

/// Monte Carlo acceptance probability of `offer` with its binomial standard
/// error, from `reps` independent decisions.
pub fn acceptance_probability(
    offer: f64,
    model: &ResponderModel,
    reps: u64,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    if reps < MIN_REPS {
        return Err(Error::Invalid(format!(
            "oracle needs at least {MIN_REPS} replications, got {reps}"
        )));
    }
    let prepared = model.prepare(offer)?;
    let mut accepts = 0u64;
    for _ in 0..reps {
        if prepared.decide(rng) == Decision::Accept {
            accepts += 1;
        }
    }
    let p = accepts as f64 / reps as f64;
    Ok((p, binomial_se(p, reps)))
}

/// Acceptance probability and expected reward per arm of `grid`.
///
/// Arms are evaluated in parallel on streams keyed by
/// `(master_seed, context, arm)`; `context` distinguishes independent curve
/// evaluations under one master seed.
pub fn reward_curve(
    model: &ResponderModel,
    grid: &OfferGrid,
    proposer_u: &ProposerUtility,
    reps: u64,
    master_seed: u64,
    context: u64,
) -> Result<RewardCurve> {
    if reps < MIN_REPS {
        return Err(Error::Invalid(format!(
            "oracle needs at least {MIN_REPS} replications, got {reps}"
        )));
    }
    let points: Result<Vec<RewardPoint>> = grid
        .offers()
        .par_iter()
        .enumerate()
        .map(|(arm, &offer)| {
            let mut rng = stream(master_seed, DOMAIN_ORACLE, context, arm as u64);
            let (p_accept, std_err) = acceptance_probability(offer, model, reps, &mut rng)?;
            let expected_reward = proposer_u.eval(grid.stake() - offer) * p_accept;
            Ok(RewardPoint {
                offer,
                p_accept,
                std_err,
                expected_reward,
            })
        })
        .collect();
    Ok(RewardCurve {
        stake: grid.stake(),
        proposer_u: *proposer_u,
        points: points?,
    })
}

/// Target convergence arm per emotional state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalibrationTarget {
    pub neutral_arm: usize,
    pub negative_arm: usize,
    pub positive_arm: usize,
}

impl Default for CalibrationTarget {
    /// The fair split under neutral emotion, one arm up under negative,
    /// one arm down under positive.
    fn default() -> Self {
        CalibrationTarget {
            neutral_arm: 5,
            negative_arm: 6,
            positive_arm: 4,
        }
    }
}

impl CalibrationTarget {
    pub fn arm_for(&self, emotion: EmotionState) -> usize {
        match emotion {
            EmotionState::Neutral => self.neutral_arm,
            EmotionState::Negative => self.negative_arm,
            EmotionState::Positive => self.positive_arm,
        }
    }

    pub fn validate(&self, arm_count: usize) -> Result<()> {
        for arm in [self.neutral_arm, self.negative_arm, self.positive_arm] {
            if arm >= arm_count {
                return Err(Error::Config(format!(
                    "target arm {arm} out of range for {arm_count} arms"
                )));
            }
        }
        Ok(())
    }
}

/// Search grids for the free responder parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationGrid {
    pub lambda_negative: Vec<f64>,
    pub lambda_positive: Vec<f64>,
    pub mean_frac: Vec<f64>,
    pub sd_frac: Vec<f64>,
    pub samples: Vec<u32>,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        CalibrationGrid {
            lambda_negative: vec![4.5, 5.0],
            lambda_positive: vec![0.5, 0.6],
            mean_frac: vec![0.34, 0.35],
            sd_frac: vec![0.2],
            samples: vec![10, 12],
        }
    }
}

impl CalibrationGrid {
    pub fn validate(&self, lambda_neutral: f64) -> Result<()> {
        for (name, grid) in [
            ("grid_lambda_negative", &self.lambda_negative),
            ("grid_lambda_positive", &self.lambda_positive),
            ("grid_mean_frac", &self.mean_frac),
            ("grid_sd_frac", &self.sd_frac),
        ] {
            if grid.is_empty() {
                return Err(Error::Config(format!("{name} must be non-empty")));
            }
        }
        if self.samples.is_empty() {
            return Err(Error::Config("grid_samples must be non-empty".into()));
        }
        for &l in &self.lambda_negative {
            if !(l > lambda_neutral) {
                return Err(Error::Config(format!(
                    "grid_lambda_negative value {l} must exceed lambda_neutral {lambda_neutral}"
                )));
            }
        }
        for &l in &self.lambda_positive {
            if !(l > 0.0 && l < lambda_neutral) {
                return Err(Error::Config(format!(
                    "grid_lambda_positive value {l} must lie in (0, lambda_neutral)"
                )));
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.lambda_negative.len()
            * self.lambda_positive.len()
            * self.mean_frac.len()
            * self.sd_frac.len()
            * self.samples.len()
    }

    /// Points in documented scan order: lexicographic over
    /// `(lambda_negative, lambda_positive, mean_frac, sd_frac, samples)`,
    /// each grid in its given order.
    pub fn points(&self) -> impl Iterator<Item = CalibrationPoint> + '_ {
        self.lambda_negative.iter().flat_map(move |&ln| {
            self.lambda_positive.iter().flat_map(move |&lp| {
                self.mean_frac.iter().flat_map(move |&mf| {
                    self.sd_frac.iter().flat_map(move |&sf| {
                        self.samples.iter().map(move |&s| CalibrationPoint {
                            lambda_negative: ln,
                            lambda_positive: lp,
                            mean_frac: mf,
                            sd_frac: sf,
                            samples: s,
                        })
                    })
                })
            })
        })
    }
}

/// One candidate parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub lambda_negative: f64,
    pub lambda_positive: f64,
    pub mean_frac: f64,
    pub sd_frac: f64,
    pub samples: u32,
}

/// Fixed (non-searched) calibration inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSettings {
    pub stake: f64,
    pub arm_count: usize,
    pub lambda_neutral: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub proposer_utility: ProposerUtility,
    pub reps: u64,
    pub master_seed: u64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            stake: 10.0,
            arm_count: 11,
            lambda_neutral: 2.25,
            alpha: 1.0,
            epsilon: 1e-12,
            proposer_utility: ProposerUtility::Linear,
            reps: 100_000,
            master_seed: 42,
        }
    }
}

/// Oracle verdict for one grid point under one emotion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRow {
    pub point: CalibrationPoint,
    pub emotion: EmotionState,
    pub argmax_arm: usize,
    pub gap_in_se: f64,
}

/// A feasible parameter set, ready to drop into an experiment config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedParams {
    pub point: CalibrationPoint,
    pub emotion_config: EmotionConfig,
}

/// Scan outcome: every evaluated row plus the first feasible point, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
    pub selected: Option<CalibratedParams>,
}

impl CalibrationReport {
    /// The feasible point, or the infeasibility error the scan amounts to.
    pub fn selected_or_err(&self) -> Result<CalibratedParams> {
        self.selected.ok_or_else(|| {
            Error::CalibrationInfeasible(format!(
                "no grid point reproduces the target arms ({} points evaluated)",
                self.rows.len() / EmotionState::ALL.len()
            ))
        })
    }
}

/// Evaluate one candidate point: reward-curve argmax and gap per emotion.
fn evaluate_point(
    point: &CalibrationPoint,
    settings: &CalibrationSettings,
    point_index: u64,
) -> Result<Vec<CalibrationRow>> {
    let emotion_config = EmotionConfig {
        lambda_neutral: settings.lambda_neutral,
        lambda_negative: point.lambda_negative,
        lambda_positive: point.lambda_positive,
        alpha: settings.alpha,
    };
    emotion_config.validate().map_err(|e| {
        Error::Config(format!("calibration grid point violates ordering: {e}"))
    })?;
    let grid = OfferGrid::new(settings.stake, settings.arm_count)?;
    let belief = ExpectationBelief::gaussian(
        settings.stake,
        point.mean_frac,
        point.sd_frac,
        settings.arm_count,
    )?;
    let est_cfg = EstimatorConfig {
        samples: point.samples,
        epsilon: settings.epsilon,
    };
    let mut rows = Vec::with_capacity(EmotionState::ALL.len());
    for (e_idx, &emotion) in EmotionState::ALL.iter().enumerate() {
        let model = ResponderModel::new(belief.clone(), emotion, &emotion_config, est_cfg)?;
        let context = point_index * EmotionState::ALL.len() as u64 + e_idx as u64;
        let curve = reward_curve(
            &model,
            &grid,
            &settings.proposer_utility,
            settings.reps,
            settings.master_seed,
            context,
        )?;
        rows.push(CalibrationRow {
            point: *point,
            emotion,
            argmax_arm: curve.argmax(),
            gap_in_se: curve.argmax_gap_in_se(settings.reps),
        });
    }
    Ok(rows)
}

fn rows_feasible(rows: &[CalibrationRow], target: &CalibrationTarget) -> bool {
    rows.iter()
        .all(|r| r.argmax_arm == target.arm_for(r.emotion) && r.gap_in_se > 2.0)
}

/// Scan the grid in documented order for a parameter set whose reward-curve
/// argmax matches `target` for all three emotions with the argmax gap above
/// two standard errors.
///
/// Stops at the first feasible point unless `scan_all` is set, in which case
/// every point is evaluated (the first feasible one is still the selection).
/// An exhausted scan is reported through `CalibrationReport::selected`
/// being `None`, not as an error: infeasibility is a result.
pub fn calibrate(
    target: &CalibrationTarget,
    grid: &CalibrationGrid,
    settings: &CalibrationSettings,
    scan_all: bool,
) -> Result<CalibrationReport> {
    target.validate(settings.arm_count)?;
    grid.validate(settings.lambda_neutral)?;
    if settings.reps < MIN_REPS {
        return Err(Error::Config(format!(
            "calibration reps must be at least {MIN_REPS}, got {}",
            settings.reps
        )));
    }

    let mut rows = Vec::new();
    let mut selected = None;
    for (idx, point) in grid.points().enumerate() {
        let point_rows = evaluate_point(&point, settings, idx as u64)?;
        let feasible = rows_feasible(&point_rows, target);
        rows.extend(point_rows);
        if feasible && selected.is_none() {
            selected = Some(CalibratedParams {
                point,
                emotion_config: EmotionConfig {
                    lambda_neutral: settings.lambda_neutral,
                    lambda_negative: point.lambda_negative,
                    lambda_positive: point.lambda_positive,
                    alpha: settings.alpha,
                },
            });
            if !scan_all {
                break;
            }
        }
    }
    Ok(CalibrationReport { rows, selected })
}
