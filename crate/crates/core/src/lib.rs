//! Ultimatum Game simulation suite.
//!
//! Thompson-Sampling proposers learn which fraction of a stake to offer by
//! interacting with a cognitive model of a human responder. The responder
//! values offers against a probabilistic expectation (its reference point),
//! estimates the expected-utility gap with a small number of importance
//! samples, and accepts only strictly positive estimates. Its loss aversion
//! depends on an induced emotional state, which shifts the offer the
//! proposers converge to: the fair split under neutral emotion, a higher
//! offer under negative emotion, a lower one under positive emotion.
//!
//! Modules:
//! - [`emotion`]: value function and emotion-dependent loss aversion
//! - [`sbeu`]: gambles and the sample-based expected-utility estimator
//! - [`responder`]: expectation beliefs and accept/reject decisions
//! - [`bandit`]: Thompson Sampling over the offer grid
//! - [`oracle`]: Monte Carlo ground truth and parameter calibration
//! - [`experiment`]: multi-proposer runs and aggregate curves
//! - [`config`], [`report`], [`plot`]: config files, CSV, SVG
//!
//! Everything is deterministic given a master seed; see [`seeds`] for the
//! stream derivation rule.

pub mod bandit;
pub mod config;
pub mod emotion;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod plot;
pub mod report;
pub mod responder;
pub mod sbeu;
pub mod seeds;

pub use error::{Error, Result};
