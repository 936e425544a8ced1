//! Flat `key = value` experiment configuration files.
//!
//! UTF-8 text, one assignment per line, `#` starts a comment. Every key is
//! optional and falls back to the checked-in calibrated default; unknown or
//! duplicate keys are hard errors so typos cannot silently change an
//! experiment. Grid keys take comma-separated lists.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bandit::ProposerUtility;
use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::oracle::{CalibrationGrid, CalibrationSettings, CalibrationTarget};

const KNOWN_KEYS: &[&str] = &[
    "stake",
    "arm_count",
    "emotion",
    "lambda_neutral",
    "lambda_negative",
    "lambda_positive",
    "alpha",
    "mean_frac",
    "sd_frac",
    "samples",
    "epsilon",
    "trials",
    "proposers",
    "master_seed",
    "proposer_utility",
    "out_dir",
    "reps",
    "grid_lambda_negative",
    "grid_lambda_positive",
    "grid_mean_frac",
    "grid_sd_frac",
    "grid_samples",
    "target_neutral_arm",
    "target_negative_arm",
    "target_positive_arm",
];

/// Everything a CLI subcommand can need: the experiment itself plus oracle
/// and calibration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub experiment: ExperimentConfig,
    /// Monte Carlo replications for oracle and calibration runs.
    pub reps: u64,
    pub grid: CalibrationGrid,
    pub target: CalibrationTarget,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            experiment: ExperimentConfig::default(),
            reps: 100_000,
            grid: CalibrationGrid::default(),
            target: CalibrationTarget::default(),
        }
    }
}

impl AppConfig {
    pub fn calibration_settings(&self) -> CalibrationSettings {
        CalibrationSettings {
            stake: self.experiment.stake,
            arm_count: self.experiment.arm_count,
            lambda_neutral: self.experiment.emotion_config.lambda_neutral,
            alpha: self.experiment.emotion_config.alpha,
            epsilon: self.experiment.epsilon,
            proposer_utility: self.experiment.proposer_utility,
            reps: self.reps,
            master_seed: self.experiment.master_seed,
        }
    }
}

struct RawConfig {
    path: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("unknown key '{key}'"),
                });
            }
            if entries.insert(key.clone(), (value, line_no)).is_some() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(RawConfig {
            path: path.to_path_buf(),
            entries,
        })
    }

    fn value_error(&self, key: &str, line: usize, detail: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: format!("invalid value for '{key}': {detail}"),
        }
    }

    fn get<T, F>(&self, key: &str, default: T, parse: F) -> Result<T>
    where
        F: Fn(&str) -> std::result::Result<T, String>,
    {
        match self.entries.get(key) {
            None => Ok(default),
            Some((value, line)) => {
                parse(value).map_err(|detail| self.value_error(key, *line, detail))
            }
        }
    }
}

fn parse_num<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("{e}"))
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|item| parse_num::<T>(item.trim()))
        .collect()
}

fn parse_proposer_utility(s: &str, alpha: f64) -> std::result::Result<ProposerUtility, String> {
    match s {
        "linear" => Ok(ProposerUtility::Linear),
        "responder_gain" => Ok(ProposerUtility::ResponderGain { alpha }),
        other => Err(format!(
            "unknown proposer utility '{other}' (expected linear or responder_gain)"
        )),
    }
}

/// Parse a config from text; `path` is used in error messages only.
pub fn parse_config(text: &str, path: &Path) -> Result<AppConfig> {
    let raw = RawConfig::parse(text, path)?;
    let defaults = AppConfig::default();
    let d = &defaults.experiment;

    let stake = raw.get("stake", d.stake, parse_num)?;
    let arm_count = raw.get("arm_count", d.arm_count, parse_num)?;
    let emotion = raw.get("emotion", d.emotion, |s| {
        s.parse().map_err(|e: Error| e.to_string())
    })?;
    let lambda_neutral = raw.get(
        "lambda_neutral",
        d.emotion_config.lambda_neutral,
        parse_num,
    )?;
    let lambda_negative = raw.get(
        "lambda_negative",
        d.emotion_config.lambda_negative,
        parse_num,
    )?;
    let lambda_positive = raw.get(
        "lambda_positive",
        d.emotion_config.lambda_positive,
        parse_num,
    )?;
    let alpha = raw.get("alpha", d.emotion_config.alpha, parse_num)?;
    let mean_frac = raw.get("mean_frac", d.mean_frac, parse_num)?;
    let sd_frac = raw.get("sd_frac", d.sd_frac, parse_num)?;
    let samples = raw.get("samples", d.samples, parse_num)?;
    let epsilon = raw.get("epsilon", d.epsilon, parse_num)?;
    let trials = raw.get("trials", d.trials, parse_num)?;
    let proposers = raw.get("proposers", d.proposers, parse_num)?;
    let master_seed = raw.get("master_seed", d.master_seed, parse_num)?;
    let proposer_utility = raw.get("proposer_utility", d.proposer_utility, |s| {
        parse_proposer_utility(s, alpha)
    })?;
    let out_dir = raw.get("out_dir", d.out_dir.clone(), |s| Ok(PathBuf::from(s)))?;

    let reps = raw.get("reps", defaults.reps, parse_num)?;
    let grid = CalibrationGrid {
        lambda_negative: raw.get(
            "grid_lambda_negative",
            defaults.grid.lambda_negative.clone(),
            parse_list,
        )?,
        lambda_positive: raw.get(
            "grid_lambda_positive",
            defaults.grid.lambda_positive.clone(),
            parse_list,
        )?,
        mean_frac: raw.get("grid_mean_frac", defaults.grid.mean_frac.clone(), parse_list)?,
        sd_frac: raw.get("grid_sd_frac", defaults.grid.sd_frac.clone(), parse_list)?,
        samples: raw.get("grid_samples", defaults.grid.samples.clone(), parse_list)?,
    };
    let target = CalibrationTarget {
        neutral_arm: raw.get("target_neutral_arm", defaults.target.neutral_arm, parse_num)?,
        negative_arm: raw.get(
            "target_negative_arm",
            defaults.target.negative_arm,
            parse_num,
        )?,
        positive_arm: raw.get(
            "target_positive_arm",
            defaults.target.positive_arm,
            parse_num,
        )?,
    };

    Ok(AppConfig {
        experiment: ExperimentConfig {
            stake,
            arm_count,
            emotion,
            emotion_config: crate::emotion::EmotionConfig {
                lambda_neutral,
                lambda_negative,
                lambda_positive,
                alpha,
            },
            mean_frac,
            sd_frac,
            samples,
            epsilon,
            trials,
            proposers,
            master_seed,
            proposer_utility,
            out_dir,
        },
        reps,
        grid,
        target,
    })
}

/// Load and parse a config file. A missing file is a configuration error,
/// not an i/o failure, so the CLI reports it as usage (exit 1).
pub fn load_config(path: &Path) -> Result<AppConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Config(format!("config file {} not found", path.display()))
        } else {
            Error::io(path, e)
        }
    })?;
    parse_config(&text, path)
}
