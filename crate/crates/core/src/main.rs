//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error,
//! 3 calibration infeasible.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use ugsim::config::load_config;
use ugsim::error::Error;
use ugsim::experiment::{aggregate, run_experiment};
use ugsim::oracle::{calibrate, reward_curve};
use ugsim::plot::write_aggregate_svg;
use ugsim::report::{
    aggregate_csv, calibration_csv, read_aggregate_csv, reward_curve_csv, trials_csv, write_file,
};

/// Trial count used when `simulate --full` overrides the config.
const FULL_TRIALS: u64 = 100_000;

#[derive(Parser)]
#[command(name = "ugsim", version, about = "Ultimatum Game bandit-vs-responder simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write trials.csv and aggregate.csv
    Simulate {
        /// Experiment config file (key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Run the full-length experiment (100000 trials per proposer)
        #[arg(long)]
        full: bool,
    },
    /// Monte Carlo acceptance probabilities and expected rewards per arm
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Search the parameter grid for configs hitting the target arms
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        /// Evaluate the whole grid instead of stopping at the first match
        #[arg(long)]
        full: bool,
    },
    /// Render an aggregate.csv as an SVG line chart
    Plot {
        /// Input aggregate.csv
        #[arg(long = "in")]
        input: PathBuf,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate {
            config,
            out_dir,
            full,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = out_dir {
                cfg.experiment.out_dir = dir;
            }
            if full {
                cfg.experiment.trials = FULL_TRIALS;
            }
            let exp = &cfg.experiment;
            exp.validate()?;

            let records = run_experiment(exp)?;
            let curve = aggregate(&records, exp.proposers, exp.trials, exp.arm_count)?;

            let trials_path = exp.out_dir.join("trials.csv");
            let aggregate_path = exp.out_dir.join("aggregate.csv");
            write_file(&trials_path, &trials_csv(&records))?;
            write_file(&aggregate_path, &aggregate_csv(&curve))?;

            let best = curve.final_argmax();
            println!(
                "simulated {} proposers x {} trials ({} emotion)",
                exp.proposers, exp.trials, exp.emotion
            );
            println!(
                "final argmax: arm {} (offer fraction {:.1}), mean frequency {:.4}",
                best,
                best as f64 / (exp.arm_count - 1) as f64,
                curve.final_frequencies()[best]
            );
            println!("wrote {} and {}", trials_path.display(), aggregate_path.display());
            Ok(())
        }
        Command::Oracle { config } => {
            let cfg = load_config(&config)?;
            let exp = &cfg.experiment;
            exp.validate()?;
            let model = exp.responder_model()?;
            let grid = exp.offer_grid()?;
            let curve = reward_curve(
                &model,
                &grid,
                &exp.proposer_utility,
                cfg.reps,
                exp.master_seed,
                0,
            )?;

            println!("arm  offer      p_accept   std_err    expected_reward");
            for (arm, p) in curve.points().iter().enumerate() {
                println!(
                    "{arm:>3}  {:>9.4}  {:>9.6}  {:>9.6}  {:>9.6}",
                    p.offer, p.p_accept, p.std_err, p.expected_reward
                );
            }
            println!(
                "argmax: arm {} (gap {:.1} standard errors), emotion {}",
                curve.argmax(),
                curve.argmax_gap_in_se(cfg.reps),
                exp.emotion
            );
            let path = exp.out_dir.join("reward_curve.csv");
            write_file(&path, &reward_curve_csv(&curve))?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Calibrate { config, full } => {
            let cfg = load_config(&config)?;
            let settings = cfg.calibration_settings();
            let report = calibrate(&cfg.target, &cfg.grid, &settings, full)?;

            let path = cfg.experiment.out_dir.join("calibration.csv");
            write_file(&path, &calibration_csv(&report.rows))?;
            println!(
                "evaluated {} of {} grid points, wrote {}",
                report.rows.len() / 3,
                cfg.grid.point_count(),
                path.display()
            );
            let selected = report.selected_or_err()?;
            let p = selected.point;
            println!(
                "feasible: lambda_negative={} lambda_positive={} mean_frac={} sd_frac={} samples={}",
                p.lambda_negative, p.lambda_positive, p.mean_frac, p.sd_frac, p.samples
            );
            Ok(())
        }
        Command::Plot { input, out } => {
            let curve = read_aggregate_csv(&input)?;
            write_aggregate_svg(&curve, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Invalid(_) => 1,
        Error::CalibrationInfeasible(_) => 3,
        Error::Io { .. } => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
