//! CSV emission and parsing.
//!
//! All files use LF line endings and fixed six-decimal number formatting
//! (no exponents), so identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{AggregateCurve, TrialRecord};
use crate::oracle::{CalibrationRow, RewardCurve};

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

/// `proposer_id,trial,arm,offer_frac,accepted` with one row per record.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(32 * records.len() + 64);
    out.push_str("proposer_id,trial,arm,offer_frac,accepted\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.proposer,
            r.trial,
            r.arm,
            fmt6(r.offer_frac),
            u8::from(r.accepted)
        );
    }
    out
}

/// `trial,f_0,...,f_k` with one row per trial.
pub fn aggregate_csv(curve: &AggregateCurve) -> String {
    let arms = curve.arm_count();
    let mut out = String::with_capacity(10 * arms * curve.trials() as usize + 64);
    out.push_str("trial");
    for a in 0..arms {
        let _ = write!(out, ",f_{a}");
    }
    out.push('\n');
    for t in 1..=curve.trials() {
        let _ = write!(out, "{t}");
        for a in 0..arms {
            let _ = write!(out, ",{}", fmt6(curve.freq(t, a)));
        }
        out.push('\n');
    }
    out
}

/// `lambda_neg,lambda_pos,mean_frac,sd_frac,s,emotion,argmax_arm,gap_in_se`.
pub fn calibration_csv(rows: &[CalibrationRow]) -> String {
    let mut out = String::new();
    out.push_str("lambda_neg,lambda_pos,mean_frac,sd_frac,s,emotion,argmax_arm,gap_in_se\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt6(r.point.lambda_negative),
            fmt6(r.point.lambda_positive),
            fmt6(r.point.mean_frac),
            fmt6(r.point.sd_frac),
            r.point.samples,
            r.emotion,
            r.argmax_arm,
            fmt6(r.gap_in_se)
        );
    }
    out
}

/// `arm,offer,p_accept,std_err,expected_reward`.
pub fn reward_curve_csv(curve: &RewardCurve) -> String {
    let mut out = String::new();
    out.push_str("arm,offer,p_accept,std_err,expected_reward\n");
    for (arm, p) in curve.points().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            arm,
            fmt6(p.offer),
            fmt6(p.p_accept),
            fmt6(p.std_err),
            fmt6(p.expected_reward)
        );
    }
    out
}

/// Write `content` to `path`, creating parent directories.
pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Parse an `aggregate.csv` back into a curve (the plot subcommand's input).
/// A missing input is reported as invalid usage rather than an i/o failure.
pub fn read_aggregate_csv(path: &Path) -> Result<AggregateCurve> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Invalid(format!("input file {} not found", path.display()))
        } else {
            Error::io(path, e)
        }
    })?;
    let mut lines = text.lines().enumerate();

    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let Some((_, header)) = lines.next() else {
        return Err(parse_err(1, "empty file".into()));
    };
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"trial") || cols.len() < 2 {
        return Err(parse_err(1, format!("unexpected header '{header}'")));
    }
    for (a, col) in cols[1..].iter().enumerate() {
        if *col != format!("f_{a}") {
            return Err(parse_err(1, format!("unexpected column '{col}'")));
        }
    }
    let arm_count = cols.len() - 1;

    let mut values = Vec::new();
    let mut trials = 0u64;
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != arm_count + 1 {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, got {}", arm_count + 1, fields.len()),
            ));
        }
        let t: u64 = fields[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad trial index: {e}")))?;
        if t != trials + 1 {
            return Err(parse_err(
                line_no,
                format!("trial indices must be 1,2,...; got {t} after {trials}"),
            ));
        }
        trials = t;
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|e| parse_err(line_no, format!("bad frequency: {e}")))?;
            values.push(v);
        }
    }
    AggregateCurve::new(arm_count, trials, values)
}
