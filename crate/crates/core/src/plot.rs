//! Deterministic SVG line charts of aggregate curves.
//!
//! One polyline per arm over trials, linear axes with labeled ticks, legend
//! of offer fractions. The output is a pure function of the curve: no
//! timestamps or environment-dependent content. Long runs are decimated to
//! at most [`MAX_POINTS`] vertices per polyline (final trial always kept),
//! which bounds the file size without changing the visible shape.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::experiment::AggregateCurve;
use crate::report::write_file;

/// Upper bound on polyline vertices per arm.
pub const MAX_POINTS: usize = 2000;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 11] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#000000",
];

fn color(arm: usize) -> &'static str {
    PALETTE[arm % PALETTE.len()]
}

/// Largest of 1/2/5 * 10^k not exceeding `max / 4`, for x tick spacing.
fn tick_step(max: u64) -> u64 {
    let target = (max / 4).max(1) as f64;
    let magnitude = 10f64.powf(target.log10().floor());
    let mut best = 1.0;
    for mult in [1.0, 2.0, 5.0, 10.0] {
        if magnitude * mult <= target {
            best = magnitude * mult;
        }
    }
    (best as u64).max(1)
}

fn sampled_trials(n: u64) -> Vec<u64> {
    let stride = (n as usize).div_ceil(MAX_POINTS).max(1) as u64;
    let mut out: Vec<u64> = (1..=n).step_by(stride as usize).collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

/// Render the curve as an SVG document.
pub fn render_aggregate_svg(curve: &AggregateCurve) -> String {
    let n = curve.trials();
    let arms = curve.arm_count();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let x = |t: u64| {
        if n <= 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + (t - 1) as f64 / (n - 1) as f64 * plot_w
        }
    };
    let y = |f: f64| MARGIN_TOP + (1.0 - f) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // y grid and tick labels at 0.0, 0.2, ..., 1.0
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let yy = y(f);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_LEFT,
            yy,
            MARGIN_LEFT + plot_w,
            yy
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{:.1}</text>"#,
            MARGIN_LEFT - 8.0,
            yy + 4.0,
            f
        );
    }

    // x ticks
    let step = tick_step(n);
    let mut ticks: Vec<u64> = vec![1];
    let mut t = step;
    while t <= n {
        if t != 1 {
            ticks.push(t);
        }
        t += step;
    }
    if ticks.last() != Some(&n) && n > 1 {
        ticks.push(n);
    }
    for &t in &ticks {
        let xx = x(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            xx,
            MARGIN_TOP + plot_h,
            xx,
            MARGIN_TOP + plot_h + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            xx,
            MARGIN_TOP + plot_h + 20.0,
            t
        );
    }

    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">trial</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">mean cumulative offer frequency</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // one polyline per arm
    let trials = sampled_trials(n);
    for arm in 0..arms {
        let mut points = String::new();
        for &t in &trials {
            let _ = write!(points, "{:.2},{:.2} ", x(t), y(curve.freq(t, arm)));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            color(arm),
            points.trim_end()
        );
    }

    // legend: offer fraction per arm
    let legend_x = MARGIN_LEFT + plot_w + 18.0;
    for arm in 0..arms {
        let yy = MARGIN_TOP + 14.0 * arm as f64 + 8.0;
        let frac = arm as f64 / (arms - 1) as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="3"/>"#,
            legend_x,
            yy,
            legend_x + 22.0,
            yy,
            color(arm)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">offer {:.2}</text>"#,
            legend_x + 28.0,
            yy + 4.0,
            frac
        );
    }

    svg.push_str("</svg>\n");
    svg
}

/// Render and write the chart.
pub fn write_aggregate_svg(curve: &AggregateCurve, path: &Path) -> Result<()> {
    write_file(path, &render_aggregate_svg(curve))
}
