//! Minimal SVG output: error curves per family and level plots of the size
//! profile.

use std::fmt::Write as _;

use super::{Method, SummaryPoint, UnimodalityGrid};
use crate::generators::Family;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn colour(method: Method) -> &'static str {
    match method {
        Method::Adaptive => "#1f77b4",
        Method::Gss => "#d62728",
        Method::Spectral => "#2ca02c",
        Method::Gmg => "#9467bd",
    }
}

/// Mean error against the theta multiplier for one family, one polyline per
/// method, with a vertical min/max bar at each point.
pub fn error_curve_svg(summary: &[SummaryPoint], family: Family) -> String {
    let points: Vec<&SummaryPoint> = summary.iter().filter(|p| p.family == family).collect();
    let (x_lo, x_hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.theta_mult), b.max(p.theta_mult))
        });
    let y_hi = points.iter().map(|p| p.max_err).fold(1.0_f64, f64::max);
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let sx = |v: f64| MARGIN + (v - x_lo) / x_span * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - v / y_hi * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<text x="{}" y="20">{family}</text>"#, MARGIN);
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">theta / theta_crit</text><text x="5" y="{}">err</text>"#,
        WIDTH / 2.0 - 40.0,
        HEIGHT - 10.0,
        MARGIN - 10.0
    );
    for (k, method) in Method::ALL.iter().enumerate() {
        let mut series: Vec<&&SummaryPoint> =
            points.iter().filter(|p| p.method == *method).collect();
        if series.is_empty() {
            continue;
        }
        series.sort_by(|a, b| a.theta_mult.total_cmp(&b.theta_mult));
        let path: Vec<String> = series
            .iter()
            .map(|p| format!("{:.1},{:.1}", sx(p.theta_mult), sy(p.mean_err)))
            .collect();
        let c = colour(*method);
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        for p in &series {
            let x = sx(p.theta_mult);
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{c}" stroke-opacity="0.4"/>"#,
                sy(p.min_err),
                sy(p.max_err)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{c}">{method}</text>"#,
            WIDTH - MARGIN - 60.0,
            MARGIN + 15.0 * k as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Greyscale level plot of the display-scaled grid; `m` runs down, `n` across.
pub fn level_plot_svg(grid: &UnimodalityGrid) -> String {
    let cell = (4.0_f64)
        .min(600.0 / grid.m_bar.max(grid.n_bar) as f64)
        .max(1.0);
    let hi = grid.display.iter().copied().fold(0.0_f64, f64::max);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
        cell * grid.n_bar as f64,
        cell * grid.m_bar as f64
    );
    for m in 0..grid.m_bar {
        for n in 0..grid.n_bar {
            let v = grid.display[m * grid.n_bar + n];
            let level = if hi > 0.0 {
                (255.0 * (1.0 - v / hi)).round() as u8
            } else {
                255
            };
            let _ = writeln!(
                svg,
                r#"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="rgb({level},{level},{level})"/>"#,
                n as f64 * cell,
                m as f64 * cell
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
