//! Static SVG rendering of a clustering run: a scatter panel coloured by
//! verdict and a stacked membership bar per point.

use std::fmt::Write;

use crate::cli::RunSummary;
use crate::error::{NsError, Result};
use crate::labeling::VerdictKind;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
];
const NOISE_COLOUR: &str = "#7f7f7f";
const OUTLIER_COLOUR: &str = "#d62728";
const BOUNDARY_COLOUR: &str = "#000000";

const PANEL: f64 = 400.0;
const MARGIN: f64 = 30.0;
const GAP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlotOptions {
    /// Skip the scatter panel; works for any dimension.
    pub bars_only: bool,
}

fn cluster_colour(j: usize) -> &'static str {
    PALETTE[j % PALETTE.len()]
}

/// Render `summary` as a self-contained SVG 1.1 document.
pub fn render_svg(summary: &RunSummary, opts: PlotOptions) -> Result<String> {
    if !opts.bars_only && summary.dataset.dim != 2 {
        return Err(NsError::InvalidConfig(format!(
            "scatter plot needs 2-dimensional data, got {} dimensions (use --bars-only)",
            summary.dataset.dim
        )));
    }
    let verdicts = summary
        .points
        .iter()
        .map(|p| p.verdict.parse::<VerdictKind>())
        .collect::<Result<Vec<_>>>()?;

    let panels = if opts.bars_only { 1.0 } else { 2.0 };
    let width = 2.0 * MARGIN + panels * PANEL + (panels - 1.0) * GAP;
    let height = 2.0 * MARGIN + PANEL + 20.0;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">
<rect width="100%" height="100%" fill="white"/>
<text x="{MARGIN}" y="18" font-family="sans-serif" font-size="13">{} (n = {}, K = {})</text>"#,
        escape(&summary.dataset.name),
        summary.dataset.n,
        summary.config.k
    )
    .expect("write to String");

    let mut left = MARGIN;
    if !opts.bars_only {
        scatter(&mut svg, summary, &verdicts, left, MARGIN);
        left += PANEL + GAP;
    }
    bars(&mut svg, summary, left, MARGIN);
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn scatter(svg: &mut String, summary: &RunSummary, verdicts: &[VerdictKind], x0: f64, y0: f64) {
    let coords = summary
        .points
        .iter()
        .map(|p| (p.x[0], p.x[1]))
        .chain(summary.centroids.iter().map(|c| (c[0], c[1])));
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in coords {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    // one square scale for both axes, with a 5% pad
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12) * 1.1;
    let (cx, cy) = ((lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0);
    let sx = |x: f64| x0 + PANEL / 2.0 + (x - cx) / span * PANEL;
    let sy = |y: f64| y0 + PANEL / 2.0 - (y - cy) / span * PANEL;

    writeln!(
        svg,
        r##"<g id="scatter"><rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="#cccccc"/>"##
    )
    .expect("write to String");
    for (p, v) in summary.points.iter().zip(verdicts) {
        let (x, y) = (sx(p.x[0]), sy(p.x[1]));
        let shape = match *v {
            VerdictKind::Main(j) => {
                format!(
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}"/>"#,
                    cluster_colour(j)
                )
            }
            VerdictKind::Boundary(..) => format!(
                r#"<path d="M {:.2} {y:.2} L {x:.2} {:.2} L {:.2} {y:.2} L {x:.2} {:.2} Z" fill="white" stroke="{BOUNDARY_COLOUR}" stroke-width="1.5"/>"#,
                x - 5.0,
                y - 5.0,
                x + 5.0,
                y + 5.0
            ),
            VerdictKind::Outlier => format!(
                r#"<path d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}" stroke="{OUTLIER_COLOUR}" stroke-width="2"/>"#,
                x - 4.0,
                y - 4.0,
                x + 4.0,
                y + 4.0,
                x - 4.0,
                y + 4.0,
                x + 4.0,
                y - 4.0
            ),
        };
        writeln!(
            svg,
            r#"<g class="point" data-id="{}" data-verdict="{}">{shape}</g>"#,
            p.id, p.verdict
        )
        .expect("write to String");
    }
    for (j, c) in summary.centroids.iter().enumerate() {
        writeln!(
            svg,
            r#"<rect class="centroid" x="{:.2}" y="{:.2}" width="10" height="10" fill="none" stroke="{}" stroke-width="2.5"/>"#,
            sx(c[0]) - 5.0,
            sy(c[1]) - 5.0,
            cluster_colour(j)
        )
        .expect("write to String");
    }
    svg.push_str("</g>\n");
}

fn bars(svg: &mut String, summary: &RunSummary, x0: f64, y0: f64) {
    let n = summary.points.len().max(1) as f64;
    let slot = PANEL / n;
    let bar = (slot * 0.8).max(0.5);
    writeln!(
        svg,
        r##"<g id="memberships"><rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="#cccccc"/>"##
    )
    .expect("write to String");
    for (i, p) in summary.points.iter().enumerate() {
        let x = x0 + i as f64 * slot + (slot - bar) / 2.0;
        let mut bottom = y0 + PANEL;
        let parts =
            p.t.iter()
                .enumerate()
                .map(|(j, &v)| (v, cluster_colour(j)))
                .chain(std::iter::once((p.f, NOISE_COLOUR)));
        for (v, colour) in parts {
            let h = v.clamp(0.0, 1.0) * PANEL;
            bottom -= h;
            writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{bottom:.2}" width="{bar:.2}" height="{h:.2}" fill="{colour}"/>"#
            )
            .expect("write to String");
        }
    }
    writeln!(
        svg,
        r#"<text x="{x0}" y="{:.0}" font-family="sans-serif" font-size="11">membership per point (grey: noise)</text>"#,
        y0 + PANEL + 16.0
    )
    .expect("write to String");
    svg.push_str("</g>\n");
}
