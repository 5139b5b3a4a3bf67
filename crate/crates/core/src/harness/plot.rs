//! Dependency-free SVG line plots of run traces.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::trace::RunTrace;
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_Y: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Loss,
    GradNorm,
}

impl PlotKind {
    fn value(self, r: &super::trace::TraceRow) -> f64 {
        match self {
            PlotKind::Loss => r.loss,
            PlotKind::GradNorm => r.grad_norm,
        }
    }

    fn label(self) -> &'static str {
        match self {
            PlotKind::Loss => "loss",
            PlotKind::GradNorm => "gradient norm",
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loss" => Ok(Self::Loss),
            "grad-norm" => Ok(Self::GradNorm),
            other => Err(Error::InvalidConfig(format!(
                "unknown plot kind {other:?}; valid: loss, grad-norm"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlotOptions {
    pub kind: PlotKind,
    pub log_log: bool,
}

fn series_label(tr: &RunTrace, many_etas: bool) -> String {
    if many_etas {
        format!("{} eta={} s{}", tr.optimizer, tr.eta, tr.seed)
    } else {
        format!("{} s{}", tr.optimizer, tr.seed)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Render traces as a standalone SVG document.
pub fn render_svg(traces: &[RunTrace], opts: PlotOptions) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::EmptyTraces);
    }
    let tf = |v: f64| if opts.log_log { v.log10() } else { v };
    let series: Vec<Vec<(f64, f64)>> = traces
        .iter()
        .map(|tr| {
            tr.rows
                .iter()
                .map(|r| (tf(r.t as f64), tf(opts.kind.value(r))))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = series.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = all.fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - 2.0 * MARGIN_Y;
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN_Y + (1.0 - (y - y0) / (y1 - y0)) * ph;
    let tick = |v: f64| {
        if opts.log_log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3e}")
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(xv),
            HEIGHT - MARGIN_Y + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    let scale = if opts.log_log { " (log-log)" } else { "" };
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{} vs iteration{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        opts.kind.label(),
        scale
    );
    let many_etas = traces
        .iter()
        .any(|t| t.eta.to_bits() != traces[0].eta.to_bits());
    for (i, (tr, pts)) in traces.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !pts.is_empty() {
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = MARGIN_Y + 14.0 * i as f64 + 8.0;
        let lx = WIDTH - MARGIN_RIGHT + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            escape(&series_label(tr, many_etas))
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(traces: &[RunTrace], opts: PlotOptions, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(traces, opts)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trace::TraceRow;

    fn trace(label: &str, losses: &[f64]) -> RunTrace {
        RunTrace {
            optimizer: label.into(),
            eta: 0.1,
            seed: 1,
            config_hash: String::new(),
            diverged: false,
            rows: losses
                .iter()
                .enumerate()
                .map(|(i, &l)| TraceRow {
                    t: i as u64 + 1,
                    loss: l,
                    grad_norm: l.sqrt(),
                    step_norm: 0.0,
                    lr_mean: 0.0,
                    lr_max: 0.0,
                    lemma2_lhs: 0.0,
                    lemma2_rhs: 0.0,
                })
                .collect(),
            final_x: vec![],
            test_accuracy: None,
        }
    }

    #[test]
    fn svg_has_one_line_per_series_and_legend() {
        let traces = [trace("a<b", &[4.0, 2.0, 1.0]), trace("c", &[3.0, 0.0, 0.5])];
        for log_log in [false, true] {
            let svg = render_svg(
                &traces,
                PlotOptions {
                    kind: PlotKind::Loss,
                    log_log,
                },
            )
            .unwrap();
            assert_eq!(svg.matches("<polyline").count(), 2);
            assert!(svg.contains("a&lt;b s1"));
            assert!(!svg.contains("NaN") && !svg.contains("inf"));
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        let opts = PlotOptions {
            kind: PlotKind::GradNorm,
            log_log: false,
        };
        assert!(matches!(render_svg(&[], opts), Err(Error::EmptyTraces)));
        assert!(render_svg(&[trace("flat", &[1.0])], opts).is_ok());
    }
}
