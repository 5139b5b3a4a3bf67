use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::trace::RunTrace;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min_grad_norm: Option<f64>,
    pub final_loss: Option<f64>,
    /// Least-squares slope of `ln(min_{s<=t} ||grad f(x_s)||^2)` against
    /// `ln t` over the second half of the recorded rows.
    pub slope: Option<f64>,
}

pub fn summarize(trace: &RunTrace) -> Summary {
    let rows = &trace.rows;
    if rows.is_empty() {
        return Summary::default();
    }
    let mut best = f64::INFINITY;
    let running: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            best = best.min(r.grad_norm);
            ((r.t as f64).ln(), (best * best).ln())
        })
        .collect();
    Summary {
        min_grad_norm: Some(best),
        final_loss: rows.last().map(|r| r.loss),
        slope: least_squares_slope(&running[rows.len() / 2..]),
    }
}

/// Slope of the ordinary least-squares line through `(x, y)` pairs;
/// `None` with fewer than two distinct `x` or any non-finite value.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2
        || points
            .iter()
            .any(|(x, y)| !(x.is_finite() && y.is_finite()))
    {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMetric {
    FinalLoss,
    MinGradNorm,
}

impl SelectionMetric {
    fn of(self, s: &Summary) -> Option<f64> {
        match self {
            SelectionMetric::FinalLoss => s.final_loss,
            SelectionMetric::MinGradNorm => s.min_grad_norm,
        }
    }
}

impl FromStr for SelectionMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "final-loss" => Ok(Self::FinalLoss),
            "min-grad-norm" => Ok(Self::MinGradNorm),
            other => Err(Error::InvalidConfig(format!(
                "unknown metric {other:?}; valid: final-loss, min-grad-norm"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridChoice {
    pub eta: f64,
    /// Metric averaged over seeds.
    pub value: f64,
}

/// Best step size per optimizer label. A step size counts only if every seed
/// finished without diverging; the metric is averaged over seeds and ties go
/// to the smaller step size. Optimizers with no usable step size are left out.
pub fn grid_select(
    traces: &[RunTrace],
    metric: SelectionMetric,
) -> Result<BTreeMap<String, GridChoice>> {
    if traces.is_empty() {
        return Err(Error::EmptyTraces);
    }
    // (eta, sum, count, all finite)
    type Acc = (f64, f64, usize, bool);
    let mut groups: BTreeMap<&str, BTreeMap<u64, Acc>> = BTreeMap::new();
    for tr in traces {
        let value = metric.of(&summarize(tr)).filter(|v| v.is_finite());
        let entry = groups
            .entry(tr.optimizer.as_str())
            .or_default()
            .entry(tr.eta.to_bits())
            .or_insert((tr.eta, 0.0, 0, true));
        match value {
            Some(v) if !tr.diverged => {
                entry.1 += v;
                entry.2 += 1;
            }
            _ => entry.3 = false,
        }
    }
    let mut out = BTreeMap::new();
    for (label, etas) in groups {
        let mut best: Option<GridChoice> = None;
        for (eta, sum, count, ok) in etas.into_values() {
            if !ok || count == 0 {
                continue;
            }
            let value = sum / count as f64;
            let better = match best {
                None => true,
                Some(b) => value < b.value || (value == b.value && eta < b.eta),
            };
            if better {
                best = Some(GridChoice { eta, value });
            }
        }
        if let Some(b) = best {
            out.insert(label.to_string(), b);
        }
    }
    if out.is_empty() {
        return Err(Error::NoFiniteRun);
    }
    Ok(out)
}

/// Plain-text table with one line per run.
pub fn render_table(traces: &[RunTrace]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>10} {:>6} {:>14} {:>14} {:>9} {:>8}",
        "optimizer", "eta", "seed", "final_loss", "min_grad_norm", "slope", "status"
    );
    let fmt = |v: Option<f64>, prec: usize| match v {
        Some(x) => format!("{x:.prec$e}"),
        None => "-".to_string(),
    };
    for tr in traces {
        let s = summarize(tr);
        let slope = s
            .slope
            .map(|v| format!("{v:.3}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:>6} {:>14} {:>14} {:>9} {:>8}",
            tr.optimizer,
            tr.eta,
            tr.seed,
            fmt(s.final_loss, 4),
            fmt(s.min_grad_norm, 4),
            slope,
            if tr.diverged { "diverged" } else { "ok" }
        );
    }
    out
}
