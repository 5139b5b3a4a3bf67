use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::AdaUsmState;

pub const TRACE_COLUMNS: [&str; 8] = [
    "t",
    "loss",
    "grad_norm",
    "step_norm",
    "lr_mean",
    "lr_max",
    "lemma2_lhs",
    "lemma2_rhs",
];

/// One recorded iteration; `loss` and `grad_norm` are evaluated at `x_t`,
/// `step_norm` is `||x_{t+1} - x_t||`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub loss: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    pub lr_mean: f64,
    pub lr_max: f64,
    pub lemma2_lhs: f64,
    pub lemma2_rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub optimizer: String,
    pub eta: f64,
    pub seed: u64,
    pub config_hash: String,
    pub diverged: bool,
    pub rows: Vec<TraceRow>,
    pub final_x: Vec<f64>,
    /// Held-out accuracy for logistic runs with a holdout split.
    pub test_accuracy: Option<f64>,
}

impl RunTrace {
    /// File name used when writing this trace into an output directory.
    pub fn file_name(&self) -> String {
        format!(
            "{}__eta{}__seed{}.csv",
            sanitize(&self.optimizer),
            self.eta,
            self.seed
        )
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = TRACE_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.t,
                r.loss,
                r.grad_norm,
                r.step_norm,
                r.lr_mean,
                r.lr_max,
                r.lemma2_lhs,
                r.lemma2_rhs
            );
        }
        out
    }

    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_csv_string()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Read a trace written by [`RunTrace::write_csv`]. Metadata is recovered
    /// from the file name when it follows the standard pattern.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(TRACE_COLUMNS) {
            return Err(Error::CsvParse {
                row: 0,
                column: 1,
                message: format!("expected header {}", TRACE_COLUMNS.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let cell = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::CsvParse {
                        row: i + 1,
                        column: c + 1,
                        message: "expected a number".into(),
                    })
            };
            let t = rec
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::CsvParse {
                    row: i + 1,
                    column: 1,
                    message: "expected an integer".into(),
                })?;
            rows.push(TraceRow {
                t,
                loss: cell(1)?,
                grad_norm: cell(2)?,
                step_norm: cell(3)?,
                lr_mean: cell(4)?,
                lr_max: cell(5)?,
                lemma2_lhs: cell(6)?,
                lemma2_rhs: cell(7)?,
            });
        }
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (optimizer, eta, seed) = parse_file_stem(&stem).unwrap_or((stem, f64::NAN, 0));
        Ok(RunTrace {
            optimizer,
            eta,
            seed,
            config_hash: String::new(),
            diverged: false,
            rows,
            final_x: Vec::new(),
            test_accuracy: None,
        })
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn parse_file_stem(stem: &str) -> Option<(String, f64, u64)> {
    let mut parts = stem.rsplitn(3, "__");
    let seed = parts.next()?.strip_prefix("seed")?.parse().ok()?;
    let eta = parts.next()?.strip_prefix("eta")?.parse().ok()?;
    Some((parts.next()?.to_string(), eta, seed))
}

/// Write `runs.csv`: one line per run with its summary.
pub fn write_index(traces: &[RunTrace], dir: &Path) -> Result<PathBuf> {
    let path = dir.join("runs.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "file",
        "optimizer",
        "eta",
        "seed",
        "config_hash",
        "diverged",
        "rows",
        "final_loss",
        "min_grad_norm",
        "slope",
        "test_accuracy",
    ])?;
    for tr in traces {
        let s = super::summarize(tr);
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            tr.file_name(),
            tr.optimizer.clone(),
            tr.eta.to_string(),
            tr.seed.to_string(),
            tr.config_hash.clone(),
            tr.diverged.to_string(),
            tr.rows.len().to_string(),
            opt(s.final_loss),
            opt(s.min_grad_norm),
            opt(s.slope),
            opt(tr.test_accuracy),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Dump an AdaUSM state as CSV (`t`, `a_over_a` header line, then one row per
/// coordinate with `x`, `m`, `r`).
pub fn state_snapshot(state: &AdaUsmState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t,a_over_a");
    let _ = writeln!(out, "{},{}", state.t, state.sched_acc.a_over_a);
    let _ = writeln!(out, "k,x,m,r");
    for k in 0..state.dim() {
        let _ = writeln!(out, "{},{},{},{}", k, state.x[k], state.m[k], state.r[k]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace() -> RunTrace {
        RunTrace {
            optimizer: "adam lr".into(),
            eta: 0.001,
            seed: 7,
            config_hash: "abc".into(),
            diverged: false,
            rows: vec![
                TraceRow {
                    t: 1,
                    loss: 0.1 + 0.2,
                    grad_norm: 1.0 / 3.0,
                    step_norm: 1e-300,
                    lr_mean: 2.5,
                    lr_max: 3.0,
                    lemma2_lhs: 0.0,
                    lemma2_rhs: 0.0,
                },
                TraceRow {
                    t: 10,
                    loss: f64::MIN_POSITIVE,
                    grad_norm: 123456.789,
                    step_norm: 0.5,
                    lr_mean: 1e-9,
                    lr_max: 1e-8,
                    lemma2_lhs: 4.0,
                    lemma2_rhs: 5.0,
                },
            ],
            final_x: vec![],
            test_accuracy: None,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let tr = trace();
        let path = tr.write_csv(dir.path()).unwrap();
        assert_eq!(path.file_name().unwrap(), "adam_lr__eta0.001__seed7.csv");
        let back = RunTrace::read_csv(&path).unwrap();
        assert_eq!(back.rows, tr.rows);
        assert_eq!(
            (back.optimizer.as_str(), back.eta, back.seed),
            ("adam_lr", 0.001, 7)
        );
    }

    #[test]
    fn foreign_file_names_fall_back_to_stem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mine.csv");
        std::fs::write(&path, trace().to_csv_string()).unwrap();
        let back = RunTrace::read_csv(&path).unwrap();
        assert_eq!(back.optimizer, "mine");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(RunTrace::read_csv(&path).is_err());
    }

    #[test]
    fn snapshot_lists_every_coordinate() {
        let cfg = crate::optimizers::adahb_default();
        let s = AdaUsmState::init(&cfg, &[1.0, 2.0])
            .unwrap()
            .step(&cfg, &[0.5, -0.5])
            .unwrap();
        let text = state_snapshot(&s);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,a_over_a");
        assert_eq!(lines[1], "1,1");
        assert_eq!(lines.len(), 5);
    }
}
