use std::path::Path;

use super::config::{BuiltProblem, ExperimentConfig};
use super::trace::{write_index, RunTrace, TraceRow};
use crate::error::{Error, Result};
use crate::optimizers::OptimizerSpec;
use crate::par::{self, Execution};
use crate::problems::{full_gradient, norm, splitmix64};
use crate::theory::Lemma2Tracker;

/// Relative slack when asserting the momentum-energy inequality on a run.
pub const LEMMA2_RUN_TOLERANCE: f64 = 1e-9;

/// Sample key for iteration `t` of run `seed`.
pub fn sample_key(seed: u64, t: u64) -> u64 {
    splitmix64(seed).wrapping_add(t)
}

/// A single (optimizer, eta, seed) run.
#[derive(Clone, Debug)]
pub struct RunJob {
    pub spec: OptimizerSpec,
    pub eta: f64,
    pub seed: u64,
}

/// Expand the config into jobs: optimizer-major, then eta, then seed.
pub fn plan_jobs(config: &ExperimentConfig) -> Vec<RunJob> {
    let mut jobs = Vec::new();
    for spec in &config.optimizers {
        let etas = match &config.run.eta_grid {
            Some(grid) => grid.clone(),
            None => vec![spec.eta()],
        };
        for &eta in &etas {
            for &seed in &config.run.seeds {
                jobs.push(RunJob {
                    spec: spec.clone(),
                    eta,
                    seed,
                });
            }
        }
    }
    jobs
}

/// Run one job to completion or divergence.
pub fn run_single(
    problem: &BuiltProblem,
    job: &RunJob,
    horizon: u64,
    record_every: u64,
    config_hash: &str,
) -> Result<RunTrace> {
    let p = problem.problem.as_ref();
    let mut opt = job.spec.build(job.eta, &problem.x1)?;
    let mu = opt.momentum_factor();
    let mut tracker = Lemma2Tracker::new(p.dim());
    let mut rows = Vec::new();
    let mut diverged = false;
    for t in 1..=horizon {
        let x_t = opt.x().to_vec();
        let record = t == 1 || t % record_every == 0 || t == horizon;
        let (loss, grad_norm) = if record {
            (p.loss(&x_t), norm(&full_gradient(p, &x_t)))
        } else {
            (0.0, 0.0)
        };
        if record && !(loss.is_finite() && grad_norm.is_finite()) {
            diverged = true;
            break;
        }
        let g = p.stochastic_grad(&x_t, sample_key(job.seed, t));
        if g.iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
        opt.step(&g)?;
        if opt.x().iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
        tracker.push(mu, opt.momentum());
        let rhs = tracker.rhs(mu);
        if !(tracker.lhs.is_finite() && rhs.is_finite()) {
            diverged = true;
            break;
        }
        if tracker.lhs > rhs * (1.0 + LEMMA2_RUN_TOLERANCE) {
            return Err(Error::Lemma2Violation {
                t,
                lhs: tracker.lhs,
                rhs,
            });
        }
        if record {
            let lr = opt.effective_lr()?;
            let step_norm = norm(
                &opt.x()
                    .iter()
                    .zip(&x_t)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
            rows.push(TraceRow {
                t,
                loss,
                grad_norm,
                step_norm,
                lr_mean: lr.iter().sum::<f64>() / lr.len() as f64,
                lr_max: lr.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                lemma2_lhs: tracker.lhs,
                lemma2_rhs: rhs,
            });
        }
    }
    let final_x = opt.x().to_vec();
    let test_accuracy = match (&problem.logistic, &problem.holdout) {
        (Some(l), Some(test)) if !diverged => Some(l.accuracy(&final_x, test)),
        _ => None,
    };
    Ok(RunTrace {
        optimizer: job.spec.label(),
        eta: job.eta,
        seed: job.seed,
        config_hash: config_hash.to_string(),
        diverged,
        rows,
        final_x,
        test_accuracy,
    })
}

/// Run every (optimizer, eta, seed) combination. Results are in job order
/// regardless of `exec`. Nothing is written to disk.
pub fn run_traces(config: &ExperimentConfig, exec: Execution) -> Result<Vec<RunTrace>> {
    config.validate()?;
    let problem = config.problem.build()?;
    let hash = config.hash();
    let jobs = plan_jobs(config);
    par::map(exec, &jobs, |job| {
        run_single(
            &problem,
            job,
            config.run.horizon,
            config.run.record_every,
            &hash,
        )
    })
    .into_iter()
    .collect()
}

/// Run the experiment and, when `config.run.output_dir` is set, write one
/// trace CSV per run plus a `runs.csv` index there.
pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<Vec<RunTrace>> {
    let traces = run_traces(config, exec)?;
    if let Some(dir) = &config.run.output_dir {
        write_traces(&traces, dir)?;
    }
    Ok(traces)
}

pub fn write_traces(traces: &[RunTrace], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for tr in traces {
        tr.write_csv(dir)?;
    }
    write_index(traces, dir)?;
    Ok(())
}
