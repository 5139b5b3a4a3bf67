//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use adausm::problems::StochasticProblem;
use adausm::{AdaUsmConfig, AdaUsmState, LrMode, WeightSchedule};

/// Momentum recursion written in its textbook form.
#[derive(Clone, Copy, Debug)]
pub enum Reference {
    /// `m_t = mu m_{t-1} - lr g_t`, `x_{t+1} = x_t + m_t`
    HeavyBall,
    /// `y_{t+1} = x_t - lr g_t`, `x_{t+1} = y_{t+1} + mu (y_{t+1} - y_t)`, `y_1 = x_1`
    NesterovY,
    /// `x_{t+1} = x_t - eta g_t / (sqrt(sum_i g_i^2) + eps)`
    PlainAdaGrad,
}

/// Weighted adaptive rate from raw sums:
/// `eta / (sqrt(t * sum a_i g_i^2 / sum a_i) + eps)`.
pub fn brute_force_lr(
    schedule: &WeightSchedule,
    eta: f64,
    eps: f64,
    history: &[Vec<f64>],
) -> Vec<f64> {
    let t = history.len();
    let d = history[0].len();
    let mut v = vec![0.0; d];
    let mut total = 0.0;
    for (i, g) in history.iter().enumerate() {
        let a = schedule.weight(i as u64 + 1).unwrap();
        total += a;
        for k in 0..d {
            v[k] += a * g[k] * g[k];
        }
    }
    v.iter()
        .map(|vk| eta / ((t as f64 * vk / total).sqrt() + eps))
        .collect()
}

/// Run a reference recursion for `steps` iterations with gradients keyed by `t`.
/// Returns `x_1, ..., x_{steps+1}`.
#[allow(clippy::too_many_arguments)]
pub fn reference_trajectory(
    problem: &dyn StochasticProblem,
    x1: &[f64],
    steps: u64,
    form: Reference,
    schedule: &WeightSchedule,
    eta: f64,
    mu: f64,
    eps: f64,
) -> Vec<Vec<f64>> {
    let d = x1.len();
    let mut x = x1.to_vec();
    let mut y = x1.to_vec();
    let mut m = vec![0.0; d];
    let mut sq = vec![0.0; d];
    let mut history = Vec::new();
    let mut out = vec![x.clone()];
    for t in 1..=steps {
        let g = problem.stochastic_grad(&x, t);
        history.push(g.clone());
        match form {
            Reference::HeavyBall => {
                let lr = brute_force_lr(schedule, eta, eps, &history);
                for k in 0..d {
                    m[k] = mu * m[k] - lr[k] * g[k];
                    x[k] += m[k];
                }
            }
            Reference::NesterovY => {
                let lr = brute_force_lr(schedule, eta, eps, &history);
                for k in 0..d {
                    let y_next = x[k] - lr[k] * g[k];
                    x[k] = y_next + mu * (y_next - y[k]);
                    y[k] = y_next;
                }
            }
            Reference::PlainAdaGrad => {
                for k in 0..d {
                    sq[k] += g[k] * g[k];
                    x[k] -= eta * g[k] / (sq[k].sqrt() + eps);
                }
            }
        }
        out.push(x.clone());
    }
    out
}

/// Same schedule as the reference, driven through the library state machine.
pub fn adausm_trajectory(
    problem: &dyn StochasticProblem,
    x1: &[f64],
    steps: u64,
    config: &AdaUsmConfig,
) -> Vec<Vec<f64>> {
    let mut s = AdaUsmState::init(config, x1).unwrap();
    let mut out = vec![s.x.clone()];
    for t in 1..=steps {
        let g = problem.stochastic_grad(&s.x, t);
        s = s.step(config, &g).unwrap();
        out.push(s.x.clone());
    }
    out
}

pub fn max_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

pub fn config(eta: f64, mu: f64, lambda: f64, eps: f64, schedule: WeightSchedule) -> AdaUsmConfig {
    AdaUsmConfig::new(eta, mu, lambda, eps, schedule, LrMode::ConstantEta).unwrap()
}

/// Worst max-coordinate deviation of the three reductions on one problem.
pub fn equivalence_deviations(problem: &dyn StochasticProblem, x1: &[f64], steps: u64) -> [f64; 3] {
    let poly = WeightSchedule::Polynomial { alpha: 1.0 };
    let (eta, mu, eps) = (0.01, 0.9, 1e-8);
    let shb = max_deviation(
        &adausm_trajectory(problem, x1, steps, &config(eta, mu, 0.0, eps, poly)),
        &reference_trajectory(
            problem,
            x1,
            steps,
            Reference::HeavyBall,
            &poly,
            eta,
            mu,
            eps,
        ),
    );
    let snag = max_deviation(
        &adausm_trajectory(problem, x1, steps, &config(eta, mu, 1.0, eps, poly)),
        &reference_trajectory(
            problem,
            x1,
            steps,
            Reference::NesterovY,
            &poly,
            eta,
            mu,
            eps,
        ),
    );
    let c = WeightSchedule::Constant;
    let adagrad = max_deviation(
        &adausm_trajectory(problem, x1, steps, &config(0.1, 0.0, 0.0, eps, c)),
        &reference_trajectory(
            problem,
            x1,
            steps,
            Reference::PlainAdaGrad,
            &c,
            0.1,
            0.0,
            eps,
        ),
    );
    [shb, snag, adagrad]
}

/// Outcome of the Monte-Carlo oracle checks at one point.
#[derive(Clone, Debug)]
pub struct OracleCheck {
    /// Largest `|mean - exact| / (std / sqrt(n))` over coordinates; the
    /// unbiasedness criterion requires it below 5.
    pub worst_z: f64,
    /// Largest sampled `||g||^2` over `sigma_bound^2`; must not exceed 1.
    pub worst_second_moment_ratio: f64,
}

/// Draw `samples` keyed gradients at `x`, in chunks that may run in parallel;
/// the per-chunk sums are reduced in order so the result is deterministic.
pub fn oracle_check(
    problem: &dyn StochasticProblem,
    x: &[f64],
    samples: usize,
    key_base: u64,
    exec: adausm::Execution,
) -> OracleCheck {
    const CHUNK: usize = 500;
    let d = problem.dim();
    let chunks = samples.div_ceil(CHUNK);
    let partial = adausm::par::map_range(exec, chunks, |c| {
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        let mut max_norm2: f64 = 0.0;
        for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
            let g = problem.stochastic_grad(x, key_base + i as u64);
            let n2: f64 = g.iter().map(|v| v * v).sum();
            max_norm2 = max_norm2.max(n2);
            for k in 0..d {
                sum[k] += g[k];
                sq[k] += g[k] * g[k];
            }
        }
        (sum, sq, max_norm2)
    });
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    let mut max_norm2: f64 = 0.0;
    for (s, q, m) in partial {
        for k in 0..d {
            sum[k] += s[k];
            sq[k] += q[k];
        }
        max_norm2 = max_norm2.max(m);
    }
    let n = samples as f64;
    let exact = problem
        .exact_grad(x)
        .expect("bundled problems have exact gradients");
    let mut worst_z: f64 = 0.0;
    for k in 0..d {
        let mean = sum[k] / n;
        let var = (sq[k] / n - mean * mean).max(0.0) * n / (n - 1.0);
        let err = (mean - exact[k]).abs();
        let z = if var > 0.0 {
            err / (var.sqrt() / n.sqrt())
        } else if err <= 1e-12 * (1.0 + exact[k].abs()) {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
    }
    let sigma = problem
        .sigma_bound()
        .expect("bundled problems declare sigma");
    OracleCheck {
        worst_z,
        worst_second_moment_ratio: max_norm2 / (sigma * sigma),
    }
}

/// The bundled problems at the parameters used by the oracle checks.
pub fn bundled_problems() -> Vec<(&'static str, Box<dyn StochasticProblem>)> {
    use adausm::problems::*;
    let data = generate_synthetic_classification(200, 5, 2.0, 3).unwrap();
    vec![
        (
            "quadratic",
            Box::new(make_noisy_quadratic(10, 100.0, 0.5, 1).unwrap()),
        ),
        (
            "rosenbrock",
            Box::new(make_rosenbrock_noisy(0.5, 2).unwrap()),
        ),
        (
            "logistic",
            Box::new(make_logistic(data, 16, 5e-4, 3).unwrap()),
        ),
    ]
}

/// Uniform points in the box on which `sigma_bound` is certified.
pub fn box_points(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let r = adausm::problems::DOMAIN_RADIUS;
    (0..count)
        .map(|_| (0..d).map(|_| rng.random_range(-r..r)).collect())
        .collect()
}

pub fn cli() -> std::process::Command {
    let mut c = std::process::Command::new(env!("CARGO_BIN_EXE_adausm"));
    c.env_remove("ADAUSM_OUTPUT_DIR");
    c
}

/// Small quadratic config shared by CLI tests.
pub const QUADRATIC_TOML: &str = r#"[problem]
name = "quadratic"
dim = 10
noise = 0.1
seed = 1

[[optimizer]]
name = "adahb"

[[optimizer]]
name = "adanag"

[run]
T = 300
seeds = [1, 2]
record_every = 10
"#;

pub const DIVERGING_TOML: &str = r#"[problem]
name = "rosenbrock"

[[optimizer]]
name = "sgd"
eta = 1.0

[run]
T = 200
seeds = [0]
"#;

/// Sorted `(file name, bytes)` of every file in `dir`.
pub fn dir_contents(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}
