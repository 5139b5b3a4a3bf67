//! Stochastic test problems with keyed, replayable gradient oracles.
//!
//! A stochastic gradient is a pure function of `(x, sample_key)`: noise and
//! mini-batches are derived from the problem seed mixed with the key, never
//! from hidden RNG state.

mod data;
mod logistic;
mod quadratic;
mod rosenbrock;

pub use data::{generate_synthetic_classification, load_csv, write_csv, Dataset};
pub use logistic::{make_logistic, LogisticProblem};
pub use quadratic::{make_noisy_quadratic, NoisyQuadratic};
pub use rosenbrock::{make_rosenbrock_noisy, NoisyRosenbrock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const PROBLEM_NAMES: [&str; 3] = ["quadratic", "rosenbrock", "logistic"];

/// Half-width of the box `[-R, R]^d` on which declared second-moment bounds hold.
pub const DOMAIN_RADIUS: f64 = 5.0;

/// Noise coordinates are standard normals clipped to this many standard deviations.
pub const NOISE_CLIP: f64 = 3.0;

pub trait StochasticProblem: Send + Sync {
    fn dim(&self) -> usize;

    fn loss(&self, x: &[f64]) -> f64;

    /// Noisy gradient for sample `key`; deterministic in `(x, key)`.
    fn stochastic_grad(&self, x: &[f64], key: u64) -> Vec<f64>;

    fn exact_grad(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn f_star(&self) -> Option<f64> {
        None
    }

    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Uniform bound on `||g||` for `x` in the box `[-DOMAIN_RADIUS, DOMAIN_RADIUS]^d`.
    fn sigma_bound(&self) -> Option<f64> {
        None
    }

    /// Suggested starting point.
    fn default_start(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }
}

/// Central finite differences of the full objective.
pub fn finite_diff_grad(problem: &dyn StochasticProblem, x: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0, "step must be positive");
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let up = problem.loss(&probe);
            probe[k] = orig - h;
            let down = problem.loss(&probe);
            probe[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Exact gradient when the problem has one, central differences otherwise.
pub fn full_gradient(problem: &dyn StochasticProblem, x: &[f64]) -> Vec<f64> {
    problem
        .exact_grad(x)
        .unwrap_or_else(|| finite_diff_grad(problem, x, 1e-6))
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn keyed_rng(seed: u64, key: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(key)))
}

/// Zero-mean noise vector with coordinates `sigma * clip(N(0,1), ±NOISE_CLIP)`.
pub(crate) fn clipped_noise(seed: u64, key: u64, dim: usize, sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; dim];
    }
    let mut rng = keyed_rng(seed, key);
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z.clamp(-NOISE_CLIP, NOISE_CLIP)
        })
        .collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
