use super::{clipped_noise, StochasticProblem, DOMAIN_RADIUS, NOISE_CLIP};
use crate::error::{Error, Result};

/// `f(x, y) = (1 - x)^2 + 100 (y - x^2)^2` with additive clipped noise.
#[derive(Clone, Debug)]
pub struct NoisyRosenbrock {
    pub noise_sigma: f64,
    pub seed: u64,
}

pub fn make_rosenbrock_noisy(noise_sigma: f64, seed: u64) -> Result<NoisyRosenbrock> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise sigma must be >= 0, got {noise_sigma}"
        )));
    }
    Ok(NoisyRosenbrock { noise_sigma, seed })
}

impl NoisyRosenbrock {
    fn grad(x: &[f64]) -> [f64; 2] {
        let (a, b) = (x[0], x[1]);
        let r = b - a * a;
        [-2.0 * (1.0 - a) - 400.0 * a * r, 200.0 * r]
    }
}

impl StochasticProblem for NoisyRosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn loss(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    fn stochastic_grad(&self, x: &[f64], key: u64) -> Vec<f64> {
        let noise = clipped_noise(self.seed, key, 2, self.noise_sigma);
        let g = Self::grad(x);
        vec![g[0] + noise[0], g[1] + noise[1]]
    }

    fn exact_grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(Self::grad(x).to_vec())
    }

    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }

    fn sigma_bound(&self) -> Option<f64> {
        let r = DOMAIN_RADIUS;
        let gx = 2.0 * (1.0 + r) + 400.0 * r * (r + r * r);
        let gy = 200.0 * (r + r * r);
        Some(gx.hypot(gy) + NOISE_CLIP * self.noise_sigma * 2f64.sqrt())
    }

    fn default_start(&self) -> Vec<f64> {
        vec![-1.2, 1.0]
    }
}
