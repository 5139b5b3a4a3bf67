use super::{clipped_noise, StochasticProblem, DOMAIN_RADIUS, NOISE_CLIP};
use crate::error::{Error, Result};

/// `f(x) = 0.5 x^T D x` with diagonal `D` log-spaced on `[1, condition_number]`.
#[derive(Clone, Debug)]
pub struct NoisyQuadratic {
    pub diag: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

pub fn make_noisy_quadratic(
    d: usize,
    condition_number: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<NoisyQuadratic> {
    if d == 0 {
        return Err(Error::InvalidConfig(
            "quadratic dimension must be >= 1".into(),
        ));
    }
    if !(condition_number.is_finite() && condition_number >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "condition number must be >= 1, got {condition_number}"
        )));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise sigma must be >= 0, got {noise_sigma}"
        )));
    }
    let log_k = condition_number.ln();
    let diag = (0..d)
        .map(|i| {
            if d == 1 {
                1.0
            } else {
                (log_k * i as f64 / (d - 1) as f64).exp()
            }
        })
        .collect();
    Ok(NoisyQuadratic {
        diag,
        noise_sigma,
        seed,
    })
}

impl StochasticProblem for NoisyQuadratic {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn loss(&self, x: &[f64]) -> f64 {
        0.5 * self.diag.iter().zip(x).map(|(d, v)| d * v * v).sum::<f64>()
    }

    fn stochastic_grad(&self, x: &[f64], key: u64) -> Vec<f64> {
        let noise = clipped_noise(self.seed, key, self.dim(), self.noise_sigma);
        self.diag
            .iter()
            .zip(x)
            .zip(noise)
            .map(|((d, v), z)| d * v + z)
            .collect()
    }

    fn exact_grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.diag.iter().zip(x).map(|(d, v)| d * v).collect())
    }

    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.diag.iter().copied().reduce(f64::max)
    }

    fn sigma_bound(&self) -> Option<f64> {
        let signal = self
            .diag
            .iter()
            .map(|d| (d * DOMAIN_RADIUS).powi(2))
            .sum::<f64>()
            .sqrt();
        let noise = NOISE_CLIP * self.noise_sigma * (self.dim() as f64).sqrt();
        Some(signal + noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_noiseless_gradient() {
        let q = make_noisy_quadratic(1, 1.0, 0.0, 3).unwrap();
        for key in [0, 1, 99] {
            assert_eq!(q.stochastic_grad(&[3.0], key), vec![3.0]);
        }
        assert_eq!(q.loss(&[0.0]), q.f_star().unwrap());
    }

    #[test]
    fn spectrum_spans_condition_number() {
        let q = make_noisy_quadratic(5, 100.0, 0.1, 0).unwrap();
        assert_eq!(q.diag[0], 1.0);
        assert!((q.diag[4] - 100.0).abs() < 1e-12);
        assert!(q.diag.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(q.lipschitz(), Some(q.diag[4]));
    }

    #[test]
    fn invalid_arguments() {
        assert!(make_noisy_quadratic(0, 1.0, 0.0, 0).is_err());
        assert!(make_noisy_quadratic(2, 0.5, 0.0, 0).is_err());
        assert!(make_noisy_quadratic(2, 2.0, -1.0, 0).is_err());
    }
}
