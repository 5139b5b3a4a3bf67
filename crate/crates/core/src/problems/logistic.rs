use rand::seq::index;

use super::{keyed_rng, StochasticProblem, DOMAIN_RADIUS};
use crate::error::{Error, Result};
use crate::problems::Dataset;

/// Mean logistic loss plus `(l2/2) ||x||^2`; stochastic gradients use a
/// mini-batch drawn without replacement from the sample key.
#[derive(Clone, Debug)]
pub struct LogisticProblem {
    pub data: Dataset,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
}

pub fn make_logistic(
    data: Dataset,
    batch_size: usize,
    l2: f64,
    seed: u64,
) -> Result<LogisticProblem> {
    if data.n == 0 {
        return Err(Error::EmptyDataset);
    }
    if batch_size == 0 || batch_size > data.n {
        return Err(Error::InvalidConfig(format!(
            "batch size must lie in [1, {}], got {batch_size}",
            data.n
        )));
    }
    if !(l2.is_finite() && l2 >= 0.0) {
        return Err(Error::InvalidConfig(format!("l2 must be >= 0, got {l2}")));
    }
    Ok(LogisticProblem {
        data,
        batch_size,
        l2,
        seed,
    })
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

impl LogisticProblem {
    fn grad_over<I: Iterator<Item = usize>>(&self, x: &[f64], rows: I, count: usize) -> Vec<f64> {
        let mut g = vec![0.0; self.data.d];
        for i in rows {
            let a = self.data.row(i);
            let resid = sigmoid(dot(a, x)) - self.data.labels[i];
            for (gk, ak) in g.iter_mut().zip(a) {
                *gk += resid * ak;
            }
        }
        let scale = 1.0 / count as f64;
        g.iter_mut()
            .zip(x)
            .for_each(|(gk, xk)| *gk = *gk * scale + self.l2 * xk);
        g
    }

    /// Fraction of rows whose predicted class (`x·a > 0`) matches a 0/1 label.
    pub fn accuracy(&self, x: &[f64], data: &Dataset) -> f64 {
        let hits = (0..data.n)
            .filter(|&i| (dot(data.row(i), x) > 0.0) == (data.labels[i] > 0.5))
            .count();
        hits as f64 / data.n as f64
    }

    /// Full-batch gradient descent with step `1/L` until `||grad|| <= tol`.
    ///
    /// Reference optimum for checking stochastic runs; returns `(x*, f(x*))`.
    pub fn minimize_full_batch(&self, tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
        let step = 1.0 / self.lipschitz().expect("logistic problems declare L");
        let mut x = vec![0.0; self.data.d];
        for _ in 0..max_iter {
            let g = self.grad_over(x.as_slice(), 0..self.data.n, self.data.n);
            if super::norm(&g) <= tol {
                break;
            }
            x.iter_mut().zip(&g).for_each(|(xk, gk)| *xk -= step * gk);
        }
        let f = self.loss(&x);
        (x, f)
    }
}

impl StochasticProblem for LogisticProblem {
    fn dim(&self) -> usize {
        self.data.d
    }

    fn loss(&self, x: &[f64]) -> f64 {
        let data_term: f64 = (0..self.data.n)
            .map(|i| {
                let z = dot(self.data.row(i), x);
                softplus(z) - self.data.labels[i] * z
            })
            .sum::<f64>()
            / self.data.n as f64;
        data_term + 0.5 * self.l2 * dot(x, x)
    }

    fn stochastic_grad(&self, x: &[f64], key: u64) -> Vec<f64> {
        if self.batch_size == self.data.n {
            return self.grad_over(x, 0..self.data.n, self.data.n);
        }
        let mut rng = keyed_rng(self.seed, key);
        let picks = index::sample(&mut rng, self.data.n, self.batch_size);
        self.grad_over(x, picks.into_iter(), self.batch_size)
    }

    fn exact_grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.grad_over(x, 0..self.data.n, self.data.n))
    }

    fn lipschitz(&self) -> Option<f64> {
        // Hessian <= (1/4) A^T A / n + l2 I, bounded by the mean squared row norm.
        let mean_sq = (0..self.data.n)
            .map(|i| dot(self.data.row(i), self.data.row(i)))
            .sum::<f64>()
            / self.data.n as f64;
        Some(0.25 * mean_sq + self.l2)
    }

    fn sigma_bound(&self) -> Option<f64> {
        let max_row = (0..self.data.n)
            .map(|i| dot(self.data.row(i), self.data.row(i)).sqrt())
            .fold(0.0, f64::max);
        Some(max_row + self.l2 * DOMAIN_RADIUS * (self.data.d as f64).sqrt())
    }

    fn default_start(&self) -> Vec<f64> {
        vec![0.0; self.data.d]
    }
}
