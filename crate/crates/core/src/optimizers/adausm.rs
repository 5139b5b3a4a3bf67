//! Weighted AdaGrad with unified stochastic momentum.

use serde::{Deserialize, Serialize};

use super::{check_gradient, usm_update, LrMode};
use crate::error::{Error, Result};
use crate::schedules::{ScheduleAccumulator, WeightSchedule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaUsmConfig {
    pub eta: f64,
    pub mu: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub schedule: WeightSchedule,
    #[serde(default)]
    pub lr_mode: LrMode,
    /// Set only by [`AdaUsmConfig::exact`]; lets equivalence checks run with `epsilon = 0`.
    #[serde(skip)]
    zero_epsilon_allowed: bool,
}

impl AdaUsmConfig {
    pub fn new(
        eta: f64,
        mu: f64,
        lambda: f64,
        epsilon: f64,
        schedule: WeightSchedule,
        lr_mode: LrMode,
    ) -> Result<Self> {
        let config = Self {
            eta,
            mu,
            lambda,
            epsilon,
            schedule,
            lr_mode,
            zero_epsilon_allowed: false,
        };
        config.validate()?;
        Ok(config)
    }

    /// A configuration with `epsilon = 0`, for trajectory-equivalence checks.
    ///
    /// Every gradient coordinate fed to the first step must be nonzero,
    /// otherwise the learning rate is `eta / 0`.
    pub fn exact(
        eta: f64,
        mu: f64,
        lambda: f64,
        schedule: WeightSchedule,
        lr_mode: LrMode,
    ) -> Result<Self> {
        let config = Self {
            eta,
            mu,
            lambda,
            epsilon: 0.0,
            schedule,
            lr_mode,
            zero_epsilon_allowed: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad(format!("eta must be finite and > 0, got {}", self.eta));
        }
        if !(0.0..1.0).contains(&self.mu) {
            return bad(format!("mu must lie in [0, 1), got {}", self.mu));
        }
        let lambda_max = 1.0 / (1.0 - self.mu);
        if !(self.lambda >= 0.0 && self.lambda <= lambda_max) {
            return bad(format!(
                "lambda must lie in [0, 1/(1-mu)] = [0, {lambda_max}], got {}",
                self.lambda
            ));
        }
        let eps_ok = if self.zero_epsilon_allowed {
            self.epsilon >= 0.0
        } else {
            self.epsilon > 0.0
        };
        if !(eps_ok && self.epsilon.is_finite()) {
            return bad(format!(
                "epsilon must be finite and > 0, got {}",
                self.epsilon
            ));
        }
        self.schedule.validate()
    }
}

/// Heavy-ball preset (`lambda = 0`).
pub fn adahb_preset(
    eta: f64,
    mu: f64,
    epsilon: f64,
    schedule: WeightSchedule,
) -> Result<AdaUsmConfig> {
    AdaUsmConfig::new(eta, mu, 0.0, epsilon, schedule, LrMode::ConstantEta)
}

/// Nesterov preset (`lambda = 1`).
pub fn adanag_preset(
    eta: f64,
    mu: f64,
    epsilon: f64,
    schedule: WeightSchedule,
) -> Result<AdaUsmConfig> {
    AdaUsmConfig::new(eta, mu, 1.0, epsilon, schedule, LrMode::ConstantEta)
}

/// Defaults shared by the heavy-ball and Nesterov presets:
/// `eta = 0.001`, `a_t = t`, `mu = 0.9`, `epsilon = 1e-8`.
pub const DEFAULT_ETA: f64 = 0.001;
pub const DEFAULT_MU: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 1e-8;

pub fn adahb_default() -> AdaUsmConfig {
    adahb_preset(
        DEFAULT_ETA,
        DEFAULT_MU,
        DEFAULT_EPSILON,
        WeightSchedule::Polynomial { alpha: 1.0 },
    )
    .expect("defaults are valid")
}

pub fn adanag_default() -> AdaUsmConfig {
    adanag_preset(
        DEFAULT_ETA,
        DEFAULT_MU,
        DEFAULT_EPSILON,
        WeightSchedule::Polynomial { alpha: 1.0 },
    )
    .expect("defaults are valid")
}

/// Optimizer state. `r` holds `v_t / a_t` per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaUsmState {
    pub t: u64,
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub r: Vec<f64>,
    pub sched_acc: ScheduleAccumulator,
    /// Learning rates used by the most recent step.
    pub last_lr: Vec<f64>,
}

impl AdaUsmState {
    pub fn init(config: &AdaUsmConfig, x1: &[f64]) -> Result<Self> {
        config.validate()?;
        if x1.is_empty() {
            return Err(Error::InvalidConfig("dimension must be >= 1".into()));
        }
        if let Some(index) = x1.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "initial point",
                index,
            });
        }
        let d = x1.len();
        Ok(Self {
            t: 0,
            x: x1.to_vec(),
            m: vec![0.0; d],
            r: vec![0.0; d],
            sched_acc: ScheduleAccumulator::new(),
            last_lr: vec![],
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// One iteration: accumulate the weighted squared gradient, form the
    /// per-coordinate learning rate, then apply the unified momentum update.
    pub fn step(mut self, config: &AdaUsmConfig, g: &[f64]) -> Result<Self> {
        check_gradient(self.dim(), g)?;
        self.t += 1;
        let t = self.t;
        self.sched_acc = self.sched_acc.advance(&config.schedule);
        let decay = if t >= 2 {
            config.schedule.ratio(t)
        } else {
            0.0
        };
        let w = self.sched_acc.weight_over_abar();
        let base = config.lr_mode.base_eta(config.eta, t);

        let mut lr = Vec::with_capacity(g.len());
        for (r_k, &g_k) in self.r.iter_mut().zip(g) {
            *r_k = decay * *r_k + g_k * g_k;
            lr.push(base / ((*r_k * w).sqrt() + config.epsilon));
        }
        usm_update(&mut self.x, &mut self.m, &lr, g, config.mu, config.lambda);
        self.last_lr = lr;
        Ok(self)
    }

    /// The learning-rate vector used by the most recent step.
    pub fn effective_lr(&self) -> Result<&[f64]> {
        if self.t == 0 {
            return Err(Error::NoStepTaken);
        }
        Ok(&self.last_lr)
    }

    /// `v_t / abar_t` per coordinate.
    pub fn v_over_abar(&self) -> Vec<f64> {
        let w = self.sched_acc.weight_over_abar();
        self.r.iter().map(|r| r * w).collect()
    }
}
