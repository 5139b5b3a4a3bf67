//! AdaUSM, its heavy-ball/Nesterov presets, and baseline optimizers.

mod adausm;
mod baselines;

pub use adausm::{
    adahb_default, adahb_preset, adanag_default, adanag_preset, AdaUsmConfig, AdaUsmState,
    DEFAULT_EPSILON, DEFAULT_ETA, DEFAULT_MU,
};
pub use baselines::{BaselineConfig, BaselineKind, BaselineState, Beta2};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::WeightSchedule;

pub const OPTIMIZER_NAMES: [&str; 11] = [
    "adausm", "adahb", "adanag", "adagrad", "sgd", "sgdm", "snag", "adam", "amsgrad", "rmsprop",
    "adaema",
];

/// How the base step size evolves with `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrMode {
    #[default]
    ConstantEta,
    #[serde(rename = "diminishing_eta_over_sqrt_t")]
    DiminishingEtaOverSqrtT,
}

impl LrMode {
    pub fn base_eta(self, eta: f64, t: u64) -> f64 {
        match self {
            LrMode::ConstantEta => eta,
            LrMode::DiminishingEtaOverSqrtT => eta / (t as f64).sqrt(),
        }
    }
}

impl FromStr for LrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant_eta" | "constant" => Ok(LrMode::ConstantEta),
            "diminishing_eta_over_sqrt_t" | "diminishing" => Ok(LrMode::DiminishingEtaOverSqrtT),
            _ => Err(Error::InvalidConfig(format!(
                "unknown lr_mode {s:?}; valid: constant_eta, diminishing_eta_over_sqrt_t"
            ))),
        }
    }
}

/// Unified momentum update, in place:
/// `m_t = mu m_{t-1} - lr g`, `x_{t+1} = x_t + m_t + lambda mu (m_t - m_{t-1})`.
///
/// `lambda = 0` gives heavy ball, `lambda = 1` gives Nesterov.
pub fn usm_update(x: &mut [f64], m: &mut [f64], lr: &[f64], g: &[f64], mu: f64, lambda: f64) {
    debug_assert!(x.len() == m.len() && m.len() == lr.len() && lr.len() == g.len());
    let lm = lambda * mu;
    for k in 0..x.len() {
        let m_prev = m[k];
        let m_new = mu * m_prev - lr[k] * g[k];
        m[k] = m_new;
        x[k] += m_new + lm * (m_new - m_prev);
    }
}

pub(crate) fn check_gradient(dim: usize, g: &[f64]) -> Result<()> {
    if g.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: g.len(),
        });
    }
    if let Some(index) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "gradient",
            index,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum OptimizerKind {
    AdaUsm,
    AdaHb,
    AdaNag,
    AdaGrad,
    Sgd,
    Sgdm,
    Snag,
    Adam,
    AmsGrad,
    RmsProp,
    AdaEma,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 11] = [
        OptimizerKind::AdaUsm,
        OptimizerKind::AdaHb,
        OptimizerKind::AdaNag,
        OptimizerKind::AdaGrad,
        OptimizerKind::Sgd,
        OptimizerKind::Sgdm,
        OptimizerKind::Snag,
        OptimizerKind::Adam,
        OptimizerKind::AmsGrad,
        OptimizerKind::RmsProp,
        OptimizerKind::AdaEma,
    ];

    pub fn name(self) -> &'static str {
        OPTIMIZER_NAMES[self as usize]
    }

    fn baseline(self) -> Option<BaselineKind> {
        Some(match self {
            OptimizerKind::AdaGrad => BaselineKind::AdaGrad,
            OptimizerKind::Sgd => BaselineKind::Sgd,
            OptimizerKind::Sgdm => BaselineKind::Sgdm,
            OptimizerKind::Snag => BaselineKind::Snag,
            OptimizerKind::Adam => BaselineKind::Adam,
            OptimizerKind::AmsGrad => BaselineKind::AmsGrad,
            OptimizerKind::RmsProp => BaselineKind::RmsProp,
            OptimizerKind::AdaEma => BaselineKind::AdaEma,
            _ => return None,
        })
    }

    /// Default step size (the published per-method settings where they exist).
    pub fn default_eta(self) -> f64 {
        match self {
            OptimizerKind::AdaUsm | OptimizerKind::AdaHb | OptimizerKind::AdaNag => DEFAULT_ETA,
            OptimizerKind::Sgd | OptimizerKind::Sgdm | OptimizerKind::Snag => 0.1,
            _ => 0.01,
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OPTIMIZER_NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| OptimizerKind::ALL[i])
            .ok_or_else(|| Error::UnknownOptimizer {
                name: s.to_string(),
            })
    }
}

impl TryFrom<String> for OptimizerKind {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<OptimizerKind> for String {
    fn from(value: OptimizerKind) -> Self {
        value.name().to_string()
    }
}

/// Name plus hyperparameters; unset fields fall back to per-method defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub name: OptimizerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<WeightSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr_mode: Option<LrMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<Beta2>,
}

impl OptimizerSpec {
    pub fn new(name: OptimizerKind) -> Self {
        Self {
            name,
            label: None,
            eta: None,
            mu: None,
            lambda: None,
            epsilon: None,
            schedule: None,
            lr_mode: None,
            beta1: None,
            beta2: None,
        }
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.name.name().to_string())
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| self.name.default_eta())
    }

    /// Build a fresh optimizer at `x1`, overriding the step size with `eta`.
    pub fn build(&self, eta: f64, x1: &[f64]) -> Result<Optimizer> {
        let lr_mode = self.lr_mode.unwrap_or_default();
        match self.name.baseline() {
            None => {
                let lambda = match self.name {
                    OptimizerKind::AdaHb => 0.0,
                    OptimizerKind::AdaNag => 1.0,
                    _ => self.lambda.unwrap_or(1.0),
                };
                if self.name != OptimizerKind::AdaUsm && self.lambda.is_some_and(|l| l != lambda) {
                    return Err(Error::InvalidConfig(format!(
                        "{} fixes lambda = {lambda}",
                        self.name
                    )));
                }
                let config = AdaUsmConfig::new(
                    eta,
                    self.mu.unwrap_or(DEFAULT_MU),
                    lambda,
                    self.epsilon.unwrap_or(DEFAULT_EPSILON),
                    self.schedule
                        .unwrap_or(WeightSchedule::Polynomial { alpha: 1.0 }),
                    lr_mode,
                )?;
                let state = AdaUsmState::init(&config, x1)?;
                Ok(Optimizer::AdaUsm { config, state })
            }
            Some(kind) => {
                let mut config = BaselineConfig::new(kind, eta);
                if let Some(mu) = self.mu.or(self.beta1) {
                    config.mu_or_beta1 = mu;
                }
                if let Some(b2) = self.beta2 {
                    config.beta2 = b2;
                }
                if let Some(eps) = self.epsilon {
                    config.epsilon = eps;
                }
                config.lr_mode = lr_mode;
                let state = BaselineState::init(&config, x1)?;
                Ok(Optimizer::Baseline { config, state })
            }
        }
    }
}

/// Any optimizer behind one stepping interface.
#[derive(Clone, Debug)]
pub enum Optimizer {
    AdaUsm {
        config: AdaUsmConfig,
        state: AdaUsmState,
    },
    Baseline {
        config: BaselineConfig,
        state: BaselineState,
    },
}

impl Optimizer {
    pub fn step(&mut self, g: &[f64]) -> Result<()> {
        match self {
            Optimizer::AdaUsm { config, state } => {
                let taken = std::mem::replace(state, placeholder_adausm());
                *state = taken.step(config, g)?;
            }
            Optimizer::Baseline { config, state } => {
                let taken = std::mem::replace(state, placeholder_baseline());
                *state = taken.step(config, g)?;
            }
        }
        Ok(())
    }

    pub fn x(&self) -> &[f64] {
        match self {
            Optimizer::AdaUsm { state, .. } => &state.x,
            Optimizer::Baseline { state, .. } => &state.x,
        }
    }

    pub fn t(&self) -> u64 {
        match self {
            Optimizer::AdaUsm { state, .. } => state.t,
            Optimizer::Baseline { state, .. } => state.t,
        }
    }

    /// Heavy-ball form momentum `m_t`, satisfying `m_t = mu m_{t-1} - u_t` for some `u_t`.
    pub fn momentum(&self) -> &[f64] {
        match self {
            Optimizer::AdaUsm { state, .. } => &state.m,
            Optimizer::Baseline { state, .. } => &state.momentum,
        }
    }

    pub fn momentum_factor(&self) -> f64 {
        match self {
            Optimizer::AdaUsm { config, .. } => config.mu,
            Optimizer::Baseline { config, .. } => config.momentum_factor(),
        }
    }

    pub fn effective_lr(&self) -> Result<&[f64]> {
        match self {
            Optimizer::AdaUsm { state, .. } => state.effective_lr(),
            Optimizer::Baseline { state, .. } => state.effective_lr(),
        }
    }
}

fn placeholder_adausm() -> AdaUsmState {
    AdaUsmState {
        t: 0,
        x: vec![],
        m: vec![],
        r: vec![],
        sched_acc: Default::default(),
        last_lr: vec![],
    }
}

fn placeholder_baseline() -> BaselineState {
    BaselineState {
        t: 0,
        x: vec![],
        momentum: vec![],
        ema_m: vec![],
        v: vec![],
        v_max: vec![],
        y: vec![],
        last_lr: vec![],
    }
}
