//! Reference optimizers: SGD, heavy-ball SGD, Nesterov (y-form), AdaGrad,
//! Adam, AMSGrad, RMSProp and AdaEMA.
//!
//! Adam-family denominators follow the `sqrt(t v) + sqrt(t) eps` placement so
//! that the learning rates line up term-by-term with the weighted rate.

use serde::{Deserialize, Serialize};

use super::{check_gradient, LrMode};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Sgd,
    Sgdm,
    Snag,
    AdaGrad,
    Adam,
    AmsGrad,
    RmsProp,
    AdaEma,
}

/// Second-moment decay: a constant, or `1 - 1/t` (written `"1-1/t"` in configs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta2 {
    Fixed(f64),
    Harmonic,
}

impl Serialize for Beta2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta2::Fixed(b) => s.serialize_f64(*b),
            Beta2::Harmonic => s.serialize_str("1-1/t"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(b) => Ok(Beta2::Fixed(b)),
            Raw::Text(s) if s.replace(' ', "") == "1-1/t" => Ok(Beta2::Harmonic),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "beta2 must be a number or \"1-1/t\", got {s:?}"
            ))),
        }
    }
}

impl Beta2 {
    pub fn at(&self, t: u64) -> f64 {
        match *self {
            Beta2::Fixed(b) => b,
            Beta2::Harmonic => 1.0 - 1.0 / t as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub eta: f64,
    /// Heavy-ball momentum for SGDm/SNAG/AdaGrad, first-moment decay for the Adam family.
    pub mu_or_beta1: f64,
    pub beta2: Beta2,
    pub epsilon: f64,
    pub lr_mode: LrMode,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, eta: f64) -> Self {
        let (mu, beta2) = match kind {
            BaselineKind::Sgd => (0.0, Beta2::Fixed(0.999)),
            BaselineKind::RmsProp => (0.0, Beta2::Fixed(0.9)),
            BaselineKind::AdaEma => (0.9, Beta2::Harmonic),
            _ => (0.9, Beta2::Fixed(0.999)),
        };
        Self {
            kind,
            eta,
            mu_or_beta1: mu,
            beta2,
            epsilon: 1e-8,
            lr_mode: LrMode::ConstantEta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad(format!("eta must be finite and > 0, got {}", self.eta));
        }
        if !(0.0..1.0).contains(&self.mu_or_beta1) {
            return bad(format!(
                "momentum / beta1 must lie in [0, 1), got {}",
                self.mu_or_beta1
            ));
        }
        if let Beta2::Fixed(b) = self.beta2 {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("beta2 must lie in [0, 1), got {b}"));
            }
        }
        let needs_eps = !matches!(
            self.kind,
            BaselineKind::Sgd | BaselineKind::Sgdm | BaselineKind::Snag
        );
        if needs_eps && !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!(
                "epsilon must be finite and > 0, got {}",
                self.epsilon
            ));
        }
        Ok(())
    }

    /// Decay factor of the heavy-ball form of this method's displacement.
    pub fn momentum_factor(&self) -> f64 {
        match self.kind {
            BaselineKind::Sgd | BaselineKind::RmsProp => 0.0,
            _ => self.mu_or_beta1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineState {
    pub t: u64,
    pub x: Vec<f64>,
    /// Heavy-ball form momentum: `m` for SGDm/AdaGrad, `y_{t+1} - y_t` for
    /// SNAG, the last displacement for everything else.
    pub momentum: Vec<f64>,
    /// First-moment EMA (Adam family).
    pub ema_m: Vec<f64>,
    /// Second-moment accumulator (sum of squares for AdaGrad, EMA otherwise).
    pub v: Vec<f64>,
    /// Running max of `v` (AMSGrad).
    pub v_max: Vec<f64>,
    /// Nesterov look-ahead sequence, `y_1 = x_1`.
    pub y: Vec<f64>,
    pub last_lr: Vec<f64>,
}

impl BaselineState {
    pub fn init(config: &BaselineConfig, x1: &[f64]) -> Result<Self> {
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
        let zeros = vec![0.0; x1.len()];
        Ok(Self {
            t: 0,
            x: x1.to_vec(),
            momentum: zeros.clone(),
            ema_m: zeros.clone(),
            v: zeros.clone(),
            v_max: zeros,
            y: x1.to_vec(),
            last_lr: vec![],
        })
    }

    pub fn effective_lr(&self) -> Result<&[f64]> {
        if self.t == 0 {
            return Err(Error::NoStepTaken);
        }
        Ok(&self.last_lr)
    }

    pub fn step(mut self, config: &BaselineConfig, g: &[f64]) -> Result<Self> {
        check_gradient(self.x.len(), g)?;
        self.t += 1;
        let t = self.t;
        let tf = t as f64;
        let base = config.lr_mode.base_eta(config.eta, t);
        let mu = config.mu_or_beta1;
        let eps = config.epsilon;
        let d = g.len();
        let mut lr = vec![base; d];

        match config.kind {
            BaselineKind::Sgd => {
                for ((x, m), gk) in self.x.iter_mut().zip(&mut self.momentum).zip(g) {
                    *m = -base * gk;
                    *x += *m;
                }
            }
            BaselineKind::Sgdm => {
                for ((x, m), gk) in self.x.iter_mut().zip(&mut self.momentum).zip(g) {
                    *m = mu * *m - base * gk;
                    *x += *m;
                }
            }
            BaselineKind::Snag => {
                for (((x, y), m), gk) in self
                    .x
                    .iter_mut()
                    .zip(&mut self.y)
                    .zip(&mut self.momentum)
                    .zip(g)
                {
                    let y_next = *x - base * gk;
                    *m = y_next - *y;
                    *x = y_next + mu * (y_next - *y);
                    *y = y_next;
                }
            }
            BaselineKind::AdaGrad => {
                for k in 0..d {
                    self.v[k] += g[k] * g[k];
                    lr[k] = base / (self.v[k].sqrt() + eps);
                    self.momentum[k] = mu * self.momentum[k] - lr[k] * g[k];
                    self.x[k] += self.momentum[k];
                }
            }
            BaselineKind::Adam | BaselineKind::AmsGrad | BaselineKind::AdaEma => {
                let beta2 = config.beta2.at(t);
                let root_t = tf.sqrt();
                let m_corr = if config.kind == BaselineKind::Adam {
                    -(tf * mu.ln()).exp_m1()
                } else {
                    1.0
                };
                let v_corr = match (config.kind, config.beta2) {
                    (BaselineKind::Adam, Beta2::Fixed(b)) => -(tf * b.ln()).exp_m1(),
                    _ => 1.0,
                };
                for k in 0..d {
                    self.ema_m[k] = mu * self.ema_m[k] + (1.0 - mu) * g[k];
                    self.v[k] = beta2 * self.v[k] + (1.0 - beta2) * g[k] * g[k];
                    let second = if config.kind == BaselineKind::AmsGrad {
                        self.v_max[k] = self.v_max[k].max(self.v[k]);
                        self.v_max[k]
                    } else {
                        self.v[k] / v_corr
                    };
                    lr[k] = base / ((tf * second).sqrt() + root_t * eps);
                    let dx = -lr[k] * self.ema_m[k] / m_corr;
                    self.x[k] += dx;
                    self.momentum[k] = dx;
                }
            }
            BaselineKind::RmsProp => {
                let beta = config.beta2.at(t);
                for k in 0..d {
                    self.v[k] = beta * self.v[k] + (1.0 - beta) * g[k] * g[k];
                    lr[k] = base / ((tf * self.v[k]).sqrt() + eps);
                    let dx = -lr[k] * g[k];
                    self.x[k] += dx;
                    self.momentum[k] = dx;
                }
            }
        }
        self.last_lr = lr;
        Ok(self)
    }
}
