//! Weight families `{a_t}` for the weighted adaptive learning rate.
//!
//! Raw weights can grow exponentially (`ExponentialRatio` at `beta = 0.999`
//! overflows an `f64` after roughly 7e5 steps), so optimizers only consume
//! the ratio `a_{t-1}/a_t` and the normalized accumulator `A_t/a_t`, both of
//! which stay `O(t)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive, non-decreasing weight sequence indexed from `t = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightSchedule {
    /// `a_t = 1` (plain AdaGrad).
    Constant,
    /// `a_t = t^alpha`, `alpha >= 0`.
    Polynomial { alpha: f64 },
    /// `a_1 = a_2 = 1`, `a_t = ((1 + t)/4)^2` for `t >= 3`.
    AccAdaGrad,
    /// `a_t = beta^{-t}`, `0 < beta < 1` (the Adam/RMSProp EMA weights).
    ExponentialRatio { beta: f64 },
}

impl WeightSchedule {
    pub fn polynomial(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "polynomial exponent must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(WeightSchedule::Polynomial { alpha })
    }

    pub fn exponential(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "exponential ratio must lie in (0, 1), got {beta}"
            )));
        }
        Ok(WeightSchedule::ExponentialRatio { beta })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSchedule::Polynomial { alpha } => Self::polynomial(alpha).map(|_| ()),
            WeightSchedule::ExponentialRatio { beta } => Self::exponential(beta).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// `ln a_t`, finite for every `t >= 1`.
    pub fn log_weight(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        let tf = t as f64;
        match *self {
            WeightSchedule::Constant => 0.0,
            WeightSchedule::Polynomial { alpha } => alpha * tf.ln(),
            WeightSchedule::AccAdaGrad => {
                if t <= 2 {
                    0.0
                } else {
                    2.0 * ((1.0 + tf) / 4.0).ln()
                }
            }
            WeightSchedule::ExponentialRatio { beta } => -tf * beta.ln(),
        }
    }

    /// The raw weight `a_t`. Fails when the value is not representable.
    pub fn weight(&self, t: u64) -> Result<f64> {
        assert!(t >= 1, "weights are indexed from t = 1");
        let tf = t as f64;
        let w = match *self {
            WeightSchedule::Constant => 1.0,
            WeightSchedule::Polynomial { alpha } => tf.powf(alpha),
            WeightSchedule::AccAdaGrad => {
                if t <= 2 {
                    1.0
                } else {
                    let q = (1.0 + tf) / 4.0;
                    q * q
                }
            }
            WeightSchedule::ExponentialRatio { beta } => (-tf * beta.ln()).exp(),
        };
        if w.is_finite() {
            Ok(w)
        } else {
            Err(Error::WeightOverflow {
                schedule: self.to_string(),
                t,
            })
        }
    }

    /// `a_{t-1} / a_t` in closed form, for `t >= 2`.
    pub fn ratio(&self, t: u64) -> f64 {
        assert!(t >= 2, "ratio is defined for t >= 2");
        let tf = t as f64;
        match *self {
            WeightSchedule::Constant => 1.0,
            WeightSchedule::Polynomial { alpha } => ((tf - 1.0) / tf).powf(alpha),
            WeightSchedule::AccAdaGrad => {
                // a_2 = a_3 = 1; beyond that ((t)/(t+1))^2
                if t <= 3 {
                    1.0
                } else {
                    let q = tf / (tf + 1.0);
                    q * q
                }
            }
            WeightSchedule::ExponentialRatio { beta } => beta,
        }
    }

    /// `ln(sum_{t=1}^{horizon} a_t)` without forming the raw sum.
    pub fn log_weight_sum(&self, horizon: u64) -> f64 {
        assert!(horizon >= 1);
        let n = horizon as f64;
        match *self {
            WeightSchedule::Constant => n.ln(),
            WeightSchedule::AccAdaGrad => {
                if horizon <= 2 {
                    return n.ln();
                }
                // 2 + (1/16) * sum_{s=4}^{T+1} s^2
                let m = n + 1.0;
                let squares = m * (m + 1.0) * (2.0 * m + 1.0) / 6.0 - 14.0;
                (2.0 + squares / 16.0).ln()
            }
            WeightSchedule::ExponentialRatio { beta } => {
                // (1 - beta^T) / ((1 - beta) beta^T)
                let log_beta = beta.ln();
                (-(n * log_beta).exp_m1()).ln() - (1.0 - beta).ln() - n * log_beta
            }
            WeightSchedule::Polynomial { .. } => {
                // Largest term is the last one; accumulate relative to it.
                let top = self.log_weight(horizon);
                let mut acc = 0.0;
                for t in 1..=horizon {
                    acc += (self.log_weight(t) - top).exp();
                }
                top + acc.ln()
            }
        }
    }
}

impl fmt::Display for WeightSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSchedule::Constant => write!(f, "constant"),
            WeightSchedule::Polynomial { alpha } => write!(f, "poly:{alpha}"),
            WeightSchedule::AccAdaGrad => write!(f, "accadagrad"),
            WeightSchedule::ExponentialRatio { beta } => write!(f, "exp:{beta}"),
        }
    }
}

impl FromStr for WeightSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::ScheduleParse {
            input: s.to_string(),
        };
        let s_trim = s.trim();
        let parsed = match s_trim.split_once(':') {
            None => match s_trim.to_ascii_lowercase().as_str() {
                "constant" => WeightSchedule::Constant,
                "accadagrad" => WeightSchedule::AccAdaGrad,
                _ => return Err(err()),
            },
            Some((kind, arg)) => {
                let value: f64 = arg.trim().parse().map_err(|_| err())?;
                match kind.to_ascii_lowercase().as_str() {
                    "poly" => WeightSchedule::polynomial(value).map_err(|_| err())?,
                    "exp" => WeightSchedule::exponential(value).map_err(|_| err())?,
                    _ => return Err(err()),
                }
            }
        };
        Ok(parsed)
    }
}

impl TryFrom<String> for WeightSchedule {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<WeightSchedule> for String {
    fn from(value: WeightSchedule) -> Self {
        value.to_string()
    }
}

/// Normalized running sum of weights: stores `A_t / a_t` instead of `A_t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleAccumulator {
    pub t: u64,
    /// `A_t / a_t`; zero before the first step.
    pub a_over_a: f64,
}

impl ScheduleAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Move to step `t + 1` using `A_t/a_t = (A_{t-1}/a_{t-1}) * (a_{t-1}/a_t) + 1`.
    #[must_use]
    pub fn advance(self, schedule: &WeightSchedule) -> Self {
        let t = self.t + 1;
        let a_over_a = if t == 1 {
            1.0
        } else {
            self.a_over_a * schedule.ratio(t) + 1.0
        };
        Self { t, a_over_a }
    }

    /// `a_t / abar_t = t / (A_t / a_t)`, which is at least 1 for non-decreasing weights.
    pub fn weight_over_abar(&self) -> f64 {
        assert!(self.t >= 1, "weight_over_abar requires at least one step");
        self.t as f64 / self.a_over_a
    }
}
