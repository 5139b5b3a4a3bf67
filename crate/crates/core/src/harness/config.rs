//! Experiment configuration files (TOML).
//!
//! ```toml
//! [problem]
//! name = "quadratic"
//! dim = 10
//! condition_number = 10.0
//! noise = 0.1
//! seed = 1
//!
//! [[optimizer]]
//! name = "adahb"
//!
//! [[optimizer]]
//! name = "adam"
//! eta = 0.01
//!
//! [run]
//! T = 2000
//! seeds = [1, 2, 3]
//! record_every = 10
//! output_dir = "results"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimizers::OptimizerSpec;
use crate::problems::{
    self, generate_synthetic_classification, load_csv, make_logistic, make_noisy_quadratic,
    make_rosenbrock_noisy, Dataset, LogisticProblem, StochasticProblem,
};

/// Default step-size grid for `compare`.
pub const DEFAULT_ETA_GRID: [f64; 5] = [1.0, 0.1, 0.01, 0.001, 0.0001];

/// Weight decay used by default for logistic regression.
pub const DEFAULT_WEIGHT_DECAY: f64 = 5e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(rename = "optimizer")]
    pub optimizers: Vec<OptimizerSpec>,
    pub run: RunSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Starting point; a single value is broadcast to every coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Logistic: number of synthetic rows (ignored when `data` is set).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    /// Logistic: CSV file to load instead of generating data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    /// Logistic: fraction of rows held out for accuracy reporting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(rename = "T")]
    pub horizon: u64,
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub record_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn one() -> u64 {
    1
}

/// A constructed problem plus what the runner needs around it.
#[derive(Clone)]
pub struct BuiltProblem {
    pub problem: Arc<dyn StochasticProblem>,
    pub x1: Vec<f64>,
    pub logistic: Option<Arc<LogisticProblem>>,
    pub holdout: Option<Dataset>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if !problems::PROBLEM_NAMES.contains(&self.problem.name.as_str()) {
            return Err(Error::UnknownProblem {
                name: self.problem.name.clone(),
            });
        }
        if self.optimizers.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one [[optimizer]] is required".into(),
            ));
        }
        if self.run.horizon == 0 {
            return Err(Error::InvalidConfig("run.T must be >= 1".into()));
        }
        if self.run.seeds.is_empty() {
            return Err(Error::InvalidConfig("run.seeds must not be empty".into()));
        }
        let max_seed = i64::MAX as u64;
        if self.problem.seed > max_seed || self.run.seeds.iter().any(|&s| s > max_seed) {
            return Err(Error::InvalidConfig(format!(
                "seeds must not exceed {max_seed} (TOML integers are signed 64-bit)"
            )));
        }
        if self.run.record_every == 0 {
            return Err(Error::InvalidConfig("run.record_every must be >= 1".into()));
        }
        if let Some(grid) = &self.run.eta_grid {
            if grid.is_empty() || grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return Err(Error::InvalidConfig(
                    "run.eta_grid must be a non-empty list of positive step sizes".into(),
                ));
            }
        }
        let mut labels: Vec<String> = self.optimizers.iter().map(OptimizerSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "optimizer labels must be unique; set `label` to distinguish repeats".into(),
            ));
        }
        Ok(())
    }

    /// Short stable digest of everything except the output location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.run.output_dir = None;
        let digest = Sha256::digest(c.to_toml_string().as_bytes());
        hex::encode(&digest[..8])
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<BuiltProblem> {
        let noise = self.noise.unwrap_or(0.0);
        let (problem, logistic, holdout): (Arc<dyn StochasticProblem>, _, _) = match self
            .name
            .as_str()
        {
            "quadratic" => {
                let q = make_noisy_quadratic(
                    self.dim.unwrap_or(10),
                    self.condition_number.unwrap_or(10.0),
                    noise,
                    self.seed,
                )?;
                (Arc::new(q), None, None)
            }
            "rosenbrock" => (
                Arc::new(make_rosenbrock_noisy(noise, self.seed)?),
                None,
                None,
            ),
            "logistic" => {
                let data = match &self.data {
                    Some(path) => load_csv(path, self.label_column.as_deref().unwrap_or("label"))?,
                    None => generate_synthetic_classification(
                        self.n.unwrap_or(500),
                        self.dim.unwrap_or(10),
                        self.separation.unwrap_or(2.0),
                        self.seed,
                    )?,
                };
                let (train, test) = match self.holdout {
                    Some(f) if f > 0.0 => {
                        let (a, b) = data.split(f)?;
                        (a, Some(b))
                    }
                    _ => (data, None),
                };
                let batch = self.batch_size.unwrap_or(32).min(train.n);
                let p = Arc::new(make_logistic(
                    train,
                    batch,
                    self.l2.unwrap_or(DEFAULT_WEIGHT_DECAY),
                    self.seed,
                )?);
                (p.clone() as Arc<dyn StochasticProblem>, Some(p), test)
            }
            other => {
                return Err(Error::UnknownProblem {
                    name: other.to_string(),
                })
            }
        };
        let dim = problem.dim();
        let x1 = match &self.x0 {
            None => problem.default_start(),
            Some(v) if v.len() == 1 => vec![v[0]; dim],
            Some(v) if v.len() == dim => v.clone(),
            Some(v) => {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                })
            }
        };
        Ok(BuiltProblem {
            problem,
            x1,
            logistic,
            holdout,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[problem]
name = "quadratic"
dim = 4
noise = 0.2
seed = 3

[[optimizer]]
name = "adahb"

[[optimizer]]
name = "adam"
eta = 0.01
beta2 = 0.99

[[optimizer]]
name = "adaema"
beta2 = "1-1/t"
label = "ema"

[[optimizer]]
name = "adausm"
lambda = 0.5
schedule = "exp:0.99"
lr_mode = "diminishing_eta_over_sqrt_t"

[run]
T = 50
seeds = [1, 2]
record_every = 5
eta_grid = [0.1, 0.01]
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.optimizers.len(), 4);
        assert_eq!(c.run.horizon, 50);
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
    }

    #[test]
    fn unknown_names_are_rejected() {
        let bad = SAMPLE.replace("name = \"adam\"", "name = \"adamax\"");
        let e = ExperimentConfig::from_toml_str(&bad)
            .unwrap_err()
            .to_string();
        assert!(e.contains("adamax") && e.contains("amsgrad"), "{e}");
        let bad = SAMPLE.replace("name = \"quadratic\"", "name = \"sphere\"");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        let bad = SAMPLE.replace("record_every = 5", "record_every = 5\nbogus = 1");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn structural_checks() {
        for (from, to) in [
            ("T = 50", "T = 0"),
            ("seeds = [1, 2]", "seeds = []"),
            ("record_every = 5", "record_every = 0"),
            ("eta_grid = [0.1, 0.01]", "eta_grid = [0.1, -1.0]"),
            ("label = \"ema\"", "label = \"adam\""),
            ("seed = 3", "seed = 9223372036854775808"),
        ] {
            let bad = SAMPLE.replace(from, to);
            assert!(ExperimentConfig::from_toml_str(&bad).is_err(), "{to}");
        }
        let mut c = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        c.run.seeds.push(u64::MAX);
        assert!(c.validate().is_err());
    }

    #[test]
    fn builds_each_problem() {
        for name in problems::PROBLEM_NAMES {
            let spec = ProblemSpec {
                name: name.to_string(),
                dim: Some(3),
                n: Some(40),
                noise: Some(0.1),
                holdout: Some(0.25),
                ..Default::default()
            };
            let built = spec.build().unwrap();
            assert_eq!(built.x1.len(), built.problem.dim());
            if name == "logistic" {
                assert_eq!(built.holdout.as_ref().unwrap().n, 10);
            }
        }
        let spec = ProblemSpec {
            name: "quadratic".into(),
            dim: Some(3),
            x0: Some(vec![1.0, 2.0]),
            ..Default::default()
        };
        assert!(spec.build().is_err());
    }
}
