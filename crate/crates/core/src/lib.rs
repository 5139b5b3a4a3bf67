//! Weighted AdaGrad with unified momentum (AdaUSM), baseline optimizers,
//! convergence-bound evaluation and a desk-scale experiment harness.

pub mod error;
pub mod harness;
pub mod optimizers;
pub mod par;
pub mod problems;
pub mod schedules;
pub mod theory;

pub use error::{Error, Result};
pub use optimizers::{AdaUsmConfig, AdaUsmState, LrMode, Optimizer, OptimizerKind, OptimizerSpec};
pub use par::Execution;
pub use problems::StochasticProblem;
pub use schedules::{ScheduleAccumulator, WeightSchedule};
