//! Structure learning for discrete-time independent cascades: simulation,
//! per-node maximum-likelihood and greedy parent estimators, sample-complexity
//! bounds, recovery metrics and an exact Markov-blanket check on small graphs.

pub mod bounds;
pub mod cascade;
pub mod cli;
pub mod error;
pub mod graph;
pub mod greedy_estimator;
pub mod likelihood;
pub mod markov_check;
pub mod metrics;
pub mod ml_estimator;

pub use error::{Error, Result};
