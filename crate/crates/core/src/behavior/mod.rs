//! Behavioral trust: a Beta-Bernoulli compliance posterior and an HMM
//! forward-likelihood anomaly test over recent actions.

mod hmm;
mod posterior;

use thiserror::Error;

pub use hmm::{
    flag_anomaly, forward_loglik, AnomalyVerdict, HmmModel, DEFAULT_ANOMALY_THRESHOLD, LOG_FLOOR,
};
pub use posterior::{
    behavior_score, update_posterior, ActionKind, BehaviorEvent, BehaviorState,
    DEFAULT_RING_CAPACITY, DEFAULT_VIOLATION_WEIGHT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BehaviorError {
    #[error("unknown action symbol `{0}`")]
    UnknownSymbol(String),
    #[error("observation sequence is empty")]
    EmptySequence,
    #[error("invalid HMM: {0}")]
    InvalidModel(String),
}
