use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::BehaviorError;

pub const DEFAULT_RING_CAPACITY: usize = 50;
pub const DEFAULT_VIOLATION_WEIGHT: f64 = 3.0;

/// Observable action kinds fed to the anomaly model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActionKind {
    Query,
    SensitiveAccess,
    Export,
    Violation,
    LoginFail,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Query,
        ActionKind::SensitiveAccess,
        ActionKind::Export,
        ActionKind::Violation,
        ActionKind::LoginFail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Query => "QUERY",
            ActionKind::SensitiveAccess => "SENSITIVE_ACCESS",
            ActionKind::Export => "EXPORT",
            ActionKind::Violation => "VIOLATION",
            ActionKind::LoginFail => "LOGIN_FAIL",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionKind {
    type Err = BehaviorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionKind::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| BehaviorError::UnknownSymbol(s.to_string()))
    }
}

impl AsRef<str> for ActionKind {
    fn as_ref(&self) -> &str {
        self.as_str()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorEvent {
    pub principal_id: String,
    pub action: ActionKind,
    pub timestamp: DateTime<Utc>,
    pub compliant: bool,
}

impl BehaviorEvent {
    pub fn new(principal_id: impl Into<String>, action: ActionKind, compliant: bool) -> Self {
        Self {
            principal_id: principal_id.into(),
            action,
            timestamp: Utc::now(),
            compliant,
        }
    }
}

/// Beta posterior over a principal's compliance rate plus a bounded history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorState {
    pub alpha: f64,
    pub beta: f64,
    pub recent_events: VecDeque<ActionKind>,
    #[serde(default = "default_capacity")]
    pub capacity: usize,
}

fn default_capacity() -> usize {
    DEFAULT_RING_CAPACITY
}

impl Default for BehaviorState {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_RING_CAPACITY)
    }
}

impl BehaviorState {
    /// Uniform prior `(1, 1)` with an empty history.
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            recent_events: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
        }
    }

    pub fn score(&self) -> f64 {
        behavior_score(self)
    }

    pub fn recent(&self) -> Vec<ActionKind> {
        self.recent_events.iter().copied().collect()
    }

    pub fn is_valid(&self) -> bool {
        self.alpha >= 1.0 && self.beta >= 1.0 && self.recent_events.len() <= self.capacity
    }
}

/// Conjugate update: compliant events add 1 to `alpha`, violations add
/// `violation_weight` to `beta`.
pub fn update_posterior(
    state: &BehaviorState,
    event: &BehaviorEvent,
    violation_weight: f64,
) -> BehaviorState {
    debug_assert!(violation_weight >= 1.0);
    let mut next = state.clone();
    if event.compliant {
        next.alpha += 1.0;
    } else {
        next.beta += violation_weight;
    }
    while next.recent_events.len() >= next.capacity {
        next.recent_events.pop_front();
    }
    next.recent_events.push_back(event.action);
    next
}

/// Posterior mean `alpha / (alpha + beta)`.
pub fn behavior_score(state: &BehaviorState) -> f64 {
    state.alpha / (state.alpha + state.beta)
}
