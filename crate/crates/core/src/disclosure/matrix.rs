use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DisclosureError;
use crate::sensitivity::SensitivityLevel;
use crate::trust::Tier;

pub const DEFAULT_PLACEHOLDER: &str = "<REDACTED:{TYPE}>";
pub const DEFAULT_EPSILONS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const DEFAULT_SUMMARY_SENTENCES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Pass,
    Summarize,
    Redact,
    Noise,
    Deny,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Pass,
        Action::Summarize,
        Action::Redact,
        Action::Noise,
        Action::Deny,
    ];

    /// deny(4) > redact(3) = noise(3) > summarize(1) > pass(0)
    pub fn strictness(self) -> u8 {
        match self {
            Action::Pass => 0,
            Action::Summarize => 1,
            Action::Redact | Action::Noise => 3,
            Action::Deny => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Pass => "pass",
            Action::Summarize => "summarize",
            Action::Redact => "redact",
            Action::Noise => "noise",
            Action::Deny => "deny",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = DisclosureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| DisclosureError::UnknownAction(s.to_string()))
    }
}

/// The (sensitivity level × trust tier) → action table and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DisclosureMatrix {
    /// `cells[level][tier]`.
    cells: [[Action; 4]; 4],
    pub placeholder: String,
    pub epsilons: [f64; 4],
    pub summarize_max_sentences: usize,
    /// L1 sensitivity assumed for numeric spans under the noise action.
    pub noise_sensitivity: f64,
}

impl Default for DisclosureMatrix {
    fn default() -> Self {
        use Action::*;
        Self {
            cells: [
                [Pass, Pass, Pass, Pass],
                [Summarize, Pass, Pass, Pass],
                [Deny, Redact, Pass, Pass],
                [Deny, Deny, Redact, Pass],
            ],
            placeholder: DEFAULT_PLACEHOLDER.to_string(),
            epsilons: DEFAULT_EPSILONS,
            summarize_max_sentences: DEFAULT_SUMMARY_SENTENCES,
            noise_sensitivity: 1.0,
        }
    }
}

impl DisclosureMatrix {
    /// Builds and validates a matrix from one row per level, public first.
    pub fn from_rows(rows: [[Action; 4]; 4]) -> Result<Self, DisclosureError> {
        let m = Self {
            cells: rows,
            ..Self::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn rows(&self) -> &[[Action; 4]; 4] {
        &self.cells
    }

    pub fn epsilon(&self, tier: Tier) -> f64 {
        self.epsilons[tier.index()]
    }

    /// Checks that strictness never rises with tier and never falls with level.
    pub fn validate(&self) -> Result<(), DisclosureError> {
        for level in SensitivityLevel::ALL {
            for tier in 1..4 {
                let lower = self.cells[level.index()][tier - 1];
                let here = self.cells[level.index()][tier];
                if here.strictness() > lower.strictness() {
                    return Err(DisclosureError::NonMonotone {
                        cell: format!("{level}[{tier}]"),
                        message: format!(
                            "tier {tier} action `{here}` is stricter than tier {} action `{lower}`",
                            tier - 1
                        ),
                    });
                }
            }
        }
        for tier in 0..4 {
            for level in 1..4 {
                let below = self.cells[level - 1][tier];
                let here = self.cells[level][tier];
                if here.strictness() < below.strictness() {
                    let name = SensitivityLevel::ALL[level];
                    return Err(DisclosureError::NonMonotone {
                        cell: format!("{name}[{tier}]"),
                        message: format!(
                            "`{here}` at level {name} is looser than `{below}` at level {}",
                            SensitivityLevel::ALL[level - 1]
                        ),
                    });
                }
            }
        }
        for (tier, eps) in self.epsilons.iter().enumerate() {
            if !(*eps > 0.0 && eps.is_finite()) {
                return Err(DisclosureError::BadParameter(format!(
                    "epsilon[{tier}] must be positive"
                )));
            }
        }
        if !(self.noise_sensitivity > 0.0 && self.noise_sensitivity.is_finite()) {
            return Err(DisclosureError::BadParameter(
                "noise_sensitivity must be positive".into(),
            ));
        }
        if !self.placeholder.contains("{TYPE}") {
            return Err(DisclosureError::BadParameter(
                "placeholder must contain `{TYPE}`".into(),
            ));
        }
        Ok(())
    }
}

pub fn decide_action(matrix: &DisclosureMatrix, tier: Tier, level: SensitivityLevel) -> Action {
    matrix.cells[level.index()][tier.index()]
}
