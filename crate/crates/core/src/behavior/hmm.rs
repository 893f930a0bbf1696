use serde::{Deserialize, Serialize};

use super::{ActionKind, BehaviorError};

/// Stand-in for `ln 0` so downstream arithmetic stays finite.
pub const LOG_FLOOR: f64 = -1e9;
pub const DEFAULT_ANOMALY_THRESHOLD: f64 = -2.5;

const ROW_TOLERANCE: f64 = 1e-9;

/// Discrete hidden Markov model over a named symbol alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmModel {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub initial: Vec<f64>,
    /// `transition[i][j]` = P(next state j | state i).
    pub transition: Vec<Vec<f64>>,
    /// `emission[i][k]` = P(symbol k | state i).
    pub emission: Vec<Vec<f64>>,
}

impl Default for HmmModel {
    /// Two states, NORMAL and SUSPECT, over the five action kinds. NORMAL
    /// mostly queries; SUSPECT leans toward sensitive access and export.
    fn default() -> Self {
        Self {
            states: vec!["NORMAL".into(), "SUSPECT".into()],
            alphabet: ActionKind::ALL
                .iter()
                .map(|a| a.as_str().to_string())
                .collect(),
            initial: vec![0.95, 0.05],
            transition: vec![vec![0.95, 0.05], vec![0.10, 0.90]],
            emission: vec![
                vec![0.80, 0.15, 0.03, 0.01, 0.01],
                vec![0.30, 0.40, 0.20, 0.05, 0.05],
            ],
        }
    }
}

impl HmmModel {
    pub fn validate(&self) -> Result<(), BehaviorError> {
        let n = self.states.len();
        let m = self.alphabet.len();
        if n == 0 || m == 0 {
            return Err(BehaviorError::InvalidModel(
                "model needs at least one state and one symbol".into(),
            ));
        }
        check_row("initial", &self.initial, n)?;
        if self.transition.len() != n || self.emission.len() != n {
            return Err(BehaviorError::InvalidModel(format!(
                "expected {n} transition and emission rows"
            )));
        }
        for (i, row) in self.transition.iter().enumerate() {
            check_row(&format!("transition[{i}]"), row, n)?;
        }
        for (i, row) in self.emission.iter().enumerate() {
            check_row(&format!("emission[{i}]"), row, m)?;
        }
        Ok(())
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize, BehaviorError> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| BehaviorError::UnknownSymbol(symbol.to_string()))
    }

    /// Forward log-likelihood over symbol indices.
    pub fn loglik_indices(&self, observations: &[usize]) -> f64 {
        let n = self.states.len();
        let Some((&first, rest)) = observations.split_first() else {
            return 0.0;
        };
        let mut alpha: Vec<f64> = (0..n)
            .map(|i| self.initial[i] * self.emission[i][first])
            .collect();
        let mut loglik = 0.0;
        if !rescale(&mut alpha, &mut loglik) {
            return LOG_FLOOR;
        }
        let mut next = vec![0.0; n];
        for &obs in rest {
            for (j, slot) in next.iter_mut().enumerate() {
                let inflow: f64 = (0..n).map(|i| alpha[i] * self.transition[i][j]).sum();
                *slot = inflow * self.emission[j][obs];
            }
            std::mem::swap(&mut alpha, &mut next);
            if !rescale(&mut alpha, &mut loglik) {
                return LOG_FLOOR;
            }
        }
        loglik
    }
}

fn check_row(name: &str, row: &[f64], len: usize) -> Result<(), BehaviorError> {
    if row.len() != len {
        return Err(BehaviorError::InvalidModel(format!(
            "{name} has {} entries, expected {len}",
            row.len()
        )));
    }
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(BehaviorError::InvalidModel(format!(
            "{name} has a negative entry"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(BehaviorError::InvalidModel(format!(
            "{name} sums to {sum}, not 1"
        )));
    }
    Ok(())
}

// Normalizes `alpha` in place and accumulates the log of the scale factor.
// Returns false when every path has probability zero.
fn rescale(alpha: &mut [f64], loglik: &mut f64) -> bool {
    let scale: f64 = alpha.iter().sum();
    if scale <= 0.0 || !scale.is_finite() {
        return false;
    }
    alpha.iter_mut().for_each(|a| *a /= scale);
    *loglik += scale.ln();
    true
}

/// `ln P(observations | model)` via the scaled forward algorithm.
///
/// Returns [`LOG_FLOOR`] when the sequence is impossible under the model.
pub fn forward_loglik<S: AsRef<str>>(
    model: &HmmModel,
    observations: &[S],
) -> Result<f64, BehaviorError> {
    let indices = observations
        .iter()
        .map(|o| model.symbol_index(o.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(model.loglik_indices(&indices))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyVerdict {
    pub anomalous: bool,
    pub mean_loglik: f64,
}

/// Flags a sequence whose per-symbol log-likelihood falls below `threshold`.
pub fn flag_anomaly<S: AsRef<str>>(
    model: &HmmModel,
    observations: &[S],
    threshold: f64,
) -> Result<AnomalyVerdict, BehaviorError> {
    if observations.is_empty() {
        return Err(BehaviorError::EmptySequence);
    }
    let mean_loglik = forward_loglik(model, observations)? / observations.len() as f64;
    Ok(AnomalyVerdict {
        anomalous: mean_loglik < threshold,
        mean_loglik,
    })
}
