//! Adaptive output control.
//!
//! [`transform`] looks up the action for a (trust tier, sensitivity level)
//! pair in a [`DisclosureMatrix`] and applies it to the model output:
//!
//! | action      | effect                                                      |
//! |-------------|-------------------------------------------------------------|
//! | `pass`      | text returned unchanged                                     |
//! | `summarize` | sentences containing a span are dropped                     |
//! | `redact`    | spans replaced by the placeholder template                  |
//! | `noise`     | numeric spans perturbed with Laplace noise, others redacted |
//! | `deny`      | fixed denial notice                                         |

mod matrix;
mod noise;
mod redact;
mod summary;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensitivity::{EntitySpan, SensitivityLevel, SensitivityReport};
use crate::trust::Tier;

pub use matrix::{
    decide_action, Action, DisclosureMatrix, DEFAULT_EPSILONS, DEFAULT_PLACEHOLDER,
    DEFAULT_SUMMARY_SENTENCES,
};
pub use noise::{laplace_from_uniform, laplace_noise};
pub use redact::{placeholder_for, redact};
pub use summary::{extractive_filter_summary, withheld_notice};

pub const DENIAL_NOTICE: &str = "[request denied by disclosure policy]";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisclosureError {
    #[error("matrix cell {cell}: {message}")]
    NonMonotone { cell: String, message: String },
    #[error("unknown disclosure action `{0}`")]
    UnknownAction(String),
    #[error("spans {first:?} and {second:?} overlap; merge them before redacting")]
    OverlappingSpans {
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error("span [{start}, {end}) is outside the text")]
    SpanOutOfBounds { start: usize, end: usize },
    #[error("{0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlledOutput {
    pub text: String,
    /// The matrix cell that governed this output.
    pub action: Action,
    /// Transformations actually applied.
    pub action_set: Vec<Action>,
    pub removed_span_count: usize,
    pub epsilon_spent: Option<f64>,
    pub level: SensitivityLevel,
    pub tier: Tier,
    /// Per-span fallbacks, e.g. a numeric span that could not be parsed for noise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Decides the action for `tier` and `report.level` and applies it.
pub fn transform<R: Rng + ?Sized>(
    text: &str,
    report: &SensitivityReport,
    tier: Tier,
    matrix: &DisclosureMatrix,
    rng: &mut R,
) -> ControlledOutput {
    let action = decide_action(matrix, tier, report.level);
    apply_action(action, text, report, tier, matrix, rng)
}

/// Applies a given action, bypassing the matrix lookup.
pub fn apply_action<R: Rng + ?Sized>(
    action: Action,
    text: &str,
    report: &SensitivityReport,
    tier: Tier,
    matrix: &DisclosureMatrix,
    rng: &mut R,
) -> ControlledOutput {
    let mut out = ControlledOutput {
        text: String::new(),
        action,
        action_set: vec![action],
        removed_span_count: 0,
        epsilon_spent: None,
        level: report.level,
        tier,
        notes: Vec::new(),
    };
    match action {
        Action::Pass => out.text = text.to_string(),
        Action::Deny => {
            out.text = DENIAL_NOTICE.to_string();
            out.removed_span_count = report.spans.len();
        }
        Action::Summarize => {
            out.text =
                extractive_filter_summary(text, &report.spans, matrix.summarize_max_sentences);
            out.removed_span_count = report.spans.len();
        }
        Action::Redact | Action::Noise => {
            let eligible: Vec<&EntitySpan> = report
                .spans
                .iter()
                .filter(|s| report.level_of(&s.entity_type) >= SensitivityLevel::Internal)
                .collect();
            let plan = plan_regions(&eligible, report);
            let epsilon = matrix.epsilon(tier);
            let mut replacements = Vec::with_capacity(plan.len());
            let mut noised = 0;
            for region in plan {
                let original = region.span.text(text);
                let noisy = (action == Action::Noise && region.numeric)
                    .then(|| noise_numeric(original, matrix.noise_sensitivity, epsilon, rng));
                match noisy {
                    Some(Some(value)) => {
                        noised += 1;
                        replacements.push((region.span, value));
                    }
                    fallback => {
                        if fallback.is_some() {
                            out.notes.push(format!(
                                "could not parse {} value for noise; redacted instead",
                                region.span.entity_type
                            ));
                        }
                        out.removed_span_count += region.members;
                        let placeholder =
                            placeholder_for(&matrix.placeholder, &region.span.entity_type);
                        replacements.push((region.span, placeholder));
                    }
                }
            }
            out.text = splice(text, &replacements);
            if action == Action::Noise {
                out.action_set.clear();
                if noised > 0 {
                    out.action_set.push(Action::Noise);
                    out.epsilon_spent = Some(epsilon);
                }
                if out.removed_span_count > 0 {
                    out.action_set.push(Action::Redact);
                }
                if out.action_set.is_empty() {
                    out.action_set.push(Action::Noise);
                }
            }
        }
    }
    out
}

struct Region {
    span: EntitySpan,
    members: usize,
    numeric: bool,
}

// Coalesces overlapping spans of any type into disjoint regions. A region
// takes the type of its most sensitive member (longest on ties) and is only
// numeric when every member is.
fn plan_regions(spans: &[&EntitySpan], report: &SensitivityReport) -> Vec<Region> {
    let mut sorted: Vec<&EntitySpan> = spans.to_vec();
    sorted.sort_by_key(|s| (s.start, s.end));
    let mut regions: Vec<Region> = Vec::new();
    for s in sorted {
        let numeric = report.is_numeric(&s.entity_type);
        match regions.last_mut() {
            Some(r) if s.start < r.span.end => {
                let rank = |sp: &EntitySpan| (report.level_of(&sp.entity_type), sp.len());
                if rank(s) > rank(&r.span) {
                    r.span.entity_type = s.entity_type.clone();
                }
                r.span.end = r.span.end.max(s.end);
                r.members += 1;
                r.numeric &= numeric;
            }
            _ => regions.push(Region {
                span: (*s).clone(),
                members: 1,
                numeric,
            }),
        }
    }
    regions
}

fn splice(text: &str, replacements: &[(EntitySpan, String)]) -> String {
    let offsets = crate::sensitivity::CharOffsets::new(text);
    let mut out = text.to_string();
    for (span, rep) in replacements.iter().rev() {
        out.replace_range(offsets.byte(span.start)..offsets.byte(span.end), rep);
    }
    out
}

// Keeps any non-numeric prefix (currency symbol) and reformats to 2 decimals.
fn noise_numeric<R: Rng + ?Sized>(
    original: &str,
    sensitivity: f64,
    epsilon: f64,
    rng: &mut R,
) -> Option<String> {
    let digits_at = original.find(|c: char| c.is_ascii_digit() || c == '-')?;
    let (prefix, number) = original.split_at(digits_at);
    let value: f64 = number.replace(',', "").parse().ok()?;
    let noisy = laplace_noise(value, sensitivity, epsilon, rng).ok()?;
    Some(format!("{prefix}{noisy:.2}"))
}
