//! Rule-based sensitive-entity detection and document classification.
//!
//! A [`SensitivityEngine`] is compiled once from recognizer definitions and a
//! type→level map, then shared. Offsets in [`EntitySpan`] are Unicode scalar
//! value indices, not byte offsets.

mod luhn;
mod recognizers;
mod spans;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use luhn::luhn_valid;
pub use recognizers::{default_recognizers, default_type_levels};
pub use spans::{context_adjust, merge_spans};

pub const DEFAULT_COUNTING_THRESHOLD: f64 = 0.5;
pub const DEFAULT_CONTEXT_WINDOW: usize = 30;
pub const DEFAULT_CONTEXT_BOOST: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensitivityError {
    #[error("recognizer `{id}`: pattern does not compile: {message}")]
    BadPattern { id: String, message: String },
    #[error("recognizer `{id}`: base confidence {value} is outside (0, 1]")]
    BadConfidence { id: String, value: f64 },
    #[error("recognizer `{id}`: entity type `{entity_type}` has no sensitivity level")]
    UnmappedType { id: String, entity_type: String },
    #[error("duplicate recognizer id `{0}`")]
    DuplicateId(String),
    #[error("unknown sensitivity level `{0}`")]
    UnknownLevel(String),
}

impl SensitivityError {
    /// Id of the offending recognizer, when the error concerns one.
    pub fn recognizer_id(&self) -> Option<&str> {
        match self {
            SensitivityError::BadPattern { id, .. }
            | SensitivityError::BadConfidence { id, .. }
            | SensitivityError::UnmappedType { id, .. }
            | SensitivityError::DuplicateId(id) => Some(id),
            SensitivityError::UnknownLevel(_) => None,
        }
    }
}

/// Four-level document classification.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityLevel {
    #[default]
    Public = 0,
    Internal = 1,
    Confidential = 2,
    Secret = 3,
}

impl SensitivityLevel {
    pub const ALL: [SensitivityLevel; 4] = [
        SensitivityLevel::Public,
        SensitivityLevel::Internal,
        SensitivityLevel::Confidential,
        SensitivityLevel::Secret,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SensitivityLevel::Public => "public",
            SensitivityLevel::Internal => "internal",
            SensitivityLevel::Confidential => "confidential",
            SensitivityLevel::Secret => "secret",
        }
    }
}

impl fmt::Display for SensitivityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensitivityLevel {
    type Err = SensitivityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SensitivityLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SensitivityError::UnknownLevel(s.to_string()))
    }
}

/// A detected sensitive range `[start, end)` in character offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub entity_type: String,
    pub confidence: f64,
    pub recognizer_id: String,
}

impl EntitySpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// The covered substring of `text`.
    pub fn text<'a>(&self, text: &'a str) -> &'a str {
        let offsets = CharOffsets::new(text);
        &text[offsets.byte(self.start)..offsets.byte(self.end)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Validator {
    #[default]
    None,
    Luhn,
}

impl Validator {
    fn accepts(self, matched: &str) -> bool {
        match self {
            Validator::None => true,
            Validator::Luhn => luhn_valid(matched),
        }
    }
}

/// A recognizer definition as written in configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecognizerSpec {
    pub id: String,
    pub entity_type: String,
    pub pattern: String,
    pub base_confidence: f64,
    #[serde(default)]
    pub validator: Validator,
    #[serde(default)]
    pub context_words: Vec<String>,
    /// Eligible for the noise action.
    #[serde(default)]
    pub numeric: bool,
}

/// A compiled recognizer.
#[derive(Debug, Clone)]
pub struct Recognizer {
    pub spec: RecognizerSpec,
    regex: Regex,
}

impl Recognizer {
    pub fn compile(spec: RecognizerSpec) -> Result<Self, SensitivityError> {
        if !(spec.base_confidence > 0.0 && spec.base_confidence <= 1.0) {
            return Err(SensitivityError::BadConfidence {
                id: spec.id.clone(),
                value: spec.base_confidence,
            });
        }
        let regex = Regex::new(&spec.pattern).map_err(|e| SensitivityError::BadPattern {
            id: spec.id.clone(),
            message: e.to_string(),
        })?;
        Ok(Self { spec, regex })
    }

    pub fn id(&self) -> &str {
        &self.spec.id
    }

    pub fn entity_type(&self) -> &str {
        &self.spec.entity_type
    }
}

/// Maps char offsets to byte offsets and back.
pub(crate) struct CharOffsets {
    // byte offset of each char, plus text.len() as a sentinel
    starts: Vec<usize>,
}

impl CharOffsets {
    pub(crate) fn new(text: &str) -> Self {
        let mut starts: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        starts.push(text.len());
        Self { starts }
    }

    pub(crate) fn char_len(&self) -> usize {
        self.starts.len() - 1
    }

    pub(crate) fn byte(&self, char_idx: usize) -> usize {
        self.starts[char_idx]
    }

    pub(crate) fn char(&self, byte_idx: usize) -> usize {
        self.starts
            .binary_search(&byte_idx)
            .expect("byte offset on a char boundary")
    }
}

/// Tunables for context boosting and classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSettings {
    pub context_window: usize,
    pub context_boost: f64,
    pub counting_threshold: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        Self {
            context_window: DEFAULT_CONTEXT_WINDOW,
            context_boost: DEFAULT_CONTEXT_BOOST,
            counting_threshold: DEFAULT_COUNTING_THRESHOLD,
        }
    }
}

/// Runs every recognizer over `text` using the default context window and boost.
pub fn detect(text: &str, recognizers: &[Recognizer]) -> Vec<EntitySpan> {
    detect_with(text, recognizers, &DetectionSettings::default())
}

pub fn detect_with(
    text: &str,
    recognizers: &[Recognizer],
    settings: &DetectionSettings,
) -> Vec<EntitySpan> {
    if text.is_empty() {
        return Vec::new();
    }
    let offsets = CharOffsets::new(text);
    let mut out = Vec::new();
    for rec in recognizers {
        for m in rec.regex.find_iter(text) {
            if m.is_empty() || !rec.spec.validator.accepts(m.as_str()) {
                continue;
            }
            let span = EntitySpan {
                start: offsets.char(m.start()),
                end: offsets.char(m.end()),
                entity_type: rec.spec.entity_type.clone(),
                confidence: rec.spec.base_confidence,
                recognizer_id: rec.spec.id.clone(),
            };
            out.push(context_adjust(
                span,
                text,
                &rec.spec.context_words,
                settings.context_window,
                settings.context_boost,
            ));
        }
    }
    spans::sort_spans(&mut out);
    out
}

/// Detected spans plus the document-level classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub spans: Vec<EntitySpan>,
    pub level: SensitivityLevel,
    /// Counts of spans at or above the counting threshold, by type.
    pub counts: BTreeMap<String, usize>,
    /// Level of every entity type present in `spans`.
    pub type_levels: BTreeMap<String, SensitivityLevel>,
    /// Entity types eligible for the noise action.
    pub numeric_types: BTreeSet<String>,
}

impl SensitivityReport {
    pub fn level_of(&self, entity_type: &str) -> SensitivityLevel {
        self.type_levels
            .get(entity_type)
            .copied()
            .unwrap_or(SensitivityLevel::Secret)
    }

    pub fn is_numeric(&self, entity_type: &str) -> bool {
        self.numeric_types.contains(entity_type)
    }
}

/// Classifies a set of spans.
///
/// Types missing from `type_levels` are treated as secret; engines reject
/// such types when they are built, so this only matters for hand-built spans.
pub fn classify_document(
    spans: &[EntitySpan],
    type_levels: &BTreeMap<String, SensitivityLevel>,
    counting_threshold: f64,
) -> SensitivityReport {
    let level_of = |t: &str| {
        type_levels
            .get(t)
            .copied()
            .unwrap_or(SensitivityLevel::Secret)
    };
    let mut counts = BTreeMap::new();
    let mut level = SensitivityLevel::Public;
    for span in spans.iter().filter(|s| s.confidence >= counting_threshold) {
        *counts.entry(span.entity_type.clone()).or_insert(0) += 1;
        level = level.max(level_of(&span.entity_type));
    }
    SensitivityReport {
        spans: spans.to_vec(),
        level,
        counts,
        type_levels: spans
            .iter()
            .map(|s| (s.entity_type.clone(), level_of(&s.entity_type)))
            .collect(),
        numeric_types: BTreeSet::new(),
    }
}

/// Compiled recognizers plus classification settings.
#[derive(Debug, Clone)]
pub struct SensitivityEngine {
    recognizers: Vec<Recognizer>,
    type_levels: BTreeMap<String, SensitivityLevel>,
    settings: DetectionSettings,
}

impl SensitivityEngine {
    pub fn new(
        specs: Vec<RecognizerSpec>,
        type_levels: BTreeMap<String, SensitivityLevel>,
        settings: DetectionSettings,
    ) -> Result<Self, SensitivityError> {
        let mut seen = BTreeSet::new();
        let mut recognizers = Vec::with_capacity(specs.len());
        for spec in specs {
            if !seen.insert(spec.id.clone()) {
                return Err(SensitivityError::DuplicateId(spec.id));
            }
            if !type_levels.contains_key(&spec.entity_type) {
                return Err(SensitivityError::UnmappedType {
                    id: spec.id,
                    entity_type: spec.entity_type,
                });
            }
            recognizers.push(Recognizer::compile(spec)?);
        }
        Ok(Self {
            recognizers,
            type_levels,
            settings,
        })
    }

    /// The shipped recognizers and type→level map.
    pub fn with_defaults() -> Self {
        Self::new(
            default_recognizers(),
            default_type_levels(),
            DetectionSettings::default(),
        )
        .expect("shipped recognizers compile")
    }

    pub fn recognizers(&self) -> &[Recognizer] {
        &self.recognizers
    }

    pub fn type_levels(&self) -> &BTreeMap<String, SensitivityLevel> {
        &self.type_levels
    }

    pub fn settings(&self) -> &DetectionSettings {
        &self.settings
    }

    pub fn detect(&self, text: &str) -> Vec<EntitySpan> {
        detect_with(text, &self.recognizers, &self.settings)
    }

    /// Detects, merges and classifies.
    pub fn analyze(&self, text: &str) -> SensitivityReport {
        let spans = merge_spans(self.detect(text));
        let mut report =
            classify_document(&spans, &self.type_levels, self.settings.counting_threshold);
        report.numeric_types = self
            .recognizers
            .iter()
            .filter(|r| r.spec.numeric)
            .map(|r| r.spec.entity_type.clone())
            .collect();
        report
    }
}
