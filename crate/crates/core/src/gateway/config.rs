//! The gateway configuration file.
//!
//! One TOML document configures everything. Every section has shipped
//! defaults, so a minimal file only needs principals, API keys and a policy.
//! Validation failures name the offending key, e.g. `trust.weights` or
//! `disclosure.matrix.secret[3]`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::behavior::{
    HmmModel, DEFAULT_ANOMALY_THRESHOLD, DEFAULT_RING_CAPACITY, DEFAULT_VIOLATION_WEIGHT,
};
use crate::disclosure::{Action, DisclosureError, DisclosureMatrix, DEFAULT_EPSILONS};
use crate::policy::{parse_policy, Policy};
use crate::sensitivity::{
    default_recognizers, default_type_levels, DetectionSettings, RecognizerSpec, SensitivityEngine,
    SensitivityError, SensitivityLevel,
};
use crate::trust::{ContextFactors, Principal, TrustError, TrustModel, TrustWeights};

pub const CONFIG_ENV: &str = "TRUSTGATE_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid configuration at `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("no configuration file given (use --config or set {CONFIG_ENV})")]
    Missing,
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.to_string(),
        }
    }

    /// The offending configuration key, for validation failures.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub listen: String,
    pub audit_path: PathBuf,
    pub state_path: Option<PathBuf>,
    /// Also classify prompts (recorded in audit only).
    pub scan_prompts: bool,
    /// Fixed seed for the noise generator; entropy when absent.
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuthConfig {
    /// API key → principal id.
    pub api_keys: BTreeMap<String, String>,
    pub admin_keys: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorSettings {
    pub violation_weight: f64,
    pub ring_capacity: usize,
    pub anomaly_threshold: f64,
    pub hmm: HmmModel,
}

impl Default for BehaviorSettings {
    fn default() -> Self {
        Self {
            violation_weight: DEFAULT_VIOLATION_WEIGHT,
            ring_capacity: DEFAULT_RING_CAPACITY,
            anomaly_threshold: DEFAULT_ANOMALY_THRESHOLD,
            hmm: HmmModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendConfig {
    Mock {
        /// JSON object mapping prompt → response. Unknown prompts echo.
        fixture: Option<PathBuf>,
        timeout_ms: u64,
    },
    Remote {
        base_url: String,
        /// Environment variable holding a bearer credential.
        credential_env: Option<String>,
        timeout_ms: u64,
        max_tokens: u32,
    },
}

impl BackendConfig {
    pub fn timeout_ms(&self) -> u64 {
        match self {
            BackendConfig::Mock { timeout_ms, .. } | BackendConfig::Remote { timeout_ms, .. } => {
                *timeout_ms
            }
        }
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub server: ServerConfig,
    pub auth: AuthConfig,
    pub trust: TrustModel,
    pub principals: Vec<Principal>,
    pub policy: Policy,
    pub sensitivity: SensitivityEngine,
    pub behavior: BehaviorSettings,
    pub disclosure: DisclosureMatrix,
    /// Route the summarize action through the backend before extractive filtering.
    pub abstractive_summary: bool,
    pub backend: BackendConfig,
}

const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    server: RawServer,
    #[serde(default)]
    auth: RawAuth,
    #[serde(default)]
    trust: RawTrust,
    #[serde(default)]
    principals: Vec<Principal>,
    #[serde(default)]
    policy: RawPolicy,
    #[serde(default)]
    sensitivity: RawSensitivity,
    #[serde(default)]
    behavior: RawBehavior,
    #[serde(default)]
    disclosure: RawDisclosure,
    #[serde(default)]
    backend: RawBackend,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawServer {
    listen: String,
    audit_path: PathBuf,
    state_path: Option<PathBuf>,
    scan_prompts: bool,
    rng_seed: Option<u64>,
}

impl Default for RawServer {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            audit_path: "audit.jsonl".into(),
            state_path: None,
            scan_prompts: false,
            rng_seed: None,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawAuth {
    api_keys: BTreeMap<String, String>,
    admin_keys: BTreeSet<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawWeights {
    role: f64,
    purpose: f64,
    context: f64,
    behavior: f64,
}

impl Default for RawWeights {
    fn default() -> Self {
        let w = TrustWeights::default();
        Self {
            role: w.role,
            purpose: w.purpose,
            context: w.context,
            behavior: w.behavior,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTrust {
    weights: RawWeights,
    thresholds: [f64; 3],
    role_weights: BTreeMap<String, f64>,
    purpose_scores: BTreeMap<String, f64>,
    default_purpose_score: f64,
    factors: ContextFactors,
}

impl Default for RawTrust {
    fn default() -> Self {
        Self {
            weights: RawWeights::default(),
            thresholds: TrustWeights::default().thresholds,
            role_weights: BTreeMap::new(),
            purpose_scores: BTreeMap::new(),
            default_purpose_score: 0.5,
            factors: ContextFactors::default(),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawPolicy {
    path: Option<PathBuf>,
    source: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSensitivity {
    include_defaults: bool,
    recognizers: Vec<RecognizerSpec>,
    type_levels: BTreeMap<String, String>,
    counting_threshold: f64,
    context_window: usize,
    context_boost: f64,
}

impl Default for RawSensitivity {
    fn default() -> Self {
        let s = DetectionSettings::default();
        Self {
            include_defaults: true,
            recognizers: Vec::new(),
            type_levels: BTreeMap::new(),
            counting_threshold: s.counting_threshold,
            context_window: s.context_window,
            context_boost: s.context_boost,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBehavior {
    violation_weight: f64,
    ring_capacity: usize,
    anomaly_threshold: f64,
    hmm: Option<HmmModel>,
}

impl Default for RawBehavior {
    fn default() -> Self {
        let b = BehaviorSettings::default();
        Self {
            violation_weight: b.violation_weight,
            ring_capacity: b.ring_capacity,
            anomaly_threshold: b.anomaly_threshold,
            hmm: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    public: [String; 4],
    internal: [String; 4],
    confidential: [String; 4],
    secret: [String; 4],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDisclosure {
    matrix: Option<RawMatrix>,
    placeholder: String,
    epsilons: [f64; 4],
    summarize_max_sentences: usize,
    noise_sensitivity: f64,
    abstractive_summary: bool,
}

impl Default for RawDisclosure {
    fn default() -> Self {
        let m = DisclosureMatrix::default();
        Self {
            matrix: None,
            placeholder: m.placeholder,
            epsilons: DEFAULT_EPSILONS,
            summarize_max_sentences: m.summarize_max_sentences,
            noise_sensitivity: m.noise_sensitivity,
            abstractive_summary: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBackend {
    kind: String,
    fixture: Option<PathBuf>,
    base_url: Option<String>,
    credential_env: Option<String>,
    timeout_ms: u64,
    max_tokens: u32,
}

impl Default for RawBackend {
    fn default() -> Self {
        Self {
            kind: "mock".into(),
            fixture: None,
            base_url: None,
            credential_env: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_tokens: 512,
        }
    }
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn unit_range(key: String, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("{v} is outside [0, 1]")))
    }
}

/// Reads and validates the configuration at `path`.
pub fn load_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Config::from_toml_str(&text, base)
}

/// `--config` if given, else `TRUSTGATE_CONFIG`.
pub fn resolve_config_path(flag: Option<PathBuf>) -> Result<PathBuf, ConfigError> {
    flag.or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
        .ok_or(ConfigError::Missing)
}

impl Config {
    /// Parses a configuration document; relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_raw(raw, base_dir)
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<Config, ConfigError> {
        let trust = build_trust(raw.trust)?;

        for (i, p) in raw.principals.iter().enumerate() {
            p.validate(&trust.role_weights).map_err(|e| match e {
                TrustError::UnknownRole { .. } => {
                    ConfigError::invalid(format!("principals[{i}].roles"), e)
                }
                other => ConfigError::invalid(format!("principals[{i}].id"), other),
            })?;
        }
        let ids: BTreeSet<&str> = raw.principals.iter().map(|p| p.id.as_str()).collect();
        if ids.len() != raw.principals.len() {
            return Err(ConfigError::invalid("principals", "duplicate principal id"));
        }
        for principal in raw.auth.api_keys.values() {
            if !ids.contains(principal.as_str()) {
                return Err(ConfigError::invalid(
                    "auth.api_keys",
                    format!("key maps to unknown principal `{principal}`"),
                ));
            }
        }

        let policy = match (raw.policy.path, raw.policy.source) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid(
                    "policy",
                    "set either `path` or `source`, not both",
                ))
            }
            (Some(p), None) => {
                let p = resolve(base, p);
                let text = std::fs::read_to_string(&p).map_err(|e| {
                    ConfigError::invalid("policy.path", format!("{}: {e}", p.display()))
                })?;
                parse_policy(&text).map_err(|e| ConfigError::invalid("policy.path", e))?
            }
            (None, Some(src)) => {
                parse_policy(&src).map_err(|e| ConfigError::invalid("policy.source", e))?
            }
            (None, None) => Policy::empty(),
        };

        let sensitivity = build_sensitivity(raw.sensitivity)?;

        let b = raw.behavior;
        if b.violation_weight.is_nan() || b.violation_weight < 1.0 {
            return Err(ConfigError::invalid(
                "behavior.violation_weight",
                "must be at least 1",
            ));
        }
        if b.ring_capacity == 0 {
            return Err(ConfigError::invalid(
                "behavior.ring_capacity",
                "must be positive",
            ));
        }
        let hmm = b.hmm.unwrap_or_default();
        hmm.validate()
            .map_err(|e| ConfigError::invalid("behavior.hmm", e))?;
        let behavior = BehaviorSettings {
            violation_weight: b.violation_weight,
            ring_capacity: b.ring_capacity,
            anomaly_threshold: b.anomaly_threshold,
            hmm,
        };

        let (disclosure, abstractive_summary) = build_disclosure(raw.disclosure)?;
        let backend = build_backend(raw.backend, base)?;

        Ok(Config {
            server: ServerConfig {
                listen: raw.server.listen,
                audit_path: resolve(base, raw.server.audit_path),
                state_path: raw.server.state_path.map(|p| resolve(base, p)),
                scan_prompts: raw.server.scan_prompts,
                rng_seed: raw.server.rng_seed,
            },
            auth: AuthConfig {
                api_keys: raw.auth.api_keys,
                admin_keys: raw.auth.admin_keys,
            },
            trust,
            principals: raw.principals,
            policy,
            sensitivity,
            behavior,
            disclosure,
            abstractive_summary,
            backend,
        })
    }

    pub fn principal(&self, id: &str) -> Option<&Principal> {
        self.principals.iter().find(|p| p.id == id)
    }
}

fn build_trust(t: RawTrust) -> Result<TrustModel, ConfigError> {
    let weights = TrustWeights {
        role: t.weights.role,
        purpose: t.weights.purpose,
        context: t.weights.context,
        behavior: t.weights.behavior,
        thresholds: t.thresholds,
    };
    weights.validate().map_err(|e| match e {
        TrustError::BadThresholds(_) => ConfigError::invalid("trust.thresholds", e),
        other => ConfigError::invalid("trust.weights", other),
    })?;
    t.factors.validate().map_err(|e| match &e {
        TrustError::FactorOutOfRange(which) => {
            ConfigError::invalid(format!("trust.factors.{which}"), &e)
        }
        _ => ConfigError::invalid("trust.factors", &e),
    })?;
    for (role, w) in &t.role_weights {
        unit_range(format!("trust.role_weights.{role}"), *w)?;
    }
    for (purpose, s) in &t.purpose_scores {
        unit_range(format!("trust.purpose_scores.{purpose}"), *s)?;
    }
    unit_range(
        "trust.default_purpose_score".into(),
        t.default_purpose_score,
    )?;
    Ok(TrustModel {
        weights,
        role_weights: t.role_weights,
        purpose_scores: t.purpose_scores,
        default_purpose_score: t.default_purpose_score,
        factors: t.factors,
    })
}

fn build_sensitivity(s: RawSensitivity) -> Result<SensitivityEngine, ConfigError> {
    let mut type_levels = default_type_levels();
    for (ty, level) in &s.type_levels {
        let level: SensitivityLevel = level
            .parse()
            .map_err(|e| ConfigError::invalid(format!("sensitivity.type_levels.{ty}"), e))?;
        type_levels.insert(ty.clone(), level);
    }
    let mut specs = if s.include_defaults {
        default_recognizers()
    } else {
        Vec::new()
    };
    let shipped = specs.len();
    specs.extend(s.recognizers);
    let settings = DetectionSettings {
        context_window: s.context_window,
        context_boost: s.context_boost,
        counting_threshold: s.counting_threshold,
    };
    unit_range(
        "sensitivity.counting_threshold".into(),
        settings.counting_threshold,
    )?;
    unit_range("sensitivity.context_boost".into(), settings.context_boost)?;

    let index_of = |id: &str| {
        specs
            .iter()
            .rposition(|r| r.id == id)
            .filter(|i| *i >= shipped)
            .map(|i| i - shipped)
    };
    SensitivityEngine::new(specs.clone(), type_levels, settings).map_err(|e| {
        let key = match (&e, e.recognizer_id().and_then(index_of)) {
            (SensitivityError::BadPattern { .. }, Some(i)) => {
                format!("sensitivity.recognizers[{i}].pattern")
            }
            (SensitivityError::BadConfidence { .. }, Some(i)) => {
                format!("sensitivity.recognizers[{i}].base_confidence")
            }
            (SensitivityError::UnmappedType { entity_type, .. }, _) => {
                format!("sensitivity.type_levels.{entity_type}")
            }
            (SensitivityError::DuplicateId(_), Some(i)) => {
                format!("sensitivity.recognizers[{i}].id")
            }
            _ => "sensitivity.recognizers".to_string(),
        };
        ConfigError::invalid(key, e)
    })
}

fn build_disclosure(d: RawDisclosure) -> Result<(DisclosureMatrix, bool), ConfigError> {
    let mut matrix = DisclosureMatrix::default();
    if let Some(raw) = d.matrix {
        let mut rows = [[Action::Pass; 4]; 4];
        let named = [
            ("public", &raw.public),
            ("internal", &raw.internal),
            ("confidential", &raw.confidential),
            ("secret", &raw.secret),
        ];
        for (level, (name, cells)) in named.iter().enumerate() {
            for (tier, cell) in cells.iter().enumerate() {
                rows[level][tier] = cell.parse().map_err(|e| {
                    ConfigError::invalid(format!("disclosure.matrix.{name}[{tier}]"), e)
                })?;
            }
        }
        matrix = DisclosureMatrix::from_rows(rows).map_err(|e| match &e {
            DisclosureError::NonMonotone { cell, .. } => {
                ConfigError::invalid(format!("disclosure.matrix.{cell}"), &e)
            }
            _ => ConfigError::invalid("disclosure.matrix", &e),
        })?;
    }
    matrix.placeholder = d.placeholder;
    matrix.epsilons = d.epsilons;
    matrix.summarize_max_sentences = d.summarize_max_sentences;
    matrix.noise_sensitivity = d.noise_sensitivity;
    matrix.validate().map_err(|e| {
        let key = match &e {
            DisclosureError::BadParameter(m) if m.starts_with("epsilon") => "disclosure.epsilons",
            DisclosureError::BadParameter(m) if m.starts_with("noise") => {
                "disclosure.noise_sensitivity"
            }
            DisclosureError::BadParameter(_) => "disclosure.placeholder",
            _ => "disclosure.matrix",
        };
        ConfigError::invalid(key, e)
    })?;
    if matrix.summarize_max_sentences == 0 {
        return Err(ConfigError::invalid(
            "disclosure.summarize_max_sentences",
            "must be positive",
        ));
    }
    Ok((matrix, d.abstractive_summary))
}

fn build_backend(b: RawBackend, base: &Path) -> Result<BackendConfig, ConfigError> {
    match b.kind.as_str() {
        "mock" => {
            if b.base_url.is_some() {
                return Err(ConfigError::invalid(
                    "backend.base_url",
                    "not allowed for a mock backend",
                ));
            }
            Ok(BackendConfig::Mock {
                fixture: b.fixture.map(|p| resolve(base, p)),
                timeout_ms: b.timeout_ms,
            })
        }
        "remote" => {
            if b.fixture.is_some() {
                return Err(ConfigError::invalid(
                    "backend.fixture",
                    "not allowed for a remote backend",
                ));
            }
            let base_url = b.base_url.ok_or_else(|| {
                ConfigError::invalid("backend.base_url", "required for a remote backend")
            })?;
            url_ok(&base_url).map_err(|m| ConfigError::invalid("backend.base_url", m))?;
            Ok(BackendConfig::Remote {
                base_url: base_url.trim_end_matches('/').to_string(),
                credential_env: b.credential_env,
                timeout_ms: b.timeout_ms,
                max_tokens: b.max_tokens,
            })
        }
        other => Err(ConfigError::invalid(
            "backend.kind",
            format!("unknown backend kind `{other}`"),
        )),
    }
}

fn url_ok(url: &str) -> Result<(), String> {
    if url.starts_with("http://") || url.starts_with("https://") {
        Ok(())
    } else {
        Err(format!("`{url}` is not an http(s) URL"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Config, ConfigError> {
        Config::from_toml_str(text, Path::new("."))
    }

    fn key_of(text: &str) -> String {
        load(text)
            .unwrap_err()
            .key()
            .unwrap_or("<none>")
            .to_string()
    }

    #[test]
    fn shipped_config_loads() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("config/default.toml");
        let c = load_config(&path).unwrap();
        assert_eq!(c.principals.len(), 4);
        assert!(c.policy.rules.len() >= 4);
        let schema = crate::policy::AttributeSchema::default();
        assert!(crate::policy::validate_policy(&c.policy, &schema).is_empty());
        let fixture = crate::gateway::load_fixture(match &c.backend {
            BackendConfig::Mock {
                fixture: Some(f), ..
            } => f,
            other => panic!("{other:?}"),
        })
        .unwrap();
        let levels: Vec<_> = fixture
            .values()
            .map(|t| c.sensitivity.analyze(t).level)
            .collect();
        for level in SensitivityLevel::ALL {
            assert!(levels.contains(&level), "no fixture at {level}");
        }
    }

    #[test]
    fn empty_document_uses_defaults() {
        let c = load("").unwrap();
        assert_eq!(c.trust.weights, TrustWeights::default());
        assert_eq!(c.disclosure, DisclosureMatrix::default());
        assert!(c.policy.rules.is_empty());
        assert!(matches!(
            c.backend,
            BackendConfig::Mock { fixture: None, .. }
        ));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let k =
            key_of("[trust.weights]\nrole = 0.5\npurpose = 0.2\ncontext = 0.2\nbehavior = 0.2\n");
        assert_eq!(k, "trust.weights");
        assert_eq!(
            key_of("[trust]\nthresholds = [0.6, 0.3, 0.9]\n"),
            "trust.thresholds"
        );
    }

    #[test]
    fn matrix_monotonicity_names_the_cell() {
        let text = r#"
            [disclosure.matrix]
            public = ["pass", "pass", "pass", "pass"]
            internal = ["summarize", "pass", "pass", "pass"]
            confidential = ["deny", "redact", "pass", "pass"]
            secret = ["deny", "deny", "pass", "redact"]
        "#;
        assert_eq!(key_of(text), "disclosure.matrix.secret[3]");
        let bad_action = text.replace("\"redact\"]", "\"shred\"]");
        assert_eq!(key_of(&bad_action), "disclosure.matrix.secret[3]");
    }

    #[test]
    fn recognizer_and_policy_errors() {
        let text = r#"
            [[sensitivity.recognizers]]
            id = "emp"
            entity_type = "EMAIL"
            pattern = "E-(\\d+"
            base_confidence = 0.5
        "#;
        assert_eq!(key_of(text), "sensitivity.recognizers[0].pattern");
        let text = r#"
            [[sensitivity.recognizers]]
            id = "emp"
            entity_type = "EMPLOYEE_ID"
            pattern = "E-\\d+"
            base_confidence = 0.5
        "#;
        assert_eq!(key_of(text), "sensitivity.type_levels.EMPLOYEE_ID");
        assert_eq!(
            key_of("[policy]\nsource = \"permit r when role ==\"\n"),
            "policy.source"
        );
        assert_eq!(
            key_of("[policy]\npath = \"/nonexistent/policy\"\n"),
            "policy.path"
        );
    }

    #[test]
    fn principals_and_keys() {
        let text = r#"
            [trust.role_weights]
            clinician = 0.9
            [[principals]]
            id = "amy"
            roles = ["surgeon"]
        "#;
        assert_eq!(key_of(text), "principals[0].roles");
        let text = "[auth.api_keys]\nk = \"ghost\"\n";
        assert_eq!(key_of(text), "auth.api_keys");
        assert_eq!(
            key_of("[trust.role_weights]\nboss = 1.5\n"),
            "trust.role_weights.boss"
        );
    }

    #[test]
    fn backend_kinds() {
        assert_eq!(key_of("[backend]\nkind = \"remote\"\n"), "backend.base_url");
        assert_eq!(
            key_of("[backend]\nkind = \"mock\"\nbase_url = \"http://x\"\n"),
            "backend.base_url"
        );
        assert_eq!(
            key_of("[backend]\nkind = \"carrier-pigeon\"\n"),
            "backend.kind"
        );
        let c = load("[backend]\nkind = \"remote\"\nbase_url = \"http://llm:9000/\"\n").unwrap();
        assert!(
            matches!(c.backend, BackendConfig::Remote { ref base_url, .. } if base_url == "http://llm:9000")
        );
    }

    #[test]
    fn misc_validation() {
        assert_eq!(
            key_of("[behavior]\nviolation_weight = 0.5\n"),
            "behavior.violation_weight"
        );
        assert_eq!(
            key_of("[disclosure]\nepsilons = [0.5, 0.0, 2.0, 4.0]\n"),
            "disclosure.epsilons"
        );
        assert_eq!(
            key_of("[trust.factors.network]\ntrusted = 1.0\nvpn = 0.7\n"),
            "trust.factors.network.public"
        );
        assert!(matches!(
            load("[server]\nlisten = 3\n"),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(load("[mystery]\n"), Err(ConfigError::Parse(_))));
    }
}
