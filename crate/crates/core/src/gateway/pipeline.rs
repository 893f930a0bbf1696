use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use chrono::Utc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::audit::{sha256_hex, AuditLog, AuditRecord};
use super::backend::{Backend, BackendError};
use super::config::Config;
use super::store::StateStore;
use crate::behavior::{flag_anomaly, ActionKind, BehaviorEvent, BehaviorState};
use crate::disclosure::{apply_action, decide_action, Action, ControlledOutput};
use crate::policy::{
    evaluate, parse_policy, validate_policy, AttributeSchema, Diagnostic, Effect, Policy,
    PolicyError,
};
use crate::sensitivity::SensitivityLevel;
use crate::trust::{
    AuthStrength, DevicePosture, NetworkZone, Principal, RequestContext, TrustScore,
};

/// Action name passed to the policy for completion requests. The resource
/// is `completions/<purpose>`.
pub const COMPLETION_ACTION: &str = "generate";

pub fn completion_resource(purpose: &str) -> String {
    format!("completions/{purpose}")
}

// Unhyphenated, so no digit group inside an id can read as a card or phone number.
fn new_request_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

const ABSTRACTIVE_PROMPT: &str =
    "Summarize the following text without reproducing any personal, financial or medical details:\n\n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextInput {
    pub network_zone: NetworkZone,
    pub device_posture: DevicePosture,
    pub auth_strength: AuthStrength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletionRequest {
    pub purpose: String,
    pub prompt: String,
    pub context: ContextInput,
    /// Optional; must match the principal bound to the API key when present.
    #[serde(default)]
    pub principal_id: Option<String>,
}

impl CompletionRequest {
    pub fn new(
        purpose: impl Into<String>,
        prompt: impl Into<String>,
        network_zone: NetworkZone,
        device_posture: DevicePosture,
        auth_strength: AuthStrength,
    ) -> Self {
        Self {
            purpose: purpose.into(),
            prompt: prompt.into(),
            context: ContextInput {
                network_zone,
                device_posture,
                auth_strength,
            },
            principal_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResponse {
    pub request_id: String,
    pub text: String,
    pub tier: u8,
    pub raw_score: f64,
    pub level: SensitivityLevel,
    pub action: Action,
    pub action_set: Vec<Action>,
    pub epsilon_spent: Option<f64>,
    pub anomaly_flag: bool,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unauthorized: {0}")]
    Unauthorized(String),
    #[error("forbidden by policy (rules: {})", .0.join(", "))]
    Forbidden(Vec<String>),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl GatewayError {
    pub fn status(&self) -> u16 {
        match self {
            GatewayError::Unauthorized(_) => 401,
            GatewayError::Forbidden(_) => 403,
            GatewayError::BadRequest(_) => 400,
            GatewayError::Backend(_) => 502,
            GatewayError::Internal(_) => 500,
        }
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("cannot open audit log {path}: {source}")]
    Audit {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot load state file: {0}")]
    State(std::io::Error),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// The request pipeline and its shared state.
#[derive(Debug)]
pub struct Gateway {
    config: Config,
    policy: RwLock<Arc<Policy>>,
    principals: BTreeMap<String, Principal>,
    state: StateStore,
    audit: AuditLog,
    backend: Backend,
    rng: Mutex<ChaCha8Rng>,
    state_errors: AtomicU64,
}

impl Gateway {
    pub fn new(config: Config) -> Result<Self, StartupError> {
        let backend = Backend::from_config(&config.backend)?;
        Self::with_backend(config, backend)
    }

    pub fn with_backend(config: Config, backend: Backend) -> Result<Self, StartupError> {
        let audit =
            AuditLog::open(&config.server.audit_path).map_err(|source| StartupError::Audit {
                path: config.server.audit_path.display().to_string(),
                source,
            })?;
        let capacity = config.behavior.ring_capacity;
        let state = match &config.server.state_path {
            Some(p) => StateStore::open(p, capacity).map_err(StartupError::State)?,
            None => StateStore::in_memory(capacity),
        };
        let rng = match config.server.rng_seed {
            Some(seed) => ChaCha8Rng::seed_from_u64(seed),
            None => ChaCha8Rng::from_os_rng(),
        };
        Ok(Self {
            policy: RwLock::new(Arc::new(config.policy.clone())),
            principals: config
                .principals
                .iter()
                .map(|p| (p.id.clone(), p.clone()))
                .collect(),
            state,
            audit,
            backend,
            rng: Mutex::new(rng),
            state_errors: AtomicU64::new(0),
            config,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    /// Conditions worth surfacing on the health endpoint.
    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .backend
            .warning()
            .map(str::to_string)
            .into_iter()
            .collect();
        let audit_errors = self.audit.error_count();
        if audit_errors > 0 {
            out.push(format!("{audit_errors} audit writes failed"));
        }
        let state_errors = self.state_errors.load(Ordering::Relaxed);
        if state_errors > 0 {
            out.push(format!("{state_errors} state checkpoints failed"));
        }
        out
    }

    pub fn policy(&self) -> Arc<Policy> {
        self.policy
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .clone()
    }

    pub fn principal(&self, id: &str) -> Option<&Principal> {
        self.principals.get(id)
    }

    pub fn principal_for_key(&self, key: &str) -> Option<&str> {
        self.config.auth.api_keys.get(key).map(String::as_str)
    }

    pub fn is_admin_key(&self, key: &str) -> bool {
        self.config.auth.admin_keys.contains(key)
    }

    pub fn behavior_state(&self, principal_id: &str) -> BehaviorState {
        self.state.get(principal_id)
    }

    /// Schema of user attributes: every attribute key any principal carries.
    pub fn attribute_schema(&self) -> AttributeSchema {
        AttributeSchema::with_user_attributes(
            self.principals
                .values()
                .flat_map(|p| p.attributes.keys().cloned()),
        )
    }

    /// Parses `source` and swaps it in. The old policy stays active on error.
    pub fn replace_policy(&self, source: &str) -> Result<Vec<Diagnostic>, PolicyError> {
        let policy = parse_policy(source)?;
        let diagnostics = validate_policy(&policy, &self.attribute_schema());
        *self.policy.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(policy);
        tracing::info!(diagnostics = diagnostics.len(), "policy replaced");
        Ok(diagnostics)
    }

    /// Records a refused request with no principal binding (bad or missing key).
    pub fn audit_unauthenticated(&self, reason: &str) {
        tracing::warn!(reason, "unauthenticated request");
        self.audit
            .append(&refusal("<unauthenticated>", 401, Vec::new(), 0));
    }

    /// Runs one completion through the whole pipeline.
    pub async fn complete(
        &self,
        principal_id: &str,
        req: CompletionRequest,
    ) -> Result<CompletionResponse, GatewayError> {
        let started = Instant::now();
        let elapsed = || started.elapsed().as_millis() as u64;

        let Some(principal) = self.principals.get(principal_id) else {
            self.audit
                .append(&refusal(principal_id, 401, Vec::new(), elapsed()));
            return Err(GatewayError::Unauthorized(format!(
                "unknown principal `{principal_id}`"
            )));
        };
        if let Some(claimed) = &req.principal_id {
            if claimed != principal_id {
                self.audit
                    .append(&refusal(principal_id, 401, Vec::new(), elapsed()));
                return Err(GatewayError::Unauthorized(
                    "principal_id does not match the API key".into(),
                ));
            }
        }
        if req.purpose.trim().is_empty() {
            return Err(GatewayError::BadRequest("purpose must be nonempty".into()));
        }

        let ctx = RequestContext {
            purpose: req.purpose.clone(),
            network_zone: req.context.network_zone,
            device_posture: req.context.device_posture,
            auth_strength: req.context.auth_strength,
            timestamp: Utc::now(),
        };

        let policy = self.policy();
        let decision = evaluate(
            &policy,
            principal,
            &ctx,
            &completion_resource(&req.purpose),
            COMPLETION_ACTION,
        );
        if decision.effect == Effect::Deny {
            self.audit.append(&refusal(
                principal_id,
                403,
                decision.matched_rule_ids.clone(),
                elapsed(),
            ));
            self.record_behavior(BehaviorEvent::new(
                principal_id,
                ActionKind::Violation,
                false,
            ));
            return Err(GatewayError::Forbidden(decision.matched_rule_ids));
        }

        let (score, anomalous) = self.score(principal, &ctx)?;

        let prompt_counts = self
            .config
            .server
            .scan_prompts
            .then(|| self.config.sensitivity.analyze(&req.prompt).counts);

        let backend_id = self.backend.id();
        let raw = match self.backend.generate(&req.prompt).await {
            Ok(text) => text,
            Err(e) => {
                tracing::warn!(error = %e, "backend failure");
                let mut rec = refusal(
                    principal_id,
                    502,
                    decision.matched_rule_ids.clone(),
                    elapsed(),
                );
                rec.effect = Effect::Permit;
                rec.tier = Some(score.tier.get());
                rec.raw_score = Some(score.raw);
                rec.anomaly_flag = anomalous;
                rec.backend_id = Some(backend_id);
                rec.prompt_entity_counts = prompt_counts;
                self.audit.append(&rec);
                return Err(GatewayError::Backend(e));
            }
        };

        let engine = &self.config.sensitivity;
        let report = engine.analyze(&raw);
        let mut action = decide_action(&self.config.disclosure, score.tier, report.level);
        if decision
            .max_disclosable_level()
            .is_some_and(|cap| report.level > cap)
        {
            action = Action::Deny;
        }
        let mut out = self.apply(action, &raw, &report, score.tier);
        if action == Action::Summarize && self.config.abstractive_summary {
            if let Some(text) = self.abstractive(&raw).await {
                out.text = text;
            } else {
                out.notes
                    .push("abstractive summary unavailable; used extractive filter".into());
            }
        }

        let request_id = new_request_id();
        self.audit.append(&AuditRecord {
            request_id: request_id.clone(),
            timestamp: Utc::now(),
            principal_id: principal_id.to_string(),
            effect: Effect::Permit,
            status: 200,
            tier: Some(score.tier.get()),
            raw_score: Some(score.raw),
            level: Some(report.level),
            action_set: out.action_set.clone(),
            entity_type_counts: report.counts.clone(),
            output_hash: Some(sha256_hex(&raw)),
            anomaly_flag: anomalous,
            backend_id: Some(backend_id),
            latency_ms: elapsed(),
            matched_rule_ids: decision.matched_rule_ids,
            prompt_entity_counts: prompt_counts,
        });

        let kind = if report.level >= SensitivityLevel::Confidential {
            ActionKind::SensitiveAccess
        } else {
            ActionKind::Query
        };
        self.record_behavior(BehaviorEvent::new(principal_id, kind, true));

        Ok(CompletionResponse {
            request_id,
            text: out.text,
            tier: score.tier.get(),
            raw_score: score.raw,
            level: report.level,
            action: out.action,
            action_set: out.action_set,
            epsilon_spent: out.epsilon_spent,
            anomaly_flag: anomalous,
        })
    }

    /// The trust score and anomaly flag a request would get right now.
    pub fn preview_trust(
        &self,
        principal_id: &str,
        ctx: &RequestContext,
    ) -> Result<(TrustScore, bool), GatewayError> {
        let principal = self.principals.get(principal_id).ok_or_else(|| {
            GatewayError::Unauthorized(format!("unknown principal `{principal_id}`"))
        })?;
        self.score(principal, ctx)
    }

    fn score(
        &self,
        principal: &Principal,
        ctx: &RequestContext,
    ) -> Result<(TrustScore, bool), GatewayError> {
        let state = self.state.get(&principal.id);
        let recent = state.recent();
        let b = &self.config.behavior;
        let anomalous = !recent.is_empty()
            && flag_anomaly(&b.hmm, &recent, b.anomaly_threshold)
                .map_err(|e| GatewayError::Internal(e.to_string()))?
                .anomalous;
        // An anomalous recent history zeroes the behavior component.
        let behavior = if anomalous { 0.0 } else { state.score() };
        let score = self
            .config
            .trust
            .score(principal, ctx, behavior)
            .map_err(|e| GatewayError::Internal(e.to_string()))?;
        Ok((score, anomalous))
    }

    fn apply(
        &self,
        action: Action,
        raw: &str,
        report: &crate::sensitivity::SensitivityReport,
        tier: crate::trust::Tier,
    ) -> ControlledOutput {
        let mut rng = self.rng.lock().unwrap_or_else(|p| p.into_inner());
        apply_action(
            action,
            raw,
            report,
            tier,
            &self.config.disclosure,
            &mut *rng,
        )
    }

    // Asks the backend for a summary and accepts it only if it is clean.
    async fn abstractive(&self, raw: &str) -> Option<String> {
        let summary = self
            .backend
            .generate(&format!("{ABSTRACTIVE_PROMPT}{raw}"))
            .await
            .ok()?;
        let report = self.config.sensitivity.analyze(&summary);
        (report.level == SensitivityLevel::Public).then_some(summary)
    }

    fn record_behavior(&self, event: BehaviorEvent) {
        self.state
            .record(&event, self.config.behavior.violation_weight);
        if let Err(e) = self.state.checkpoint() {
            self.state_errors.fetch_add(1, Ordering::Relaxed);
            tracing::error!(error = %e, "state checkpoint failed");
        }
    }
}

fn refusal(principal_id: &str, status: u16, matched: Vec<String>, latency_ms: u64) -> AuditRecord {
    AuditRecord {
        request_id: new_request_id(),
        timestamp: Utc::now(),
        principal_id: principal_id.to_string(),
        effect: Effect::Deny,
        status,
        tier: None,
        raw_score: None,
        level: None,
        action_set: if status == 403 {
            vec![Action::Deny]
        } else {
            Vec::new()
        },
        entity_type_counts: BTreeMap::new(),
        output_hash: None,
        anomaly_flag: false,
        backend_id: None,
        latency_ms,
        matched_rule_ids: matched,
        prompt_entity_counts: None,
    }
}
