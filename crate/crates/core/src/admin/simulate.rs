use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::corpus::synthetic_corpus;
use super::SCHEMA_VERSION;
use crate::disclosure::Action;
use crate::gateway::{
    load_fixture, Backend, BackendConfig, CompletionRequest, Config, Gateway, GatewayError,
};
use crate::policy::parse_policy;
use crate::sensitivity::SensitivityLevel;
use crate::trust::{AuthStrength, DevicePosture, NetworkZone, Principal, RequestContext};

/// Role weights given to the synthetic principal of each target tier.
const SIM_ROLE_WEIGHTS: [f64; 4] = [0.0, 0.35, 0.7, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSpec {
    pub sessions: usize,
    pub requests_per_session: usize,
    pub seed: u64,
    /// Proportion of sessions targeting each tier 0..3.
    pub tier_mix: [f64; 4],
    /// Size of the seeded synthetic document corpus added to the prompt set.
    pub corpus_size: usize,
    /// Evaluate the configured policy instead of permitting everything.
    pub enforce_policy: bool,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            sessions: 20,
            requests_per_session: 10,
            seed: 0,
            tier_mix: [0.25; 4],
            corpus_size: 60,
            enforce_policy: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("tier mix must be nonnegative and sum to 1 (got {0:?})")]
    BadMix([f64; 4]),
    #[error("sessions and requests per session must be positive")]
    Empty,
    #[error("cannot start the in-process gateway: {0}")]
    Startup(String),
    #[error("request failed: {0}")]
    Request(#[from] GatewayError),
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let sum: f64 = self.tier_mix.iter().sum();
        if self.tier_mix.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(SimulationError::BadMix(self.tier_mix));
        }
        if self.sessions == 0 || self.requests_per_session == 0 {
            return Err(SimulationError::Empty);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TierMetrics {
    pub requests: usize,
    pub actions: BTreeMap<Action, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationMetrics {
    pub schema: u32,
    pub seed: u64,
    pub sessions: usize,
    pub requests: usize,
    /// Keyed by the tier the request was actually scored at.
    pub per_tier: BTreeMap<u8, TierMetrics>,
    /// Requests whose scored tier differed from the session's target.
    pub off_target: usize,
    pub policy_denials: usize,
    pub anomalies: usize,
    /// Spans of level confidential or above found verbatim in an output the
    /// disclosure matrix did not pass through unchanged.
    pub leakage: usize,
}

impl SimulationMetrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "seed {} | {} sessions | {} requests",
            self.seed, self.sessions, self.requests
        );
        let _ = write!(out, "{:<6}{:>9}", "tier", "requests");
        for a in Action::ALL {
            let _ = write!(out, "{:>11}", a.as_str());
        }
        out.push('\n');
        for (tier, m) in &self.per_tier {
            let _ = write!(out, "{tier:<6}{:>9}", m.requests);
            for a in Action::ALL {
                let _ = write!(out, "{:>11}", m.actions.get(&a).unwrap_or(&0));
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "off-target {} | policy denials {} | anomalies {} | leakage {}",
            self.off_target, self.policy_denials, self.anomalies, self.leakage
        );
        out
    }
}

fn contexts() -> Vec<(NetworkZone, DevicePosture, AuthStrength)> {
    let mut out = Vec::new();
    for n in [NetworkZone::Trusted, NetworkZone::Vpn, NetworkZone::Public] {
        for d in [
            DevicePosture::Managed,
            DevicePosture::Unmanaged,
            DevicePosture::Unknown,
        ] {
            for a in [
                AuthStrength::Mfa,
                AuthStrength::Password,
                AuthStrength::Anonymous,
            ] {
                out.push((n, d, a));
            }
        }
    }
    out
}

/// Drives the in-process pipeline with seeded synthetic sessions.
///
/// The run uses a mock backend serving the seeded corpus (plus the
/// configured fixture, if any), an in-memory state store, a throwaway audit
/// log and the noise generator seeded from `spec.seed`, so a fixed seed
/// reproduces the metrics exactly.
pub fn cmd_simulate(
    spec: &SimulationSpec,
    base: &Config,
) -> Result<SimulationMetrics, SimulationError> {
    spec.validate()?;
    let workdir = tempfile::tempdir().map_err(|e| SimulationError::Startup(e.to_string()))?;

    let mut config = base.clone();
    config.server.audit_path = workdir.path().join("audit.jsonl");
    config.server.state_path = None;
    config.server.rng_seed = Some(spec.seed);
    config.server.scan_prompts = false;
    config.abstractive_summary = false;
    if !spec.enforce_policy {
        config.policy = parse_policy("permit simulation").expect("static policy parses");
    }
    for (t, w) in SIM_ROLE_WEIGHTS.iter().enumerate() {
        config.trust.role_weights.insert(format!("sim_tier{t}"), *w);
    }

    let mut documents: BTreeMap<String, String> = synthetic_corpus(spec.seed, spec.corpus_size)
        .into_iter()
        .enumerate()
        .map(|(i, d)| (format!("sim-doc-{i:04}"), d))
        .collect();
    if let BackendConfig::Mock {
        fixture: Some(path),
        ..
    } = &config.backend
    {
        if let Ok(extra) = load_fixture(path) {
            documents.extend(extra);
        }
    }
    let prompts: Vec<String> = documents.keys().cloned().collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mix =
        WeightedIndex::new(spec.tier_mix).map_err(|_| SimulationError::BadMix(spec.tier_mix))?;
    let targets: Vec<usize> = (0..spec.sessions).map(|_| mix.sample(&mut rng)).collect();
    config.principals = targets
        .iter()
        .enumerate()
        .map(|(i, t)| Principal::new(format!("sim-{i:04}")).with_role(format!("sim_tier{t}")))
        .collect();

    let engine = config.sensitivity.clone();
    let gateway = Gateway::with_backend(config, Backend::mock(documents.clone()))
        .map_err(|e| SimulationError::Startup(e.to_string()))?;
    let runtime = tokio::runtime::Builder::new_current_thread()
        .build()
        .map_err(|e| SimulationError::Startup(e.to_string()))?;

    let purposes: Vec<String> = {
        let mut p: Vec<String> = gateway
            .config()
            .trust
            .purpose_scores
            .keys()
            .cloned()
            .collect();
        p.push("simulation".into());
        p
    };
    let contexts = contexts();

    let mut metrics = SimulationMetrics {
        schema: SCHEMA_VERSION,
        seed: spec.seed,
        sessions: spec.sessions,
        requests: 0,
        per_tier: BTreeMap::new(),
        off_target: 0,
        policy_denials: 0,
        anomalies: 0,
        leakage: 0,
    };

    for (i, target) in targets.iter().enumerate() {
        let principal = format!("sim-{i:04}");
        for _ in 0..spec.requests_per_session {
            let prompt = prompts
                .choose(&mut rng)
                .expect("nonempty prompt set")
                .clone();
            let (purpose, ctx) = pick_context(&gateway, &principal, *target, &purposes, &contexts)?;
            let req = CompletionRequest::new(purpose, prompt.clone(), ctx.0, ctx.1, ctx.2);
            metrics.requests += 1;
            let resp = match runtime.block_on(gateway.complete(&principal, req)) {
                Ok(r) => r,
                Err(GatewayError::Forbidden(_)) => {
                    metrics.policy_denials += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            if resp.tier as usize != *target {
                metrics.off_target += 1;
            }
            metrics.anomalies += resp.anomaly_flag as usize;
            let m = metrics.per_tier.entry(resp.tier).or_default();
            m.requests += 1;
            for a in &resp.action_set {
                *m.actions.entry(*a).or_insert(0) += 1;
            }
            if resp.action != Action::Pass {
                let raw = &documents[&prompt];
                let report = engine.analyze(raw);
                metrics.leakage += report
                    .spans
                    .iter()
                    .filter(|s| report.level_of(&s.entity_type) >= SensitivityLevel::Confidential)
                    .filter(|s| resp.text.contains(s.text(raw)))
                    .count();
            }
        }
    }
    Ok(metrics)
}

type Ctx = (NetworkZone, DevicePosture, AuthStrength);

// First (purpose, context) in a fixed order that scores at `target`, else the closest.
fn pick_context(
    gateway: &Gateway,
    principal: &str,
    target: usize,
    purposes: &[String],
    contexts: &[Ctx],
) -> Result<(String, Ctx), SimulationError> {
    let mut best: Option<(usize, String, Ctx)> = None;
    for purpose in purposes {
        for ctx in contexts {
            let rc = RequestContext::new(purpose.clone(), ctx.0, ctx.1, ctx.2);
            let (score, _) = gateway.preview_trust(principal, &rc)?;
            let distance = score.tier.index().abs_diff(target);
            if distance == 0 {
                return Ok((purpose.clone(), *ctx));
            }
            if best.as_ref().is_none_or(|(d, _, _)| distance < *d) {
                best = Some((distance, purpose.clone(), *ctx));
            }
        }
    }
    let (_, purpose, ctx) = best.expect("at least one context");
    Ok((purpose, ctx))
}
