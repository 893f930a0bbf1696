//! Shared test helpers: independent oracles and seeded generators.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trustgate::gateway::{load_config, Config};
use trustgate::policy::Effect;
use trustgate::trust::{AuthStrength, DevicePosture, NetworkZone, Principal, RequestContext};

pub const VARS: [&str; 3] = ["a", "b", "c"];

pub fn shipped_config_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("config/default.toml")
}

/// The shipped config with audit and state files moved into `dir`.
pub fn shipped_config_in(dir: &Path) -> Config {
    let mut config = load_config(shipped_config_path()).expect("shipped config loads");
    config.server.audit_path = dir.join("audit.jsonl");
    config.server.state_path = Some(dir.join("state.json"));
    config.server.rng_seed = Some(1);
    config
}

/// A boolean condition over the three variables, kept as a tree so the
/// oracle never touches the library's parser or evaluator.
#[derive(Debug, Clone)]
pub enum BoolExpr {
    Var(usize),
    Is(usize, bool),
    IsNot(usize, bool),
    Const(bool),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn eval(&self, env: [bool; 3]) -> bool {
        match self {
            BoolExpr::Var(i) => env[*i],
            BoolExpr::Is(i, v) => env[*i] == *v,
            BoolExpr::IsNot(i, v) => env[*i] != *v,
            BoolExpr::Const(b) => *b,
            BoolExpr::Not(e) => !e.eval(env),
            BoolExpr::And(a, b) => a.eval(env) && b.eval(env),
            BoolExpr::Or(a, b) => a.eval(env) || b.eval(env),
        }
    }

    /// Source text. With `minimal` set, parentheses are emitted only where
    /// precedence (not > and > or) requires them.
    pub fn source(&self, minimal: bool) -> String {
        self.render(minimal, 0)
    }

    // prec: 0 = or context, 1 = and context, 2 = operand of not
    fn render(&self, minimal: bool, prec: u8) -> String {
        let wrap = |s: String, needed: bool| {
            if needed || !minimal {
                format!("({s})")
            } else {
                s
            }
        };
        match self {
            BoolExpr::Var(i) => VARS[*i].to_string(),
            // Comparisons bind tighter than `not`, so never need parentheses.
            BoolExpr::Is(i, v) => wrap(format!("{} == {v}", VARS[*i]), false),
            BoolExpr::IsNot(i, v) => wrap(format!("{} != {v}", VARS[*i]), false),
            BoolExpr::Const(b) => b.to_string(),
            BoolExpr::Not(e) => wrap(format!("not {}", e.render(minimal, 2)), false),
            BoolExpr::And(a, b) => wrap(
                format!("{} and {}", a.render(minimal, 1), b.render(minimal, 2)),
                prec >= 2,
            ),
            BoolExpr::Or(a, b) => wrap(
                format!("{} or {}", a.render(minimal, 0), b.render(minimal, 1)),
                prec >= 1,
            ),
        }
    }
}

pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> BoolExpr {
    if depth == 0 || rng.random_bool(0.3) {
        let v = rng.random_range(0..3);
        return match rng.random_range(0..7) {
            0 | 1 => BoolExpr::Var(v),
            2 | 3 => BoolExpr::Is(v, rng.random()),
            4 | 5 => BoolExpr::IsNot(v, rng.random()),
            _ => BoolExpr::Const(rng.random()),
        };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, depth - 1));
    match rng.random_range(0..3) {
        0 => BoolExpr::Not(sub(rng)),
        1 => BoolExpr::And(sub(rng), sub(rng)),
        _ => BoolExpr::Or(sub(rng), sub(rng)),
    }
}

#[derive(Debug, Clone)]
pub struct OracleRule {
    pub id: String,
    pub effect: Effect,
    pub condition: Option<BoolExpr>,
    pub priority: i64,
}

pub fn random_rules(seed: u64) -> Vec<OracleRule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    (0..n)
        .map(|i| OracleRule {
            id: format!("r{i}"),
            effect: if rng.random_bool(0.4) {
                Effect::Deny
            } else {
                Effect::Permit
            },
            condition: rng.random_bool(0.9).then(|| random_expr(&mut rng, 3)),
            priority: if rng.random_bool(0.3) {
                rng.random_range(0..3)
            } else {
                0
            },
        })
        .collect()
}

pub fn rules_source(rules: &[OracleRule], minimal: bool) -> String {
    rules
        .iter()
        .map(|r| {
            let mut s = format!(
                "{} {} on \"**\"",
                if r.effect == Effect::Deny {
                    "deny"
                } else {
                    "permit"
                },
                r.id
            );
            if let Some(c) = &r.condition {
                s.push_str(&format!(" when {}", c.source(minimal)));
            }
            if r.priority != 0 {
                s.push_str(&format!(" priority {}", r.priority));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Deny-overrides with default deny, computed directly from the rule list:
/// all matching denies (in evaluation order) or the first matching permit.
pub fn oracle_decide(rules: &[OracleRule], env: [bool; 3]) -> (Effect, Vec<String>) {
    let mut order: Vec<&OracleRule> = rules.iter().collect();
    order.sort_by_key(|r| std::cmp::Reverse(r.priority));
    let holds = |r: &OracleRule| r.condition.as_ref().is_none_or(|c| c.eval(env));
    let denies: Vec<String> = order
        .iter()
        .filter(|r| r.effect == Effect::Deny && holds(r))
        .map(|r| r.id.clone())
        .collect();
    if !denies.is_empty() {
        return (Effect::Deny, denies);
    }
    match order
        .iter()
        .find(|r| r.effect == Effect::Permit && holds(r))
    {
        Some(r) => (Effect::Permit, vec![r.id.clone()]),
        None => (Effect::Deny, Vec::new()),
    }
}

pub fn principal_for(env: [bool; 3]) -> Principal {
    VARS.iter().zip(env).fold(Principal::new("p"), |p, (k, v)| {
        p.with_attribute(*k, v.to_string())
    })
}

pub fn all_assignments() -> impl Iterator<Item = [bool; 3]> {
    (0..8u8).map(|m| [m & 1 != 0, m & 2 != 0, m & 4 != 0])
}

pub fn plain_ctx() -> RequestContext {
    RequestContext::new(
        "ops",
        NetworkZone::Trusted,
        DevicePosture::Managed,
        AuthStrength::Mfa,
    )
}

/// Luhn check written digit by digit from the definition, independent of the library.
pub fn luhn_oracle(s: &str) -> bool {
    let digits: Vec<u32> = s.chars().filter_map(|c| c.to_digit(10)).collect();
    if digits.len() != s.chars().filter(|c| !matches!(c, ' ' | '-')).count() {
        return false;
    }
    if !(12..=19).contains(&digits.len()) {
        return false;
    }
    let mut total = 0;
    for (pos_from_right, d) in digits.iter().rev().enumerate() {
        if pos_from_right % 2 == 1 {
            let doubled = d * 2;
            total += doubled / 10 + doubled % 10;
        } else {
            total += d;
        }
    }
    total % 10 == 0
}

pub const FIXTURE_PROMPTS: [&str; 6] = [
    "What are the clinic hours?",
    "Summarize the intake note for patient 4471.",
    "Who handles claim disputes?",
    "Show the card on file for account 88.",
    "What is the outstanding balance for MRN-0048213?",
    "Draft a reminder for Dr. Alice Moreno.",
];

pub struct ConcurrentRun {
    pub lines: Vec<String>,
    pub malformed: usize,
    pub statuses: std::collections::BTreeMap<u16, usize>,
    /// Detector spans found anywhere in the raw audit file.
    pub spans_in_log: usize,
}

/// Fires `n` completions at one gateway from a multi-threaded runtime, mixing
/// principals, purposes and contexts, then re-reads the audit log.
pub fn concurrent_requests(dir: &Path, n: usize) -> ConcurrentRun {
    use std::sync::Arc;
    use trustgate::gateway::{CompletionRequest, Gateway};

    let gateway = Arc::new(Gateway::new(shipped_config_in(dir)).unwrap());
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(8)
        .enable_all()
        .build()
        .unwrap();
    let principals = ["amy", "bob", "gus", "root"];
    let purposes = [
        "treatment",
        "research",
        "operations",
        "billing",
        "marketing",
    ];
    let nets = [NetworkZone::Trusted, NetworkZone::Vpn, NetworkZone::Public];
    let devs = [
        DevicePosture::Managed,
        DevicePosture::Unmanaged,
        DevicePosture::Unknown,
    ];
    let auths = [
        AuthStrength::Mfa,
        AuthStrength::Password,
        AuthStrength::Anonymous,
    ];
    let mut statuses = std::collections::BTreeMap::new();
    runtime.block_on(async {
        let mut handles = Vec::with_capacity(n);
        for i in 0..n {
            let gw = gateway.clone();
            let req = CompletionRequest::new(
                purposes[i % purposes.len()],
                FIXTURE_PROMPTS[i % FIXTURE_PROMPTS.len()],
                nets[i / 7 % 3],
                devs[i / 11 % 3],
                auths[i / 13 % 3],
            );
            let who = principals[i % principals.len()];
            handles.push(tokio::spawn(async move { gw.complete(who, req).await }));
        }
        for h in handles {
            let status = match h.await.unwrap() {
                Ok(_) => 200,
                Err(e) => e.status(),
            };
            *statuses.entry(status).or_insert(0) += 1;
        }
    });
    let path = dir.join("audit.jsonl");
    let raw = std::fs::read_to_string(&path).unwrap();
    let scan = trustgate::gateway::read_audit_log(&path).unwrap();
    let engine = trustgate::sensitivity::SensitivityEngine::with_defaults();
    ConcurrentRun {
        lines: raw.lines().map(str::to_string).collect(),
        malformed: scan.malformed,
        statuses,
        spans_in_log: engine.detect(&raw).len(),
    }
}

/// Writes `toml` as a config file next to copies of the shipped policy and fixture.
pub fn write_config_variant(dir: &Path, toml: &str) -> PathBuf {
    let shipped = shipped_config_path();
    let src = shipped.parent().unwrap();
    std::fs::create_dir_all(dir.join("fixtures")).unwrap();
    std::fs::copy(src.join("default.policy"), dir.join("default.policy")).unwrap();
    std::fs::copy(
        src.join("fixtures/mock.json"),
        dir.join("fixtures/mock.json"),
    )
    .unwrap();
    let path = dir.join("config.toml");
    std::fs::write(&path, toml).unwrap();
    path
}

/// Single-edit corruptions of the shipped config and the key each must be reported under.
pub fn broken_config_cases() -> Vec<(&'static str, String, &'static str)> {
    let base = std::fs::read_to_string(shipped_config_path()).unwrap();
    let edit = |from: &str, to: &str| {
        assert!(base.contains(from), "shipped config lacks {from:?}");
        base.replacen(from, to, 1)
    };
    vec![
        ("weights sum", edit("role = 0.4", "role = 0.5"), "trust.weights"),
        ("negative weight", edit("behavior = 0.2", "behavior = -0.2"), "trust.weights"),
        ("thresholds order", edit("[0.30, 0.60, 0.85]", "[0.60, 0.30, 0.85]"), "trust.thresholds"),
        ("role weight range", edit("guest = 0.1", "guest = 1.5"), "trust.role_weights.guest"),
        (
            "matrix monotonicity",
            edit(r#"secret = ["deny", "deny", "redact", "pass"]"#, r#"secret = ["deny", "deny", "pass", "redact"]"#),
            "disclosure.matrix.secret[3]",
        ),
        (
            "matrix action name",
            edit(r#"secret = ["deny", "deny", "redact", "pass"]"#, r#"secret = ["deny", "deny", "redact", "shred"]"#),
            "disclosure.matrix.secret[3]",
        ),
        ("epsilons", edit("[0.5, 1.0, 2.0, 4.0]", "[0.5, 1.0, 0.0, 4.0]"), "disclosure.epsilons"),
        (
            "recognizer pattern",
            format!(
                "{base}\n[[sensitivity.recognizers]]\nid = \"emp\"\nentity_type = \"US_SSN\"\npattern = \"EMP-(\\\\d{{6}}\"\nbase_confidence = 0.8\n"
            ),
            "sensitivity.recognizers[0].pattern",
        ),
        ("violation weight", edit("violation_weight = 3.0", "violation_weight = 0.5"), "behavior.violation_weight"),
        ("policy path", edit(r#"path = "default.policy""#, r#"path = "missing.policy""#), "policy.path"),
        (
            "policy source",
            edit(r#"path = "default.policy""#, r#"source = "permit broken when role ==""#),
            "policy.source",
        ),
        ("api key principal", edit(r#""key-gus" = "gus""#, r#""key-gus" = "gustav""#), "auth.api_keys"),
        ("backend url", edit("kind = \"mock\"\nfixture = \"fixtures/mock.json\"", "kind = \"remote\"\nbase_url = \"not a url\""),
            "backend.base_url"),
    ]
}
