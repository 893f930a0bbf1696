use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Effect, Policy, Rule};
use super::eval::BUILTIN_ATTRIBUTES;

/// Attribute names a policy may reference.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeSchema {
    /// Principal attributes, referenced as `name` or `user.name`.
    pub user_attributes: BTreeSet<String>,
}

impl AttributeSchema {
    pub fn with_user_attributes<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            user_attributes: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn knows(&self, name: &str) -> bool {
        if BUILTIN_ATTRIBUTES.contains(&name) {
            return true;
        }
        let key = name.strip_prefix("user.").unwrap_or(name);
        self.user_attributes.contains(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    UnreachableRule,
    UnknownAttribute,
    EmptyTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub rule_id: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::UnreachableRule => "unreachable rule",
            DiagnosticKind::UnknownAttribute => "unknown attribute",
            DiagnosticKind::EmptyTarget => "empty target",
        };
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        write!(f, "{kind} `{}`: {}", self.rule_id, self.message)
    }
}

// True when `shadow` applies to at least every request `rule` applies to.
fn covers(shadow: &Rule, rule: &Rule) -> bool {
    match (&shadow.target, &rule.target) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(s), Some(r)) => {
            s.resource.covers(&r.resource)
                && match (&s.action, &r.action) {
                    (None, _) => true,
                    (Some(a), Some(b)) => a == b,
                    (Some(_), None) => false,
                }
        }
    }
}

/// Static checks. Declared names in the policy extend `schema`.
pub fn validate_policy(policy: &Policy, schema: &AttributeSchema) -> Vec<Diagnostic> {
    let mut schema = schema.clone();
    schema
        .user_attributes
        .extend(policy.declared.iter().cloned());
    let mut out = Vec::new();
    let diag = |kind, rule: &Rule, message: String| Diagnostic {
        kind,
        rule_id: rule.id.clone(),
        line: rule.line,
        message,
    };

    let ordered = policy.ordered_rules();
    let blanket_denies: Vec<&Rule> = ordered
        .iter()
        .copied()
        .filter(|r| r.effect == Effect::Deny && r.condition.is_none())
        .collect();

    for (pos, rule) in ordered.iter().enumerate() {
        if rule.target.is_none() {
            out.push(diag(
                DiagnosticKind::EmptyTarget,
                rule,
                "rule has no `on` target and applies to every resource and action".into(),
            ));
        }

        // Permits lose to any covering unconditional deny; denies are only
        // redundant behind an earlier one.
        let shadow = blanket_denies.iter().find(|d| {
            d.id != rule.id
                && covers(d, rule)
                && (rule.effect == Effect::Permit
                    || ordered
                        .iter()
                        .position(|r| r.id == d.id)
                        .is_some_and(|p| p < pos))
        });
        if let Some(d) = shadow {
            out.push(diag(
                DiagnosticKind::UnreachableRule,
                rule,
                format!("shadowed by unconditional deny `{}`", d.id),
            ));
        }

        if let Some(cond) = &rule.condition {
            for name in cond.attributes() {
                if !schema.knows(name) {
                    out.push(diag(
                        DiagnosticKind::UnknownAttribute,
                        rule,
                        format!("`{name}` is not a declared attribute"),
                    ));
                }
            }
        }
    }
    out
}
