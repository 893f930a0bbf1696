use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{CmpOp, Effect, Expr, Literal, Operand, Policy};
use crate::sensitivity::SensitivityLevel;
use crate::trust::{Principal, RequestContext};

/// Obligation key carrying the highest disclosable sensitivity level.
pub const MAX_DISCLOSABLE_LEVEL: &str = "max_disclosable_level";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub effect: Effect,
    /// Every matching deny rule for a deny; the first matching permit for a permit.
    pub matched_rule_ids: Vec<String>,
    pub obligations: BTreeMap<String, String>,
    /// Attribute references that could not be resolved during evaluation.
    pub unresolved: Vec<String>,
}

impl Decision {
    pub fn is_permit(&self) -> bool {
        self.effect == Effect::Permit
    }

    pub fn max_disclosable_level(&self) -> Option<SensitivityLevel> {
        self.obligations
            .get(MAX_DISCLOSABLE_LEVEL)
            .and_then(|l| l.parse().ok())
    }
}

/// Attribute view of one request.
pub struct Request<'a> {
    pub principal: &'a Principal,
    pub ctx: &'a RequestContext,
    pub resource: &'a str,
    pub action: &'a str,
}

enum Resolved<'a> {
    One(String),
    Roles(Vec<&'a str>),
}

impl<'a> Request<'a> {
    /// Resolution order: `role`, `resource`, `action`, `principal.id`,
    /// `context.*`, then `user.<name>` or a bare name against principal attributes.
    fn resolve(&self, name: &str) -> Option<Resolved<'a>> {
        let one = |s: &str| Some(Resolved::One(s.to_string()));
        match name {
            "role" => Some(Resolved::Roles(
                self.principal.roles.iter().map(String::as_str).collect(),
            )),
            "resource" => one(self.resource),
            "action" => one(self.action),
            "principal.id" => one(&self.principal.id),
            "context.purpose" => one(&self.ctx.purpose),
            "context.network_zone" => one(self.ctx.network_zone.as_str()),
            "context.device_posture" => one(self.ctx.device_posture.as_str()),
            "context.auth_strength" => one(self.ctx.auth_strength.as_str()),
            "context.hour" => Some(Resolved::One(
                chrono::Timelike::hour(&self.ctx.timestamp).to_string(),
            )),
            _ => {
                let key = name.strip_prefix("user.").unwrap_or(name);
                if key.contains('.') {
                    return None;
                }
                self.principal
                    .attributes
                    .get(key)
                    .map(|v| Resolved::One(v.clone()))
            }
        }
    }
}

/// Built-in attribute names understood by the evaluator.
pub const BUILTIN_ATTRIBUTES: &[&str] = &[
    "role",
    "resource",
    "action",
    "principal.id",
    "context.purpose",
    "context.network_zone",
    "context.device_posture",
    "context.auth_strength",
    "context.hour",
];

fn literal_matches(value: &str, lit: &Literal) -> bool {
    match lit {
        Literal::Str(s) => value == s,
        Literal::Num(n) => value.trim().parse::<f64>().is_ok_and(|v| v == *n),
        Literal::Bool(b) => value
            .trim()
            .eq_ignore_ascii_case(if *b { "true" } else { "false" }),
        Literal::List(_) => false,
    }
}

fn number(value: &str) -> Option<f64> {
    value.trim().parse().ok()
}

struct Evaluator<'r, 'a> {
    req: &'r Request<'a>,
    unresolved: Vec<String>,
}

// A side of a comparison after resolution: a literal, or the value(s) of an attribute.
enum Side<'l, 'a> {
    Lit(&'l Literal),
    Values(Vec<String>),
    Roles(Vec<&'a str>),
}

impl<'r, 'a> Evaluator<'r, 'a> {
    fn side<'l>(&mut self, o: &'l Operand) -> Option<Side<'l, 'a>> {
        match o {
            Operand::Lit(l) => Some(Side::Lit(l)),
            Operand::Attr(name) => match self.req.resolve(name) {
                Some(Resolved::One(v)) => Some(Side::Values(vec![v])),
                Some(Resolved::Roles(r)) => Some(Side::Roles(r)),
                None => {
                    if !self.unresolved.contains(name) {
                        self.unresolved.push(name.clone());
                    }
                    None
                }
            },
        }
    }

    fn eval(&mut self, e: &Expr) -> bool {
        match e {
            Expr::Const(b) => *b,
            Expr::Attr(name) => match self.side(&Operand::Attr(name.clone())) {
                Some(Side::Values(v)) => v.iter().any(|x| literal_matches(x, &Literal::Bool(true))),
                _ => false,
            },
            Expr::Not(inner) => !self.eval(inner),
            Expr::And(a, b) => {
                let a = self.eval(a);
                let b = self.eval(b);
                a && b
            }
            Expr::Or(a, b) => {
                let a = self.eval(a);
                let b = self.eval(b);
                a || b
            }
            Expr::Cmp { lhs, op, rhs } => {
                let (Some(l), Some(r)) = (self.side(lhs), self.side(rhs)) else {
                    return false;
                };
                compare(l, *op, r)
            }
        }
    }
}

fn values(side: &Side) -> Vec<String> {
    match side {
        Side::Lit(Literal::Str(s)) => vec![s.clone()],
        Side::Lit(l) => vec![l.to_string()],
        Side::Values(v) => v.clone(),
        Side::Roles(r) => r.iter().map(|s| s.to_string()).collect(),
    }
}

fn compare(l: Side, op: CmpOp, r: Side) -> bool {
    match op {
        CmpOp::Eq => equal(&l, &r),
        CmpOp::Ne => !equal(&l, &r),
        CmpOp::In => {
            let Side::Lit(Literal::List(items)) = r else {
                return false;
            };
            match &l {
                Side::Lit(lit) => items.contains(lit),
                _ => values(&l)
                    .iter()
                    .any(|v| items.iter().any(|i| literal_matches(v, i))),
            }
        }
        CmpOp::Ge | CmpOp::Le => {
            let num = |s: &Side| -> Option<f64> {
                match s {
                    Side::Lit(Literal::Num(n)) => Some(*n),
                    Side::Values(v) if v.len() == 1 => number(&v[0]),
                    _ => None,
                }
            };
            match (num(&l), num(&r)) {
                (Some(a), Some(b)) if op == CmpOp::Ge => a >= b,
                (Some(a), Some(b)) => a <= b,
                _ => false,
            }
        }
    }
}

fn equal(l: &Side, r: &Side) -> bool {
    match (l, r) {
        (Side::Lit(a), Side::Lit(b)) => a == b,
        (Side::Lit(lit), other) | (other, Side::Lit(lit)) => {
            values(other).iter().any(|v| literal_matches(v, lit))
        }
        (a, b) => {
            let bv = values(b);
            values(a).iter().any(|v| bv.contains(v))
        }
    }
}

/// Deny-overrides evaluation with default deny.
pub fn evaluate(
    policy: &Policy,
    principal: &Principal,
    ctx: &RequestContext,
    resource: &str,
    action: &str,
) -> Decision {
    let req = Request {
        principal,
        ctx,
        resource,
        action,
    };
    let mut ev = Evaluator {
        req: &req,
        unresolved: Vec::new(),
    };
    let mut denies = Vec::new();
    let mut first_permit = None;
    for rule in policy.ordered_rules() {
        if !rule.applies_to(resource, action) {
            continue;
        }
        let holds = rule.condition.as_ref().is_none_or(|c| ev.eval(c));
        if !holds {
            continue;
        }
        match rule.effect {
            Effect::Deny => denies.push(rule.id.clone()),
            Effect::Permit if first_permit.is_none() => first_permit = Some(rule),
            Effect::Permit => {}
        }
    }
    let unresolved = ev.unresolved;
    if !denies.is_empty() {
        return Decision {
            effect: Effect::Deny,
            matched_rule_ids: denies,
            obligations: BTreeMap::new(),
            unresolved,
        };
    }
    match first_permit {
        Some(rule) => Decision {
            effect: Effect::Permit,
            matched_rule_ids: vec![rule.id.clone()],
            obligations: rule
                .cap
                .map(|c| (MAX_DISCLOSABLE_LEVEL.to_string(), c.to_string()))
                .into_iter()
                .collect(),
            unresolved,
        },
        None => Decision {
            effect: Effect::Deny,
            matched_rule_ids: Vec::new(),
            obligations: BTreeMap::new(),
            unresolved,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::parse_policy;
    use crate::trust::{AuthStrength, DevicePosture, NetworkZone};

    fn ctx() -> RequestContext {
        RequestContext::new(
            "treatment",
            NetworkZone::Vpn,
            DevicePosture::Managed,
            AuthStrength::Mfa,
        )
    }

    fn decide(src: &str, p: &Principal, resource: &str, action: &str) -> Decision {
        evaluate(&parse_policy(src).unwrap(), p, &ctx(), resource, action)
    }

    fn clinician() -> Principal {
        Principal::new("c1")
            .with_role("clinician")
            .with_attribute("dept", "icu")
            .with_attribute("clearance", "3")
            .with_attribute("flag", "true")
    }

    #[test]
    fn empty_policy_denies() {
        let d = decide("", &clinician(), "x", "y");
        assert_eq!(d.effect, Effect::Deny);
        assert!(d.matched_rule_ids.is_empty());
    }

    #[test]
    fn deny_overrides_permit() {
        let d = decide(
            "permit p; deny d1; deny d2 when role == \"clinician\"",
            &clinician(),
            "x",
            "y",
        );
        assert_eq!(d.effect, Effect::Deny);
        assert_eq!(d.matched_rule_ids, vec!["d1", "d2"]);
    }

    #[test]
    fn attribute_resolution() {
        let p = clinician();
        let permit = |src: &str| decide(src, &p, "records/7", "read").is_permit();
        assert!(permit(
            r#"permit r on "records/*":read when role == "clinician""#
        ));
        assert!(!permit(
            r#"permit r on "records/*":write when role == "clinician""#
        ));
        assert!(permit(r#"permit r when role in ["admin", "clinician"]"#));
        assert!(permit(r#"permit r when role != "admin""#));
        assert!(permit(
            r#"permit r when dept == "icu" and user.dept == "icu""#
        ));
        assert!(permit(r#"permit r when clearance >= 2 and clearance <= 3"#));
        assert!(!permit(r#"permit r when clearance >= 4"#));
        assert!(permit(r#"permit r when flag and flag == true"#));
        assert!(permit(
            r#"permit r when context.network_zone == "vpn" and context.auth_strength == "mfa""#
        ));
        assert!(permit(r#"permit r when context.purpose in ["treatment"]"#));
        assert!(permit(
            r#"permit r when resource == "records/7" and action == "read""#
        ));
        assert!(permit(r#"permit r when principal.id == "c1""#));
    }

    #[test]
    fn unresolved_comparisons_are_false() {
        let d = decide(r#"permit r when missing == "x""#, &clinician(), "a", "b");
        assert_eq!(d.effect, Effect::Deny);
        assert_eq!(d.unresolved, vec!["missing"]);
        // Negating an unresolved comparison flips it.
        let d = decide(
            r#"permit r when not (contxt.network == "vpn")"#,
            &clinician(),
            "a",
            "b",
        );
        assert!(d.is_permit());
        assert_eq!(d.unresolved, vec!["contxt.network"]);
        // Non-numeric attribute under an ordering comparison.
        assert!(!decide(r#"permit r when dept >= 1"#, &clinician(), "a", "b").is_permit());
    }

    #[test]
    fn first_permit_and_cap() {
        let d = decide(
            "permit low cap internal; permit high priority 10 cap secret",
            &clinician(),
            "a",
            "b",
        );
        assert_eq!(d.matched_rule_ids, vec!["high"]);
        assert_eq!(d.max_disclosable_level(), Some(SensitivityLevel::Secret));
    }
}
