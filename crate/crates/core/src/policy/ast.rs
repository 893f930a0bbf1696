use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::glob::Glob;
use crate::sensitivity::SensitivityLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Permit,
    Deny,
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Effect::Permit => "permit",
            Effect::Deny => "deny",
        })
    }
}

/// A literal value in a condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Num(f64),
    Bool(bool),
    List(Vec<Literal>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LiteralKind {
    Str,
    Num,
    Bool,
    List,
}

impl Literal {
    pub(crate) fn kind(&self) -> LiteralKind {
        match self {
            Literal::Str(_) => LiteralKind::Str,
            Literal::Num(_) => LiteralKind::Num,
            Literal::Bool(_) => LiteralKind::Bool,
            Literal::List(_) => LiteralKind::List,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Literal::Num(n) => write!(f, "{n}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Attr(String),
    Lit(Literal),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Attr(name) => f.write_str(name),
            Operand::Lit(lit) => write!(f, "{lit}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    In,
    Ge,
    Le,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::In => "in",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
        })
    }
}

/// Boolean condition tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(bool),
    /// A bare attribute: true iff it resolves to the string `true`.
    Attr(String),
    Cmp {
        lhs: Operand,
        op: CmpOp,
        rhs: Operand,
    },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn negate(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    /// Every attribute name referenced anywhere in the tree.
    pub fn attributes(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_attributes(&mut out);
        out
    }

    fn collect_attributes<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Attr(name) => {
                out.insert(name);
            }
            Expr::Cmp { lhs, rhs, .. } => {
                for side in [lhs, rhs] {
                    if let Operand::Attr(name) = side {
                        out.insert(name);
                    }
                }
            }
            Expr::Not(e) => e.collect_attributes(out),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_attributes(out);
                b.collect_attributes(out);
            }
        }
    }
}

// Fully parenthesized so printing never depends on precedence.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(b) => write!(f, "{b}"),
            Expr::Attr(name) => f.write_str(name),
            Expr::Cmp { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
            Expr::Not(e) => write!(f, "not ({e})"),
            Expr::And(a, b) => write!(f, "({a}) and ({b})"),
            Expr::Or(a, b) => write!(f, "({a}) or ({b})"),
        }
    }
}

/// Which requests a rule applies to. `action: None` matches any action.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub resource: Glob,
    pub action: Option<String>,
}

impl Target {
    pub fn matches(&self, resource: &str, action: &str) -> bool {
        self.resource.matches(resource) && self.action.as_deref().is_none_or(|a| a == action)
    }
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub id: String,
    pub effect: Effect,
    /// `None` applies to every resource and action.
    pub target: Option<Target>,
    /// `None` is unconditional.
    pub condition: Option<Expr>,
    pub priority: i64,
    /// Obligation attached to permits: the highest level that may be disclosed.
    pub cap: Option<SensitivityLevel>,
    /// 1-based source line, 0 for rules built in code.
    pub line: usize,
}

impl Rule {
    pub fn new(id: impl Into<String>, effect: Effect) -> Self {
        Self {
            id: id.into(),
            effect,
            target: None,
            condition: None,
            priority: 0,
            cap: None,
            line: 0,
        }
    }

    pub fn applies_to(&self, resource: &str, action: &str) -> bool {
        self.target
            .as_ref()
            .is_none_or(|t| t.matches(resource, action))
    }
}

// Source positions are not part of a rule's identity.
impl PartialEq for Rule {
    fn eq(&self, other: &Rule) -> bool {
        self.id == other.id
            && self.effect == other.effect
            && self.target == other.target
            && self.condition == other.condition
            && self.priority == other.priority
            && self.cap == other.cap
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.effect, self.id)?;
        if let Some(target) = &self.target {
            write!(
                f,
                " on {}",
                Literal::Str(target.resource.pattern().to_string())
            )?;
            if let Some(action) = &target.action {
                write!(f, ":{action}")?;
            }
        }
        if let Some(cond) = &self.condition {
            write!(f, " when {cond}")?;
        }
        if self.priority != 0 {
            write!(f, " priority {}", self.priority)?;
        }
        if let Some(cap) = self.cap {
            write!(f, " cap {cap}")?;
        }
        f.write_str(";")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Policy {
    pub version: String,
    /// User attribute names declared by `declare` statements.
    pub declared: BTreeSet<String>,
    pub rules: Vec<Rule>,
}

impl Policy {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Rules in evaluation order: descending priority, then source order.
    pub fn ordered_rules(&self) -> Vec<&Rule> {
        let mut rules: Vec<&Rule> = self.rules.iter().collect();
        rules.sort_by_key(|r| std::cmp::Reverse(r.priority));
        rules
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.version.is_empty() {
            writeln!(f, "version {};", Literal::Str(self.version.clone()))?;
        }
        if !self.declared.is_empty() {
            let names: Vec<&str> = self.declared.iter().map(String::as_str).collect();
            writeln!(f, "declare {};", names.join(", "))?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}
