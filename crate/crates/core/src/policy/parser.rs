//! Recursive-descent parser for the rule language.
//!
//! ```text
//! policy    := statement*
//! statement := "version" STRING ";"?
//!            | "declare" IDENT ("," IDENT)* ";"?
//!            | rule
//! rule      := ("permit" | "deny") IDENT
//!              ("on" STRING (":" (IDENT | "*"))?)?
//!              ("when" expr)?
//!              ("priority" NUMBER)?
//!              ("cap" LEVEL)?
//!              ";"?
//! expr      := and ("or" and)*
//! and       := unary ("and" unary)*
//! unary     := "not" unary | cmp
//! cmp       := operand (("==" | "!=" | ">=" | "<=" | "in") operand)?
//! operand   := IDENT | STRING | NUMBER | "true" | "false" | list | "(" expr ")"
//! ```

use std::collections::BTreeSet;

use super::ast::{CmpOp, Effect, Expr, Literal, LiteralKind, Operand, Policy, Rule, Target};
use super::glob::Glob;
use super::lexer::{tokenize, Pos, Tok, Token};
use super::PolicyError;
use crate::sensitivity::SensitivityLevel;

const KEYWORDS: &[&str] = &[
    "permit", "deny", "on", "when", "priority", "cap", "and", "or", "not", "in", "true", "false",
    "version", "declare",
];

pub fn parse_policy(source: &str) -> Result<Policy, PolicyError> {
    let tokens = tokenize(source)?;
    Parser { tokens, at: 0 }.policy()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

enum Parsed {
    Expr(Expr),
    Operand(Operand),
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().tok.is_keyword(kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> PolicyError {
        let t = self.peek();
        PolicyError::Syntax {
            line: t.pos.line,
            column: t.pos.column,
            message: format!("expected {expected}, found {}", t.tok.describe()),
        }
    }

    fn type_error(pos: Pos, message: String) -> PolicyError {
        PolicyError::Type {
            line: pos.line,
            column: pos.column,
            message,
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Pos), PolicyError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.error(what)),
        }
    }

    fn policy(mut self) -> Result<Policy, PolicyError> {
        let mut policy = Policy::empty();
        let mut ids = BTreeSet::new();
        loop {
            if self.eat(&Tok::Semi) {
                continue;
            }
            if self.peek().tok == Tok::Eof {
                return Ok(policy);
            }
            if self.eat_keyword("version") {
                match self.bump().tok {
                    Tok::Str(v) => policy.version = v,
                    _ => {
                        self.at -= 1;
                        return Err(self.error("version string"));
                    }
                }
                self.end_statement()?;
            } else if self.eat_keyword("declare") {
                loop {
                    let (name, _) = self.name("attribute name")?;
                    policy.declared.insert(name);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.end_statement()?;
            } else {
                let start = self.peek().pos;
                let rule = self.rule()?;
                if !ids.insert(rule.id.clone()) {
                    return Err(PolicyError::DuplicateRule {
                        id: rule.id,
                        line: start.line,
                        column: start.column,
                    });
                }
                policy.rules.push(rule);
            }
        }
    }

    fn end_statement(&mut self) -> Result<(), PolicyError> {
        if self.eat(&Tok::Semi) {
            return Ok(());
        }
        match &self.peek().tok {
            Tok::Eof => Ok(()),
            t if ["permit", "deny", "version", "declare"]
                .iter()
                .any(|k| t.is_keyword(k)) =>
            {
                Ok(())
            }
            _ => Err(self.error("`;` or a new statement")),
        }
    }

    fn rule(&mut self) -> Result<Rule, PolicyError> {
        let start = self.peek().pos;
        let effect = if self.eat_keyword("permit") {
            Effect::Permit
        } else if self.eat_keyword("deny") {
            Effect::Deny
        } else {
            return Err(self.error("`permit`, `deny`, `version` or `declare`"));
        };
        let (id, _) = self.name("rule id")?;
        let mut rule = Rule::new(id, effect);
        rule.line = start.line;

        if self.eat_keyword("on") {
            let pos = self.peek().pos;
            let pattern = match self.bump().tok {
                Tok::Str(s) => s,
                _ => {
                    self.at -= 1;
                    return Err(self.error("quoted resource pattern"));
                }
            };
            let resource = Glob::new(&pattern).map_err(|message| PolicyError::InvalidGlob {
                pattern: pattern.clone(),
                line: pos.line,
                column: pos.column,
                message,
            })?;
            let action = if self.eat(&Tok::Colon) {
                if self.eat(&Tok::Star) {
                    None
                } else {
                    Some(self.name("action name or `*`")?.0)
                }
            } else {
                None
            };
            rule.target = Some(Target { resource, action });
        }
        if self.eat_keyword("when") {
            rule.condition = Some(self.expr()?);
        }
        if self.eat_keyword("priority") {
            match self.peek().tok {
                Tok::Num(n) if n.fract() == 0.0 => {
                    rule.priority = n as i64;
                    self.bump();
                }
                _ => return Err(self.error("integer priority")),
            }
        }
        if self.eat_keyword("cap") {
            let pos = self.peek().pos;
            let (level, _) = self.name("sensitivity level")?;
            rule.cap =
                Some(
                    level
                        .parse::<SensitivityLevel>()
                        .map_err(|_| PolicyError::Syntax {
                            line: pos.line,
                            column: pos.column,
                            message: format!("unknown sensitivity level `{level}`"),
                        })?,
                );
        }
        self.end_statement()?;
        Ok(rule)
    }

    fn expr(&mut self) -> Result<Expr, PolicyError> {
        let mut lhs = self.and()?;
        while self.eat_keyword("or") {
            lhs = Expr::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, PolicyError> {
        let mut lhs = self.unary()?;
        while self.eat_keyword("and") {
            lhs = Expr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, PolicyError> {
        if self.eat_keyword("not") {
            return Ok(Expr::negate(self.unary()?));
        }
        self.cmp()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match &self.peek().tok {
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Ge => Some(CmpOp::Ge),
            Tok::Le => Some(CmpOp::Le),
            t if t.is_keyword("in") => Some(CmpOp::In),
            _ => None,
        }
    }

    fn cmp(&mut self) -> Result<Expr, PolicyError> {
        let lhs_pos = self.peek().pos;
        let lhs = self.operand()?;
        let Some(op) = self.cmp_op() else {
            return match lhs {
                Parsed::Expr(e) => Ok(e),
                Parsed::Operand(Operand::Attr(name)) => Ok(Expr::Attr(name)),
                Parsed::Operand(Operand::Lit(Literal::Bool(b))) => Ok(Expr::Const(b)),
                Parsed::Operand(Operand::Lit(lit)) => Err(Self::type_error(
                    lhs_pos,
                    format!("literal {lit} is not a boolean condition"),
                )),
            };
        };
        let op_pos = self.bump().pos;
        let lhs = match lhs {
            Parsed::Operand(o) => o,
            Parsed::Expr(_) => {
                return Err(Self::type_error(
                    op_pos,
                    format!("cannot apply `{op}` to a boolean sub-expression"),
                ))
            }
        };
        let rhs = match self.operand()? {
            Parsed::Operand(o) => o,
            Parsed::Expr(_) => {
                return Err(Self::type_error(
                    op_pos,
                    format!("cannot apply `{op}` to a boolean sub-expression"),
                ))
            }
        };
        check_types(&lhs, op, &rhs).map_err(|m| Self::type_error(op_pos, m))?;
        Ok(Expr::Cmp { lhs, op, rhs })
    }

    fn operand(&mut self) -> Result<Parsed, PolicyError> {
        let tok = self.peek().tok.clone();
        match tok {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error("`)`"));
                }
                Ok(Parsed::Expr(e))
            }
            Tok::LBracket => Ok(Parsed::Operand(Operand::Lit(self.list()?))),
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Parsed::Operand(Operand::Lit(Literal::Bool(s == "true"))))
            }
            Tok::Ident(_) => {
                let (name, _) = self.name("attribute, literal or `(`")?;
                Ok(Parsed::Operand(Operand::Attr(name)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Parsed::Operand(Operand::Lit(Literal::Str(s))))
            }
            Tok::Num(n) => {
                self.bump();
                Ok(Parsed::Operand(Operand::Lit(Literal::Num(n))))
            }
            _ => Err(self.error("attribute, literal or `(`")),
        }
    }

    fn list(&mut self) -> Result<Literal, PolicyError> {
        let open = self.bump().pos;
        let mut items = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                let item = match self.bump().tok {
                    Tok::Str(s) => Literal::Str(s),
                    Tok::Num(n) => Literal::Num(n),
                    Tok::Ident(s) if s == "true" || s == "false" => Literal::Bool(s == "true"),
                    _ => {
                        self.at -= 1;
                        return Err(self.error("list element literal"));
                    }
                };
                items.push(item);
                if self.eat(&Tok::RBracket) {
                    break;
                }
                if !self.eat(&Tok::Comma) {
                    return Err(self.error("`,` or `]`"));
                }
            }
        }
        if let Some(first) = items.first() {
            if items.iter().any(|i| i.kind() != first.kind()) {
                return Err(Self::type_error(
                    open,
                    "list elements must share one type".into(),
                ));
            }
        }
        Ok(Literal::List(items))
    }
}

fn check_types(lhs: &Operand, op: CmpOp, rhs: &Operand) -> Result<(), String> {
    let kind = |o: &Operand| match o {
        Operand::Lit(l) => Some(l.kind()),
        Operand::Attr(_) => None,
    };
    let (lk, rk) = (kind(lhs), kind(rhs));
    if lk == Some(LiteralKind::List) {
        return Err(format!("a list cannot be the left operand of `{op}`"));
    }
    match op {
        CmpOp::In => {
            let Operand::Lit(Literal::List(items)) = rhs else {
                return Err("right operand of `in` must be a list literal".into());
            };
            if let (Some(l), Some(first)) = (lk, items.first()) {
                if l != first.kind() {
                    return Err(format!("cannot test {lhs} for membership in {rhs}"));
                }
            }
        }
        CmpOp::Eq | CmpOp::Ne => {
            if rk == Some(LiteralKind::List) {
                return Err(format!("cannot compare with a list using `{op}`"));
            }
            if let (Some(l), Some(r)) = (lk, rk) {
                if l != r {
                    return Err(format!("cannot compare {lhs} with {rhs}"));
                }
            }
        }
        CmpOp::Ge | CmpOp::Le => {
            for k in [lk, rk].into_iter().flatten() {
                if k != LiteralKind::Num {
                    return Err(format!("`{op}` needs numeric operands"));
                }
            }
        }
    }
    Ok(())
}
