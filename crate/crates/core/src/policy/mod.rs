//! Attribute-based access control.
//!
//! Policies are written in a small rule language (see [`parser`] for the
//! grammar), evaluated with deny-overrides and default deny.
//!
//! ```
//! use trustgate::policy::{evaluate, parse_policy, Effect};
//! use trustgate::trust::{AuthStrength, DevicePosture, NetworkZone, Principal, RequestContext};
//!
//! let policy = parse_policy(r#"
//!     permit readers on "records/*":read when role == "clinician"
//!     deny offsite on "records/**" when context.network_zone == "public"
//! "#).unwrap();
//! let alice = Principal::new("alice").with_role("clinician");
//! let ctx = RequestContext::new("treatment", NetworkZone::Vpn, DevicePosture::Managed, AuthStrength::Mfa);
//! assert_eq!(evaluate(&policy, &alice, &ctx, "records/7", "read").effect, Effect::Permit);
//! ```

mod ast;
mod eval;
mod glob;
mod lexer;
pub mod parser;
mod validate;

use thiserror::Error;

pub use ast::{CmpOp, Effect, Expr, Literal, Operand, Policy, Rule, Target};
pub use eval::{evaluate, Decision, Request, BUILTIN_ATTRIBUTES, MAX_DISCLOSABLE_LEVEL};
pub use glob::Glob;
pub use parser::parse_policy;
pub use validate::{validate_policy, AttributeSchema, Diagnostic, DiagnosticKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("type error at {line}:{column}: {message}")]
    Type {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate rule id `{id}` at {line}:{column}")]
    DuplicateRule {
        id: String,
        line: usize,
        column: usize,
    },
    #[error("invalid resource pattern `{pattern}` at {line}:{column}: {message}")]
    InvalidGlob {
        pattern: String,
        line: usize,
        column: usize,
        message: String,
    },
}

impl PolicyError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            PolicyError::Syntax { line, column, .. }
            | PolicyError::Type { line, column, .. }
            | PolicyError::DuplicateRule { line, column, .. }
            | PolicyError::InvalidGlob { line, column, .. } => (*line, *column),
        }
    }
}
