use std::path::Path;

use serde::Serialize;

use super::{EXIT_FINDINGS, EXIT_IO, EXIT_OK};
use crate::policy::{parse_policy, validate_policy, AttributeSchema, Diagnostic};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyCheck {
    pub exit_code: i32,
    pub rules: usize,
    pub diagnostics: Vec<Diagnostic>,
    /// Parse or read failure, with position when known.
    pub error: Option<String>,
}

impl PolicyCheck {
    pub fn render(&self, path: &Path) -> String {
        if let Some(e) = &self.error {
            return format!("{}: {e}\n", path.display());
        }
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&format!("{}: {d}\n", path.display()));
        }
        out.push_str(&format!(
            "{}: {} rules, {} diagnostics\n",
            path.display(),
            self.rules,
            self.diagnostics.len()
        ));
        out
    }
}

/// Parses and lints a policy file.
///
/// Exit code: 0 clean, 2 with diagnostics, 1 when the file cannot be read or parsed.
pub fn cmd_policy_check(path: &Path, schema: &AttributeSchema) -> PolicyCheck {
    let failed = |error: String| PolicyCheck {
        exit_code: EXIT_IO,
        rules: 0,
        diagnostics: Vec::new(),
        error: Some(error),
    };
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let policy = match parse_policy(&source) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let diagnostics = validate_policy(&policy, schema);
    PolicyCheck {
        exit_code: if diagnostics.is_empty() {
            EXIT_OK
        } else {
            EXIT_FINDINGS
        },
        rules: policy.rules.len(),
        diagnostics,
        error: None,
    }
}
