use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::BackendConfig;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend timed out after {0} ms")]
    Timeout(u64),
    #[error("backend returned HTTP {0}")]
    Status(u16),
    #[error("backend unreachable: {0}")]
    Transport(String),
    #[error("backend response malformed: {0}")]
    Malformed(String),
    #[error("cannot load mock fixture {path}: {message}")]
    Fixture { path: String, message: String },
}

#[derive(Debug, Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
}

#[derive(Debug, Deserialize)]
struct GenerateResponse {
    text: String,
}

/// The model behind the gateway.
#[derive(Debug, Clone)]
pub enum Backend {
    /// Fixture lookup by exact prompt; unknown prompts are echoed back.
    Mock {
        responses: BTreeMap<String, String>,
        /// Set when the configured fixture file was missing.
        warning: Option<String>,
    },
    Remote {
        client: reqwest::Client,
        base_url: String,
        credential: Option<String>,
        timeout_ms: u64,
        max_tokens: u32,
    },
}

impl Backend {
    pub fn mock(responses: BTreeMap<String, String>) -> Self {
        Backend::Mock {
            responses,
            warning: None,
        }
    }

    pub fn from_config(cfg: &BackendConfig) -> Result<Self, BackendError> {
        match cfg {
            BackendConfig::Mock { fixture, .. } => match fixture {
                Some(path) if !path.exists() => {
                    let warning =
                        format!("mock fixture {} not found; echoing prompts", path.display());
                    tracing::warn!("{warning}");
                    Ok(Backend::Mock {
                        responses: BTreeMap::new(),
                        warning: Some(warning),
                    })
                }
                Some(path) => Ok(Backend::mock(load_fixture(path)?)),
                None => Ok(Backend::mock(BTreeMap::new())),
            },
            BackendConfig::Remote {
                base_url,
                credential_env,
                timeout_ms,
                max_tokens,
            } => {
                let client = reqwest::Client::builder()
                    .timeout(Duration::from_millis(*timeout_ms))
                    .build()
                    .map_err(|e| BackendError::Transport(e.to_string()))?;
                Ok(Backend::Remote {
                    client,
                    base_url: base_url.clone(),
                    credential: credential_env.as_ref().and_then(|v| std::env::var(v).ok()),
                    timeout_ms: *timeout_ms,
                    max_tokens: *max_tokens,
                })
            }
        }
    }

    pub fn warning(&self) -> Option<&str> {
        match self {
            Backend::Mock { warning, .. } => warning.as_deref(),
            Backend::Remote { .. } => None,
        }
    }

    /// Identifier recorded in audit records.
    pub fn id(&self) -> String {
        match self {
            Backend::Mock { .. } => "mock".to_string(),
            Backend::Remote { base_url, .. } => format!("remote:{base_url}"),
        }
    }

    pub async fn generate(&self, prompt: &str) -> Result<String, BackendError> {
        match self {
            Backend::Mock { responses, .. } => Ok(responses
                .get(prompt)
                .cloned()
                .unwrap_or_else(|| prompt.to_string())),
            Backend::Remote {
                client,
                base_url,
                credential,
                timeout_ms,
                max_tokens,
            } => {
                let mut req = client
                    .post(format!("{base_url}/generate"))
                    .json(&GenerateRequest {
                        prompt,
                        max_tokens: *max_tokens,
                    });
                if let Some(token) = credential {
                    req = req.bearer_auth(token);
                }
                let resp = req.send().await.map_err(|e| classify(e, *timeout_ms))?;
                if !resp.status().is_success() {
                    return Err(BackendError::Status(resp.status().as_u16()));
                }
                let body: GenerateResponse = resp.json().await.map_err(|e| {
                    if e.is_timeout() {
                        BackendError::Timeout(*timeout_ms)
                    } else {
                        BackendError::Malformed(e.to_string())
                    }
                })?;
                Ok(body.text)
            }
        }
    }
}

fn classify(e: reqwest::Error, timeout_ms: u64) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout(timeout_ms)
    } else {
        BackendError::Transport(e.to_string())
    }
}

/// Reads a JSON object of prompt → response pairs.
pub fn load_fixture(path: &Path) -> Result<BTreeMap<String, String>, BackendError> {
    let fail = |message: String| BackendError::Fixture {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| fail(e.to_string()))
}
