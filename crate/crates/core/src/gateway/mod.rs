//! The HTTP gateway: configuration, backends, the request pipeline and
//! the audit log.
//!
//! A completion request flows through
//!
//! 1. principal lookup from the API key (401 on failure),
//! 2. policy evaluation on `completions/<purpose>` (403 on deny, recorded as
//!    a behavior violation),
//! 3. behavior score and HMM anomaly check, then the trust score,
//! 4. the backend (502 on failure),
//! 5. sensitivity detection and classification of the output,
//! 6. the disclosure action, tightened to deny by a policy `cap`,
//! 7. an audit record and a behavior update.

mod audit;
mod backend;
mod config;
mod http;
mod pipeline;
mod store;

pub use audit::{read_audit_log, sha256_hex, AuditLog, AuditQuery, AuditRecord, AuditScan};
pub use backend::{load_fixture, Backend, BackendError};
pub use config::{
    load_config, resolve_config_path, AuthConfig, BackendConfig, BehaviorSettings, Config,
    ConfigError, ServerConfig, CONFIG_ENV,
};
pub use http::{router, serve};
pub use pipeline::{
    completion_resource, CompletionRequest, CompletionResponse, ContextInput, Gateway,
    GatewayError, StartupError, COMPLETION_ACTION,
};
pub use store::StateStore;
