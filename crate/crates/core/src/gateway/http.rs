use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::json;

use super::audit::AuditQuery;
use super::pipeline::{CompletionRequest, Gateway, GatewayError};

/// Routes:
///
/// - `POST /v1/completions`: bearer API key, JSON [`CompletionRequest`]
/// - `GET /v1/audit?principal=&since=`: admin key
/// - `PUT /admin/policy`: admin key, policy source as the body
/// - `GET /healthz`
pub fn router(gateway: Arc<Gateway>) -> Router {
    Router::new()
        .route("/v1/completions", post(completions))
        .route("/v1/audit", get(audit))
        .route("/admin/policy", put(replace_policy))
        .route("/healthz", get(healthz))
        .with_state(gateway)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        error(status, self.to_string())
    }
}

async fn completions(State(gw): State<Arc<Gateway>>, headers: HeaderMap, body: Bytes) -> Response {
    let Some(principal) = bearer(&headers).and_then(|k| gw.principal_for_key(k)) else {
        gw.audit_unauthenticated("missing or unknown API key");
        return error(StatusCode::UNAUTHORIZED, "missing or unknown API key");
    };
    let principal = principal.to_string();
    let req: CompletionRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                format!("malformed request body: {e}"),
            )
        }
    };
    match gw.complete(&principal, req).await {
        Ok(resp) => Json(resp).into_response(),
        Err(e) => e.into_response(),
    }
}

#[derive(Debug, Deserialize)]
struct AuditParams {
    principal: Option<String>,
    since: Option<DateTime<Utc>>,
}

async fn audit(
    State(gw): State<Arc<Gateway>>,
    headers: HeaderMap,
    params: Result<Query<AuditParams>, axum::extract::rejection::QueryRejection>,
) -> Response {
    if !bearer(&headers).is_some_and(|k| gw.is_admin_key(k)) {
        return error(StatusCode::UNAUTHORIZED, "admin key required");
    }
    let Query(params) = match params {
        Ok(p) => p,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    let q = AuditQuery {
        principal_id: params.principal,
        since: params.since,
    };
    let reader = gw.clone();
    match tokio::task::spawn_blocking(move || reader.audit().query(&q)).await {
        Ok(Ok(records)) => Json(records).into_response(),
        Ok(Err(e)) => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("cannot read audit log: {e}"),
        ),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn replace_policy(
    State(gw): State<Arc<Gateway>>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    if !bearer(&headers).is_some_and(|k| gw.is_admin_key(k)) {
        return error(StatusCode::UNAUTHORIZED, "admin key required");
    }
    let Ok(source) = std::str::from_utf8(&body) else {
        return error(StatusCode::BAD_REQUEST, "policy must be UTF-8");
    };
    match gw.replace_policy(source) {
        Ok(diagnostics) => Json(json!({
            "rules": gw.policy().rules.len(),
            "diagnostics": diagnostics.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }))
        .into_response(),
        Err(e) => {
            let (line, column) = e.position();
            (
                StatusCode::BAD_REQUEST,
                Json(json!({ "error": e.to_string(), "line": line, "column": column })),
            )
                .into_response()
        }
    }
}

async fn healthz(State(gw): State<Arc<Gateway>>) -> Response {
    let warnings = gw.warnings();
    Json(json!({
        "status": if warnings.is_empty() { "ok" } else { "degraded" },
        "warnings": warnings,
        "backend": gw.backend_id(),
        "policy_rules": gw.policy().rules.len(),
        "audit_errors": gw.audit().error_count(),
    }))
    .into_response()
}

/// Binds `config.server.listen` and serves until ctrl-c.
pub async fn serve(gateway: Arc<Gateway>) -> std::io::Result<()> {
    let addr = gateway.config().server.listen.clone();
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    tracing::info!(%addr, backend = %gateway.backend_id(), "trustgate listening");
    axum::serve(listener, router(gateway))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
