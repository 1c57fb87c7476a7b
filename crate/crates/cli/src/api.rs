//! HTTP control plane.
//!
//! | Method | Path                      | Auth          |
//! |--------|---------------------------|---------------|
//! | POST   | `/api/session`            | none (MAC)    |
//! | POST   | `/api/command`            | session token |
//! | GET    | `/api/command/{ticket_id}`| none          |
//! | GET    | `/api/devices`            | none          |
//! | GET    | `/api/events`             | none (SSE)    |
//! | GET    | `/api/log/transmitter`    | none          |
//! | GET    | `/api/log/receiver`       | none          |
//! | GET    | `/api/allowlist`          | admin token   |
//! | PUT    | `/api/allowlist/{mac}`    | admin token   |
//! | DELETE | `/api/allowlist/{mac}`    | admin token   |
//!
//! Admin requests carry the token in the `X-Admin-Token` header.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::broadcast;
use tower_http::cors::{AllowOrigin, CorsLayer};
use wia_core::gateway::GatewayError;
use wia_core::radio::NodeHandle;
use wia_core::{parse_mac, CommandRejected, Gateway, SessionDenied, TicketStatus};

pub const ADMIN_HEADER: &str = "x-admin-token";
pub const ADMIN_TOKEN_ENV: &str = "WIA_ADMIN_TOKEN";

#[derive(Debug, Clone)]
pub struct ApiConfig {
    pub listen_address: SocketAddr,
    pub admin_token: Option<String>,
    pub cors_origins: Vec<String>,
}

#[derive(Clone)]
pub struct AppState {
    pub gateway: Arc<Gateway>,
    pub node: NodeHandle,
    pub admin_token: Option<Arc<str>>,
}

pub fn router(state: AppState, cors_origins: &[String]) -> Router {
    let router = Router::new()
        .route("/api/session", post(open_session))
        .route("/api/command", post(submit_command))
        .route("/api/command/{ticket_id}", get(poll_ticket))
        .route("/api/devices", get(devices))
        .route("/api/events", get(events))
        .route("/api/log/transmitter", get(transmitter_log))
        .route("/api/log/receiver", get(receiver_log))
        .route("/api/allowlist", get(list_allowlist))
        .route(
            "/api/allowlist/{mac}",
            put(put_allowlist).delete(delete_allowlist),
        )
        .with_state(state);
    if cors_origins.is_empty() {
        return router;
    }
    let origins: Vec<HeaderValue> = cors_origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    router.layer(
        CorsLayer::new()
            .allow_origin(AllowOrigin::list(origins))
            .allow_methods([Method::GET, Method::POST, Method::PUT, Method::DELETE])
            .allow_headers([
                axum::http::header::CONTENT_TYPE,
                axum::http::HeaderName::from_static(ADMIN_HEADER),
            ]),
    )
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn bad_body(rejection: JsonRejection) -> Response {
    error(StatusCode::BAD_REQUEST, rejection.body_text())
}

#[derive(Debug, Deserialize)]
pub struct SessionRequest {
    pub mac: String,
}

async fn open_session(
    State(state): State<AppState>,
    body: Result<Json<SessionRequest>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return bad_body(e),
    };
    let mac = match parse_mac(&req.mac) {
        Ok(m) => m,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    match state.gateway.open_session(mac) {
        Ok(s) => (
            StatusCode::OK,
            Json(json!({ "token": s.token, "expires_at": s.expires_at })),
        )
            .into_response(),
        Err(SessionDenied::Denied { failures }) => (
            StatusCode::UNAUTHORIZED,
            Json(json!({ "failures": failures })),
        )
            .into_response(),
        Err(SessionDenied::DeniedLocked { until }) => {
            (StatusCode::LOCKED, Json(json!({ "locked_until": until }))).into_response()
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct CommandRequest {
    pub token: String,
    pub command: String,
}

async fn submit_command(
    State(state): State<AppState>,
    body: Result<Json<CommandRequest>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return bad_body(e),
    };
    match state.gateway.submit_command(&req.token, &req.command) {
        Ok(t) => (
            StatusCode::ACCEPTED,
            Json(json!({ "ticket_id": t.ticket_id })),
        )
            .into_response(),
        Err(e @ CommandRejected::InvalidSession) => error(StatusCode::UNAUTHORIZED, e.to_string()),
        Err(e @ CommandRejected::UnknownCommand(_)) => {
            error(StatusCode::BAD_REQUEST, e.to_string())
        }
    }
}

/// Ticket status as reported to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TicketView {
    pub ticket_id: u64,
    pub command: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u32>,
}

async fn poll_ticket(State(state): State<AppState>, Path(ticket_id): Path<u64>) -> Response {
    match state.gateway.poll_ticket(ticket_id) {
        Ok(t) => {
            let (status, code) = match t.status {
                TicketStatus::Queued => ("queued", None),
                TicketStatus::Sent => ("sent", None),
                TicketStatus::Acked { code } => ("acked", Some(code.value())),
                TicketStatus::Failed => ("failed", None),
            };
            Json(TicketView {
                ticket_id: t.ticket_id,
                command: t.command.to_string(),
                status: status.to_string(),
                code,
                attempts: t.attempts,
            })
            .into_response()
        }
        Err(e) => error(StatusCode::NOT_FOUND, e.to_string()),
    }
}

async fn devices(State(state): State<AppState>) -> Response {
    let states = state
        .node
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .states();
    Json(states).into_response()
}

async fn transmitter_log(State(state): State<AppState>) -> Response {
    Json(json!({ "lines": state.gateway.transmitter_log() })).into_response()
}

async fn receiver_log(State(state): State<AppState>) -> Response {
    let lines = state
        .node
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .log_lines();
    Json(json!({ "lines": lines })).into_response()
}

/// Audit records as server-sent events, named by record kind. A client
/// that falls more than the event buffer behind is disconnected.
async fn events(
    State(state): State<AppState>,
) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = state.gateway.subscribe();
    let stream = stream::unfold(rx, |mut rx| async move {
        match rx.recv().await {
            Ok(record) => {
                let event = Event::default()
                    .event(record.kind.as_str())
                    .data(record.to_json_line());
                Some((Ok(event), rx))
            }
            Err(broadcast::error::RecvError::Lagged(_) | broadcast::error::RecvError::Closed) => {
                None
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

fn is_admin(state: &AppState, headers: &HeaderMap) -> bool {
    let presented = headers.get(ADMIN_HEADER).and_then(|v| v.to_str().ok());
    match (&state.admin_token, presented) {
        (Some(expected), Some(got)) => constant_time_eq(expected.as_bytes(), got.as_bytes()),
        _ => false,
    }
}

fn admin_required() -> Response {
    error(StatusCode::UNAUTHORIZED, "admin token required")
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllowlistEntry {
    pub mac: String,
    pub label: String,
}

async fn list_allowlist(State(state): State<AppState>, headers: HeaderMap) -> Response {
    if !is_admin(&state, &headers) {
        return admin_required();
    }
    let entries: Vec<AllowlistEntry> = state
        .gateway
        .allowlist()
        .iter()
        .map(|(m, l)| AllowlistEntry {
            mac: m.to_string(),
            label: l.to_string(),
        })
        .collect();
    Json(entries).into_response()
}

#[derive(Debug, Default, Deserialize)]
pub struct LabelRequest {
    #[serde(default)]
    pub label: String,
}

async fn put_allowlist(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(mac): Path<String>,
    body: Option<Json<LabelRequest>>,
) -> Response {
    if !is_admin(&state, &headers) {
        return admin_required();
    }
    let mac = match parse_mac(&mac) {
        Ok(m) => m,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let label = body.map(|Json(b)| b.label).unwrap_or_default();
    match state.gateway.admin_put(mac, label.trim()) {
        Ok(created) => {
            Json(json!({ "mac": mac, "label": label.trim(), "created": created })).into_response()
        }
        Err(GatewayError::InvalidLabel) => error(StatusCode::BAD_REQUEST, "invalid label"),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn delete_allowlist(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(mac): Path<String>,
) -> Response {
    if !is_admin(&state, &headers) {
        return admin_required();
    }
    let mac = match parse_mac(&mac) {
        Ok(m) => m,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    match state.gateway.admin_remove(mac) {
        Ok(()) => Json(json!({ "mac": mac, "removed": true })).into_response(),
        Err(e @ GatewayError::NotInAllowlist(_)) => error(StatusCode::NOT_FOUND, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}
