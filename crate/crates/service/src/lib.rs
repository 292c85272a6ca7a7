//! Step-by-step solving sessions behind a small HTTP/JSON API.
//!
//! - `POST /sessions` with a `.dmc` text body creates a session.
//! - `GET /sessions/{id}/state` returns the state document.
//! - `POST /sessions/{id}/steps` applies one action.
//! - `DELETE /sessions/{id}` drops the session.
//! - `GET /fixtures/{name}` returns a bundled problem as text.

pub mod session;
pub mod state;

use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dmc_core::io::{fixtures, serialize, LoadError};
use serde_json::{json, Value};

pub use session::{Action, CompleteMode, Completion, PolarityName, Session, SessionError, SessionManager};
pub use state::StateDocument;

pub const DEFAULT_IDLE: Duration = Duration::from_secs(30 * 60);

type Shared = Arc<SessionManager>;

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", axum::routing::delete(remove))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/steps", post(step))
        .route("/fixtures/{name}", get(fixture))
        .with_state(manager)
}

/// Serves until the process is stopped. Idle sessions are swept once a
/// minute.
pub async fn serve(port: u16, idle: Duration) -> std::io::Result<()> {
    let manager = Arc::new(SessionManager::new(idle));
    let sweeper = manager.clone();
    tokio::spawn(async move {
        let mut every = tokio::time::interval(Duration::from_secs(60));
        loop {
            every.tick().await;
            sweeper.expire();
        }
    });
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(manager)).await
}

fn error(status: StatusCode, body: Value) -> Response {
    (status, Json(body)).into_response()
}

fn session_error(e: SessionError) -> Response {
    match e {
        SessionError::NotFound => error(StatusCode::NOT_FOUND, json!({ "error": "unknown session" })),
        SessionError::BadRequest(m) => error(StatusCode::BAD_REQUEST, json!({ "error": m })),
        SessionError::Failed(m) => error(StatusCode::UNPROCESSABLE_ENTITY, json!({ "failure": m })),
    }
}

async fn create(State(m): State<Shared>, body: String) -> Response {
    if body.trim().is_empty() {
        return error(StatusCode::BAD_REQUEST, json!({ "error": "empty problem text" }));
    }
    match m.create(&body) {
        Ok(id) => {
            let session = m.get(&id).expect("just created");
            let doc = session.lock().unwrap().state();
            (StatusCode::CREATED, Json(json!({ "id": id, "state": doc }))).into_response()
        }
        Err(LoadError::Syntax(e)) => error(
            StatusCode::BAD_REQUEST,
            json!({ "error": e.message, "line": e.line, "column": e.column }),
        ),
        Err(e) => error(StatusCode::BAD_REQUEST, json!({ "error": e.to_string() })),
    }
}

async fn state(State(m): State<Shared>, Path(id): Path<String>) -> Response {
    match m.get(&id) {
        Ok(s) => Json(s.lock().unwrap().state()).into_response(),
        Err(e) => session_error(e),
    }
}

async fn step(State(m): State<Shared>, Path(id): Path<String>, body: String) -> Response {
    let session = match m.get(&id) {
        Ok(s) => s,
        Err(e) => return session_error(e),
    };
    let action: Action = match serde_json::from_str(&body) {
        Ok(a) => a,
        Err(e) => return error(StatusCode::BAD_REQUEST, json!({ "error": e.to_string() })),
    };
    let mut s = session.lock().unwrap();
    match s.apply(action) {
        Ok(None) => Json(s.state()).into_response(),
        Ok(Some(completion)) => {
            let mut doc = serde_json::to_value(s.state()).expect("state serialises");
            doc["completion"] = serde_json::to_value(completion).expect("completion serialises");
            Json(doc).into_response()
        }
        Err(e) => session_error(e),
    }
}

async fn remove(State(m): State<Shared>, Path(id): Path<String>) -> StatusCode {
    if m.remove(&id) {
        StatusCode::NO_CONTENT
    } else {
        StatusCode::NOT_FOUND
    }
}

async fn fixture(Path(name): Path<String>) -> Response {
    match fixtures::fixture_by_name(&name) {
        Some(doc) => serialize(&doc).into_response(),
        None => error(StatusCode::NOT_FOUND, json!({ "error": format!("no fixture {name}") })),
    }
}
