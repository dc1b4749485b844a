//! JSON-over-HTTP front end for a [`SessionStore`].

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tipcast_core::corpus::Role;
use tipcast_core::service::{FixtureRef, SessionStore, DEFAULT_WARN_THRESHOLD};
use tipcast_core::Error;
use tower_http::cors::CorsLayer;

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            // A missing or unreadable file named in the request is the
            // client's problem; other I/O failures are ours.
            Error::Io(io) => match io.kind() {
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => StatusCode::BAD_REQUEST,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            },
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError(status, e.to_string())
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

/// Parses the body ourselves so malformed JSON gets the same error shape as
/// everything else.
fn body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| bad_request(format!("invalid request body: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    basin_file: PathBuf,
    #[serde(default)]
    warn_threshold_n: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewTurn {
    role: Role,
    #[serde(default)]
    state: Option<Vec<f64>>,
    #[serde(default)]
    fixture_ref: Option<FixtureRef>,
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    }
}

async fn create_session(State(store): State<Arc<SessionStore>>, bytes: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = body(&bytes)?;
    let warn = req.warn_threshold_n.unwrap_or(DEFAULT_WARN_THRESHOLD);
    let id = blocking(move || store.create_session(&req.basin_file, warn)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))).into_response())
}

async fn append_turn(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Response, ApiError> {
    let req: NewTurn = body(&bytes)?;
    let forecast = match (req.state, req.fixture_ref) {
        (Some(state), None) => blocking(move || store.append_turn(&id, req.role, state)).await?,
        (None, Some(fixture)) => blocking(move || store.append_fixture_turn(&id, req.role, fixture)).await?,
        _ => return Err(bad_request("exactly one of `state` and `fixture_ref` is required")),
    };
    Ok(Json(forecast).into_response())
}

async fn trace(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(store.trace(&id)?).into_response())
}

async fn list(State(store): State<Arc<SessionStore>>) -> Response {
    Json(store.list()).into_response()
}

async fn healthz() -> Response {
    Json(json!({ "status": "ok" })).into_response()
}

async fn not_found() -> ApiError {
    ApiError(StatusCode::NOT_FOUND, "no such route".into())
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session).get(list))
        .route("/sessions/{id}/turns", post(append_turn))
        .route("/sessions/{id}/trace", get(trace))
        .fallback(not_found)
        .layer(CorsLayer::permissive())
        .with_state(store)
}

/// Serves until Ctrl-C.
pub async fn serve(store: Arc<SessionStore>, host: &str, port: u16) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
