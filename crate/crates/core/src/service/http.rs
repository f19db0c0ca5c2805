// SPDX-License-Identifier: Apache-2.0

//! The HTTP front end. Handlers move the core computations onto the
//! blocking pool; sessions do their own locking.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use super::{decide, prove, DecisionRequest, ErrorBody, MoveRequest, ServiceError, SessionManager};
use crate::smp::Caps;

#[derive(Clone)]
pub struct AppState {
    pub sessions: Arc<SessionManager>,
    pub caps: Caps,
}

impl AppState {
    pub fn new(caps: Caps) -> Self {
        AppState {
            sessions: Arc::new(SessionManager::new()),
            caps,
        }
    }
}

impl ServiceError {
    pub fn status_code(&self) -> StatusCode {
        match self {
            ServiceError::Parse(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Undecided => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::IllegalMove { .. }
            | ServiceError::StaleSession { .. }
            | ServiceError::GameOver => StatusCode::CONFLICT,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status_code(), Json(ErrorBody::from(&self))).into_response()
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn with_caps(mut req: DecisionRequest, caps: Caps) -> DecisionRequest {
    req.caps.get_or_insert(caps);
    req
}

async fn post_decide(State(st): State<AppState>, Json(req): Json<DecisionRequest>) -> Response {
    let req = with_caps(req, st.caps);
    match blocking(move || decide(&req, true)).await {
        Ok(r) => Json(r).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn post_prove(State(st): State<AppState>, Json(req): Json<DecisionRequest>) -> Response {
    let req = with_caps(req, st.caps);
    match blocking(move || prove(&req)).await {
        Ok(r) => Json(r).into_response(),
        Err(e) => e.into_response(),
    }
}

#[derive(Deserialize)]
struct NewGame {
    formula: String,
    #[serde(default)]
    caps: Option<Caps>,
}

async fn post_game(State(st): State<AppState>, Json(req): Json<NewGame>) -> Response {
    let caps = req.caps.unwrap_or(st.caps);
    let sessions = st.sessions.clone();
    match blocking(move || sessions.create(&req.formula, &caps)).await {
        Ok(v) => (StatusCode::CREATED, Json(v)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_game(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    let sessions = st.sessions.clone();
    match blocking(move || sessions.view(&id)).await {
        Ok(v) => Json(v).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn post_move(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> Response {
    let sessions = st.sessions.clone();
    match blocking(move || sessions.play(&id, &req)).await {
        Ok(v) => Json(v).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_hint(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    let sessions = st.sessions.clone();
    match blocking(move || sessions.hint(&id)).await {
        Ok(v) => Json(v).into_response(),
        Err(e) => e.into_response(),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/decide", post(post_decide))
        .route("/prove", post(post_prove))
        .route("/games", post(post_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(post_move))
        .route("/games/{id}/hint", get(get_hint))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, caps: Caps) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(caps))).await
}
