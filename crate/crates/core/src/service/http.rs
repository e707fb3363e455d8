use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{StudyService, Submission};
use crate::study::Task;
use crate::Error;

/// Request header carrying the token issued by `GET /session`.
pub const RATER_HEADER: &str = "x-rater-token";

type Shared = Arc<StudyService>;

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn error(status: StatusCode, msg: impl ToString) -> Response {
    (status, Json(json!({ "error": msg.to_string() }))).into_response()
}

fn from_error(e: Error) -> Response {
    match e {
        Error::Rejected(_) => error(StatusCode::CONFLICT, e),
        Error::InvalidInput(_) => error(StatusCode::BAD_REQUEST, e),
        other => error(StatusCode::INTERNAL_SERVER_ERROR, other),
    }
}

fn rater(svc: &StudyService, headers: &HeaderMap) -> Result<String, Response> {
    let token = headers
        .get(RATER_HEADER)
        .and_then(|v| v.to_str().ok())
        .ok_or_else(|| error(StatusCode::UNAUTHORIZED, format!("missing {RATER_HEADER} header")))?;
    if !svc.is_rater(token) {
        return Err(error(StatusCode::UNAUTHORIZED, "unknown rater token"));
    }
    Ok(token.to_string())
}

async fn session(State(svc): State<Shared>) -> Response {
    match svc.register_rater() {
        Ok(token) => Json(json!({ "rater_token": token })).into_response(),
        Err(e) => from_error(e),
    }
}

#[derive(Deserialize)]
struct NextParams {
    task: Option<u8>,
}

async fn next_question(State(svc): State<Shared>, headers: HeaderMap, Query(p): Query<NextParams>) -> Response {
    let rater = match rater(&svc, &headers) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let task = match p.task.map(Task::try_from).transpose() {
        Ok(t) => t,
        Err(e) => return from_error(e),
    };
    match svc.next_question(&rater, task, now()) {
        Ok(next) => Json(next).into_response(),
        Err(e) => from_error(e),
    }
}

async fn answers(State(svc): State<Shared>, headers: HeaderMap, Json(sub): Json<Submission>) -> Response {
    let rater = match rater(&svc, &headers) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    match svc.submit(&rater, sub, now()) {
        Ok(a) => Json(json!({ "status": "recorded", "question_id": a.question_id })).into_response(),
        Err(e) => from_error(e),
    }
}

async fn results(State(svc): State<Shared>) -> Response {
    match svc.export() {
        Ok(r) => Json(r).into_response(),
        Err(e) => from_error(e),
    }
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/session", get(session))
        .route("/questions/next", get(next_question))
        .route("/answers", post(answers))
        .route("/results", get(results))
        .with_state(service)
}

pub async fn serve(service: Shared, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("study service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service)).await
}
