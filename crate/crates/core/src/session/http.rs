use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{SessionError, SessionService};

#[derive(Deserialize)]
struct CreateRequest {
    question: String,
}

#[derive(Deserialize)]
struct EntitySelection {
    mention_index: usize,
    candidate_index: usize,
}

#[derive(Deserialize)]
struct TemplateSelection {
    template_index: usize,
}

#[derive(Deserialize)]
struct QueryRequest {
    sparql: String,
}

enum ApiError {
    Session(SessionError),
    BadBody(JsonRejection),
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError::Session(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadBody(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ApiError::Session(e) => {
                let status = match e {
                    SessionError::UnknownSession { .. } => StatusCode::NOT_FOUND,
                    SessionError::IndexOutOfRange { .. } => StatusCode::UNPROCESSABLE_ENTITY,
                    SessionError::EmptyQuestion | SessionError::EmptyQuery => StatusCode::BAD_REQUEST,
                };
                (status, e.code().to_string(), e.to_string())
            }
            ApiError::BadBody(r) => (StatusCode::BAD_REQUEST, "BadRequestBody".to_string(), r.body_text()),
        };
        (status, Json(json!({ "error": { "code": code, "message": message } }))).into_response()
    }
}

type Svc = State<Arc<SessionService>>;
type ApiResult = Result<Response, ApiError>;

fn ok<T: serde::Serialize>(value: T) -> ApiResult {
    Ok(Json(value).into_response())
}

async fn create(State(svc): Svc, body: Result<Json<CreateRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body?;
    let state = svc.create_session(&req.question).await?;
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

async fn fetch(State(svc): Svc, Path(id): Path<String>) -> ApiResult {
    ok(svc.get_session(&id)?)
}

async fn select_entity(
    State(svc): Svc,
    Path(id): Path<String>,
    body: Result<Json<EntitySelection>, JsonRejection>,
) -> ApiResult {
    let Json(req) = body?;
    ok(svc.select_entity(&id, req.mention_index, req.candidate_index).await?)
}

async fn select_template(
    State(svc): Svc,
    Path(id): Path<String>,
    body: Result<Json<TemplateSelection>, JsonRejection>,
) -> ApiResult {
    let Json(req) = body?;
    ok(svc.select_template(&id, req.template_index).await?)
}

async fn run_query(
    State(svc): Svc,
    Path(id): Path<String>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> ApiResult {
    let Json(req) = body?;
    ok(svc.run_query(&id, &req.sparql).await?)
}

async fn regenerate(State(svc): Svc, Path(id): Path<String>) -> ApiResult {
    ok(svc.regenerate(&id).await?)
}

async fn examples(State(svc): Svc) -> ApiResult {
    ok(svc.list_examples())
}

/// The JSON API. Every session endpoint answers with the full state.
pub fn router(service: Arc<SessionService>) -> Router {
    Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(fetch))
        .route("/api/sessions/{id}/entity-selection", post(select_entity))
        .route("/api/sessions/{id}/template-selection", post(select_template))
        .route("/api/sessions/{id}/query", post(run_query))
        .route("/api/sessions/{id}/regenerate", post(regenerate))
        .route("/api/examples", get(examples))
        .with_state(service)
}
