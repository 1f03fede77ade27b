//! Local stand-ins for the DBLP search API and SPARQL endpoint, served from
//! a [`Kg`].

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Form, Router};
use serde_json::json;

use dblpqa::linker::CandidateKind;
use dblpqa::logical_form::{parse_sparql, Vocabulary};
use dblpqa::sparql::{serialize_results, RESULTS_MEDIA_TYPE};

use crate::engine::Engine;
use crate::kg::Kg;

pub struct World {
    pub kg: Kg,
    pub vocab: Vocabulary,
}

type Shared = State<Arc<World>>;
type Params = HashMap<String, String>;

fn kind_of(api: &str) -> Option<CandidateKind> {
    CandidateKind::ALL.into_iter().find(|k| k.api() == api)
}

async fn search(State(world): Shared, Path(api): Path<String>, Query(params): Query<Params>) -> Response {
    let Some(kind) = kind_of(&api) else {
        return (StatusCode::NOT_FOUND, "unknown search api").into_response();
    };
    let q = params.get("q").cloned().unwrap_or_default();
    let h = params.get("h").and_then(|h| h.parse().ok()).unwrap_or(30);
    let hits = world.kg.search(kind, &q, h);
    let field = match kind {
        CandidateKind::Publication => "title",
        CandidateKind::Person => "author",
        CandidateKind::Venue => "venue",
    };
    let list: Vec<_> = hits
        .iter()
        .enumerate()
        .map(|(i, hit)| {
            json!({
                "@score": format!("{}", hit.score),
                "@id": (i + 1).to_string(),
                "info": { field: hit.entity.label, "url": hit.entity.uri },
            })
        })
        .collect();
    let mut hits_obj = json!({
        "@total": list.len().to_string(),
        "@computed": list.len().to_string(),
        "@sent": list.len().to_string(),
        "@first": "0",
    });
    // DBLP omits `hit` when nothing matched.
    if !list.is_empty() {
        hits_obj["hit"] = json!(list);
    }
    let body = json!({
        "result": {
            "query": q,
            "status": { "@code": "200", "text": "OK" },
            "hits": hits_obj,
        }
    });
    axum::Json(body).into_response()
}

fn answer(world: &World, query: Option<&String>) -> Response {
    let Some(text) = query else {
        return (StatusCode::BAD_REQUEST, "missing query parameter").into_response();
    };
    let form = match parse_sparql(text, &world.vocab) {
        Ok(f) => f,
        Err(e) => return (StatusCode::BAD_REQUEST, format!("Parse error: {e}")).into_response(),
    };
    match Engine::new(&world.kg).evaluate(&form) {
        Ok(table) => (
            [(header::CONTENT_TYPE, RESULTS_MEDIA_TYPE)],
            serialize_results(&table).to_string(),
        )
            .into_response(),
        Err(e) => (StatusCode::BAD_REQUEST, format!("Evaluation error: {e}")).into_response(),
    }
}

async fn sparql_get(State(world): Shared, Query(params): Query<Params>) -> Response {
    answer(&world, params.get("query"))
}

async fn sparql_post(State(world): Shared, Form(params): Form<Params>) -> Response {
    answer(&world, params.get("query"))
}

pub fn router(world: Arc<World>) -> Router {
    Router::new()
        .route("/search/{api}/api", get(search))
        .route("/sparql", get(sparql_get).post(sparql_post))
        .with_state(world)
}

/// A running fake DBLP on an ephemeral local port.
pub struct FakeDblp {
    pub addr: SocketAddr,
    task: tokio::task::JoinHandle<()>,
}

impl FakeDblp {
    pub async fn start(world: Arc<World>) -> std::io::Result<Self> {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let addr = listener.local_addr()?;
        let app = router(world);
        let task = tokio::spawn(async move {
            let _ = axum::serve(listener, app).await;
        });
        Ok(Self { addr, task })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn sparql_url(&self) -> String {
        format!("http://{}/sparql", self.addr)
    }
}

impl Drop for FakeDblp {
    fn drop(&mut self) {
        self.task.abort();
    }
}
