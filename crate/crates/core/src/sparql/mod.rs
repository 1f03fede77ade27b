//! Executing SPARQL over HTTP and decoding the JSON results format.

mod results;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixture::{Fixture, FixtureMode, FixtureStore};
use crate::logical_form::Vocabulary;
use crate::query::{normalize, SparqlQuery};

pub use results::{parse_results, serialize_results, AnswerTable, AnswerValue, MalformedResults, ASK_COLUMN};

pub const RESULTS_MEDIA_TYPE: &str = "application/sparql-results+json";
pub const DEFAULT_ENDPOINT: &str = "https://sparql.dblp.org/sparql";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub url: String,
    pub timeout_ms: u64,
    pub max_rows: usize,
    /// Queries longer than this many bytes are sent by POST.
    pub post_threshold: usize,
    pub fixture_mode: FixtureMode,
    pub fixture_dir: Option<PathBuf>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            url: DEFAULT_ENDPOINT.to_string(),
            timeout_ms: 30_000,
            max_rows: 1000,
            post_threshold: 2000,
            fixture_mode: FixtureMode::Off,
            fixture_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum EndpointError {
    #[error("SPARQL endpoint unavailable: {message}")]
    EndpointUnavailable { message: String },
    #[error("SPARQL endpoint did not answer within {timeout_ms} ms")]
    EndpointTimeout { timeout_ms: u64 },
    /// The endpoint's own message, verbatim.
    #[error("query rejected (HTTP {status}): {message}")]
    QueryRejected { status: u16, message: String },
    #[error("no recorded response for query (fixture {key})")]
    FixtureMiss { key: String },
    #[error("{message}")]
    MalformedResults { message: String },
}

impl EndpointError {
    pub fn code(&self) -> &'static str {
        match self {
            EndpointError::EndpointUnavailable { .. } => "EndpointUnavailable",
            EndpointError::EndpointTimeout { .. } => "EndpointTimeout",
            EndpointError::QueryRejected { .. } => "QueryRejected",
            EndpointError::FixtureMiss { .. } => "FixtureMiss",
            EndpointError::MalformedResults { .. } => "MalformedResults",
        }
    }
}

impl From<MalformedResults> for EndpointError {
    fn from(e: MalformedResults) -> Self {
        EndpointError::MalformedResults { message: e.to_string() }
    }
}

#[derive(Debug, Error)]
pub enum ClientConfigError {
    #[error("fixture_dir is required when fixture_mode is not off")]
    MissingFixtureDir,
    #[error("cannot build HTTP client: {0}")]
    Http(#[from] reqwest::Error),
}

#[async_trait]
pub trait QueryExecutor: Send + Sync {
    async fn execute(&self, query: &SparqlQuery) -> Result<AnswerTable, EndpointError>;
}

pub struct SparqlClient {
    config: EndpointConfig,
    http: reqwest::Client,
    fixtures: Option<FixtureStore>,
    vocab: Arc<Vocabulary>,
}

impl SparqlClient {
    pub fn new(config: EndpointConfig, vocab: Arc<Vocabulary>) -> Result<Self, ClientConfigError> {
        let fixtures = match (config.fixture_mode, &config.fixture_dir) {
            (FixtureMode::Off, _) => None,
            (_, Some(dir)) => Some(FixtureStore::new(dir)),
            (_, None) => return Err(ClientConfigError::MissingFixtureDir),
        };
        let http = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()?;
        Ok(Self {
            config,
            http,
            fixtures,
            vocab,
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Normalized text when the query parses, whitespace-collapsed text
    /// otherwise, so formatting-only edits share a fixture.
    pub fn fixture_key(&self, text: &str) -> String {
        let canonical = normalize(text, &self.vocab)
            .unwrap_or_else(|_| text.split_whitespace().collect::<Vec<_>>().join(" "));
        FixtureStore::key(&["sparql", &canonical])
    }

    async fn fetch(&self, text: &str) -> Result<(u16, String), EndpointError> {
        let req = if text.len() <= self.config.post_threshold {
            self.http.get(&self.config.url).query(&[("query", text)])
        } else {
            self.http.post(&self.config.url).form(&[("query", text)])
        };
        let resp = req
            .header(reqwest::header::ACCEPT, RESULTS_MEDIA_TYPE)
            .send()
            .await
            .map_err(|e| self.transport_error(e))?;
        let status = resp.status().as_u16();
        let body = resp.text().await.map_err(|e| self.transport_error(e))?;
        Ok((status, body))
    }

    fn transport_error(&self, e: reqwest::Error) -> EndpointError {
        if e.is_timeout() {
            EndpointError::EndpointTimeout {
                timeout_ms: self.config.timeout_ms,
            }
        } else {
            EndpointError::EndpointUnavailable { message: e.to_string() }
        }
    }

    fn interpret(&self, status: u16, body: &str) -> Result<AnswerTable, EndpointError> {
        match status {
            200..=299 => {
                let mut table = parse_results(body)?;
                table.truncate(self.config.max_rows);
                Ok(table)
            }
            400..=499 => Err(EndpointError::QueryRejected {
                status,
                message: body.to_string(),
            }),
            _ => Err(EndpointError::EndpointUnavailable {
                message: format!("HTTP {status}: {body}"),
            }),
        }
    }
}

#[async_trait]
impl QueryExecutor for SparqlClient {
    async fn execute(&self, query: &SparqlQuery) -> Result<AnswerTable, EndpointError> {
        let text = query.text.as_str();
        let (status, body) = match (self.config.fixture_mode, &self.fixtures) {
            (FixtureMode::Replay, Some(store)) => {
                let key = self.fixture_key(text);
                match store.load(&key) {
                    Ok(Some(f)) => (f.status, f.body),
                    Ok(None) => return Err(EndpointError::FixtureMiss { key }),
                    Err(e) => {
                        return Err(EndpointError::EndpointUnavailable {
                            message: format!("unreadable fixture {key}: {e}"),
                        })
                    }
                }
            }
            (FixtureMode::Record, Some(store)) => {
                let (status, body) = self.fetch(text).await?;
                let key = self.fixture_key(text);
                let fixture = Fixture {
                    request: serde_json::json!({ "query": text }),
                    status,
                    body: body.clone(),
                };
                if let Err(e) = store.save(&key, &fixture) {
                    tracing::warn!(%key, error = %e, "could not record SPARQL fixture");
                }
                (status, body)
            }
            _ => self.fetch(text).await?,
        };
        self.interpret(status, &body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_key_ignores_formatting_and_variable_names() {
        let c = SparqlClient::new(EndpointConfig::default(), Arc::new(Vocabulary::dblp())).unwrap();
        let a = c.fixture_key("SELECT ?x WHERE { ?x <https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/1> }");
        let b = c.fixture_key("select ?p\nwhere {?p <https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/1>}");
        assert_eq!(a, b);
        let g1 = c.fixture_key("garbage  in");
        assert_eq!(g1, c.fixture_key("garbage in"));
    }

    #[test]
    fn fixture_modes_need_a_directory() {
        let cfg = EndpointConfig {
            fixture_mode: FixtureMode::Replay,
            ..Default::default()
        };
        assert!(matches!(
            SparqlClient::new(cfg, Arc::new(Vocabulary::dblp())),
            Err(ClientConfigError::MissingFixtureDir)
        ));
    }
}
