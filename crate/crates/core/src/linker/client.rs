use std::path::PathBuf;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CandidateKind, EntityCandidate, EntitySearch, LinkError};
use crate::fixture::{Fixture, FixtureMode, FixtureStore};

pub const DEFAULT_SEARCH_BASE: &str = "https://dblp.org";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkerConfig {
    pub base_url: String,
    pub hits_per_query: u32,
    pub timeout_ms: u64,
    pub fixture_mode: FixtureMode,
    pub fixture_dir: Option<PathBuf>,
    /// Candidates kept per mention for display and selection.
    pub display_count: usize,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        Self {
            base_url: DEFAULT_SEARCH_BASE.to_string(),
            hits_per_query: 10,
            timeout_ms: 10_000,
            fixture_mode: FixtureMode::Off,
            fixture_dir: None,
            display_count: 5,
        }
    }
}

pub struct DblpSearchClient {
    config: LinkerConfig,
    http: reqwest::Client,
    fixtures: Option<FixtureStore>,
}

impl DblpSearchClient {
    pub fn new(config: LinkerConfig) -> Result<Self, crate::sparql::ClientConfigError> {
        let fixtures = match (config.fixture_mode, &config.fixture_dir) {
            (FixtureMode::Off, _) => None,
            (_, Some(dir)) => Some(FixtureStore::new(dir)),
            (_, None) => return Err(crate::sparql::ClientConfigError::MissingFixtureDir),
        };
        let http = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()?;
        Ok(Self {
            config,
            http,
            fixtures,
        })
    }

    pub fn config(&self) -> &LinkerConfig {
        &self.config
    }

    fn path(kind: CandidateKind) -> String {
        format!("/search/{}/api", kind.api())
    }

    pub fn fixture_key(&self, kind: CandidateKind, query: &str) -> String {
        FixtureStore::key(&[&Self::path(kind), query, &self.config.hits_per_query.to_string()])
    }

    async fn fetch(&self, kind: CandidateKind, query: &str) -> Result<(u16, String), LinkError> {
        let url = format!("{}{}", self.config.base_url.trim_end_matches('/'), Self::path(kind));
        let unavailable = |e: reqwest::Error| LinkError::SearchApiUnavailable { message: e.to_string() };
        let resp = self
            .http
            .get(url)
            .query(&[
                ("q", query),
                ("format", "json"),
                ("h", &self.config.hits_per_query.to_string()),
            ])
            .send()
            .await
            .map_err(unavailable)?;
        let status = resp.status().as_u16();
        let body = resp.text().await.map_err(unavailable)?;
        Ok((status, body))
    }
}

#[async_trait]
impl EntitySearch for DblpSearchClient {
    async fn search(&self, kind: CandidateKind, query: &str) -> Result<Vec<EntityCandidate>, LinkError> {
        let (status, body) = match (self.config.fixture_mode, &self.fixtures) {
            (FixtureMode::Replay, Some(store)) => {
                let key = self.fixture_key(kind, query);
                match store.load(&key) {
                    Ok(Some(f)) => (f.status, f.body),
                    Ok(None) => return Err(LinkError::FixtureMiss { key }),
                    Err(e) => {
                        return Err(LinkError::SearchApiUnavailable {
                            message: format!("unreadable fixture {key}: {e}"),
                        })
                    }
                }
            }
            (FixtureMode::Record, Some(store)) => {
                let (status, body) = self.fetch(kind, query).await?;
                let key = self.fixture_key(kind, query);
                let fixture = Fixture {
                    request: serde_json::json!({
                        "path": Self::path(kind),
                        "q": query,
                        "h": self.config.hits_per_query,
                    }),
                    status,
                    body: body.clone(),
                };
                if let Err(e) = store.save(&key, &fixture) {
                    tracing::warn!(%key, error = %e, "could not record search fixture");
                }
                (status, body)
            }
            _ => self.fetch(kind, query).await?,
        };
        if !(200..300).contains(&status) {
            return Err(LinkError::SearchApiUnavailable {
                message: format!("HTTP {status}"),
            });
        }
        parse_search_response(kind, &body)
    }
}

/// Extracts hits from `result.hits.hit[]`. A single hit may arrive as an
/// object rather than an array, and zero hits may omit `hit` entirely.
pub fn parse_search_response(kind: CandidateKind, body: &str) -> Result<Vec<EntityCandidate>, LinkError> {
    let malformed = |m: String| LinkError::SearchApiMalformedResponse { message: m };
    let doc: Value = serde_json::from_str(body).map_err(|e| malformed(e.to_string()))?;
    let hits = doc
        .pointer("/result/hits")
        .ok_or_else(|| malformed("missing result.hits".into()))?;
    let list: Vec<&Value> = match hits.get("hit") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(a)) => a.iter().collect(),
        Some(v @ Value::Object(_)) => vec![v],
        Some(_) => return Err(malformed("result.hits.hit is neither array nor object".into())),
    };
    list.into_iter()
        .enumerate()
        .map(|(i, hit)| {
            let info = hit
                .get("info")
                .ok_or_else(|| malformed(format!("hit {i} has no info")))?;
            let uri = info
                .get("url")
                .and_then(Value::as_str)
                .filter(|u| !u.is_empty())
                .ok_or_else(|| malformed(format!("hit {i} has no url")))?
                .to_string();
            let label_field = match kind {
                CandidateKind::Publication => "title",
                CandidateKind::Person => "author",
                CandidateKind::Venue => "venue",
            };
            let label = info
                .get(label_field)
                .and_then(text_of)
                .unwrap_or_else(|| uri.clone());
            let score = match hit.get("@score") {
                Some(Value::String(s)) => s.parse::<f64>().ok(),
                Some(Value::Number(n)) => n.as_f64(),
                _ => None,
            }
            .filter(|s| s.is_finite() && *s >= 0.0)
            .ok_or_else(|| malformed(format!("hit {i} has no valid @score")))?;
            Ok(EntityCandidate {
                uri,
                label,
                kind,
                score,
                rank: i + 1,
            })
        })
        .collect()
}

fn text_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Object(o) => o.get("text").and_then(Value::as_str).map(str::to_string),
        _ => None,
    }
}
