//! Resolving entity mentions to DBLP URLs through the DBLP search API, and
//! turning literal mentions into RDF literals.

mod client;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logical_form::{EntityKind, EntityMention, Literal, Term};

pub use client::{parse_search_response, DblpSearchClient, LinkerConfig, DEFAULT_SEARCH_BASE};

/// Which search API a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    Publication,
    Person,
    Venue,
}

impl CandidateKind {
    /// Path segment under `/search/`.
    pub fn api(self) -> &'static str {
        match self {
            CandidateKind::Publication => "publ",
            CandidateKind::Person => "author",
            CandidateKind::Venue => "venue",
        }
    }

    pub fn entity_kind(self) -> EntityKind {
        match self {
            CandidateKind::Publication => EntityKind::Publication,
            CandidateKind::Person => EntityKind::Person,
            CandidateKind::Venue => EntityKind::Venue,
        }
    }

    pub const ALL: [CandidateKind; 3] = [
        CandidateKind::Publication,
        CandidateKind::Person,
        CandidateKind::Venue,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityCandidate {
    pub uri: String,
    pub label: String,
    pub kind: CandidateKind,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum LinkError {
    #[error("DBLP search API unavailable: {message}")]
    SearchApiUnavailable { message: String },
    #[error("malformed DBLP search response: {message}")]
    SearchApiMalformedResponse { message: String },
    #[error("no recorded search response (fixture {key})")]
    FixtureMiss { key: String },
}

impl LinkError {
    pub fn code(&self) -> &'static str {
        match self {
            LinkError::SearchApiUnavailable { .. } => "SearchApiUnavailable",
            LinkError::SearchApiMalformedResponse { .. } => "SearchApiMalformedResponse",
            LinkError::FixtureMiss { .. } => "FixtureMiss",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum LiteralError {
    #[error("{kind} is not a literal kind")]
    NotALiteralKind { kind: String },
    #[error("`{surface}` is not a four-digit year")]
    MalformedYear { surface: String },
}

impl LiteralError {
    pub fn code(&self) -> &'static str {
        match self {
            LiteralError::NotALiteralKind { .. } => "NotALiteralKind",
            LiteralError::MalformedYear { .. } => "MalformedYear",
        }
    }
}

/// One search API call. Implemented by the HTTP client and by test doubles.
#[async_trait]
pub trait EntitySearch: Send + Sync {
    /// Hits in API order, unranked (rank fields are assigned by [`link`]).
    async fn search(&self, kind: CandidateKind, query: &str) -> Result<Vec<EntityCandidate>, LinkError>;
}

/// Candidates for one entity mention, best first. Unknown kinds query all
/// three APIs and merge by score, ties going to publication, then person,
/// then venue. Literal kinds yield no candidates.
pub async fn link(search: &dyn EntitySearch, mention: &EntityMention) -> Result<Vec<EntityCandidate>, LinkError> {
    let kinds: Vec<CandidateKind> = match mention.inferred_kind {
        EntityKind::Publication => vec![CandidateKind::Publication],
        EntityKind::Person => vec![CandidateKind::Person],
        EntityKind::Venue => vec![CandidateKind::Venue],
        EntityKind::Unknown => CandidateKind::ALL.to_vec(),
        EntityKind::LiteralYear | EntityKind::LiteralString => return Ok(Vec::new()),
    };
    let results = futures::future::join_all(kinds.iter().map(|k| search.search(*k, &mention.surface))).await;
    let mut merged = Vec::new();
    for r in results {
        merged.extend(r?);
    }
    merged.sort_by(|a, b| b.score.total_cmp(&a.score));
    for (i, c) in merged.iter_mut().enumerate() {
        c.rank = i + 1;
    }
    Ok(merged)
}

/// Literal matching: years become integer literals, strings pass through
/// unchanged as quoted literals.
pub fn match_literal(mention: &EntityMention) -> Result<Term, LiteralError> {
    match mention.inferred_kind {
        EntityKind::LiteralYear => {
            let s = mention.surface.trim();
            if s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit()) {
                Ok(Term::Literal(Literal::integer(s.parse().expect("four digits"))))
            } else {
                Err(LiteralError::MalformedYear {
                    surface: mention.surface.clone(),
                })
            }
        }
        EntityKind::LiteralString => Ok(Term::Literal(Literal::string(mention.surface.clone()))),
        other => Err(LiteralError::NotALiteralKind {
            kind: other.name().to_string(),
        }),
    }
}
