//! The interactive pipeline: per-session state, the mutations a user can
//! apply to it, and the HTTP API over both.

mod http;
mod pipeline;
mod service;

use serde::{Deserialize, Serialize};

use crate::linker::EntityCandidate;
use crate::logical_form::{EntityKind, EntityMention, LogicalForm, Term};
use crate::query::{Diagnostic, SparqlQuery};
use crate::sparql::AnswerTable;

pub use http::router;
pub use pipeline::Pipeline;
pub use service::{SessionError, SessionService, SessionSettings};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionState {
    pub id: String,
    pub question: String,
    /// Bumped by every mutation.
    pub revision: u64,
    /// Absent when the translator produced nothing at all.
    pub logical_form: Option<LogicalFormStage>,
    pub mentions: Vec<MentionState>,
    pub template_matches: Vec<TemplateChoice>,
    /// Index into `template_matches`.
    pub selected_template: Option<usize>,
    pub query: Option<SparqlQuery>,
    /// Non-blocking diagnostics for `query`.
    pub validation: Vec<Diagnostic>,
    pub answers: Option<AnswerTable>,
    pub stage_errors: StageErrors,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalFormStage {
    /// Canonical text when parsed, raw model output otherwise.
    pub text: String,
    pub parsed: bool,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip)]
    pub form: Option<LogicalForm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MentionState {
    pub mention: EntityMention,
    pub candidates: Vec<EntityCandidate>,
    /// Set for literal kinds instead of candidates.
    pub literal: Option<Term>,
    /// Defaults to 0 whenever candidates exist.
    pub selected_index: Option<usize>,
    pub error: Option<StageError>,
}

impl MentionState {
    /// The term this mention contributes to the query, if any.
    pub fn bound_value(&self) -> Option<Term> {
        if let Some(l) = &self.literal {
            return Some(l.clone());
        }
        let c = self.candidates.get(self.selected_index?)?;
        Some(Term::Uri(c.uri.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateChoice {
    pub rank: usize,
    pub distance: f64,
    pub template: String,
    pub placeholder_count: usize,
    pub placeholder_kinds: Vec<EntityKind>,
    pub frequency: usize,
    /// Index into the template base.
    #[serde(skip)]
    pub base_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageError {
    pub code: String,
    pub message: String,
    /// True when the stage did not run because an earlier one failed.
    pub skipped: bool,
}

impl StageError {
    pub fn new(code: &str, message: impl ToString) -> Self {
        Self {
            code: code.to_string(),
            message: message.to_string(),
            skipped: false,
        }
    }

    pub fn skipped(upstream: &str) -> Self {
        Self {
            code: "Skipped".to_string(),
            message: format!("skipped because the {upstream} stage failed"),
            skipped: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageErrors {
    pub translator: Option<StageError>,
    pub linker: Option<StageError>,
    pub template: Option<StageError>,
    pub query: Option<StageError>,
    pub execution: Option<StageError>,
}

impl StageErrors {
    pub fn is_clean(&self) -> bool {
        self.translator.is_none()
            && self.linker.is_none()
            && self.template.is_none()
            && self.query.is_none()
            && self.execution.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleQuestion {
    pub text: String,
    pub note: String,
}

pub fn default_examples() -> Vec<ExampleQuestion> {
    let ex = |text: &str, note: &str| ExampleQuestion {
        text: text.to_string(),
        note: note.to_string(),
    };
    vec![
        ex(
            "please enumerate the authors of 'BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding' along with the venues where they have published other papers.",
            "two answer columns: authors and the venues of their other papers",
        ),
        ex(
            "what papers has Tim Berners-Lee published in the last 5 years?",
            "person lookup with a year filter",
        ),
        ex(
            "Who are the authors of 'Attention Is All You Need'?",
            "single-hop author lookup",
        ),
        ex(
            "How many papers has Tim Berners-Lee published?",
            "aggregate count",
        ),
    ]
}
