use std::sync::Arc;

use async_trait::async_trait;

use dblpqa::linker::{CandidateKind, EntityCandidate, EntitySearch, LinkError};
use dblpqa::query::SparqlQuery;
use dblpqa::session::Pipeline;
use dblpqa::sparql::{AnswerTable, EndpointError, QueryExecutor};
use dblpqa::templates::TemplateBase;
use dblpqa::translator::{TranslateError, Translation, Translator};

pub struct FailingTranslator(pub TranslateError);

#[async_trait]
impl Translator for FailingTranslator {
    async fn translate(&self, _question: &str) -> Result<Translation, TranslateError> {
        Err(self.0.clone())
    }
}

pub struct FailingSearch(pub LinkError);

#[async_trait]
impl EntitySearch for FailingSearch {
    async fn search(&self, _kind: CandidateKind, _query: &str) -> Result<Vec<EntityCandidate>, LinkError> {
        Err(self.0.clone())
    }
}

pub struct EmptySearch;

#[async_trait]
impl EntitySearch for EmptySearch {
    async fn search(&self, _kind: CandidateKind, _query: &str) -> Result<Vec<EntityCandidate>, LinkError> {
        Ok(Vec::new())
    }
}

pub struct FailingExecutor(pub EndpointError);

#[async_trait]
impl QueryExecutor for FailingExecutor {
    async fn execute(&self, _query: &SparqlQuery) -> Result<AnswerTable, EndpointError> {
        Err(self.0.clone())
    }
}

/// Which stage to break and how.
#[derive(Debug, Clone)]
pub enum Fault {
    Translator(TranslateError),
    Linker(LinkError),
    NoCandidates,
    EmptyTemplates,
    Endpoint(EndpointError),
}

impl Fault {
    pub fn apply(&self, base: &Pipeline) -> Pipeline {
        let mut p = base.clone();
        match self {
            Fault::Translator(e) => p.translator = Arc::new(FailingTranslator(e.clone())),
            Fault::Linker(e) => p.search = Arc::new(FailingSearch(e.clone())),
            Fault::NoCandidates => p.search = Arc::new(EmptySearch),
            Fault::EmptyTemplates => p.templates = Arc::new(TemplateBase::default()),
            Fault::Endpoint(e) => p.executor = Arc::new(FailingExecutor(e.clone())),
        }
        p
    }

    /// Stages expected to be marked skipped.
    pub fn skipped(&self) -> &'static [&'static str] {
        match self {
            Fault::Translator(TranslateError::MalformedModelOutput { .. }) => &[],
            Fault::Translator(_) => &["linker", "template", "query", "execution"],
            Fault::Linker(_) | Fault::EmptyTemplates => &["query", "execution"],
            Fault::NoCandidates => &["execution"],
            Fault::Endpoint(_) => &[],
        }
    }

    /// Stage field expected to carry the error, and its code.
    pub fn expected(&self) -> (&'static str, String) {
        match self {
            Fault::Translator(e) => ("translator", e.code().to_string()),
            Fault::Linker(e) => ("linker", e.code().to_string()),
            Fault::NoCandidates => ("query", "UnboundPlaceholder".to_string()),
            Fault::EmptyTemplates => ("template", "EmptyTemplateBase".to_string()),
            Fault::Endpoint(e) => ("execution", e.code().to_string()),
        }
    }
}

/// One fault per error type the pipeline can meet.
pub fn fault_matrix() -> Vec<Fault> {
    vec![
        Fault::Translator(TranslateError::NoPatternMatched { detail: "injected".into() }),
        Fault::Translator(TranslateError::EndpointUnavailable { message: "injected".into() }),
        Fault::Translator(TranslateError::EndpointTimeout { timeout_ms: 1 }),
        Fault::Translator(TranslateError::MalformedModelOutput {
            raw: "SELECT DISTINCT ?answer WHERE { Tim_Berners-Lee <authoredBy> ?answer".into(),
            error: "injected".into(),
        }),
        Fault::Linker(LinkError::SearchApiUnavailable { message: "injected".into() }),
        Fault::Linker(LinkError::SearchApiMalformedResponse { message: "injected".into() }),
        Fault::Linker(LinkError::FixtureMiss { key: "injected".into() }),
        Fault::NoCandidates,
        Fault::EmptyTemplates,
        Fault::Endpoint(EndpointError::EndpointUnavailable { message: "injected".into() }),
        Fault::Endpoint(EndpointError::EndpointTimeout { timeout_ms: 1 }),
        Fault::Endpoint(EndpointError::QueryRejected { status: 400, message: "injected".into() }),
        Fault::Endpoint(EndpointError::MalformedResults { message: "injected".into() }),
        Fault::Endpoint(EndpointError::FixtureMiss { key: "injected".into() }),
    ]
}
