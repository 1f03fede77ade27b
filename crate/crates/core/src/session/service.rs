use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{default_examples, ExampleQuestion, Pipeline, SessionState};
use crate::query::{validate, QueryOrigin, SparqlQuery};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum SessionError {
    #[error("the question is empty")]
    EmptyQuestion,
    #[error("the query is empty")]
    EmptyQuery,
    #[error("no session with id {id}")]
    UnknownSession { id: String },
    #[error("{what} index {index} is out of range (have {len})")]
    IndexOutOfRange { what: String, index: usize, len: usize },
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::EmptyQuestion => "EmptyQuestion",
            SessionError::EmptyQuery => "EmptyQuery",
            SessionError::UnknownSession { .. } => "UnknownSession",
            SessionError::IndexOutOfRange { .. } => "IndexOutOfRange",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionSettings {
    /// Idle sessions older than this are dropped.
    pub ttl_secs: u64,
    /// Upper bound on live sessions; the least recently used goes first.
    pub cap: usize,
}

impl Default for SessionSettings {
    fn default() -> Self {
        Self {
            ttl_secs: 3600,
            cap: 1000,
        }
    }
}

/// Mutations on one session queue on `gate`; readers take the snapshot
/// lock, which is only held for the final swap of a mutation.
struct Slot {
    gate: tokio::sync::Mutex<()>,
    snapshot: parking_lot::RwLock<SessionState>,
    last_access: parking_lot::Mutex<Instant>,
}

pub struct SessionService {
    pipeline: Arc<Pipeline>,
    settings: SessionSettings,
    examples: Vec<ExampleQuestion>,
    sessions: parking_lot::RwLock<HashMap<String, Arc<Slot>>>,
}

impl SessionService {
    pub fn new(pipeline: Arc<Pipeline>, settings: SessionSettings) -> Self {
        Self {
            pipeline,
            settings,
            examples: default_examples(),
            sessions: parking_lot::RwLock::new(HashMap::new()),
        }
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn list_examples(&self) -> Vec<ExampleQuestion> {
        self.examples.clone()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub async fn create_session(&self, question: &str) -> Result<SessionState, SessionError> {
        let question = question.trim();
        if question.is_empty() {
            return Err(SessionError::EmptyQuestion);
        }
        let id = uuid::Uuid::new_v4().to_string();
        let state = self.pipeline.run(id.clone(), question).await;
        let slot = Arc::new(Slot {
            gate: tokio::sync::Mutex::new(()),
            snapshot: parking_lot::RwLock::new(state.clone()),
            last_access: parking_lot::Mutex::new(Instant::now()),
        });
        let mut sessions = self.sessions.write();
        self.evict(&mut sessions);
        sessions.insert(id, slot);
        Ok(state)
    }

    fn evict(&self, sessions: &mut HashMap<String, Arc<Slot>>) {
        let ttl = Duration::from_secs(self.settings.ttl_secs);
        let now = Instant::now();
        sessions.retain(|_, s| now.duration_since(*s.last_access.lock()) < ttl);
        while sessions.len() >= self.settings.cap.max(1) {
            let oldest = sessions
                .iter()
                .min_by_key(|(_, s)| *s.last_access.lock())
                .map(|(k, _)| k.clone())
                .expect("non-empty");
            sessions.remove(&oldest);
        }
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, SessionError> {
        let slot = self
            .sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession { id: id.to_string() })?;
        let ttl = Duration::from_secs(self.settings.ttl_secs);
        let mut last = slot.last_access.lock();
        if last.elapsed() >= ttl {
            drop(last);
            self.sessions.write().remove(id);
            return Err(SessionError::UnknownSession { id: id.to_string() });
        }
        *last = Instant::now();
        drop(last);
        Ok(slot)
    }

    pub fn get_session(&self, id: &str) -> Result<SessionState, SessionError> {
        Ok(self.slot(id)?.snapshot.read().clone())
    }

    /// Serializes against other mutations of the same session, applies `f`
    /// to a working copy, bumps the revision and publishes the result. When
    /// `f` fails the published state is left untouched.
    async fn mutate<F>(&self, id: &str, f: F) -> Result<SessionState, SessionError>
    where
        F: for<'a> FnOnce(
            &'a Pipeline,
            &'a mut SessionState,
        ) -> futures::future::BoxFuture<'a, Result<(), SessionError>>,
    {
        let slot = self.slot(id)?;
        let _gate = slot.gate.lock().await;
        let mut working = slot.snapshot.read().clone();
        f(&self.pipeline, &mut working).await?;
        working.revision += 1;
        *slot.snapshot.write() = working.clone();
        Ok(working)
    }

    pub async fn select_entity(
        &self,
        id: &str,
        mention_index: usize,
        candidate_index: usize,
    ) -> Result<SessionState, SessionError> {
        self.mutate(id, |p, s| {
            Box::pin(async move {
                let len = s.mentions.len();
                let m = s.mentions.get_mut(mention_index).ok_or(SessionError::IndexOutOfRange {
                    what: "mention".into(),
                    index: mention_index,
                    len,
                })?;
                if candidate_index >= m.candidates.len() {
                    return Err(SessionError::IndexOutOfRange {
                        what: "candidate".into(),
                        index: candidate_index,
                        len: m.candidates.len(),
                    });
                }
                m.selected_index = Some(candidate_index);
                p.rebuild_and_execute(s).await;
                Ok(())
            })
        })
        .await
    }

    pub async fn select_template(&self, id: &str, template_index: usize) -> Result<SessionState, SessionError> {
        self.mutate(id, |p, s| {
            Box::pin(async move {
                if template_index >= s.template_matches.len() {
                    return Err(SessionError::IndexOutOfRange {
                        what: "template".into(),
                        index: template_index,
                        len: s.template_matches.len(),
                    });
                }
                s.selected_template = Some(template_index);
                p.rebuild_and_execute(s).await;
                Ok(())
            })
        })
        .await
    }

    /// Runs user-edited SPARQL. Validation findings are reported but never
    /// block execution.
    pub async fn run_query(&self, id: &str, sparql: &str) -> Result<SessionState, SessionError> {
        if sparql.trim().is_empty() {
            // Still distinguish unknown sessions from empty text.
            self.slot(id)?;
            return Err(SessionError::EmptyQuery);
        }
        let text = sparql.to_string();
        self.mutate(id, |p, s| {
            Box::pin(async move {
                s.validation = validate(&text, &p.vocab);
                s.query = Some(SparqlQuery {
                    text,
                    origin: QueryOrigin::UserEdited,
                });
                s.stage_errors.query = None;
                p.execute(s).await;
                Ok(())
            })
        })
        .await
    }

    /// Drops a manual edit and rebuilds the query from the current
    /// selections.
    pub async fn regenerate(&self, id: &str) -> Result<SessionState, SessionError> {
        self.mutate(id, |p, s| {
            Box::pin(async move {
                if s.query.as_ref().is_some_and(|q| q.origin == QueryOrigin::UserEdited) {
                    s.query = None;
                }
                if s.stage_errors.template.is_none() && s.logical_form.is_some() {
                    p.rebuild_and_execute(s).await;
                } else {
                    s.query = None;
                    s.validation.clear();
                    s.answers = None;
                }
                Ok(())
            })
        })
        .await
    }
}
