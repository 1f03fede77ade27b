use std::sync::Arc;

use super::{LogicalFormStage, MentionState, SessionState, StageError, StageErrors, TemplateChoice};
use crate::linker::{link, match_literal, EntitySearch};
use crate::logical_form::Vocabulary;
use crate::query::{instantiate, instantiate_form, validate, Binding, Diagnostic, QueryOrigin, Severity, SparqlQuery};
use crate::sparql::QueryExecutor;
use crate::templates::{RetrievalQuery, TemplateBase};
use crate::translator::{TranslateError, Translator};

/// The four stages wired together. Cheap to clone; holds no session state.
#[derive(Clone)]
pub struct Pipeline {
    pub vocab: Arc<Vocabulary>,
    pub translator: Arc<dyn Translator>,
    pub search: Arc<dyn EntitySearch>,
    pub executor: Arc<dyn QueryExecutor>,
    pub templates: Arc<TemplateBase>,
    /// Templates offered per question.
    pub top_k: usize,
    /// Candidates kept per mention.
    pub candidates_per_mention: usize,
}

impl Pipeline {
    /// Runs every stage for a new question. Stage failures are recorded in
    /// the state; this never fails.
    pub async fn run(&self, id: String, question: &str) -> SessionState {
        let mut state = SessionState {
            id,
            question: question.to_string(),
            revision: 1,
            logical_form: None,
            mentions: Vec::new(),
            template_matches: Vec::new(),
            selected_template: None,
            query: None,
            validation: Vec::new(),
            answers: None,
            stage_errors: StageErrors::default(),
        };

        let retrieval = match self.translator.translate(question).await {
            Ok(tr) => {
                let q = RetrievalQuery::from_form(&tr.form, &self.vocab);
                state.logical_form = Some(LogicalFormStage {
                    text: tr.text,
                    parsed: true,
                    diagnostics: Vec::new(),
                    form: Some(tr.form),
                });
                q
            }
            Err(e) => {
                state.stage_errors.translator = Some(StageError::new(e.code(), &e));
                match e {
                    TranslateError::MalformedModelOutput { ref raw, .. } => {
                        state.logical_form = Some(LogicalFormStage {
                            text: raw.clone(),
                            parsed: false,
                            diagnostics: vec![Diagnostic {
                                severity: Severity::Error,
                                code: e.code().to_string(),
                                message: e.to_string(),
                                line: None,
                                column: None,
                            }],
                            form: None,
                        });
                        RetrievalQuery::from_logical_form(raw, &self.vocab)
                    }
                    _ => {
                        let s = &mut state.stage_errors;
                        s.linker = Some(StageError::skipped("translator"));
                        s.template = Some(StageError::skipped("translator"));
                        s.query = Some(StageError::skipped("translator"));
                        s.execution = Some(StageError::skipped("translator"));
                        return state;
                    }
                }
            }
        };

        state.mentions = self.link_mentions(&retrieval).await;
        state.stage_errors.linker = state.mentions.iter().find_map(|m| m.error.clone());

        match self.templates.retrieve(&retrieval, self.top_k) {
            Ok(matches) => {
                state.template_matches = matches
                    .iter()
                    .map(|m| {
                        let t = &self.templates.templates()[m.template];
                        TemplateChoice {
                            rank: m.rank,
                            distance: m.distance,
                            template: t.text().to_string(),
                            placeholder_count: t.placeholder_count,
                            placeholder_kinds: t.placeholder_kinds.clone(),
                            frequency: t.frequency,
                            base_index: m.template,
                        }
                    })
                    .collect();
                state.selected_template = (!state.template_matches.is_empty()).then_some(0);
            }
            Err(e) => {
                state.stage_errors.template = Some(StageError::new("EmptyTemplateBase", e));
                state.stage_errors.query = Some(StageError::skipped("template"));
                state.stage_errors.execution = Some(StageError::skipped("template"));
                return state;
            }
        }

        self.rebuild_and_execute(&mut state).await;
        state
    }

    async fn link_mentions(&self, retrieval: &RetrievalQuery) -> Vec<MentionState> {
        let lookups = retrieval.mentions.iter().map(|m| async move {
            if m.inferred_kind.is_literal() {
                return match match_literal(m) {
                    Ok(term) => MentionState {
                        mention: m.clone(),
                        candidates: Vec::new(),
                        literal: Some(term),
                        selected_index: None,
                        error: None,
                    },
                    Err(e) => MentionState {
                        mention: m.clone(),
                        candidates: Vec::new(),
                        literal: None,
                        selected_index: None,
                        error: Some(StageError::new(e.code(), &e)),
                    },
                };
            }
            match link(self.search.as_ref(), m).await {
                Ok(mut candidates) => {
                    candidates.truncate(self.candidates_per_mention);
                    MentionState {
                        mention: m.clone(),
                        selected_index: (!candidates.is_empty()).then_some(0),
                        candidates,
                        literal: None,
                        error: None,
                    }
                }
                Err(e) => MentionState {
                    mention: m.clone(),
                    candidates: Vec::new(),
                    literal: None,
                    selected_index: None,
                    error: Some(StageError::new(e.code(), &e)),
                },
            }
        });
        futures::future::join_all(lookups).await
    }

    /// Whether the generated form is used as-is: it parsed and the selected
    /// template is the rank-1 match at distance 0.
    fn uses_generated_form(state: &SessionState) -> bool {
        let parsed = state.logical_form.as_ref().is_some_and(|lf| lf.form.is_some());
        let exact = state
            .selected_template
            .and_then(|i| state.template_matches.get(i))
            .is_some_and(|t| t.rank == 1 && t.distance == 0.0);
        parsed && exact
    }

    /// Builds the query from the current selections. Leaves a user-edited
    /// query alone.
    pub fn build_query(&self, state: &SessionState) -> Result<SparqlQuery, StageError> {
        if Self::uses_generated_form(state) {
            let form = state
                .logical_form
                .as_ref()
                .and_then(|lf| lf.form.as_ref())
                .expect("checked by uses_generated_form");
            let bindings: Vec<Binding> = state
                .mentions
                .iter()
                .filter_map(|m| m.bound_value().map(|v| Binding::mention(m.mention.token.clone(), v)))
                .collect();
            return instantiate_form(form, &bindings, QueryOrigin::Generated, &self.vocab)
                .map_err(|e| StageError::new(e.code(), &e));
        }
        let choice = state
            .selected_template
            .and_then(|i| state.template_matches.get(i))
            .ok_or_else(|| StageError::new("NoTemplate", "no template is selected"))?;
        let template = self
            .templates
            .get(choice.base_index)
            .ok_or_else(|| StageError::new("NoTemplate", "selected template is not in the base"))?;
        let bindings: Vec<Binding> = (1..=template.placeholder_count as u32)
            .filter_map(|n| {
                let m = state.mentions.iter().find(|m| m.mention.occurrence_index == n)?;
                Some(Binding::topic(n, m.bound_value()?))
            })
            .collect();
        instantiate(template, &bindings, &self.vocab).map_err(|e| StageError::new(e.code(), &e))
    }

    /// Rebuilds the query (unless user-edited) and executes it.
    pub async fn rebuild_and_execute(&self, state: &mut SessionState) {
        if state.query.as_ref().is_some_and(|q| q.origin == QueryOrigin::UserEdited) {
            return;
        }
        match self.build_query(state) {
            Ok(q) => {
                state.stage_errors.query = None;
                state.validation = validate(&q.text, &self.vocab);
                state.query = Some(q);
                self.execute(state).await;
            }
            Err(e) => {
                // Unbound placeholders after a failed lookup are the linker's fault.
                let e = if e.code == "UnboundPlaceholder" && state.stage_errors.linker.is_some() {
                    StageError::skipped("linker")
                } else {
                    e
                };
                state.stage_errors.query = Some(e);
                state.stage_errors.execution = Some(StageError::skipped("query"));
                state.query = None;
                state.validation = Vec::new();
                state.answers = None;
            }
        }
    }

    /// Executes the current query, replacing or clearing the answers.
    pub async fn execute(&self, state: &mut SessionState) {
        let Some(query) = &state.query else { return };
        match self.executor.execute(query).await {
            Ok(table) => {
                state.answers = Some(table);
                state.stage_errors.execution = None;
            }
            Err(e) => {
                state.answers = None;
                state.stage_errors.execution = Some(StageError::new(e.code(), &e));
            }
        }
    }
}
