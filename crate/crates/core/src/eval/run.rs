use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{score, DatasetItem, ItemScore, ScoreReport};
use crate::logical_form::{ParseError, Vocabulary};
use crate::query::{instantiate, normalize, Binding, SparqlQuery};
use crate::session::{Pipeline, SessionState};
use crate::templates::{templatize, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Question through every stage.
    Full,
    /// The gold query is templatized and re-instantiated with its own
    /// values, bypassing the translator and linker.
    #[serde(alias = "gold-lf")]
    GoldLogicalForm,
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(EvalMode::Full),
            "gold-lf" | "gold-logical-form" => Ok(EvalMode::GoldLogicalForm),
            _ => Err(format!("unknown mode `{s}` (expected full or gold-lf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundTrip {
    /// The rebuilt query normalizes to the same text as the gold query.
    Clean(SparqlQuery),
    Mismatch { expected: String, rebuilt: SparqlQuery },
    Unparseable(ParseError),
}

/// Templatizes `gold`, instantiates the template with the abstracted values
/// and compares normalized texts.
pub fn round_trip(gold: &str, vocab: &Vocabulary) -> RoundTrip {
    let (form, values) = match templatize(gold, vocab) {
        Ok(t) => t,
        Err(e) => return RoundTrip::Unparseable(e),
    };
    let expected = match normalize(gold, vocab) {
        Ok(t) => t,
        Err(crate::query::NormalizeError::ParseFailure(e)) => return RoundTrip::Unparseable(e),
    };
    let template = Template::new(form, 1, Vec::new());
    let bindings: Vec<Binding> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| Binding::topic(i as u32 + 1, v))
        .collect();
    let rebuilt = match instantiate(&template, &bindings, vocab) {
        Ok(q) => q,
        Err(e) => {
            return RoundTrip::Mismatch {
                expected,
                rebuilt: SparqlQuery {
                    text: e.to_string(),
                    origin: crate::query::QueryOrigin::TemplateCorrected,
                },
            }
        }
    };
    match normalize(&rebuilt.text, vocab) {
        Ok(t) if t == expected => RoundTrip::Clean(rebuilt),
        _ => RoundTrip::Mismatch { expected, rebuilt },
    }
}

fn scored(
    item: &DatasetItem,
    predicted: BTreeSet<String>,
    error: Option<String>,
    query: Option<String>,
    round_trip: Option<bool>,
) -> ItemScore {
    let s = score(&predicted, &item.gold_answers);
    ItemScore {
        id: item.id.clone(),
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        error,
        round_trip,
        query,
        missing: item.gold_answers.difference(&predicted).cloned().collect(),
        unexpected: predicted.difference(&item.gold_answers).cloned().collect(),
    }
}

/// The error tag of a finished session without answers: the first stage
/// that failed on its own account.
fn first_error(state: &SessionState) -> String {
    let e = &state.stage_errors;
    [&e.translator, &e.linker, &e.template, &e.query, &e.execution]
        .into_iter()
        .flatten()
        .find(|s| !s.skipped)
        .map(|s| s.code.clone())
        .unwrap_or_else(|| "NoAnswers".to_string())
}

async fn full(pipeline: &Pipeline, item: &DatasetItem) -> ItemScore {
    let state = pipeline.run(item.id.clone(), &item.question).await;
    let query = state.query.as_ref().map(|q| q.text.clone());
    match &state.answers {
        Some(table) => scored(item, table.answer_set().into_iter().collect(), None, query, None),
        None => scored(item, BTreeSet::new(), Some(first_error(&state)), query, None),
    }
}

async fn gold_lf(pipeline: &Pipeline, item: &DatasetItem) -> ItemScore {
    let (query, clean) = match round_trip(&item.gold_query, &pipeline.vocab) {
        RoundTrip::Clean(q) => (q, true),
        RoundTrip::Mismatch { rebuilt, .. } => (rebuilt, false),
        RoundTrip::Unparseable(e) => return scored(item, BTreeSet::new(), Some(e.code().to_string()), None, Some(false)),
    };
    match pipeline.executor.execute(&query).await {
        Ok(table) => scored(
            item,
            table.answer_set().into_iter().collect(),
            None,
            Some(query.text),
            Some(clean),
        ),
        Err(e) => scored(item, BTreeSet::new(), Some(e.code().to_string()), Some(query.text), Some(clean)),
    }
}

async fn score_item(pipeline: &Pipeline, item: &DatasetItem, mode: EvalMode) -> ItemScore {
    match mode {
        EvalMode::Full => full(pipeline, item).await,
        EvalMode::GoldLogicalForm => gold_lf(pipeline, item).await,
    }
}

/// Scores every item; individual failures become error-tagged empty
/// predictions. At most `parallelism` items run at once. Items are reported
/// in id order.
pub async fn evaluate(pipeline: &Pipeline, items: &[DatasetItem], mode: EvalMode, parallelism: usize) -> ScoreReport {
    let permits = tokio::sync::Semaphore::new(parallelism.max(1));
    let permits = &permits;
    let scores: Vec<ItemScore> = futures::future::join_all(items.iter().map(|item| async move {
        let _permit = permits.acquire().await.expect("semaphore is never closed");
        score_item(pipeline, item, mode).await
    }))
    .await;
    ScoreReport::new(mode, scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_walkthrough_gold() {
        let vocab = Vocabulary::dblp();
        let gold = "SELECT DISTINCT ?firstanswer ?secondanswer WHERE { <https://dblp.org/rec/conf/naacl/DevlinCLT19> <https://dblp.org/rdf/schema#authoredBy> ?firstanswer . ?x <https://dblp.org/rdf/schema#authoredBy> ?firstanswer . ?x <https://dblp.org/rdf/schema#publishedIn> ?secondanswer . FILTER ( ?x != <https://dblp.org/rec/conf/naacl/DevlinCLT19> ) }";
        assert!(matches!(round_trip(gold, &vocab), RoundTrip::Clean(_)));
    }

    #[test]
    fn round_trip_unparseable() {
        let vocab = Vocabulary::dblp();
        assert!(matches!(round_trip("SELECT ?x WHERE {", &vocab), RoundTrip::Unparseable(_)));
    }

    #[test]
    fn mode_parse() {
        assert_eq!("gold-lf".parse::<EvalMode>().unwrap(), EvalMode::GoldLogicalForm);
        assert!("x".parse::<EvalMode>().is_err());
    }
}
