//! Dataset loading and answer-set scoring against question/SPARQL pairs.

mod report;
mod run;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::sparql::parse_results;

pub use report::{ItemScore, ScoreReport};
pub use run::{evaluate, round_trip, EvalMode, RoundTrip};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetItem {
    pub id: String,
    pub question: String,
    pub gold_query: String,
    /// Canonical answer strings: URIs verbatim, literals by lexical form,
    /// booleans as `true`/`false`.
    pub gold_answers: BTreeSet<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    FileUnreadable { path: PathBuf, source: std::io::Error },
    #[error("dataset does not match the expected schema at {path}: {message}")]
    SchemaMismatch {
        path: String,
        id: Option<String>,
        message: String,
    },
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::FileUnreadable { .. } => "FileUnreadable",
            DatasetError::SchemaMismatch { .. } => "SchemaMismatch",
        }
    }
}

fn mismatch(path: String, id: Option<&str>, message: impl Into<String>) -> DatasetError {
    DatasetError::SchemaMismatch {
        path,
        id: id.map(str::to_string),
        message: message.into(),
    }
}

/// Reads a string field that is either a plain string or an object holding
/// the string under `inner` (`{"question": {"string": ...}}`).
fn text_field<'a>(item: &'a Value, keys: &[&str], inner: &str) -> Option<&'a str> {
    keys.iter().find_map(|k| match item.get(*k)? {
        Value::String(s) => Some(s.as_str()),
        Value::Object(o) => o.get(inner)?.as_str(),
        _ => None,
    })
}

fn answers(value: &Value, path: &str, id: &str) -> Result<BTreeSet<String>, DatasetError> {
    match value {
        Value::Null => Ok(BTreeSet::new()),
        Value::Array(xs) => xs
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::String(s) => Ok(s.clone()),
                Value::Bool(b) => Ok(b.to_string()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(mismatch(format!("{path}[{i}]"), Some(id), "answer is not a scalar")),
            })
            .collect(),
        Value::Object(_) => {
            let table = parse_results(&value.to_string())
                .map_err(|e| mismatch(path.to_string(), Some(id), e.to_string()))?;
            Ok(table.answer_set().into_iter().collect())
        }
        _ => Err(mismatch(path.to_string(), Some(id), "answer is neither a result set nor a list")),
    }
}

/// Parses a dataset document: either `{"questions": [...]}` or a bare array.
/// Items keep file order.
pub fn parse_dataset(text: &str) -> Result<Vec<DatasetItem>, DatasetError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| mismatch("$".into(), None, e.to_string()))?;
    let (list, prefix) = match &doc {
        Value::Array(xs) => (xs, "$"),
        Value::Object(o) => match o.get("questions") {
            Some(Value::Array(xs)) => (xs, "$.questions"),
            _ => return Err(mismatch("$.questions".into(), None, "expected an array of items")),
        },
        _ => return Err(mismatch("$".into(), None, "expected an object or array")),
    };
    let mut seen = BTreeSet::new();
    let mut items = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let at = format!("{prefix}[{i}]");
        let id = match item.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => return Err(mismatch(format!("{at}.id"), None, "missing id")),
        };
        if !seen.insert(id.clone()) {
            return Err(mismatch(format!("{at}.id"), Some(&id), "duplicate id"));
        }
        let question = text_field(item, &["question"], "string")
            .ok_or_else(|| mismatch(format!("{at}.question"), Some(&id), format!("item {id} has no question")))?;
        let gold_query = text_field(item, &["query", "gold_query"], "sparql")
            .ok_or_else(|| mismatch(format!("{at}.query"), Some(&id), format!("item {id} has no gold query")))?;
        let (key, value) = ["answer", "gold_answers"]
            .iter()
            .find_map(|k| item.get(*k).map(|v| (*k, v)))
            .unwrap_or(("answer", &Value::Null));
        let gold_answers = answers(value, &format!("{at}.{key}"), &id)?;
        items.push(DatasetItem {
            id,
            question: question.to_string(),
            gold_query: gold_query.to_string(),
            gold_answers,
        });
    }
    Ok(items)
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetItem>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Set precision, recall and F1. Both sets empty scores (1, 1, 1); an empty
/// side against a non-empty one scores 0 on that side.
pub fn score(predicted: &BTreeSet<String>, gold: &BTreeSet<String>) -> Scores {
    if predicted.is_empty() && gold.is_empty() {
        return Scores {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
    }
    let hits = predicted.intersection(gold).count() as f64;
    let ratio = |n: usize| if n == 0 { 0.0 } else { hits / n as f64 };
    let precision = ratio(predicted.len());
    let recall = ratio(gold.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Scores { precision, recall, f1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn score_examples() {
        let s = score(&set(&["a", "b"]), &set(&["b", "c"]));
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
        let s = score(&set(&[]), &set(&[]));
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = score(&set(&[]), &set(&["a"]));
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        let s = score(&set(&["a"]), &set(&["a"]));
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn parses_quad_layout() {
        let text = r#"{"questions": [
            {"id": "Q1", "question": {"string": "who?"}, "query": {"sparql": "ASK { <https://x> ?p ?o }"},
             "answer": {"head": {}, "boolean": true}},
            {"id": "Q2", "question": "which?", "query": "SELECT ?x WHERE { ?x ?p ?o }",
             "answer": {"head": {"vars": ["x"]}, "results": {"bindings": [
                {"x": {"type": "uri", "value": "https://a"}},
                {"x": {"type": "literal", "value": "2019", "datatype": "http://www.w3.org/2001/XMLSchema#gYear"}}]}}}
        ]}"#;
        let items = parse_dataset(text).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].gold_answers, set(&["true"]));
        assert_eq!(items[1].gold_answers, set(&["2019", "https://a"]));
        assert_eq!(items[1].question, "which?");
    }

    #[test]
    fn empty_and_missing_query() {
        assert!(parse_dataset("[]").unwrap().is_empty());
        assert!(parse_dataset(r#"{"questions": []}"#).unwrap().is_empty());
        let err = parse_dataset(r#"[{"id": "Q7", "question": "q"}]"#).unwrap_err();
        match err {
            DatasetError::SchemaMismatch { path, id, message } => {
                assert_eq!(path, "$[0].query");
                assert_eq!(id.as_deref(), Some("Q7"));
                assert!(message.contains("Q7"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = r#"[{"id": "a", "question": "q", "query": "ASK {}"}, {"id": "a", "question": "q", "query": "ASK {}"}]"#;
        assert!(matches!(parse_dataset(text), Err(DatasetError::SchemaMismatch { .. })));
    }
}
