use serde::{Deserialize, Serialize};

use crate::logical_form::{parse_sparql, ParseError, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    /// 1-based; absent for whole-query problems.
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Syntactic check against the supported subset. Constructs that are valid
/// SPARQL but outside the subset, and predicates missing from the schema
/// vocabulary, are warnings: the endpoint may still accept them. Everything
/// else is an error. An empty list means the query is clean.
pub fn validate(text: &str, vocab: &Vocabulary) -> Vec<Diagnostic> {
    let Err(e) = parse_sparql(text, vocab) else {
        return Vec::new();
    };
    let severity = match e {
        ParseError::Unsupported { .. } | ParseError::UnknownPredicate { .. } => Severity::Warning,
        _ => Severity::Error,
    };
    let pos = e.position();
    vec![Diagnostic {
        severity,
        code: e.code().to_string(),
        message: e.to_string(),
        line: pos.map(|p| p.line),
        column: pos.map(|p| p.column),
    }]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_query_has_no_diagnostics() {
        let v = Vocabulary::dblp();
        assert!(validate(
            "SELECT ?x WHERE { ?x <https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/1> }",
            &v
        )
        .is_empty());
    }

    #[test]
    fn unbalanced_brace_is_one_positioned_error() {
        let v = Vocabulary::dblp();
        let d = validate("SELECT ?x WHERE {\n  ?x <https://dblp.org/rdf/schema#authoredBy> ?y", &v);
        assert_eq!(d.len(), 1);
        assert!(d[0].is_error());
        assert_eq!(d[0].code, "UnbalancedDelimiter");
        assert!(d[0].line.is_some() && d[0].column.is_some());
    }

    #[test]
    fn optional_is_a_warning() {
        let v = Vocabulary::dblp();
        let d = validate(
            "SELECT ?x WHERE { ?x <https://dblp.org/rdf/schema#authoredBy> ?y OPTIONAL { ?x <https://dblp.org/rdf/schema#title> ?t } }",
            &v,
        );
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert_eq!(d[0].line, Some(1));
    }

    #[test]
    fn empty_text_is_an_error() {
        let d = validate("   ", &Vocabulary::dblp());
        assert!(d[0].is_error());
        assert_eq!(d[0].line, None);
    }
}
