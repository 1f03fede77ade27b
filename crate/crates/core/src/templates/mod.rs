//! Entity-abstracted query templates mined from a training corpus, and
//! nearest-neighbour retrieval over them.

mod distance;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logical_form::{
    mask_entities, mask_raw, parse, parse_sparql, EntityKind, EntityMention, LogicalForm,
    ParseError, TemplateForm, Term, TermSite, Vocabulary,
};

pub use distance::{normalized_distance, token_edit_distance};

/// Number of templates offered to the user by default.
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub form: TemplateForm,
    pub placeholder_count: usize,
    /// Expected entity kind per placeholder, index 0 for `<topic1>`.
    pub placeholder_kinds: Vec<EntityKind>,
    /// Number of training items that abstract to this form.
    pub frequency: usize,
    /// Ids of the first few training items, for provenance.
    pub source_ids: Vec<String>,
    tokens: Vec<String>,
    text: String,
}

const MAX_SOURCE_IDS: usize = 5;

impl Template {
    pub fn new(form: TemplateForm, frequency: usize, source_ids: Vec<String>) -> Self {
        let placeholder_count = form.placeholder_count();
        let tokens = form.as_form().tokens();
        let text = tokens.join(" ");
        Self {
            form,
            placeholder_count,
            placeholder_kinds: vec![EntityKind::Unknown; placeholder_count],
            frequency,
            source_ids,
            tokens,
            text,
        }
    }

    pub fn with_kinds(mut self, vocab: &Vocabulary) -> Self {
        self.placeholder_kinds = placeholder_kinds(self.form.as_form(), vocab);
        self
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Canonical serialization.
    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Kind per placeholder, inferred from relation slots the same way as for
/// mentions.
fn placeholder_kinds(form: &LogicalForm, vocab: &Vocabulary) -> Vec<EntityKind> {
    let mut as_mentions = form.clone();
    as_mentions.for_each_term_mut(|t| {
        if let Term::Placeholder(n) = t {
            *t = Term::Mention(format!("__p{n}"));
        }
    });
    let mentions = crate::logical_form::extract_mentions(&as_mentions, vocab);
    form.placeholders()
        .iter()
        .map(|n| {
            let token = format!("__p{n}");
            mentions
                .iter()
                .find(|m| m.token == token)
                .map(|m| m.inferred_kind)
                .unwrap_or(EntityKind::Unknown)
        })
        .collect()
}

/// Abstracts a gold SPARQL query: every URI term and string literal becomes
/// `<topicN>` in first-occurrence order, integer literals stay, variables are
/// canonicalized. Returns the template and the abstracted values in
/// placeholder order.
pub fn templatize(sparql: &str, vocab: &Vocabulary) -> Result<(TemplateForm, Vec<Term>), ParseError> {
    let mut form = parse_sparql(sparql, vocab)?;
    let mut values: Vec<Term> = Vec::new();
    form.for_each_term_mut(|t| {
        if matches!(t, Term::Uri(_) | Term::Literal(crate::logical_form::Literal::String { .. })) {
            let n = match values.iter().position(|v| v == t) {
                Some(i) => i + 1,
                None => {
                    values.push(t.clone());
                    values.len()
                }
            };
            *t = Term::Placeholder(n as u32);
        }
    });
    form.canonicalize_variables();
    Ok((TemplateForm::new(form), values))
}

/// A logical form prepared for retrieval.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalQuery {
    pub tokens: Vec<String>,
    pub mentions: Vec<EntityMention>,
    /// Present when the text parsed; absent when raw token masking was used.
    pub masked: Option<TemplateForm>,
}

impl RetrievalQuery {
    /// Masks mentions and canonicalizes variables. Text that does not parse
    /// is masked token by token instead.
    pub fn from_logical_form(text: &str, vocab: &Vocabulary) -> Self {
        match parse(text, vocab) {
            Ok(form) => Self::from_form(&form, vocab),
            Err(_) => {
                let (tokens, mentions) = mask_raw(text, vocab);
                Self {
                    tokens,
                    mentions,
                    masked: None,
                }
            }
        }
    }

    pub fn from_form(form: &LogicalForm, vocab: &Vocabulary) -> Self {
        let (masked, mentions) = mask_entities(form, vocab);
        let mut canonical = masked.into_form();
        canonical.canonicalize_variables();
        Self {
            tokens: canonical.tokens(),
            mentions,
            masked: Some(TemplateForm::new(canonical)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemplateMatch {
    /// Index into [`TemplateBase::templates`].
    pub template: usize,
    /// Normalized token edit distance in `[0, 1]`.
    pub distance: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedItem {
    pub id: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BuildReport {
    pub items: usize,
    pub templates: usize,
    pub skipped: Vec<SkippedItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrieveError {
    #[error("the template base is empty")]
    EmptyTemplateBase,
}

#[derive(Debug, Error)]
pub enum TemplateStoreError {
    #[error("cannot read template file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed template file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("template {index} does not parse: {source}")]
    BadTemplate { index: usize, source: ParseError },
    #[error("unsupported template file version {0}")]
    Version(u32),
}

const FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct StoredBase {
    version: u32,
    built_from: BuiltFrom,
    templates: Vec<StoredTemplate>,
}

#[derive(Serialize, Deserialize)]
struct StoredTemplate {
    form: String,
    frequency: usize,
    source_ids: Vec<String>,
}

/// Where a base came from: dataset identifier and number of items read.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuiltFrom {
    pub dataset: String,
    pub items: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemplateBase {
    templates: Vec<Template>,
    pub built_from: BuiltFrom,
}

impl TemplateBase {
    pub fn new(templates: Vec<Template>) -> Self {
        Self {
            templates,
            built_from: BuiltFrom::default(),
        }
    }

    /// One template per distinct abstracted query, in first-seen order.
    /// Items whose gold query falls outside the supported subset are skipped
    /// and reported.
    pub fn build<'a>(
        dataset: &str,
        items: impl IntoIterator<Item = (&'a str, &'a str)>,
        vocab: &Vocabulary,
    ) -> (Self, BuildReport) {
        let mut report = BuildReport::default();
        let mut templates: Vec<Template> = Vec::new();
        let mut by_text: HashMap<String, usize> = HashMap::new();
        for (id, sparql) in items {
            report.items += 1;
            let (form, _) = match templatize(sparql, vocab) {
                Ok(t) => t,
                Err(e) => {
                    report.skipped.push(SkippedItem {
                        id: id.to_string(),
                        code: e.code().to_string(),
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            let key = form.serialize();
            match by_text.get(&key) {
                Some(&i) => {
                    let t = &mut templates[i];
                    t.frequency += 1;
                    if t.source_ids.len() < MAX_SOURCE_IDS {
                        t.source_ids.push(id.to_string());
                    }
                }
                None => {
                    by_text.insert(key, templates.len());
                    templates.push(Template::new(form, 1, vec![id.to_string()]).with_kinds(vocab));
                }
            }
        }
        report.templates = templates.len();
        let built_from = BuiltFrom {
            dataset: dataset.to_string(),
            items: report.items,
        };
        (Self { templates, built_from }, report)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn get(&self, index: usize) -> Option<&Template> {
        self.templates.get(index)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// The `k` nearest templates by normalized token edit distance. Ties go
    /// to higher frequency, then to the lexicographically smaller canonical
    /// serialization.
    pub fn retrieve(&self, query: &RetrievalQuery, k: usize) -> Result<Vec<TemplateMatch>, RetrieveError> {
        if self.templates.is_empty() {
            return Err(RetrieveError::EmptyTemplateBase);
        }
        let mut scored: Vec<(usize, f64)> = self
            .templates
            .iter()
            .enumerate()
            .map(|(i, t)| (i, normalized_distance(&query.tokens, &t.tokens)))
            .collect();
        scored.sort_by(|(ia, da), (ib, db)| {
            da.total_cmp(db)
                .then(self.templates[*ib].frequency.cmp(&self.templates[*ia].frequency))
                .then_with(|| self.templates[*ia].text.cmp(&self.templates[*ib].text))
        });
        Ok(scored
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(r, (template, distance))| TemplateMatch {
                template,
                distance,
                rank: r + 1,
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        let stored = StoredBase {
            version: FILE_VERSION,
            built_from: self.built_from.clone(),
            templates: self
                .templates
                .iter()
                .map(|t| StoredTemplate {
                    form: t.text.clone(),
                    frequency: t.frequency,
                    source_ids: t.source_ids.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&stored).expect("template base serializes")
    }

    pub fn from_json(text: &str, vocab: &Vocabulary) -> Result<Self, TemplateStoreError> {
        let stored: StoredBase = serde_json::from_str(text)?;
        if stored.version != FILE_VERSION {
            return Err(TemplateStoreError::Version(stored.version));
        }
        let templates = stored
            .templates
            .into_iter()
            .enumerate()
            .map(|(index, t)| {
                let form = parse(&t.form, vocab)
                    .map_err(|source| TemplateStoreError::BadTemplate { index, source })?;
                Ok(Template::new(TemplateForm::new(form), t.frequency, t.source_ids).with_kinds(vocab))
            })
            .collect::<Result<_, TemplateStoreError>>()?;
        Ok(Self {
            templates,
            built_from: stored.built_from,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), TemplateStoreError> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: &Path, vocab: &Vocabulary) -> Result<Self, TemplateStoreError> {
        Self::from_json(&std::fs::read_to_string(path)?, vocab)
    }
}

/// Sites of each placeholder, for display.
pub fn placeholder_sites(form: &TemplateForm) -> Vec<(u32, String)> {
    let mut out = Vec::new();
    form.as_form().for_each_term(|t, site| {
        if let Term::Placeholder(n) = t {
            let where_ = match site {
                TermSite::Subject { relation, .. } => format!("subject of {relation}"),
                TermSite::Object { relation, .. } => format!("object of {relation}"),
                TermSite::FilterOperand { .. } => "filter operand".to_string(),
            };
            out.push((*n, where_));
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BERT_GOLD: &str = "SELECT DISTINCT ?firstanswer ?secondanswer WHERE { <https://dblp.org/rec/conf/naacl/DevlinCLT19> <https://dblp.org/rdf/schema#authoredBy> ?firstanswer . ?paper <https://dblp.org/rdf/schema#authoredBy> ?firstanswer . ?paper <https://dblp.org/rdf/schema#publishedIn> ?secondanswer FILTER ( ?paper != <https://dblp.org/rec/conf/naacl/DevlinCLT19> ) }";
    const BERT_LF: &str = "SELECT DISTINCT ?firstanswer ?secondanswer WHERE { the_BERT_paper <authoredBy> ?firstanswer <dot> ?x <authoredBy> ?firstanswer <dot> ?x <publishedIn> ?secondanswer FILTER ( ?x <isnot> the_BERT_paper ) }";

    #[test]
    fn gold_and_generated_forms_meet_at_distance_zero() {
        let vocab = Vocabulary::dblp();
        let (base, report) = TemplateBase::build("test", [("q1", BERT_GOLD)], &vocab);
        assert_eq!(report.templates, 1);
        let q = RetrievalQuery::from_logical_form(BERT_LF, &vocab);
        let m = base.retrieve(&q, 5).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].distance, 0.0);
        assert_eq!(base.templates()[0].placeholder_kinds, vec![EntityKind::Publication]);
    }

    #[test]
    fn templatize_keeps_years_and_numbers_uris_by_first_occurrence() {
        let vocab = Vocabulary::dblp();
        let (t, values) = templatize(
            "SELECT ?p WHERE { ?p <https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/a> . ?p <https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/b> . ?p <https://dblp.org/rdf/schema#yearOfPublication> 2019 . <https://dblp.org/pid/a> <https://dblp.org/rdf/schema#primaryAffiliation> \"MIT\" }",
            &vocab,
        )
        .unwrap();
        assert_eq!(
            t.serialize(),
            "SELECT ?v1 WHERE { ?v1 <authoredBy> <topic1> <dot> ?v1 <authoredBy> <topic2> <dot> ?v1 <yearOfPublication> 2019 <dot> <topic1> <primaryAffiliation> <topic3> }"
        );
        assert_eq!(values.len(), 3);
    }

    #[test]
    fn duplicates_collapse_and_unsupported_items_are_reported() {
        let vocab = Vocabulary::dblp();
        let other = BERT_GOLD.replace("DevlinCLT19", "Other20");
        let bad = "SELECT ?x WHERE { ?x <https://dblp.org/rdf/schema#yearOfPublication> ?y FILTER ( ?y > YEAR(NOW()) - 5 ) }";
        let (base, report) = TemplateBase::build("test", [("a", BERT_GOLD), ("b", other.as_str()), ("c", bad)], &vocab);
        assert_eq!(base.len(), 1);
        assert_eq!(base.templates()[0].frequency, 2);
        assert_eq!(report.items, 3);
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].id, "c");
    }

    #[test]
    fn ranking_is_ascending_with_frequency_tiebreak() {
        let vocab = Vocabulary::dblp();
        let a = "SELECT ?x WHERE { ?x <https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/1> }";
        let b = "SELECT ?x WHERE { <https://dblp.org/pid/1> <https://dblp.org/rdf/schema#authoredBy> ?x }";
        let (base, _) = TemplateBase::build("test", [("1", a), ("2", b), ("3", b)], &vocab);
        let q = RetrievalQuery::from_logical_form("SELECT ?y WHERE { ?y <authoredBy> Alice }", &vocab);
        let m = base.retrieve(&q, 5).unwrap();
        assert_eq!(m[0].template, 0);
        assert_eq!(m[0].distance, 0.0);
        assert!(m[1].distance > 0.0);
        assert_eq!(m[1].rank, 2);
    }

    #[test]
    fn raw_path_for_malformed_forms() {
        let vocab = Vocabulary::dblp();
        let (base, _) = TemplateBase::build("test", [("q1", BERT_GOLD)], &vocab);
        let q = RetrievalQuery::from_logical_form(&BERT_LF.replacen(" )", "", 1), &vocab);
        assert!(q.masked.is_none());
        let m = base.retrieve(&q, 5).unwrap();
        assert!(m[0].distance > 0.0 && m[0].distance < 0.1);
    }

    #[test]
    fn json_round_trip() {
        let vocab = Vocabulary::dblp();
        let (base, _) = TemplateBase::build("test", [("q1", BERT_GOLD)], &vocab);
        let back = TemplateBase::from_json(&base.to_json(), &vocab).unwrap();
        assert_eq!(back, base);
    }
}
