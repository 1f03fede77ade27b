//! The logical-form language: a tokenized, SPARQL-shaped intermediate form in
//! which entities are still written as natural-language mentions.
//!
//! ```text
//! SELECT DISTINCT ?firstanswer ?secondanswer WHERE { the_BERT_paper <authoredBy>
//!   ?firstanswer <dot> ?x <authoredBy> ?firstanswer <dot> ?x <publishedIn>
//!   ?secondanswer FILTER ( ?x <isnot> the_BERT_paper ) }
//! ```
//!
//! The same AST also carries parsed SPARQL (absolute URIs instead of
//! mentions) and templates (`<topicN>` placeholders instead of entities), so
//! one parser and one writer serve all three.

mod lexer;
mod mentions;
mod parser;
mod vocab;
mod writer;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use lexer::Position;
pub use mentions::{extract_mentions, mask_entities, mask_raw, EntityMention, MentionPosition, Slot};
pub use parser::{parse, parse_sparql, ParseError};
pub use vocab::{
    is_absolute_uri, Keyword, ManifestError, Operator, Relation, Structural, TokenClass,
    Vocabulary, DEFAULT_MANIFEST,
};
pub use writer::RenderError;

/// Variables never renamed by canonicalization; they name answer columns.
pub const RESERVED_VARIABLES: [&str; 2] = ["?firstanswer", "?secondanswer"];

/// What a mention is expected to denote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityKind {
    Publication,
    Person,
    Venue,
    LiteralYear,
    LiteralString,
    Unknown,
}

impl EntityKind {
    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Publication => "publication",
            EntityKind::Person => "person",
            EntityKind::Venue => "venue",
            EntityKind::LiteralYear => "literal-year",
            EntityKind::LiteralString => "literal-string",
            EntityKind::Unknown => "unknown",
        }
    }

    pub fn from_name(name: &str) -> Option<EntityKind> {
        [
            EntityKind::Publication,
            EntityKind::Person,
            EntityKind::Venue,
            EntityKind::LiteralYear,
            EntityKind::LiteralString,
            EntityKind::Unknown,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }

    pub fn is_literal(self) -> bool {
        matches!(self, EntityKind::LiteralYear | EntityKind::LiteralString)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Literal {
    Integer { value: i64 },
    /// A quoted string; `suffix` keeps a language tag (`@en`) or datatype
    /// (`^^<...>`) verbatim.
    String { value: String, suffix: Option<String> },
}

impl Literal {
    pub fn integer(value: i64) -> Self {
        Literal::Integer { value }
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal::String {
            value: value.into(),
            suffix: None,
        }
    }

    /// Lexical form, without quotes or suffix.
    pub fn lexical(&self) -> String {
        match self {
            Literal::Integer { value } => value.to_string(),
            Literal::String { value, .. } => value.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "kebab-case")]
pub enum Term {
    /// Includes the leading `?`.
    Variable(String),
    /// Underscore-joined surface text, e.g. `the_BERT_paper`.
    Mention(String),
    Literal(Literal),
    Uri(String),
    /// `<topicN>`, holding N.
    Placeholder(u32),
}

impl Term {
    pub fn variable(name: &str) -> Self {
        if name.starts_with('?') {
            Term::Variable(name.to_string())
        } else {
            Term::Variable(format!("?{name}"))
        }
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

pub fn placeholder_token(index: u32) -> String {
    format!("<topic{index}>")
}

/// N for `<topicN>` with N ≥ 1.
pub fn placeholder_index(token: &str) -> Option<u32> {
    let digits = token.strip_prefix("<topic")?.strip_suffix('>')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Term,
    /// Relation token, e.g. `<authoredBy>`.
    pub relation: String,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Filter {
    Compare { lhs: Term, op: Operator, rhs: Term },
    NotExists { pattern: GroupPattern },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PatternElement {
    Triple(Triple),
    Filter(Filter),
    /// `{ ... } UNION { ... }`; a single member is a plain nested group.
    Union { branches: Vec<GroupPattern> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupPattern {
    pub elements: Vec<PatternElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ProjectionItem {
    Variable { name: String },
    Count { distinct: bool, variable: String, alias: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SortDirection {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OrderExpr {
    Variable { name: String },
    Count { distinct: bool, variable: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderKey {
    /// `None` only for a bare `?var` key.
    pub direction: Option<SortDirection>,
    pub expr: OrderExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FormKind {
    Select,
    Ask,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalForm {
    pub kind: FormKind,
    pub distinct: bool,
    pub projection: Vec<ProjectionItem>,
    pub body: GroupPattern,
    pub group_by: Vec<String>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<u64>,
}

/// Where a term sits, in serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermSite<'a> {
    Subject { triple: usize, relation: &'a str },
    Object { triple: usize, relation: &'a str },
    FilterOperand { filter: usize },
}

impl LogicalForm {
    pub fn ask(body: GroupPattern) -> Self {
        Self {
            kind: FormKind::Ask,
            distinct: false,
            projection: Vec::new(),
            body,
            group_by: Vec::new(),
            order_by: Vec::new(),
            limit: None,
        }
    }

    /// All triples, depth-first in serialization order.
    pub fn triples(&self) -> Vec<&Triple> {
        let mut out = Vec::new();
        collect_triples(&self.body, &mut out);
        out
    }

    /// All filters, depth-first in serialization order.
    pub fn filters(&self) -> Vec<&Filter> {
        let mut out = Vec::new();
        collect_filters(&self.body, &mut out);
        out
    }

    /// Visits every term in triples and filter comparisons, in
    /// serialization order.
    pub fn for_each_term(&self, mut f: impl FnMut(&Term, TermSite<'_>)) {
        let mut counters = (0usize, 0usize);
        visit_group(&self.body, &mut counters, &mut f);
    }

    pub fn for_each_term_mut(&mut self, mut f: impl FnMut(&mut Term)) {
        visit_group_mut(&mut self.body, &mut f);
    }

    pub fn has_mentions(&self) -> bool {
        let mut found = false;
        self.for_each_term(|t, _| found |= matches!(t, Term::Mention(_)));
        found
    }

    /// Distinct placeholder indices in first-occurrence order.
    pub fn placeholders(&self) -> Vec<u32> {
        let mut seen = Vec::new();
        self.for_each_term(|t, _| {
            if let Term::Placeholder(n) = t {
                if !seen.contains(n) {
                    seen.push(*n);
                }
            }
        });
        seen
    }

    /// Variables in order of first appearance in the serialized form.
    pub fn variables_in_order(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for token in writer::logical_tokens(self) {
            if token.starts_with('?') && !seen.contains(&token) {
                seen.push(token);
            }
        }
        seen
    }

    /// Applies `rename` to every variable occurrence.
    pub fn rename_variables(&mut self, rename: &impl Fn(&str) -> String) {
        for item in &mut self.projection {
            match item {
                ProjectionItem::Variable { name } => *name = rename(name),
                ProjectionItem::Count { variable, alias, .. } => {
                    *variable = rename(variable);
                    *alias = rename(alias);
                }
            }
        }
        rename_group(&mut self.body, rename);
        for v in &mut self.group_by {
            *v = rename(v);
        }
        for key in &mut self.order_by {
            match &mut key.expr {
                OrderExpr::Variable { name } => *name = rename(name),
                OrderExpr::Count { variable, .. } => *variable = rename(variable),
            }
        }
    }

    /// Renames variables to `?v1, ?v2, ...` by first appearance, leaving the
    /// reserved answer variables untouched.
    pub fn canonicalize_variables(&mut self) {
        let order = self.variables_in_order();
        let mut mapping = std::collections::HashMap::new();
        let mut next = 1;
        for var in order {
            if RESERVED_VARIABLES.contains(&var.as_str()) {
                continue;
            }
            mapping.insert(var, format!("?v{next}"));
            next += 1;
        }
        self.rename_variables(&|v| mapping.get(v).cloned().unwrap_or_else(|| v.to_string()));
    }

    /// Canonical single-space token text.
    pub fn serialize(&self) -> String {
        writer::logical_tokens(self).join(" ")
    }

    pub fn tokens(&self) -> Vec<String> {
        writer::logical_tokens(self)
    }

    /// SPARQL rendering; fails on remaining mentions or placeholders.
    pub fn to_sparql(&self, vocab: &Vocabulary) -> Result<String, RenderError> {
        writer::sparql_tokens(self, vocab).map(|t| t.join(" "))
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// A logical form whose entities are abstracted to `<topicN>` placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemplateForm(LogicalForm);

impl TemplateForm {
    pub fn new(form: LogicalForm) -> Self {
        Self(form)
    }

    pub fn as_form(&self) -> &LogicalForm {
        &self.0
    }

    pub fn into_form(self) -> LogicalForm {
        self.0
    }

    pub fn placeholder_count(&self) -> usize {
        self.0.placeholders().len()
    }

    pub fn serialize(&self) -> String {
        self.0.serialize()
    }
}

impl fmt::Display for TemplateForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn collect_triples<'a>(group: &'a GroupPattern, out: &mut Vec<&'a Triple>) {
    for el in &group.elements {
        match el {
            PatternElement::Triple(t) => out.push(t),
            PatternElement::Filter(Filter::NotExists { pattern }) => collect_triples(pattern, out),
            PatternElement::Filter(_) => {}
            PatternElement::Union { branches } => {
                for b in branches {
                    collect_triples(b, out);
                }
            }
        }
    }
}

fn collect_filters<'a>(group: &'a GroupPattern, out: &mut Vec<&'a Filter>) {
    for el in &group.elements {
        match el {
            PatternElement::Triple(_) => {}
            PatternElement::Filter(f) => {
                out.push(f);
                if let Filter::NotExists { pattern } = f {
                    collect_filters(pattern, out);
                }
            }
            PatternElement::Union { branches } => {
                for b in branches {
                    collect_filters(b, out);
                }
            }
        }
    }
}

fn visit_group(
    group: &GroupPattern,
    counters: &mut (usize, usize),
    f: &mut impl FnMut(&Term, TermSite<'_>),
) {
    for el in &group.elements {
        match el {
            PatternElement::Triple(t) => {
                let idx = counters.0;
                counters.0 += 1;
                f(&t.subject, TermSite::Subject { triple: idx, relation: &t.relation });
                f(&t.object, TermSite::Object { triple: idx, relation: &t.relation });
            }
            PatternElement::Filter(Filter::Compare { lhs, rhs, .. }) => {
                let idx = counters.1;
                counters.1 += 1;
                f(lhs, TermSite::FilterOperand { filter: idx });
                f(rhs, TermSite::FilterOperand { filter: idx });
            }
            PatternElement::Filter(Filter::NotExists { pattern }) => {
                counters.1 += 1;
                visit_group(pattern, counters, f);
            }
            PatternElement::Union { branches } => {
                for b in branches {
                    visit_group(b, counters, f);
                }
            }
        }
    }
}

fn visit_group_mut(group: &mut GroupPattern, f: &mut impl FnMut(&mut Term)) {
    for el in &mut group.elements {
        match el {
            PatternElement::Triple(t) => {
                f(&mut t.subject);
                f(&mut t.object);
            }
            PatternElement::Filter(Filter::Compare { lhs, rhs, .. }) => {
                f(lhs);
                f(rhs);
            }
            PatternElement::Filter(Filter::NotExists { pattern }) => visit_group_mut(pattern, f),
            PatternElement::Union { branches } => {
                for b in branches {
                    visit_group_mut(b, f);
                }
            }
        }
    }
}

fn rename_group(group: &mut GroupPattern, rename: &impl Fn(&str) -> String) {
    visit_group_mut(group, &mut |t| {
        if let Term::Variable(v) = t {
            *v = rename(v);
        }
    });
}
