//! Turning logical forms and templates into executable SPARQL, and checking
//! SPARQL that a user typed by hand.

mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logical_form::{
    parse_sparql, placeholder_index, placeholder_token, LogicalForm, ParseError, RenderError, Term,
    Vocabulary,
};
use crate::templates::Template;

pub use validate::{validate, Diagnostic, Severity};

/// What a binding fills: a `<topicN>` placeholder or a raw mention token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum BindingKey {
    Placeholder(u32),
    Mention(String),
}

impl From<BindingKey> for String {
    fn from(key: BindingKey) -> String {
        key.to_string()
    }
}

impl From<String> for BindingKey {
    fn from(s: String) -> Self {
        match placeholder_index(&s) {
            Some(n) => BindingKey::Placeholder(n),
            None => BindingKey::Mention(s),
        }
    }
}

impl fmt::Display for BindingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingKey::Placeholder(n) => f.write_str(&placeholder_token(*n)),
            BindingKey::Mention(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Binding {
    pub placeholder: BindingKey,
    /// A URI or literal term.
    pub value: Term,
}

impl Binding {
    pub fn topic(index: u32, value: Term) -> Self {
        Self {
            placeholder: BindingKey::Placeholder(index),
            value,
        }
    }

    pub fn mention(token: impl Into<String>, value: Term) -> Self {
        Self {
            placeholder: BindingKey::Mention(token.into()),
            value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryOrigin {
    /// Rendered from the translated logical form itself.
    Generated,
    /// Rendered from a retrieved template.
    TemplateCorrected,
    UserEdited,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparqlQuery {
    pub text: String,
    pub origin: QueryOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum BuildError {
    #[error("unbound placeholders: {}", .placeholders.join(", "))]
    UnboundPlaceholder { placeholders: Vec<String> },
    #[error("{bindings} bindings supplied for a template with {placeholders} placeholders")]
    ArityMismatch { placeholders: usize, bindings: usize },
    #[error("binding for {placeholder} must be a URI or literal")]
    InvalidBinding { placeholder: String },
    #[error("relation token {token} is not in the schema vocabulary")]
    UnknownRelation { token: String },
}

impl BuildError {
    pub fn code(&self) -> &'static str {
        match self {
            BuildError::UnboundPlaceholder { .. } => "UnboundPlaceholder",
            BuildError::ArityMismatch { .. } => "ArityMismatch",
            BuildError::InvalidBinding { .. } => "InvalidBinding",
            BuildError::UnknownRelation { .. } => "UnknownRelation",
        }
    }
}

impl From<RenderError> for BuildError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::UnboundPlaceholder { placeholders } => {
                BuildError::UnboundPlaceholder { placeholders }
            }
            RenderError::UnknownRelation { token } => BuildError::UnknownRelation { token },
        }
    }
}

/// Renders a fully bound form as SPARQL: relation tokens and URIs in angle
/// brackets, `<dot>` as `.`, operator tokens as their symbols. No PREFIX
/// declarations are emitted.
pub fn detokenize(form: &LogicalForm, vocab: &Vocabulary) -> Result<String, BuildError> {
    Ok(form.to_sparql(vocab)?)
}

/// Substitutes bindings into `form` and renders it.
pub fn instantiate_form(
    form: &LogicalForm,
    bindings: &[Binding],
    origin: QueryOrigin,
    vocab: &Vocabulary,
) -> Result<SparqlQuery, BuildError> {
    for b in bindings {
        if !matches!(b.value, Term::Uri(_) | Term::Literal(_)) {
            return Err(BuildError::InvalidBinding {
                placeholder: b.placeholder.to_string(),
            });
        }
    }
    let mut bound = form.clone();
    bound.for_each_term_mut(|t| {
        let key = match t {
            Term::Placeholder(n) => BindingKey::Placeholder(*n),
            Term::Mention(m) => BindingKey::Mention(m.clone()),
            _ => return,
        };
        if let Some(b) = bindings.iter().find(|b| b.placeholder == key) {
            *t = b.value.clone();
        }
    });
    Ok(SparqlQuery {
        text: detokenize(&bound, vocab)?,
        origin,
    })
}

/// Fills a template's `<topicN>` placeholders.
pub fn instantiate(
    template: &Template,
    bindings: &[Binding],
    vocab: &Vocabulary,
) -> Result<SparqlQuery, BuildError> {
    let placeholders = template.placeholder_count;
    let out_of_range = bindings.iter().any(|b| match b.placeholder {
        BindingKey::Placeholder(n) => n as usize > placeholders,
        BindingKey::Mention(_) => true,
    });
    if bindings.len() > placeholders || out_of_range {
        return Err(BuildError::ArityMismatch {
            placeholders,
            bindings: bindings.len(),
        });
    }
    instantiate_form(
        template.form.as_form(),
        bindings,
        QueryOrigin::TemplateCorrected,
        vocab,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("cannot normalize: {0}")]
    ParseFailure(#[from] ParseError),
}

/// Canonical text for equality checks: uppercase keywords, single spaces,
/// variables renamed by first appearance (answer variables kept), integers
/// in canonical decimal form.
pub fn normalize(text: &str, vocab: &Vocabulary) -> Result<String, NormalizeError> {
    let mut form = parse_sparql(text, vocab)?;
    form.canonicalize_variables();
    Ok(form
        .to_sparql(vocab)
        .expect("parsed SPARQL has no mentions or placeholders"))
}
