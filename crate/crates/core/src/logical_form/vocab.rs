use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EntityKind;

/// The manifest shipped with the crate, covering the DBLP schema relations
/// that appear in DBLP-QuAD.
pub const DEFAULT_MANIFEST: &str = include_str!("../../assets/schema.manifest");

/// SPARQL keywords that survive verbatim into logical forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Keyword {
    Select,
    Distinct,
    Where,
    Filter,
    Ask,
    Count,
    Group,
    By,
    Order,
    Limit,
    Union,
    Bind,
    As,
    Desc,
    Asc,
    Not,
    Exists,
}

impl Keyword {
    pub const ALL: [Keyword; 17] = [
        Keyword::Select,
        Keyword::Distinct,
        Keyword::Where,
        Keyword::Filter,
        Keyword::Ask,
        Keyword::Count,
        Keyword::Group,
        Keyword::By,
        Keyword::Order,
        Keyword::Limit,
        Keyword::Union,
        Keyword::Bind,
        Keyword::As,
        Keyword::Desc,
        Keyword::Asc,
        Keyword::Not,
        Keyword::Exists,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Select => "SELECT",
            Keyword::Distinct => "DISTINCT",
            Keyword::Where => "WHERE",
            Keyword::Filter => "FILTER",
            Keyword::Ask => "ASK",
            Keyword::Count => "COUNT",
            Keyword::Group => "GROUP",
            Keyword::By => "BY",
            Keyword::Order => "ORDER",
            Keyword::Limit => "LIMIT",
            Keyword::Union => "UNION",
            Keyword::Bind => "BIND",
            Keyword::As => "AS",
            Keyword::Desc => "DESC",
            Keyword::Asc => "ASC",
            Keyword::Not => "NOT",
            Keyword::Exists => "EXISTS",
        }
    }

    /// Exact (uppercase) match, as used in logical forms.
    pub fn from_exact(token: &str) -> Option<Keyword> {
        Keyword::ALL.into_iter().find(|k| k.as_str() == token)
    }

    /// Case-insensitive match, as used in SPARQL text.
    pub fn from_any_case(token: &str) -> Option<Keyword> {
        Keyword::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(token))
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Comparison operators inside `FILTER ( lhs op rhs )`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    IsNot,
    Is,
    Lt,
    Gt,
    Leq,
    Geq,
}

impl Operator {
    pub const ALL: [Operator; 6] = [
        Operator::IsNot,
        Operator::Is,
        Operator::Lt,
        Operator::Gt,
        Operator::Leq,
        Operator::Geq,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Operator::IsNot => "<isnot>",
            Operator::Is => "<is>",
            Operator::Lt => "<lt>",
            Operator::Gt => "<gt>",
            Operator::Leq => "<leq>",
            Operator::Geq => "<geq>",
        }
    }

    pub fn sparql(self) -> &'static str {
        match self {
            Operator::IsNot => "!=",
            Operator::Is => "=",
            Operator::Lt => "<",
            Operator::Gt => ">",
            Operator::Leq => "<=",
            Operator::Geq => ">=",
        }
    }

    pub fn from_token(token: &str) -> Option<Operator> {
        Operator::ALL.into_iter().find(|op| op.token() == token)
    }

    pub fn from_sparql(symbol: &str) -> Option<Operator> {
        Operator::ALL.into_iter().find(|op| op.sparql() == symbol)
    }
}

/// `{`, `}`, `(`, `)` and the statement separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structural {
    OpenBrace,
    CloseBrace,
    OpenParen,
    CloseParen,
    Dot,
}

impl Structural {
    pub const ALL: [Structural; 5] = [
        Structural::OpenBrace,
        Structural::CloseBrace,
        Structural::OpenParen,
        Structural::CloseParen,
        Structural::Dot,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Structural::OpenBrace => "{",
            Structural::CloseBrace => "}",
            Structural::OpenParen => "(",
            Structural::CloseParen => ")",
            Structural::Dot => "<dot>",
        }
    }

    pub fn sparql(self) -> &'static str {
        match self {
            Structural::Dot => ".",
            other => other.token(),
        }
    }

    pub fn from_token(token: &str) -> Option<Structural> {
        Structural::ALL.into_iter().find(|s| s.token() == token)
    }
}

/// One schema relation: the predicate it stands for and the entity kinds
/// expected in its subject and object slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub token: String,
    pub uri: String,
    pub subject_kind: Option<EntityKind>,
    pub object_kind: Option<EntityKind>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("cannot read schema manifest {path}: {message}")]
    Unreadable { path: String, message: String },
    #[error("schema manifest line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// Token inventory of the logical-form language.
///
/// Keywords, structural tokens and operators are fixed; relations come from a
/// schema manifest so the vocabulary can follow schema changes without a
/// rebuild.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    relations: BTreeMap<String, Relation>,
    by_uri: HashMap<String, String>,
}

impl Vocabulary {
    pub fn from_manifest(text: &str) -> Result<Self, ManifestError> {
        let mut relations = BTreeMap::new();
        let mut by_uri = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let invalid = |message: String| ManifestError::Invalid {
                line: line_no,
                message,
            };
            let (token, rest) = line
                .split_once('=')
                .ok_or_else(|| invalid("expected `<token> = <uri>`".into()))?;
            let token = token.trim();
            let (uri, kinds) = match rest.split_once(';') {
                Some((uri, kinds)) => (uri.trim(), Some(kinds.trim())),
                None => (rest.trim(), None),
            };
            check_relation_token(token).map_err(invalid)?;
            if !is_absolute_uri(uri) {
                return Err(invalid(format!("`{uri}` is not an absolute URI")));
            }
            let (subject_kind, object_kind) = match kinds {
                None | Some("") => (None, None),
                Some(kinds) => {
                    let parts: Vec<&str> = kinds.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(invalid(format!(
                            "expected `<subject kind> <object kind>`, found `{kinds}`"
                        )));
                    }
                    let parse = |s: &str| {
                        EntityKind::from_name(s)
                            .filter(|k| *k != EntityKind::Unknown)
                            .ok_or_else(|| invalid(format!("unknown entity kind `{s}`")))
                    };
                    (Some(parse(parts[0])?), Some(parse(parts[1])?))
                }
            };
            if relations.contains_key(token) {
                return Err(invalid(format!("duplicate relation token `{token}`")));
            }
            if let Some(other) = by_uri.get(uri) {
                return Err(invalid(format!("URI `{uri}` already mapped by `{other}`")));
            }
            by_uri.insert(uri.to_string(), token.to_string());
            relations.insert(
                token.to_string(),
                Relation {
                    token: token.to_string(),
                    uri: uri.to_string(),
                    subject_kind,
                    object_kind,
                },
            );
        }
        Ok(Self { relations, by_uri })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Unreadable {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_manifest(&text)
    }

    /// Vocabulary built from the bundled DBLP manifest.
    pub fn dblp() -> Self {
        Self::from_manifest(DEFAULT_MANIFEST).expect("bundled schema manifest is valid")
    }

    pub fn relation(&self, token: &str) -> Option<&Relation> {
        self.relations.get(token)
    }

    pub fn relation_for_uri(&self, uri: &str) -> Option<&Relation> {
        self.by_uri.get(uri).and_then(|t| self.relations.get(t))
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn is_relation(&self, token: &str) -> bool {
        self.relations.contains_key(token)
    }

    /// Class of a fixed or schema token, `None` for everything else.
    pub fn classify(&self, token: &str) -> Option<TokenClass> {
        if Keyword::from_exact(token).is_some() {
            Some(TokenClass::Keyword)
        } else if Structural::from_token(token).is_some() {
            Some(TokenClass::Structural)
        } else if Operator::from_token(token).is_some() {
            Some(TokenClass::Operator)
        } else if self.is_relation(token) {
            Some(TokenClass::Relation)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    Keyword,
    Structural,
    Operator,
    Relation,
}

fn check_relation_token(token: &str) -> Result<(), String> {
    let inner = token
        .strip_prefix('<')
        .and_then(|t| t.strip_suffix('>'))
        .ok_or_else(|| format!("relation token `{token}` must be written as `<name>`"))?;
    if inner.is_empty() || !inner.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("relation token `{token}` must be alphanumeric"));
    }
    if Operator::from_token(token).is_some()
        || Structural::from_token(token).is_some()
        || super::placeholder_index(token).is_some()
    {
        return Err(format!("relation token `{token}` collides with a reserved token"));
    }
    Ok(())
}

/// `scheme://...` with no whitespace. Deliberately narrower than RFC 3986 so
/// that titles such as `BERT:_Pre-training` stay mentions.
pub fn is_absolute_uri(text: &str) -> bool {
    let Some((scheme, rest)) = text.split_once("://") else {
        return false;
    };
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && !rest.is_empty()
        && !text.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"'))
}
