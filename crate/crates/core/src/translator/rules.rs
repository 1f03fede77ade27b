use std::collections::BTreeSet;
use std::path::Path;

use async_trait::async_trait;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{TranslateError, Translation, Translator};
use crate::logical_form::{parse, Literal, LogicalForm, TemplateForm, Term, Vocabulary};

/// The curated pattern set shipped with the crate.
pub const DEFAULT_PATTERNS: &str = include_str!("../../assets/patterns.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    Entity,
    Year,
    RecentYears,
}

#[derive(Debug, Clone)]
pub struct QuestionPattern {
    pub name: String,
    pub description: String,
    pub triggers: Vec<Regex>,
    pub template: TemplateForm,
    /// Slot `i` fills `<topic{i+1}>`.
    pub slots: Vec<SlotKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternInfo {
    pub name: String,
    pub description: String,
    pub triggers: Vec<String>,
    pub template: String,
    pub slots: Vec<SlotKind>,
}

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("cannot read pattern file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed pattern file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("pattern {pattern}: bad trigger regex: {source}")]
    BadRegex { pattern: String, source: regex::Error },
    #[error("pattern {pattern} has no triggers")]
    NoTriggers { pattern: String },
    #[error("patterns {first} and {second} have the same triggers")]
    DuplicateTrigger { first: String, second: String },
    #[error("pattern {pattern}: template does not parse: {message}")]
    BadTemplate { pattern: String, message: String },
    #[error("pattern {pattern}: template placeholders {placeholders:?} do not match {slots} slots")]
    SlotMismatch {
        pattern: String,
        placeholders: Vec<u32>,
        slots: usize,
    },
    #[error("duplicate pattern name {0}")]
    DuplicateName(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternFile {
    #[serde(default)]
    pattern: Vec<RawPattern>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPattern {
    name: String,
    #[serde(default)]
    description: String,
    triggers: Vec<String>,
    template: String,
    #[serde(default)]
    slots: Vec<SlotKind>,
}

pub struct RuleBasedTranslator {
    patterns: Vec<QuestionPattern>,
    vocab: std::sync::Arc<Vocabulary>,
    reference_year: i64,
}

impl RuleBasedTranslator {
    pub fn from_toml(
        text: &str,
        vocab: std::sync::Arc<Vocabulary>,
        reference_year: i64,
    ) -> Result<Self, PatternError> {
        let file: PatternFile = toml::from_str(text)?;
        let mut patterns: Vec<QuestionPattern> = Vec::new();
        let mut seen: Vec<(BTreeSet<String>, String)> = Vec::new();
        for raw in file.pattern {
            if patterns.iter().any(|p| p.name == raw.name) {
                return Err(PatternError::DuplicateName(raw.name));
            }
            if raw.triggers.is_empty() {
                return Err(PatternError::NoTriggers { pattern: raw.name });
            }
            let set: BTreeSet<String> = raw.triggers.iter().cloned().collect();
            if let Some((_, first)) = seen.iter().find(|(s, _)| *s == set) {
                return Err(PatternError::DuplicateTrigger {
                    first: first.clone(),
                    second: raw.name,
                });
            }
            seen.push((set, raw.name.clone()));
            let triggers = raw
                .triggers
                .iter()
                .map(|t| Regex::new(t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| PatternError::BadRegex {
                    pattern: raw.name.clone(),
                    source,
                })?;
            let form = parse(&raw.template, &vocab).map_err(|e| PatternError::BadTemplate {
                pattern: raw.name.clone(),
                message: e.to_string(),
            })?;
            if form.has_mentions() {
                return Err(PatternError::BadTemplate {
                    pattern: raw.name,
                    message: "templates may not contain mentions".into(),
                });
            }
            let mut placeholders = form.placeholders();
            placeholders.sort_unstable();
            if placeholders != (1..=raw.slots.len() as u32).collect::<Vec<_>>() {
                return Err(PatternError::SlotMismatch {
                    pattern: raw.name,
                    placeholders,
                    slots: raw.slots.len(),
                });
            }
            patterns.push(QuestionPattern {
                name: raw.name,
                description: raw.description,
                triggers,
                template: TemplateForm::new(form),
                slots: raw.slots,
            });
        }
        Ok(Self {
            patterns,
            vocab,
            reference_year,
        })
    }

    pub fn load(path: &Path, vocab: std::sync::Arc<Vocabulary>, reference_year: i64) -> Result<Self, PatternError> {
        Self::from_toml(&std::fs::read_to_string(path)?, vocab, reference_year)
    }

    pub fn bundled(vocab: std::sync::Arc<Vocabulary>, reference_year: i64) -> Self {
        Self::from_toml(DEFAULT_PATTERNS, vocab, reference_year).expect("bundled patterns are valid")
    }

    pub fn patterns(&self) -> &[QuestionPattern] {
        &self.patterns
    }

    pub fn translate_sync(&self, question: &str) -> Result<Translation, TranslateError> {
        let question = question.trim();
        if question.is_empty() {
            return Err(TranslateError::EmptyQuestion);
        }
        let spans = Spans::extract(question);
        let counts = |kind| spans.count(kind);
        let applicable: Vec<&QuestionPattern> = self
            .patterns
            .iter()
            .filter(|p| p.triggers.iter().all(|t| t.is_match(&spans.cue_text)))
            .filter(|p| {
                [SlotKind::Entity, SlotKind::Year, SlotKind::RecentYears]
                    .into_iter()
                    .all(|k| p.slots.iter().filter(|s| **s == k).count() == counts(k))
            })
            .collect();
        let best = applicable.iter().map(|p| p.triggers.len()).max().ok_or_else(|| {
            TranslateError::NoPatternMatched {
                detail: format!(
                    "no pattern fits a question with {} entity, {} year and {} recent-years spans",
                    counts(SlotKind::Entity),
                    counts(SlotKind::Year),
                    counts(SlotKind::RecentYears)
                ),
            }
        })?;
        let top: Vec<&&QuestionPattern> = applicable.iter().filter(|p| p.triggers.len() == best).collect();
        if top.len() > 1 {
            return Err(TranslateError::NoPatternMatched {
                detail: format!(
                    "ambiguous between {}",
                    top.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ")
                ),
            });
        }
        let pattern = top[0];

        let mut next = [0usize; 3];
        let values: Vec<Term> = pattern
            .slots
            .iter()
            .map(|kind| {
                let i = *kind as usize;
                let v = match kind {
                    SlotKind::Entity => Term::Mention(mention_token(&spans.entities[next[i]])),
                    SlotKind::Year => Term::Literal(Literal::integer(spans.years[next[i]])),
                    SlotKind::RecentYears => {
                        Term::Literal(Literal::integer(self.reference_year - spans.recent[next[i]]))
                    }
                };
                next[i] += 1;
                v
            })
            .collect();
        let mut form: LogicalForm = pattern.template.as_form().clone();
        form.for_each_term_mut(|t| {
            if let Term::Placeholder(n) = t {
                *t = values[*n as usize - 1].clone();
            }
        });
        let text = form.serialize();
        match parse(&text, &self.vocab) {
            Ok(back) if back == form => Ok(Translation { text, form }),
            _ => Err(TranslateError::NoPatternMatched {
                detail: format!("pattern {} produced a form that does not round-trip", pattern.name),
            }),
        }
    }
}

#[async_trait]
impl Translator for RuleBasedTranslator {
    async fn translate(&self, question: &str) -> Result<Translation, TranslateError> {
        self.translate_sync(question)
    }

    fn list_patterns(&self) -> Vec<PatternInfo> {
        self.patterns
            .iter()
            .map(|p| PatternInfo {
                name: p.name.clone(),
                description: p.description.clone(),
                triggers: p.triggers.iter().map(|r| r.as_str().to_string()).collect(),
                template: p.template.serialize(),
                slots: p.slots.clone(),
            })
            .collect()
    }
}

fn mention_token(span: &str) -> String {
    span.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Question spans by kind, in question order, plus the question with all
/// spans blanked out for trigger matching.
#[derive(Debug, Default, PartialEq)]
struct Spans {
    entities: Vec<String>,
    years: Vec<i64>,
    recent: Vec<i64>,
    cue_text: String,
}

const LEADING_WORDS: &[&str] = &[
    "what", "which", "who", "whom", "whose", "when", "where", "how", "list", "show", "give", "find",
    "name", "please", "enumerate", "in", "did", "does", "do", "is", "are", "was", "were", "has",
    "have", "can", "could", "tell", "return", "provide", "i",
];

const CONNECTORS: &[&str] = &["of", "the", "for", "on", "de", "van", "von", "der", "da", "di", "du", "le", "la", "y"];

const NUMBER_WORDS: &[&str] = &["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];

impl Spans {
    fn count(&self, kind: SlotKind) -> usize {
        match kind {
            SlotKind::Entity => self.entities.len(),
            SlotKind::Year => self.years.len(),
            SlotKind::RecentYears => self.recent.len(),
        }
    }

    fn extract(question: &str) -> Self {
        let mut text = question.to_string();
        let mut spans = Spans::default();
        let mut entities: Vec<(usize, String)> = Vec::new();

        for (start, end, inner) in quoted_spans(question) {
            entities.push((start, inner.trim().to_string()));
            blank(&mut text, start, end);
        }

        let recent = Regex::new(r"(?i)\blast\s+(\d{1,3}|one|two|three|four|five|six|seven|eight|nine|ten)\s+years?\b")
            .expect("static regex");
        let found: Vec<(usize, usize, i64)> = recent
            .captures_iter(&text)
            .map(|c| {
                let m = c.get(0).expect("whole match");
                let n = &c[1];
                let n = n.parse::<i64>().unwrap_or_else(|_| {
                    NUMBER_WORDS
                        .iter()
                        .position(|w| w.eq_ignore_ascii_case(n))
                        .expect("alternation lists number words") as i64
                        + 1
                });
                (m.start(), m.end(), n)
            })
            .collect();
        // Cue words such as "last ... years" stay visible to triggers.
        spans.cue_text = text.clone();
        for (s, e, n) in found {
            spans.recent.push(n);
            blank(&mut text, s, e);
        }

        let year = Regex::new(r"\b(1[89]\d\d|20\d\d)\b").expect("static regex");
        let years: Vec<(usize, usize, i64)> = year
            .find_iter(&text)
            .map(|m| (m.start(), m.end(), m.as_str().parse().expect("four digits")))
            .collect();
        for (s, e, y) in years {
            spans.years.push(y);
            blank(&mut text, s, e);
        }

        entities.extend(title_case_runs(&text));
        entities.sort_by_key(|(pos, _)| *pos);
        spans.entities = entities.into_iter().map(|(_, e)| e).collect();
        spans
    }
}

/// Replaces a byte range with spaces, keeping offsets stable.
fn blank(text: &mut String, start: usize, end: usize) {
    text.replace_range(start..end, &" ".repeat(end - start));
}

fn quoted_spans(s: &str) -> Vec<(usize, usize, &str)> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        let close = match c {
            '\'' => '\'',
            '"' => '"',
            '\u{201c}' => '\u{201d}',
            '\u{2018}' => '\u{2019}',
            _ => {
                i += 1;
                continue;
            }
        };
        let opens = i == 0 || {
            let p = chars[i - 1].1;
            p.is_whitespace() || matches!(p, '(' | '[' | ':')
        };
        if !opens {
            i += 1;
            continue;
        }
        let closing = (i + 2..chars.len()).find(|&j| {
            chars[j].1 == close
                && chars
                    .get(j + 1)
                    .is_none_or(|(_, n)| n.is_whitespace() || matches!(n, '.' | ',' | ';' | ':' | '?' | '!' | ')' | ']'))
        });
        match closing {
            Some(j) => {
                let end = chars[j].0 + close.len_utf8();
                let inner = &s[chars[i + 1].0..chars[j].0];
                out.push((start, end, inner));
                i = j + 1;
            }
            None => i += 1,
        }
    }
    out
}

/// Runs of capitalized words, possibly joined by lowercase connectors, with
/// the byte offset where each starts. A leading question word does not count
/// as capitalized.
fn title_case_runs(text: &str) -> Vec<(usize, String)> {
    let words: Vec<(usize, &str)> = Regex::new(r"\S+")
        .expect("static regex")
        .find_iter(text)
        .map(|m| (m.start(), m.as_str()))
        .collect();
    let mut runs = Vec::new();
    let mut start = 0;
    let mut current: Vec<&str> = Vec::new();
    let mut pending: Vec<&str> = Vec::new();
    let flush = |start: usize, current: &mut Vec<&str>, pending: &mut Vec<&str>, runs: &mut Vec<(usize, String)>| {
        if !current.is_empty() {
            runs.push((start, current.join(" ")));
        }
        current.clear();
        pending.clear();
    };
    for (i, &(offset, raw)) in words.iter().enumerate() {
        let core = raw.trim_start_matches(['(', '[']);
        let trimmed = core.trim_end_matches(['?', '.', ',', '!', ';', ':', ')', ']']);
        let ends_clause = trimmed.len() != core.len();
        let lower = trimmed.to_lowercase();
        let capitalized = trimmed.chars().next().is_some_and(char::is_uppercase)
            && !(i == 0 && LEADING_WORDS.contains(&lower.as_str()));
        if capitalized {
            if current.is_empty() {
                start = offset + (raw.len() - core.len());
            }
            current.append(&mut pending);
            current.push(trimmed);
        } else if !current.is_empty() && CONNECTORS.contains(&lower.as_str()) && !ends_clause {
            pending.push(trimmed);
            continue;
        } else {
            flush(start, &mut current, &mut pending, &mut runs);
            continue;
        }
        if ends_clause {
            flush(start, &mut current, &mut pending, &mut runs);
        }
    }
    flush(start, &mut current, &mut pending, &mut runs);
    runs
}
