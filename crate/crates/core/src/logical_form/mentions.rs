use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::lexer::{lex_logical_form, Lexeme};
use super::vocab::{Keyword, Vocabulary};
use super::{placeholder_token, EntityKind, LogicalForm, TemplateForm, Term, TermSite, RESERVED_VARIABLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    Subject,
    Object,
    FilterOperand,
}

/// Index of the triple (or filter, for [`Slot::FilterOperand`]) plus the slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MentionPosition {
    pub element: usize,
    pub slot: Slot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityMention {
    /// Human-readable text, underscores restored to spaces.
    pub surface: String,
    /// The token as it appears in the logical form.
    pub token: String,
    /// 1-based rank of first occurrence.
    pub occurrence_index: u32,
    pub inferred_kind: EntityKind,
    pub positions: Vec<MentionPosition>,
}

/// Distinct mentions in first-occurrence order, typed by majority vote over
/// the relation slots they fill.
pub fn extract_mentions(lf: &LogicalForm, vocab: &Vocabulary) -> Vec<EntityMention> {
    let mut order: Vec<String> = Vec::new();
    let mut positions: HashMap<String, Vec<(MentionPosition, Option<EntityKind>)>> = HashMap::new();
    lf.for_each_term(|term, site| {
        let Term::Mention(text) = term else { return };
        if !positions.contains_key(text) {
            order.push(text.clone());
        }
        let (pos, vote) = match site {
            TermSite::Subject { triple, relation } => (
                MentionPosition { element: triple, slot: Slot::Subject },
                vocab.relation(relation).and_then(|r| r.subject_kind),
            ),
            TermSite::Object { triple, relation } => (
                MentionPosition { element: triple, slot: Slot::Object },
                vocab.relation(relation).and_then(|r| r.object_kind),
            ),
            TermSite::FilterOperand { filter } => (
                MentionPosition { element: filter, slot: Slot::FilterOperand },
                None,
            ),
        };
        positions.entry(text.clone()).or_default().push((pos, vote));
    });
    order
        .into_iter()
        .enumerate()
        .map(|(i, token)| {
            let entries = positions.remove(&token).unwrap_or_default();
            let votes: Vec<EntityKind> = entries.iter().filter_map(|(_, k)| *k).collect();
            EntityMention {
                surface: surface_of(&token),
                occurrence_index: i as u32 + 1,
                inferred_kind: majority_kind(&votes),
                positions: entries.into_iter().map(|(p, _)| p).collect(),
                token,
            }
        })
        .collect()
}

/// Replaces every mention with `<topicN>`, N being the mention's occurrence
/// index.
pub fn mask_entities(lf: &LogicalForm, vocab: &Vocabulary) -> (TemplateForm, Vec<EntityMention>) {
    let mentions = extract_mentions(lf, vocab);
    let index: HashMap<&str, u32> = mentions
        .iter()
        .map(|m| (m.token.as_str(), m.occurrence_index))
        .collect();
    let mut masked = lf.clone();
    masked.for_each_term_mut(|t| {
        if let Term::Mention(text) = t {
            *t = Term::Placeholder(index[text.as_str()]);
        }
    });
    (TemplateForm::new(masked), mentions)
}

pub(crate) fn surface_of(token: &str) -> String {
    token.split('_').filter(|p| !p.is_empty()).collect::<Vec<_>>().join(" ")
}

/// Ties go to the kind declared first in [`EntityKind`] (publication first).
pub(crate) fn majority_kind(votes: &[EntityKind]) -> EntityKind {
    let mut counts: Vec<(EntityKind, usize)> = Vec::new();
    for &v in votes {
        match counts.iter_mut().find(|(k, _)| *k == v) {
            Some((_, n)) => *n += 1,
            None => counts.push((v, 1)),
        }
    }
    counts
        .into_iter()
        .max_by(|(ka, na), (kb, nb)| na.cmp(nb).then(kb.cmp(ka)))
        .map(|(k, _)| k)
        .unwrap_or(EntityKind::Unknown)
}

/// Token-level masking for text that does not parse. Mentions are detected
/// per token and typed from the neighbouring relation token; variables are
/// canonicalized the same way as for parsed forms.
pub fn mask_raw(text: &str, vocab: &Vocabulary) -> (Vec<String>, Vec<EntityMention>) {
    let tokens: Vec<(String, bool)> = match lex_logical_form(text) {
        Ok(lexed) => lexed
            .tokens
            .into_iter()
            .map(|t| {
                let is_mention = match &t.lexeme {
                    Lexeme::Word(w) => Keyword::from_exact(w).is_none(),
                    _ => false,
                };
                (t.text, is_mention)
            })
            .collect(),
        Err(_) => text
            .split_whitespace()
            .map(|w| {
                let is_mention = !w.starts_with('?')
                    && !w.starts_with('<')
                    && !matches!(w, "{" | "}" | "(" | ")")
                    && Keyword::from_exact(w).is_none()
                    && w.parse::<i64>().is_err();
                (w.to_string(), is_mention)
            })
            .collect(),
    };

    let mut mentions: Vec<EntityMention> = Vec::new();
    let mut votes: Vec<Vec<EntityKind>> = Vec::new();
    let mut var_map: HashMap<String, String> = HashMap::new();
    let mut out = Vec::with_capacity(tokens.len());
    for (i, (tok, is_mention)) in tokens.iter().enumerate() {
        if *is_mention {
            let idx = match mentions.iter().position(|m| &m.token == tok) {
                Some(idx) => idx,
                None => {
                    mentions.push(EntityMention {
                        surface: surface_of(tok),
                        token: tok.clone(),
                        occurrence_index: mentions.len() as u32 + 1,
                        inferred_kind: EntityKind::Unknown,
                        positions: Vec::new(),
                    });
                    votes.push(Vec::new());
                    mentions.len() - 1
                }
            };
            let next = tokens.get(i + 1).and_then(|(t, _)| vocab.relation(t));
            let prev = i.checked_sub(1).and_then(|j| vocab.relation(&tokens[j].0));
            if let Some(rel) = next {
                votes[idx].extend(rel.subject_kind);
            } else if let Some(rel) = prev {
                votes[idx].extend(rel.object_kind);
            }
            out.push(placeholder_token(mentions[idx].occurrence_index));
        } else if tok.starts_with('?') && !RESERVED_VARIABLES.contains(&tok.as_str()) {
            let next = var_map.len() + 1;
            out.push(var_map.entry(tok.clone()).or_insert_with(|| format!("?v{next}")).clone());
        } else {
            out.push(tok.clone());
        }
    }
    for (m, v) in mentions.iter_mut().zip(&votes) {
        m.inferred_kind = majority_kind(v);
    }
    (out, mentions)
}
