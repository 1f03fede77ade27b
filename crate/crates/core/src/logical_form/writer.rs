use serde::Serialize;
use thiserror::Error;

use super::vocab::{Keyword, Structural, Vocabulary};
use super::{
    placeholder_token, Filter, FormKind, GroupPattern, Literal, LogicalForm, OrderExpr,
    PatternElement, ProjectionItem, SortDirection, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum RenderError {
    /// Placeholders (`<topicN>`) or raw mentions that have no binding.
    #[error("unbound placeholders: {}", .placeholders.join(", "))]
    UnboundPlaceholder { placeholders: Vec<String> },
    #[error("relation token {token} is not in the schema vocabulary")]
    UnknownRelation { token: String },
}

enum Mode<'a> {
    Logical,
    Sparql(&'a Vocabulary),
}

pub(super) fn logical_tokens(lf: &LogicalForm) -> Vec<String> {
    let mut out = Vec::new();
    write_form(lf, &Mode::Logical, &mut out).expect("logical rendering is total");
    out
}

pub(super) fn sparql_tokens(lf: &LogicalForm, vocab: &Vocabulary) -> Result<Vec<String>, RenderError> {
    let mut unbound = Vec::new();
    lf.for_each_term(|t, _| {
        let token = match t {
            Term::Placeholder(n) => placeholder_token(*n),
            Term::Mention(m) => m.clone(),
            _ => return,
        };
        if !unbound.contains(&token) {
            unbound.push(token);
        }
    });
    if !unbound.is_empty() {
        return Err(RenderError::UnboundPlaceholder {
            placeholders: unbound,
        });
    }
    let mut out = Vec::new();
    write_form(lf, &Mode::Sparql(vocab), &mut out)?;
    Ok(out)
}

fn kw(out: &mut Vec<String>, k: Keyword) {
    out.push(k.as_str().to_string());
}

fn punct(out: &mut Vec<String>, s: Structural, mode: &Mode<'_>) {
    out.push(match mode {
        Mode::Logical => s.token().to_string(),
        Mode::Sparql(_) => s.sparql().to_string(),
    });
}

fn write_form(lf: &LogicalForm, mode: &Mode<'_>, out: &mut Vec<String>) -> Result<(), RenderError> {
    match lf.kind {
        FormKind::Ask => kw(out, Keyword::Ask),
        FormKind::Select => {
            kw(out, Keyword::Select);
            if lf.distinct {
                kw(out, Keyword::Distinct);
            }
            for item in &lf.projection {
                match item {
                    ProjectionItem::Variable { name } => out.push(name.clone()),
                    ProjectionItem::Count {
                        distinct,
                        variable,
                        alias,
                    } => {
                        punct(out, Structural::OpenParen, mode);
                        write_count(*distinct, variable, mode, out);
                        kw(out, Keyword::As);
                        out.push(alias.clone());
                        punct(out, Structural::CloseParen, mode);
                    }
                }
            }
            kw(out, Keyword::Where);
        }
    }
    write_group(&lf.body, mode, out)?;
    if !lf.group_by.is_empty() {
        kw(out, Keyword::Group);
        kw(out, Keyword::By);
        out.extend(lf.group_by.iter().cloned());
    }
    if !lf.order_by.is_empty() {
        kw(out, Keyword::Order);
        kw(out, Keyword::By);
        for key in &lf.order_by {
            match key.direction {
                None => match &key.expr {
                    OrderExpr::Variable { name } => out.push(name.clone()),
                    OrderExpr::Count { distinct, variable } => {
                        write_count(*distinct, variable, mode, out)
                    }
                },
                Some(dir) => {
                    kw(out, match dir {
                        SortDirection::Asc => Keyword::Asc,
                        SortDirection::Desc => Keyword::Desc,
                    });
                    punct(out, Structural::OpenParen, mode);
                    match &key.expr {
                        OrderExpr::Variable { name } => out.push(name.clone()),
                        OrderExpr::Count { distinct, variable } => {
                            write_count(*distinct, variable, mode, out)
                        }
                    }
                    punct(out, Structural::CloseParen, mode);
                }
            }
        }
    }
    if let Some(n) = lf.limit {
        kw(out, Keyword::Limit);
        out.push(n.to_string());
    }
    Ok(())
}

fn write_count(distinct: bool, variable: &str, mode: &Mode<'_>, out: &mut Vec<String>) {
    kw(out, Keyword::Count);
    punct(out, Structural::OpenParen, mode);
    if distinct {
        kw(out, Keyword::Distinct);
    }
    out.push(variable.to_string());
    punct(out, Structural::CloseParen, mode);
}

fn write_group(group: &GroupPattern, mode: &Mode<'_>, out: &mut Vec<String>) -> Result<(), RenderError> {
    punct(out, Structural::OpenBrace, mode);
    let mut prev_triple = false;
    for el in &group.elements {
        match el {
            PatternElement::Triple(t) => {
                if prev_triple {
                    punct(out, Structural::Dot, mode);
                }
                write_term(&t.subject, out);
                match mode {
                    Mode::Logical => out.push(t.relation.clone()),
                    Mode::Sparql(vocab) => {
                        let rel = vocab.relation(&t.relation).ok_or_else(|| {
                            RenderError::UnknownRelation {
                                token: t.relation.clone(),
                            }
                        })?;
                        out.push(format!("<{}>", rel.uri));
                    }
                }
                write_term(&t.object, out);
                prev_triple = true;
                continue;
            }
            PatternElement::Filter(Filter::Compare { lhs, op, rhs }) => {
                kw(out, Keyword::Filter);
                punct(out, Structural::OpenParen, mode);
                write_term(lhs, out);
                out.push(match mode {
                    Mode::Logical => op.token().to_string(),
                    Mode::Sparql(_) => op.sparql().to_string(),
                });
                write_term(rhs, out);
                punct(out, Structural::CloseParen, mode);
            }
            PatternElement::Filter(Filter::NotExists { pattern }) => {
                kw(out, Keyword::Filter);
                kw(out, Keyword::Not);
                kw(out, Keyword::Exists);
                write_group(pattern, mode, out)?;
            }
            PatternElement::Union { branches } => {
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        kw(out, Keyword::Union);
                    }
                    write_group(b, mode, out)?;
                }
            }
        }
        prev_triple = false;
    }
    punct(out, Structural::CloseBrace, mode);
    Ok(())
}

fn write_term(term: &Term, out: &mut Vec<String>) {
    out.push(match term {
        Term::Variable(v) => v.clone(),
        Term::Mention(m) => m.clone(),
        Term::Literal(l) => render_literal(l),
        Term::Uri(u) => format!("<{u}>"),
        Term::Placeholder(n) => placeholder_token(*n),
    });
}

pub(crate) fn render_literal(l: &Literal) -> String {
    match l {
        Literal::Integer { value } => value.to_string(),
        Literal::String { value, suffix } => {
            let mut s = String::with_capacity(value.len() + 2);
            s.push('"');
            for c in value.chars() {
                match c {
                    '"' => s.push_str("\\\""),
                    '\\' => s.push_str("\\\\"),
                    '\n' => s.push_str("\\n"),
                    '\r' => s.push_str("\\r"),
                    '\t' => s.push_str("\\t"),
                    c => s.push(c),
                }
            }
            s.push('"');
            if let Some(suffix) = suffix {
                s.push_str(suffix);
            }
            s
        }
    }
}
