use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use super::lexer::{lex_logical_form, lex_sparql, Lexed, Lexeme, Position};
use super::vocab::{Keyword, Operator, Structural, Vocabulary};
use super::{
    placeholder_index, Filter, FormKind, GroupPattern, Literal, LogicalForm, OrderExpr, OrderKey,
    PatternElement, ProjectionItem, SortDirection, Term, Triple,
};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("unbalanced `{delimiter}` at {position}: {detail}")]
    UnbalancedDelimiter {
        delimiter: char,
        position: Position,
        detail: String,
    },
    #[error("unknown relation token `{token}` at {position}")]
    UnknownRelationToken { token: String, position: Position },
    #[error("predicate <{iri}> at {position} is not in the schema vocabulary")]
    UnknownPredicate { iri: String, position: Position },
    #[error("expected {expected}, found `{found}` at {position}")]
    UnexpectedToken {
        found: String,
        expected: String,
        position: Position,
    },
    #[error("unexpected end of input at {position}, expected {expected}")]
    UnexpectedEnd { expected: String, position: Position },
    #[error("`{construct}` at {position} is outside the supported subset")]
    Unsupported { construct: String, position: Position },
    #[error("projected variable {variable} does not occur in any pattern")]
    UnboundProjection { variable: String },
}

impl ParseError {
    pub fn position(&self) -> Option<Position> {
        match self {
            ParseError::EmptyInput | ParseError::UnboundProjection { .. } => None,
            ParseError::UnbalancedDelimiter { position, .. }
            | ParseError::UnknownRelationToken { position, .. }
            | ParseError::UnknownPredicate { position, .. }
            | ParseError::UnexpectedToken { position, .. }
            | ParseError::UnexpectedEnd { position, .. }
            | ParseError::Unsupported { position, .. } => Some(*position),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ParseError::EmptyInput => "EmptyInput",
            ParseError::UnbalancedDelimiter { .. } => "UnbalancedDelimiter",
            ParseError::UnknownRelationToken { .. } => "UnknownRelationToken",
            ParseError::UnknownPredicate { .. } => "UnknownPredicate",
            ParseError::UnexpectedToken { .. } => "UnexpectedToken",
            ParseError::UnexpectedEnd { .. } => "UnexpectedEnd",
            ParseError::Unsupported { .. } => "Unsupported",
            ParseError::UnboundProjection { .. } => "UnboundProjection",
        }
    }
}

/// Parses logical-form text (mentions, relation tokens, placeholders).
pub fn parse(text: &str, vocab: &Vocabulary) -> Result<LogicalForm, ParseError> {
    let lexed = lex_logical_form(text)?;
    Parser::new(lexed, vocab, Dialect::Logical)?.run()
}

/// Parses SPARQL text restricted to the supported subset, mapping predicate
/// IRIs back to relation tokens.
pub fn parse_sparql(text: &str, vocab: &Vocabulary) -> Result<LogicalForm, ParseError> {
    let lexed = lex_sparql(text)?;
    Parser::new(lexed, vocab, Dialect::Sparql)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dialect {
    Logical,
    Sparql,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Kw(Keyword),
    Struct(Structural),
    Op(Operator),
    Relation(String),
    Iri(String),
    Var(String),
    Lit(Literal),
    Placeholder(u32),
    Mention(String),
    /// Recognizable SPARQL outside the subset.
    Unsupported,
    Other,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: Kind,
    text: String,
    pos: Position,
}

const UNSUPPORTED_WORDS: &[&str] = &[
    "OPTIONAL", "MINUS", "VALUES", "SERVICE", "GRAPH", "BASE", "OFFSET", "HAVING", "SUM", "AVG",
    "MIN", "MAX", "SAMPLE", "GROUP_CONCAT", "YEAR", "NOW", "STR", "REGEX", "CONTAINS", "LANG",
    "LANGMATCHES", "BOUND", "IF", "COALESCE", "IN", "UNDEF", "DESCRIBE", "CONSTRUCT", "FROM",
    "NAMED", "REDUCED", "TRUE", "FALSE", "A", "STRSTARTS", "LCASE", "UCASE", "ISIRI", "ISURI",
    "ISLITERAL", "DATATYPE",
];

fn classify(lexeme: Lexeme, vocab: &Vocabulary, dialect: Dialect, pos: Position) -> Result<Kind, ParseError> {
    Ok(match lexeme {
        Lexeme::Word(w) => match dialect {
            Dialect::Logical => match Keyword::from_exact(&w) {
                Some(kw) => Kind::Kw(kw),
                None => Kind::Mention(w),
            },
            Dialect::Sparql => match Keyword::from_any_case(&w) {
                Some(kw) => Kind::Kw(kw),
                None if UNSUPPORTED_WORDS.iter().any(|u| u.eq_ignore_ascii_case(&w)) => {
                    Kind::Unsupported
                }
                None => Kind::Other,
            },
        },
        Lexeme::Angle(t) => {
            if let Some(s) = Structural::from_token(&t) {
                Kind::Struct(s)
            } else if let Some(op) = Operator::from_token(&t) {
                Kind::Op(op)
            } else if let Some(n) = placeholder_index(&t) {
                Kind::Placeholder(n)
            } else if vocab.is_relation(&t) {
                Kind::Relation(t)
            } else {
                return Err(ParseError::UnknownRelationToken {
                    token: t,
                    position: pos,
                });
            }
        }
        Lexeme::Iri(iri) => Kind::Iri(iri),
        Lexeme::Var(v) => Kind::Var(v),
        Lexeme::Str { value, suffix } => Kind::Lit(Literal::String { value, suffix }),
        Lexeme::Integer(value) => Kind::Lit(Literal::Integer { value }),
        Lexeme::Punct(c) => match c {
            '{' => Kind::Struct(Structural::OpenBrace),
            '}' => Kind::Struct(Structural::CloseBrace),
            '(' => Kind::Struct(Structural::OpenParen),
            ')' => Kind::Struct(Structural::CloseParen),
            '.' if dialect == Dialect::Sparql => Kind::Struct(Structural::Dot),
            _ => Kind::Unsupported,
        },
        Lexeme::Op(sym) => match Operator::from_sparql(sym) {
            Some(op) => Kind::Op(op),
            None => Kind::Other,
        },
        Lexeme::Other(text) => {
            let looks_sparql = text.starts_with('<')
                || text.chars().all(|c| c.is_ascii_digit() || c == '.')
                || matches!(text.as_str(), "!" | "&" | "|" | "+" | "-" | "/");
            if looks_sparql {
                Kind::Unsupported
            } else {
                Kind::Other
            }
        }
    })
}

struct Parser<'v> {
    toks: Vec<Tok>,
    i: usize,
    end: Position,
    vocab: &'v Vocabulary,
    dialect: Dialect,
}

impl<'v> Parser<'v> {
    fn new(lexed: Lexed, vocab: &'v Vocabulary, dialect: Dialect) -> Result<Self, ParseError> {
        let mut toks = Vec::with_capacity(lexed.tokens.len());
        for t in lexed.tokens {
            let kind = classify(t.lexeme, vocab, dialect, t.pos)?;
            toks.push(Tok {
                kind,
                text: t.text,
                pos: t.pos,
            });
        }
        Ok(Self {
            toks,
            i: 0,
            end: lexed.end,
            vocab,
            dialect,
        })
    }

    fn run(mut self) -> Result<LogicalForm, ParseError> {
        if self.toks.is_empty() {
            return Err(ParseError::EmptyInput);
        }
        self.check_balance()?;
        let form = self.form()?;
        if let Some(t) = self.toks.get(self.i) {
            return Err(self.unexpected(t, "end of input"));
        }
        check_projection(&form)?;
        Ok(form)
    }

    /// Delimiters are checked before parsing so that a missing brace is
    /// reported as such rather than as whatever token follows.
    fn check_balance(&self) -> Result<(), ParseError> {
        let mut stack: Vec<(&Tok, Structural)> = Vec::new();
        for t in &self.toks {
            let Kind::Struct(s) = t.kind else { continue };
            match s {
                Structural::OpenBrace | Structural::OpenParen => stack.push((t, s)),
                Structural::CloseBrace | Structural::CloseParen => {
                    let want = if s == Structural::CloseBrace {
                        Structural::OpenBrace
                    } else {
                        Structural::OpenParen
                    };
                    match stack.pop() {
                        Some((_, open)) if open == want => {}
                        Some((open_tok, _)) => {
                            return Err(ParseError::UnbalancedDelimiter {
                                delimiter: t.text.chars().next().unwrap_or('?'),
                                position: t.pos,
                                detail: format!(
                                    "`{}` opened at {} is closed by `{}`",
                                    open_tok.text, open_tok.pos, t.text
                                ),
                            })
                        }
                        None => {
                            return Err(ParseError::UnbalancedDelimiter {
                                delimiter: t.text.chars().next().unwrap_or('?'),
                                position: t.pos,
                                detail: "no matching opening delimiter".into(),
                            })
                        }
                    }
                }
                Structural::Dot => {}
            }
        }
        if let Some((open_tok, _)) = stack.last() {
            return Err(ParseError::UnbalancedDelimiter {
                delimiter: open_tok.text.chars().next().unwrap_or('?'),
                position: self.end,
                detail: format!("`{}` opened at {} is never closed", open_tok.text, open_tok.pos),
            });
        }
        Ok(())
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i)
    }

    fn peek_kind(&self) -> Option<&Kind> {
        self.peek().map(|t| &t.kind)
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        matches!(self.peek_kind(), Some(Kind::Kw(k)) if *k == kw)
    }

    fn at_struct(&self, s: Structural) -> bool {
        matches!(self.peek_kind(), Some(Kind::Struct(k)) if *k == s)
    }

    fn next(&mut self, expected: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.i) {
            Some(t) => {
                self.i += 1;
                Ok(t.clone())
            }
            None => Err(ParseError::UnexpectedEnd {
                expected: expected.to_string(),
                position: self.end,
            }),
        }
    }

    fn unexpected(&self, t: &Tok, expected: &str) -> ParseError {
        match (&t.kind, self.dialect) {
            (Kind::Unsupported, _) | (Kind::Kw(Keyword::Bind), _) => ParseError::Unsupported {
                construct: t.text.clone(),
                position: t.pos,
            },
            _ => ParseError::UnexpectedToken {
                found: t.text.clone(),
                expected: expected.to_string(),
                position: t.pos,
            },
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> Result<(), ParseError> {
        let t = self.next(kw.as_str())?;
        match t.kind {
            Kind::Kw(k) if k == kw => Ok(()),
            _ => Err(self.unexpected(&t, kw.as_str())),
        }
    }

    fn expect_struct(&mut self, s: Structural) -> Result<(), ParseError> {
        let expected = match self.dialect {
            Dialect::Logical => s.token(),
            Dialect::Sparql => s.sparql(),
        };
        let t = self.next(expected)?;
        match t.kind {
            Kind::Struct(k) if k == s => Ok(()),
            _ => Err(self.unexpected(&t, &format!("`{expected}`"))),
        }
    }

    fn expect_var(&mut self) -> Result<String, ParseError> {
        let t = self.next("a variable")?;
        match t.kind {
            Kind::Var(v) => Ok(v),
            _ => Err(self.unexpected(&t, "a variable")),
        }
    }

    fn form(&mut self) -> Result<LogicalForm, ParseError> {
        let t = self.next("SELECT or ASK")?;
        match t.kind {
            Kind::Kw(Keyword::Select) => self.select(),
            Kind::Kw(Keyword::Ask) => {
                if self.at_kw(Keyword::Where) {
                    self.i += 1;
                }
                let body = self.group()?;
                Ok(LogicalForm::ask(body))
            }
            _ => Err(self.unexpected(&t, "SELECT or ASK")),
        }
    }

    fn select(&mut self) -> Result<LogicalForm, ParseError> {
        let distinct = self.at_kw(Keyword::Distinct);
        if distinct {
            self.i += 1;
        }
        let mut projection = Vec::new();
        loop {
            match self.peek_kind() {
                Some(Kind::Var(_)) => {
                    let name = self.expect_var()?;
                    projection.push(ProjectionItem::Variable { name });
                }
                Some(Kind::Struct(Structural::OpenParen)) => {
                    self.i += 1;
                    self.expect_kw(Keyword::Count)?;
                    let (distinct, variable) = self.count_body()?;
                    self.expect_kw(Keyword::As)?;
                    let alias = self.expect_var()?;
                    self.expect_struct(Structural::CloseParen)?;
                    projection.push(ProjectionItem::Count {
                        distinct,
                        variable,
                        alias,
                    });
                }
                _ => break,
            }
        }
        if projection.is_empty() {
            let t = self.next("a projected variable")?;
            return Err(self.unexpected(&t, "a projected variable"));
        }
        if self.at_kw(Keyword::Where) {
            self.i += 1;
        }
        let body = self.group()?;

        let mut group_by = Vec::new();
        if self.at_kw(Keyword::Group) {
            self.i += 1;
            self.expect_kw(Keyword::By)?;
            group_by.push(self.expect_var()?);
            while matches!(self.peek_kind(), Some(Kind::Var(_))) {
                group_by.push(self.expect_var()?);
            }
        }
        let mut order_by = Vec::new();
        if self.at_kw(Keyword::Order) {
            self.i += 1;
            self.expect_kw(Keyword::By)?;
            order_by.push(self.order_key()?);
            while matches!(
                self.peek_kind(),
                Some(Kind::Var(_)) | Some(Kind::Kw(Keyword::Asc)) | Some(Kind::Kw(Keyword::Desc))
            ) {
                order_by.push(self.order_key()?);
            }
        }
        let mut limit = None;
        if self.at_kw(Keyword::Limit) {
            self.i += 1;
            let t = self.next("a row count")?;
            match t.kind {
                Kind::Lit(Literal::Integer { value }) if value >= 0 => limit = Some(value as u64),
                _ => return Err(self.unexpected(&t, "a row count")),
            }
        }
        Ok(LogicalForm {
            kind: FormKind::Select,
            distinct,
            projection,
            body,
            group_by,
            order_by,
            limit,
        })
    }

    /// `( [DISTINCT] ?var )` after COUNT.
    fn count_body(&mut self) -> Result<(bool, String), ParseError> {
        self.expect_struct(Structural::OpenParen)?;
        let distinct = self.at_kw(Keyword::Distinct);
        if distinct {
            self.i += 1;
        }
        let variable = self.expect_var()?;
        self.expect_struct(Structural::CloseParen)?;
        Ok((distinct, variable))
    }

    fn order_key(&mut self) -> Result<OrderKey, ParseError> {
        let t = self.next("an order key")?;
        let direction = match t.kind {
            Kind::Var(name) => {
                return Ok(OrderKey {
                    direction: None,
                    expr: OrderExpr::Variable { name },
                })
            }
            Kind::Kw(Keyword::Asc) => SortDirection::Asc,
            Kind::Kw(Keyword::Desc) => SortDirection::Desc,
            _ => return Err(self.unexpected(&t, "an order key")),
        };
        self.expect_struct(Structural::OpenParen)?;
        let expr = if self.at_kw(Keyword::Count) {
            self.i += 1;
            let (distinct, variable) = self.count_body()?;
            OrderExpr::Count { distinct, variable }
        } else {
            OrderExpr::Variable {
                name: self.expect_var()?,
            }
        };
        self.expect_struct(Structural::CloseParen)?;
        Ok(OrderKey {
            direction: Some(direction),
            expr,
        })
    }

    fn group(&mut self) -> Result<GroupPattern, ParseError> {
        self.expect_struct(Structural::OpenBrace)?;
        let mut elements = Vec::new();
        loop {
            if self.at_struct(Structural::CloseBrace) {
                self.i += 1;
                return Ok(GroupPattern { elements });
            }
            let element = self.element()?;
            let was_triple = matches!(element, PatternElement::Triple(_));
            elements.push(element);
            if self.at_struct(Structural::Dot) {
                self.i += 1;
            } else if was_triple && self.at_term() {
                let t = self.peek().cloned().expect("at_term checked");
                return Err(self.unexpected(&t, &format!("`{}` between triples", self.dot())));
            }
        }
    }

    fn dot(&self) -> &'static str {
        match self.dialect {
            Dialect::Logical => Structural::Dot.token(),
            Dialect::Sparql => Structural::Dot.sparql(),
        }
    }

    fn at_term(&self) -> bool {
        matches!(
            self.peek_kind(),
            Some(
                Kind::Var(_) | Kind::Iri(_) | Kind::Lit(_) | Kind::Placeholder(_) | Kind::Mention(_)
            )
        )
    }

    fn element(&mut self) -> Result<PatternElement, ParseError> {
        match self.peek_kind() {
            Some(Kind::Kw(Keyword::Filter)) => {
                self.i += 1;
                Ok(PatternElement::Filter(self.filter()?))
            }
            Some(Kind::Struct(Structural::OpenBrace)) => {
                let mut branches = vec![self.group()?];
                while self.at_kw(Keyword::Union) {
                    self.i += 1;
                    branches.push(self.group()?);
                }
                Ok(PatternElement::Union { branches })
            }
            _ => Ok(PatternElement::Triple(self.triple()?)),
        }
    }

    fn filter(&mut self) -> Result<Filter, ParseError> {
        if self.at_kw(Keyword::Not) {
            self.i += 1;
            self.expect_kw(Keyword::Exists)?;
            return Ok(Filter::NotExists {
                pattern: self.group()?,
            });
        }
        self.expect_struct(Structural::OpenParen)?;
        let lhs = self.term()?;
        let t = self.next("a comparison operator")?;
        let op = match t.kind {
            Kind::Op(op) => op,
            _ => return Err(self.unexpected(&t, "a comparison operator")),
        };
        let rhs = self.term()?;
        self.expect_struct(Structural::CloseParen)?;
        Ok(Filter::Compare { lhs, op, rhs })
    }

    fn triple(&mut self) -> Result<Triple, ParseError> {
        let subject = self.term()?;
        let relation = self.relation()?;
        let object = self.term()?;
        Ok(Triple {
            subject,
            relation,
            object,
        })
    }

    fn relation(&mut self) -> Result<String, ParseError> {
        let t = self.next("a relation")?;
        match t.kind {
            Kind::Relation(r) => Ok(r),
            Kind::Iri(iri) => match self.vocab.relation_for_uri(&iri) {
                Some(rel) => Ok(rel.token.clone()),
                None => Err(ParseError::UnknownPredicate {
                    iri,
                    position: t.pos,
                }),
            },
            Kind::Var(_) => Err(ParseError::Unsupported {
                construct: format!("variable predicate {}", t.text),
                position: t.pos,
            }),
            _ => Err(self.unexpected(&t, "a relation")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next("a term")?;
        match t.kind {
            Kind::Var(v) => Ok(Term::Variable(v)),
            Kind::Iri(iri) => Ok(Term::Uri(iri)),
            Kind::Lit(l) => Ok(Term::Literal(l)),
            Kind::Placeholder(n) => Ok(Term::Placeholder(n)),
            Kind::Mention(m) => Ok(Term::Mention(m)),
            _ => Err(self.unexpected(&t, "a term")),
        }
    }
}

fn check_projection(form: &LogicalForm) -> Result<(), ParseError> {
    let mut bound = HashSet::new();
    collect_bound(&form.body, &mut bound);
    for item in &form.projection {
        let var = match item {
            ProjectionItem::Variable { name } => name,
            ProjectionItem::Count { variable, .. } => variable,
        };
        if !bound.contains(var.as_str()) {
            return Err(ParseError::UnboundProjection {
                variable: var.clone(),
            });
        }
    }
    Ok(())
}

fn collect_bound<'a>(group: &'a GroupPattern, out: &mut HashSet<&'a str>) {
    for el in &group.elements {
        match el {
            PatternElement::Triple(t) => {
                for term in [&t.subject, &t.object] {
                    if let Term::Variable(v) = term {
                        out.insert(v);
                    }
                }
            }
            PatternElement::Filter(_) => {}
            PatternElement::Union { branches } => {
                for b in branches {
                    collect_bound(b, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BERT_BLOCK: &str = "SELECT DISTINCT ?firstanswer ?secondanswer WHERE
{
    the_BERT_paper <authoredBy> ?firstanswer <dot>
    ?x <authoredBy> ?firstanswer <dot>
    ?x <publishedIn> ?secondanswer FILTER
    ( ?x <isnot> the_BERT_paper )
}";

    fn vocab() -> Vocabulary {
        Vocabulary::dblp()
    }

    #[test]
    fn parses_walkthrough_block() {
        let lf = parse(BERT_BLOCK, &vocab()).unwrap();
        assert_eq!(lf.kind, FormKind::Select);
        assert!(lf.distinct);
        assert_eq!(
            lf.projection,
            vec![
                ProjectionItem::Variable { name: "?firstanswer".into() },
                ProjectionItem::Variable { name: "?secondanswer".into() },
            ]
        );
        assert_eq!(lf.triples().len(), 3);
        let filters = lf.filters();
        assert_eq!(filters.len(), 1);
        assert!(matches!(
            filters[0],
            Filter::Compare { op: Operator::IsNot, rhs: Term::Mention(m), .. } if m == "the_BERT_paper"
        ));
    }

    #[test]
    fn parses_minimal_ask() {
        let lf = parse("ASK { the_BERT_paper <yearOfPublication> 2019 }", &vocab()).unwrap();
        assert_eq!(lf.kind, FormKind::Ask);
        let triples = lf.triples();
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].object, Term::Literal(Literal::integer(2019)));
    }

    #[test]
    fn missing_final_brace_is_reported_at_end_of_input() {
        let text = BERT_BLOCK.trim_end().strip_suffix('}').unwrap();
        let err = parse(text, &vocab()).unwrap_err();
        match err {
            ParseError::UnbalancedDelimiter { delimiter, position, .. } => {
                assert_eq!(delimiter, '{');
                assert_eq!(position.offset, text.len());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extra_parenthesis_is_reported_with_position() {
        let err = parse(
            "ASK { ?x <authoredBy> ?y ) }",
            &vocab(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ParseError::UnbalancedDelimiter { delimiter: ')', position: Position { column: 26, .. }, .. }
        ));
    }

    #[test]
    fn unknown_angle_token_is_rejected() {
        let err = parse("ASK { ?x <writtenBy> ?y }", &vocab()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownRelationToken { token, .. } if token == "<writtenBy>"));
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse("   \n ", &vocab()).unwrap_err(), ParseError::EmptyInput);
    }

    #[test]
    fn consecutive_triples_need_a_dot() {
        let err = parse("ASK { ?x <authoredBy> ?y ?x <publishedIn> ?z }", &vocab()).unwrap_err();
        assert!(matches!(err, ParseError::UnexpectedToken { found, .. } if found == "?x"));
    }

    #[test]
    fn projection_must_be_bound() {
        let err = parse("SELECT ?a WHERE { ?x <authoredBy> ?y }", &vocab()).unwrap_err();
        assert_eq!(err, ParseError::UnboundProjection { variable: "?a".into() });
    }

    #[test]
    fn sparql_subset_parses_with_prefixes_and_aggregates() {
        let text = "PREFIX dblp: <https://dblp.org/rdf/schema#>
            select ?answer where { ?x dblp:authoredBy <https://dblp.org/pid/69/4618> .
            ?x dblp:publishedIn ?answer } group by ?answer order by desc(count(?x)) limit 1";
        let lf = parse_sparql(text, &vocab()).unwrap();
        assert_eq!(lf.limit, Some(1));
        assert_eq!(lf.group_by, vec!["?answer".to_string()]);
        assert_eq!(
            lf.order_by,
            vec![OrderKey {
                direction: Some(SortDirection::Desc),
                expr: OrderExpr::Count { distinct: false, variable: "?x".into() }
            }]
        );
    }

    #[test]
    fn sparql_unknown_predicate() {
        let err = parse_sparql(
            "SELECT ?a WHERE { ?a <https://dblp.org/rdf/schema#nope> ?b }",
            &vocab(),
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::UnknownPredicate { .. }));
    }

    #[test]
    fn sparql_optional_is_unsupported() {
        let err = parse_sparql(
            "SELECT ?a WHERE { ?a <https://dblp.org/rdf/schema#authoredBy> ?b OPTIONAL { ?a <https://dblp.org/rdf/schema#title> ?t } }",
            &vocab(),
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { construct, .. } if construct == "OPTIONAL"));
    }

    #[test]
    fn union_and_not_exists() {
        let lf = parse(
            "SELECT DISTINCT ?a WHERE { { ?a <authoredBy> <topic1> } UNION { ?a <authoredBy> <topic2> } FILTER NOT EXISTS { ?a <publishedIn> \"CoRR\" } }",
            &vocab(),
        )
        .unwrap();
        assert_eq!(lf.triples().len(), 3);
        assert_eq!(lf.placeholders(), vec![1, 2]);
    }
}
