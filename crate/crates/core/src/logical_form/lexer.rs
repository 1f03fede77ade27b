use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::parser::ParseError;
use super::vocab::is_absolute_uri;

/// 1-based line and column of a token, plus its byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Lexeme {
    /// Bare word: keyword, mention, prefixed name.
    Word(String),
    /// Logical-form angle token such as `<dot>` or `<authoredBy>`, brackets kept.
    Angle(String),
    /// Absolute IRI, brackets stripped.
    Iri(String),
    /// Variable including its `?`.
    Var(String),
    Str { value: String, suffix: Option<String> },
    Integer(i64),
    Punct(char),
    /// SPARQL comparison symbol.
    Op(&'static str),
    /// Anything the subset does not know how to lex.
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Spanned {
    pub lexeme: Lexeme,
    pub text: String,
    pub pos: Position,
}

#[derive(Debug)]
pub(crate) struct Lexed {
    pub tokens: Vec<Spanned>,
    pub end: Position,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            offset: 0,
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
            offset: self.offset,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_whitespace(&mut self, comments: bool) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if comments && c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads a quoted string starting at the opening quote; returns the
    /// unescaped value.
    fn quoted(&mut self) -> Result<String, ParseError> {
        let start = self.pos();
        let quote = self.bump().expect("caller checked quote");
        let mut value = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(ParseError::UnbalancedDelimiter {
                        delimiter: quote,
                        position: self.pos(),
                        detail: format!("string opened at {start} is never closed"),
                    })
                }
                Some('\\') => match self.bump() {
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    Some('r') => value.push('\r'),
                    Some(c) => value.push(c),
                    None => continue,
                },
                Some(c) if c == quote => return Ok(value),
                Some(c) => value.push(c),
            }
        }
    }

    /// Optional `@lang` or `^^datatype` after a string literal.
    fn literal_suffix(&mut self) -> Option<String> {
        if self.peek() == Some('@') {
            let mut s = String::from("@");
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            return Some(s);
        }
        if self.rest().starts_with("^^") {
            self.bump();
            self.bump();
            let mut s = String::from("^^");
            while let Some(c) = self.peek() {
                if c.is_whitespace() || matches!(c, ')' | '}' | ',' | ';') {
                    break;
                }
                s.push(c);
                self.bump();
                if c == '>' {
                    break;
                }
            }
            return Some(s);
        }
        None
    }
}

/// Whitespace tokenization of a logical form; quoted strings may contain
/// spaces and stay one token.
pub(crate) fn lex_logical_form(src: &str) -> Result<Lexed, ParseError> {
    let mut cur = Cursor::new(src);
    let mut tokens = Vec::new();
    loop {
        cur.skip_whitespace(false);
        let pos = cur.pos();
        let Some(c) = cur.peek() else { break };
        if c == '"' || c == '\'' {
            let value = cur.quoted()?;
            let suffix = cur.literal_suffix();
            tokens.push(Spanned {
                lexeme: Lexeme::Str { value, suffix },
                text: src[pos.offset..cur.offset].to_string(),
                pos,
            });
            continue;
        }
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                break;
            }
            cur.bump();
        }
        let text = &src[pos.offset..cur.offset];
        tokens.push(Spanned {
            lexeme: classify_logical_word(text),
            text: text.to_string(),
            pos,
        });
    }
    Ok(Lexed {
        tokens,
        end: cur.pos(),
    })
}

fn classify_logical_word(text: &str) -> Lexeme {
    if text.len() > 1 && text.starts_with('?') {
        return Lexeme::Var(text.to_string());
    }
    if let [c] = text.as_bytes() {
        if matches!(c, b'{' | b'}' | b'(' | b')') {
            return Lexeme::Punct(*c as char);
        }
    }
    if text.len() > 2 && text.starts_with('<') && text.ends_with('>') {
        let inner = &text[1..text.len() - 1];
        if is_absolute_uri(inner) {
            return Lexeme::Iri(inner.to_string());
        }
        return Lexeme::Angle(text.to_string());
    }
    if let Some(n) = parse_integer(text) {
        return Lexeme::Integer(n);
    }
    if is_absolute_uri(text) {
        return Lexeme::Iri(text.to_string());
    }
    Lexeme::Word(text.to_string())
}

fn parse_integer(text: &str) -> Option<i64> {
    let digits = text.strip_prefix('-').unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Character-level SPARQL lexer. `PREFIX` declarations are consumed and
/// prefixed names expanded to IRIs.
pub(crate) fn lex_sparql(src: &str) -> Result<Lexed, ParseError> {
    let mut cur = Cursor::new(src);
    let mut tokens = Vec::new();
    loop {
        cur.skip_whitespace(true);
        let pos = cur.pos();
        let Some(c) = cur.peek() else { break };
        let lexeme = match c {
            '{' | '}' | '(' | ')' | '.' | ',' | ';' | '*' => {
                cur.bump();
                Lexeme::Punct(c)
            }
            '"' | '\'' => {
                let value = cur.quoted()?;
                let suffix = cur.literal_suffix();
                Lexeme::Str { value, suffix }
            }
            '?' | '$' => {
                cur.bump();
                let mut name = String::from("?");
                while let Some(c) = cur.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if name.len() == 1 {
                    Lexeme::Other(c.to_string())
                } else {
                    Lexeme::Var(name)
                }
            }
            '<' => match iri_at(cur.rest()) {
                Some(len) => {
                    let inner = &cur.rest()[1..len - 1];
                    let lexeme = if is_absolute_uri(inner) {
                        Lexeme::Iri(inner.to_string())
                    } else {
                        Lexeme::Other(format!("<{inner}>"))
                    };
                    for _ in 0..inner.chars().count() + 2 {
                        cur.bump();
                    }
                    lexeme
                }
                None => {
                    cur.bump();
                    if cur.peek() == Some('=') {
                        cur.bump();
                        Lexeme::Op("<=")
                    } else {
                        Lexeme::Op("<")
                    }
                }
            },
            '>' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    Lexeme::Op(">=")
                } else {
                    Lexeme::Op(">")
                }
            }
            '=' => {
                cur.bump();
                Lexeme::Op("=")
            }
            '!' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    Lexeme::Op("!=")
                } else {
                    Lexeme::Other("!".into())
                }
            }
            c if c.is_ascii_digit() => {
                while matches!(cur.peek(), Some(d) if d.is_ascii_digit()) {
                    cur.bump();
                }
                let is_decimal = cur.peek() == Some('.')
                    && matches!(cur.peek_nth(1), Some(d) if d.is_ascii_digit());
                if is_decimal {
                    cur.bump();
                    while matches!(cur.peek(), Some(d) if d.is_ascii_digit()) {
                        cur.bump();
                    }
                    Lexeme::Other(src[pos.offset..cur.offset].to_string())
                } else {
                    match src[pos.offset..cur.offset].parse() {
                        Ok(n) => Lexeme::Integer(n),
                        Err(_) => Lexeme::Other(src[pos.offset..cur.offset].to_string()),
                    }
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                while let Some(c) = cur.peek() {
                    if c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.' | '%') {
                        cur.bump();
                    } else {
                        break;
                    }
                }
                // A trailing dot terminates the statement, not the name.
                let mut word = &src[pos.offset..cur.offset];
                while word.ends_with('.') {
                    word = &word[..word.len() - 1];
                }
                cur = Cursor {
                    src,
                    offset: pos.offset,
                    line: pos.line,
                    column: pos.column,
                };
                for _ in 0..word.chars().count() {
                    cur.bump();
                }
                Lexeme::Word(word.to_string())
            }
            other => {
                cur.bump();
                Lexeme::Other(other.to_string())
            }
        };
        tokens.push(Spanned {
            lexeme,
            text: src[pos.offset..cur.offset].to_string(),
            pos,
        });
    }
    let end = cur.pos();
    Ok(Lexed {
        tokens: expand_prefixes(tokens),
        end,
    })
}

/// Byte length of an IRI reference at the start of `s`, if there is one.
fn iri_at(s: &str) -> Option<usize> {
    for (i, c) in s.char_indices().skip(1) {
        match c {
            '>' => return Some(i + 1),
            c if c.is_whitespace() => return None,
            '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => return None,
            _ => {}
        }
    }
    None
}

fn expand_prefixes(tokens: Vec<Spanned>) -> Vec<Spanned> {
    let mut prefixes: HashMap<String, String> = HashMap::new();
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if let (Lexeme::Word(kw), Some(name), Some(iri)) =
            (&tokens[i].lexeme, tokens.get(i + 1), tokens.get(i + 2))
        {
            if kw.eq_ignore_ascii_case("PREFIX") {
                if let (Lexeme::Word(p), Lexeme::Iri(base)) = (&name.lexeme, &iri.lexeme) {
                    if let Some(p) = p.strip_suffix(':') {
                        if !p.contains(':') {
                            prefixes.insert(p.to_string(), base.clone());
                            i += 3;
                            continue;
                        }
                    }
                }
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    let expand = |name: &str| {
        name.split_once(':')
            .and_then(|(p, local)| prefixes.get(p).map(|base| format!("{base}{local}")))
    };
    for tok in &mut out {
        let iri = match &mut tok.lexeme {
            Lexeme::Word(w) => expand(w),
            Lexeme::Str {
                suffix: Some(s), ..
            } => {
                let datatype = s.strip_prefix("^^").filter(|dt| !dt.starts_with('<'));
                if let Some(full) = datatype.and_then(expand) {
                    *s = format!("^^<{full}>");
                }
                None
            }
            _ => None,
        };
        if let Some(iri) = iri {
            tok.lexeme = Lexeme::Iri(iri);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexemes(src: &str) -> Vec<Lexeme> {
        lex_sparql(src).unwrap().tokens.into_iter().map(|t| t.lexeme).collect()
    }

    #[test]
    fn sparql_punctuation_splits_without_spaces() {
        assert_eq!(
            lexemes("FILTER(?x!=<https://a.org/b>)."),
            vec![
                Lexeme::Word("FILTER".into()),
                Lexeme::Punct('('),
                Lexeme::Var("?x".into()),
                Lexeme::Op("!="),
                Lexeme::Iri("https://a.org/b".into()),
                Lexeme::Punct(')'),
                Lexeme::Punct('.'),
            ]
        );
    }

    #[test]
    fn less_than_is_an_operator_when_not_an_iri() {
        assert_eq!(
            lexemes("?y < 2019 ?y <= 3"),
            vec![
                Lexeme::Var("?y".into()),
                Lexeme::Op("<"),
                Lexeme::Integer(2019),
                Lexeme::Var("?y".into()),
                Lexeme::Op("<="),
                Lexeme::Integer(3),
            ]
        );
    }

    #[test]
    fn prefixes_expand() {
        assert_eq!(
            lexemes("PREFIX dblp: <https://dblp.org/rdf/schema#> ?x dblp:authoredBy ?y ."),
            vec![
                Lexeme::Var("?x".into()),
                Lexeme::Iri("https://dblp.org/rdf/schema#authoredBy".into()),
                Lexeme::Var("?y".into()),
                Lexeme::Punct('.'),
            ]
        );
    }

    #[test]
    fn typed_literal_datatype_expands() {
        let lx = lexemes("PREFIX xsd: <http://www.w3.org/2001/XMLSchema#> \"2019\"^^xsd:gYear");
        assert_eq!(
            lx,
            vec![Lexeme::Str {
                value: "2019".into(),
                suffix: Some("^^<http://www.w3.org/2001/XMLSchema#gYear>".into())
            }]
        );
    }

    #[test]
    fn positions_track_lines() {
        let lexed = lex_sparql("ASK {\n  ?x }").unwrap();
        assert_eq!(lexed.tokens[2].pos.line, 2);
        assert_eq!(lexed.tokens[2].pos.column, 3);
        assert_eq!(lexed.end.line, 2);
    }

    #[test]
    fn logical_form_keeps_quoted_strings_whole() {
        let lexed = lex_logical_form("?x <primaryAffiliation> \"University of Zurich\" }").unwrap();
        assert_eq!(lexed.tokens.len(), 4);
        assert_eq!(
            lexed.tokens[2].lexeme,
            Lexeme::Str {
                value: "University of Zurich".into(),
                suffix: None
            }
        );
    }

    #[test]
    fn unterminated_string_is_reported() {
        assert!(matches!(
            lex_sparql("ASK { ?x ?y \"abc }"),
            Err(ParseError::UnbalancedDelimiter { delimiter: '"', .. })
        ));
    }
}
