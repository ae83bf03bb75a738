use crate::ast::SourceSpan;
use serde::Serialize;
use std::ops::Range;

pub const KEYWORDS: &[&str] = &[
    "Domain",
    "endDomain",
    "Contract",
    "endContract",
    "Declarations",
    "Preconditions",
    "Postconditions",
    "Obligations",
    "SurvivingObligations",
    "Powers",
    "Constraints",
    "Obligation",
    "Power",
    "isA",
    "isAn",
    "with",
    "and",
    "or",
    "not",
    "true",
    "false",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Number,
    Str,
    Date,
    Punct,
    Operator,
    Comment,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: SourceSpan,
    /// Byte range in the source.
    pub range: Range<usize>,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.is(TokenKind::Keyword, kw)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.is(TokenKind::Punct, p)
    }

    pub fn is_op(&self, op: &str) -> bool {
        self.is(TokenKind::Operator, op)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LexErrorKind {
    IllegalCharacter(String),
    UnterminatedString,
    UnterminatedComment,
    InvalidDate(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LexError {
    pub kind: LexErrorKind,
    pub span: SourceSpan,
}

impl LexError {
    pub fn message(&self) -> String {
        match &self.kind {
            LexErrorKind::IllegalCharacter(s) => format!("illegal character(s) `{s}`"),
            LexErrorKind::UnterminatedString => "unterminated string literal".into(),
            LexErrorKind::UnterminatedComment => "unterminated block comment".into(),
            LexErrorKind::InvalidDate(d) => format!("invalid date literal `{d}`"),
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&f) {
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_legal_start(c: char) -> bool {
    c.is_whitespace() || is_ident_start(c) || c.is_ascii_digit() || "\"/(),;:.-=!<>+*%".contains(c)
}

/// Length in bytes of a date literal at the start of `s`, if one is there:
/// `YYYY-MM-DD` optionally followed by `THH:MM[:SS][Z]`.
fn date_len(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    let digits = |r: Range<usize>| r.clone().all(|i| b.get(i).is_some_and(u8::is_ascii_digit));
    if !(digits(0..4) && b.get(4) == Some(&b'-') && digits(5..7) && b.get(7) == Some(&b'-') && digits(8..10)) {
        return None;
    }
    if b.get(10).is_some_and(u8::is_ascii_digit) {
        return None;
    }
    let mut len = 10;
    if b.get(10) == Some(&b'T') && digits(11..13) && b.get(13) == Some(&b':') && digits(14..16) {
        len = 16;
        if b.get(16) == Some(&b':') && digits(17..19) {
            len = 19;
        }
        if b.get(len) == Some(&b'Z') {
            len += 1;
        }
    }
    Some(len)
}

fn valid_date(lexeme: &str) -> bool {
    chrono::NaiveDate::parse_from_str(&lexeme[..10], "%Y-%m-%d").is_ok()
        && (lexeme.len() == 10 || {
            let time = lexeme[11..].trim_end_matches('Z');
            let fmt = if time.len() == 5 { "%H:%M" } else { "%H:%M:%S" };
            chrono::NaiveTime::parse_from_str(time, fmt).is_ok()
        })
}

/// Splits `source` into tokens. The last token is always `Eof`. Illegal input
/// is reported as [`LexError`]s and skipped; lexing continues after it.
pub fn tokenize(source: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut cur = Cursor { src: source, pos: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    loop {
        cur.bump_while(char::is_whitespace);
        let (start, line, col) = (cur.pos, cur.line, cur.col);
        let Some(c) = cur.peek() else { break };

        let kind = if cur.rest().starts_with("//") {
            cur.bump_while(|c| c != '\n');
            TokenKind::Comment
        } else if cur.rest().starts_with("/*") {
            match cur.rest()[2..].find("*/") {
                Some(i) => {
                    let end = cur.pos + 2 + i + 2;
                    while cur.pos < end {
                        cur.bump();
                    }
                }
                None => {
                    while cur.bump().is_some() {}
                    errors.push(LexError {
                        kind: LexErrorKind::UnterminatedComment,
                        span: SourceSpan::new(line, col, cur.line, cur.col),
                    });
                }
            }
            TokenKind::Comment
        } else if is_ident_start(c) {
            cur.bump_while(is_ident_continue);
            if KEYWORDS.contains(&&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            if let Some(n) = date_len(cur.rest()) {
                for _ in 0..n {
                    cur.bump();
                }
                let lexeme = &source[start..cur.pos];
                if !valid_date(lexeme) {
                    errors.push(LexError {
                        kind: LexErrorKind::InvalidDate(lexeme.to_string()),
                        span: SourceSpan::new(line, col, cur.line, cur.col),
                    });
                }
                TokenKind::Date
            } else {
                cur.bump_while(|c| c.is_ascii_digit());
                if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                    cur.bump_while(|c| c.is_ascii_digit());
                }
                TokenKind::Number
            }
        } else if c == '"' {
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
                if c == '\\' {
                    if cur.peek().is_some_and(|c| c != '\n') {
                        cur.bump();
                    }
                } else if c == '"' {
                    closed = true;
                    break;
                }
            }
            if !closed {
                errors.push(LexError {
                    kind: LexErrorKind::UnterminatedString,
                    span: SourceSpan::new(line, col, cur.line, cur.col),
                });
            }
            TokenKind::Str
        } else if [":=", "->", "==", "!=", "<=", ">="].iter().any(|op| cur.rest().starts_with(op)) {
            cur.bump();
            cur.bump();
            TokenKind::Operator
        } else if "(),;:.".contains(c) {
            cur.bump();
            TokenKind::Punct
        } else if "<>+-*/%".contains(c) {
            cur.bump();
            TokenKind::Operator
        } else {
            cur.bump();
            cur.bump_while(|c| !is_legal_start(c));
            errors.push(LexError {
                kind: LexErrorKind::IllegalCharacter(source[start..cur.pos].to_string()),
                span: SourceSpan::new(line, col, cur.line, cur.col),
            });
            continue;
        };

        tokens.push(Token {
            kind,
            lexeme: source[start..cur.pos].to_string(),
            span: SourceSpan::new(line, col, cur.line, cur.col),
            range: start..cur.pos,
        });
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        lexeme: String::new(),
        span: SourceSpan::new(cur.line, cur.col, cur.line, cur.col),
        range: cur.pos..cur.pos,
    });
    (tokens, errors)
}

/// Decodes the body of a string literal lexeme (quotes included).
pub fn unescape(lexeme: &str) -> String {
    let body = lexeme.strip_prefix('"').unwrap_or(lexeme);
    let body = body.strip_suffix('"').unwrap_or(body);
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}
