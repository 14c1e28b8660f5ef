//! Tokens of the `.catq` language.

use std::sync::Arc;

use crate::dsl::ast::SourceSpan;
use crate::dsl::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Digits with an optional sign and fractional part, kept as written.
    Number(String),
    Str(String),
    Eq,
    Colon,
    Arrow,
    Dot,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::Dot => "`.`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    src: &'a str,
    file: Arc<str>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        self.src[self.pos..].chars().nth(1)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: (usize, usize, usize)) -> SourceSpan {
        SourceSpan {
            file: Arc::clone(&self.file),
            start: start.0,
            end: self.pos,
            line: start.1,
            column: start.2,
            end_line: self.line,
            end_column: self.column,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `src` into tokens. Bad characters and unterminated strings are
/// reported and skipped; the token list always ends with `Eof`.
pub fn tokenize(src: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        src,
        file: Arc::from(file),
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '/' && cur.peek2() == Some('/') {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = (cur.pos, cur.line, cur.column);
        let Some(c) = cur.bump() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: cur.span_from(start),
            });
            return (tokens, diags);
        };
        let kind = match c {
            '=' => TokenKind::Eq,
            ':' => TokenKind::Colon,
            '.' => TokenKind::Dot,
            ',' => TokenKind::Comma,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            '-' if cur.peek() == Some('>') => {
                cur.bump();
                TokenKind::Arrow
            }
            '"' => {
                let mut text = String::new();
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match cur.bump() {
                            Some('n') => text.push('\n'),
                            Some('t') => text.push('\t'),
                            Some(other) => text.push(other),
                            None => break,
                        },
                        '\n' => break,
                        other => text.push(other),
                    }
                }
                if !closed {
                    diags.push(Diagnostic::syntax(
                        cur.span_from(start),
                        "unterminated string literal",
                        vec![],
                    ));
                }
                TokenKind::Str(text)
            }
            c if c.is_ascii_digit()
                || ((c == '-' || c == '+') && cur.peek().is_some_and(|d| d.is_ascii_digit())) =>
            {
                let mut text = c.to_string();
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    text.push(d);
                    cur.bump();
                }
                if cur.peek() == Some('.') && cur.peek2().is_some_and(|d| d.is_ascii_digit()) {
                    text.push('.');
                    cur.bump();
                    while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                        text.push(d);
                        cur.bump();
                    }
                }
                while let Some(d) = cur.peek().filter(|&d| is_ident_continue(d)) {
                    text.push(d);
                    cur.bump();
                }
                if text
                    .bytes()
                    .skip(1)
                    .all(|b| b.is_ascii_digit() || b == b'.')
                {
                    TokenKind::Number(text)
                } else {
                    TokenKind::Ident(text)
                }
            }
            c if is_ident_start(c) => {
                let mut text = c.to_string();
                while let Some(d) = cur.peek().filter(|&d| is_ident_continue(d)) {
                    text.push(d);
                    cur.bump();
                }
                TokenKind::Ident(text)
            }
            other => {
                diags.push(Diagnostic::syntax(
                    cur.span_from(start),
                    format!("unexpected character `{other}`"),
                    vec![],
                ));
                continue;
            }
        };
        tokens.push(Token {
            kind,
            span: cur.span_from(start),
        });
    }
}
