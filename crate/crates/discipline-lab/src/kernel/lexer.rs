//! Hand-rolled lexer for `.kl` sources.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    KwClass,
    KwUi,
    KwSafe,
    KwField,
    KwMethod,
    KwSelf,
    KwLet,
    KwPar,
    KwRecover,
    KwSpawn,
    KwAsyncUi,
    KwNew,
    KwSkip,
    KwIsolated,
    KwReadable,
    KwWritable,
    KwImmutable,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Semi,
    Comma,
    Dot,
    Eq,
    ColonEq,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

impl Token {
    pub fn len(&self) -> u32 {
        self.text.len() as u32
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("lex error at {line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

fn keyword(text: &str) -> Option<TokKind> {
    Some(match text {
        "class" => TokKind::KwClass,
        "ui" => TokKind::KwUi,
        "safe" => TokKind::KwSafe,
        "field" => TokKind::KwField,
        "method" => TokKind::KwMethod,
        "self" => TokKind::KwSelf,
        "let" => TokKind::KwLet,
        "par" => TokKind::KwPar,
        "recover" => TokKind::KwRecover,
        "spawn" => TokKind::KwSpawn,
        "async_ui" => TokKind::KwAsyncUi,
        "new" => TokKind::KwNew,
        "skip" => TokKind::KwSkip,
        "isolated" => TokKind::KwIsolated,
        "readable" => TokKind::KwReadable,
        "writable" => TokKind::KwWritable,
        "immutable" => TokKind::KwImmutable,
        _ => return None,
    })
}

/// Tokenize a source string. Identifiers are `[A-Za-z_][A-Za-z0-9_]*` with
/// an optional single `#n` suffix (the form produced by alpha-renaming;
/// accepted in source so printed programs re-parse). `//` starts a line
/// comment.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = source.chars().peekable();

    macro_rules! push {
        ($kind:expr, $text:expr, $l:expr, $c:expr) => {
            tokens.push(Token { kind: $kind, text: $text.to_string(), line: $l, col: $c })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            '/' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    for c2 in chars.by_ref() {
                        if c2 == '\n' {
                            line += 1;
                            col = 1;
                            break;
                        }
                    }
                } else {
                    return Err(LexError { line: tl, col: tc, message: "expected `//`".into() });
                }
            }
            '{' => { chars.next(); col += 1; push!(TokKind::LBrace, "{", tl, tc); }
            '}' => { chars.next(); col += 1; push!(TokKind::RBrace, "}", tl, tc); }
            '(' => { chars.next(); col += 1; push!(TokKind::LParen, "(", tl, tc); }
            ')' => { chars.next(); col += 1; push!(TokKind::RParen, ")", tl, tc); }
            ';' => { chars.next(); col += 1; push!(TokKind::Semi, ";", tl, tc); }
            ',' => { chars.next(); col += 1; push!(TokKind::Comma, ",", tl, tc); }
            '.' => { chars.next(); col += 1; push!(TokKind::Dot, ".", tl, tc); }
            '=' => { chars.next(); col += 1; push!(TokKind::Eq, "=", tl, tc); }
            ':' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(TokKind::ColonEq, ":=", tl, tc);
                } else {
                    push!(TokKind::Colon, ":", tl, tc);
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        text.push(c2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // optional alpha-renaming suffix `#n`
                if chars.peek() == Some(&'#') {
                    let mut rest = chars.clone();
                    rest.next();
                    if rest.peek().is_some_and(|d| d.is_ascii_digit()) {
                        text.push('#');
                        chars.next();
                        col += 1;
                        while let Some(&d) = chars.peek() {
                            if d.is_ascii_digit() {
                                text.push(d);
                                chars.next();
                                col += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                match keyword(&text) {
                    Some(kind) => push!(kind, text, tl, tc),
                    None => push!(TokKind::Ident, text, tl, tc),
                }
            }
            other => {
                return Err(LexError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    tokens.push(Token { kind: TokKind::Eof, text: String::new(), line, col });
    Ok(tokens)
}
