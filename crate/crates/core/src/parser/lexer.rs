use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    Plus,
    Minus,
    Star,
    Dot,
    DotDot,
    Comma,
    Semi,
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Arrow,
    Iff,
    Assign,
    Par,
    LeftMerge,
    Bar,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Slash => "/",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Arrow => "->",
            Tok::Iff => "<->",
            Tok::Assign => ":=",
            Tok::Par => "||",
            Tok::LeftMerge => "||_",
            Tok::Bar => "|",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits source text into tokens; `//` starts a line comment.
pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let peek = |i: usize| chars.get(i).copied();
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && peek(i + 1) == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() {
            while peek(i).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while peek(i).is_some_and(|c| c.is_ascii_digit()) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Num(s.parse().map_err(|_| Error::Parse {
                line: tl,
                col: tc,
                message: format!("number `{s}` is too large"),
            })?)
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let three: String = chars[i..(i + 3).min(chars.len())].iter().collect();
            let (tok, len) = match (three.as_str(), two.as_str(), c) {
                ("<->", _, _) => (Tok::Iff, 3),
                ("||_", _, _) => (Tok::LeftMerge, 3),
                (_, "..", _) => (Tok::DotDot, 2),
                (_, "!=", _) => (Tok::Ne, 2),
                (_, "<=", _) => (Tok::Le, 2),
                (_, ">=", _) => (Tok::Ge, 2),
                (_, "->", _) => (Tok::Arrow, 2),
                (_, ":=", _) => (Tok::Assign, 2),
                (_, "||", _) => (Tok::Par, 2),
                (_, _, '+') => (Tok::Plus, 1),
                (_, _, '-') => (Tok::Minus, 1),
                (_, _, '*') => (Tok::Star, 1),
                (_, _, '.') => (Tok::Dot, 1),
                (_, _, ',') => (Tok::Comma, 1),
                (_, _, ';') => (Tok::Semi, 1),
                (_, _, '/') => (Tok::Slash, 1),
                (_, _, '(') => (Tok::LParen, 1),
                (_, _, ')') => (Tok::RParen, 1),
                (_, _, '{') => (Tok::LBrace, 1),
                (_, _, '}') => (Tok::RBrace, 1),
                (_, _, '[') => (Tok::LBrack, 1),
                (_, _, ']') => (Tok::RBrack, 1),
                (_, _, '=') => (Tok::Eq, 1),
                (_, _, '<') => (Tok::Lt, 1),
                (_, _, '>') => (Tok::Gt, 1),
                (_, _, '|') => (Tok::Bar, 1),
                _ => {
                    return Err(Error::Parse {
                        line: tl,
                        col: tc,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            i += len;
            tok
        };
        col += i - start;
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
