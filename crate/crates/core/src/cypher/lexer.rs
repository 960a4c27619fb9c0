use std::fmt;

use super::CypherError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Bare identifier or keyword, as written.
    Ident(String),
    /// Backtick-quoted name, unescaped.
    Quoted(String),
    Int(i64),
    Float(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    DotDot,
    Pipe,
    Star,
    Dash,
    Lt,
    Gt,
    Eq,
    Ne,
    Le,
    Ge,
    /// A character outside the grammar that still deserves a precise
    /// diagnostic: `$`/`@` from unexpanded markers, arithmetic operators.
    Sigil(char),
    Semicolon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Quoted(s) => write!(f, "quoted name `{s}`"),
            Tok::Int(v) => write!(f, "integer {v}"),
            Tok::Float(v) => write!(f, "float {v}"),
            Tok::Str(_) => f.write_str("string literal"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Dash => f.write_str("`-`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`<>`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Sigil(c) => write!(f, "`{c}`"),
            Tok::Semicolon => f.write_str("`;`"),
            Tok::Eof => f.write_str("end of query"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub tok: Tok,
    /// Byte offset of the first character.
    pub offset: usize,
}

const KEYWORDS: &[&str] = &[
    "MATCH", "OPTIONAL", "WHERE", "RETURN", "DISTINCT", "CREATE", "MERGE", "AS", "AND", "OR", "NOT",
    "TRUE", "FALSE", "NULL", "XOR", "DELETE", "DETACH", "SET", "REMOVE", "WITH", "UNWIND", "ORDER",
    "BY", "LIMIT", "SKIP", "UNION", "CALL", "FOREACH", "LOAD", "CASE", "IN", "IS", "ON", "YIELD",
    "STARTS", "ENDS", "CONTAINS",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, CypherError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, message: &str| CypherError::syntax(text, offset, message.to_string(), Vec::new());
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let end = text[i + 2..].find("*/").ok_or_else(|| err(i, "unterminated comment"))?;
            i += end + 4;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else if c == b'`' {
            let mut name = String::new();
            i += 1;
            loop {
                match text[i..].find('`') {
                    None => return Err(err(start, "unterminated backtick name")),
                    Some(j) => {
                        name.push_str(&text[i..i + j]);
                        i += j + 1;
                        if bytes.get(i) == Some(&b'`') {
                            name.push('`');
                            i += 1;
                        } else {
                            break;
                        }
                    }
                }
            }
            if name.is_empty() {
                return Err(err(start, "empty backtick name"));
            }
            Tok::Quoted(name)
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut float = false;
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                float = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(bytes.get(i), Some(b'e' | b'E')) {
                let mut j = i + 1;
                if matches!(bytes.get(j), Some(b'+' | b'-')) {
                    j += 1;
                }
                if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                    float = true;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            if float {
                Tok::Float(lit.parse().map_err(|_| err(start, "malformed float"))?)
            } else {
                Tok::Int(lit.parse().map_err(|_| err(start, "integer out of range"))?)
            }
        } else if c == b'\'' || c == b'"' {
            let mut s = String::new();
            i += 1;
            let mut chars = text[i..].char_indices();
            loop {
                let Some((k, ch)) = chars.next() else {
                    return Err(err(start, "unterminated string"));
                };
                if ch as u32 == c as u32 {
                    i += k + 1;
                    break;
                }
                if ch == '\\' {
                    let Some((_, esc)) = chars.next() else {
                        return Err(err(start, "unterminated string"));
                    };
                    s.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        'r' => '\r',
                        '\\' | '\'' | '"' => esc,
                        _ => return Err(err(start + 1 + k, "unknown escape sequence")),
                    });
                } else {
                    s.push(ch);
                }
            }
            Tok::Str(s)
        } else {
            let two = bytes.get(i + 1).copied();
            let (tok, len) = match (c, two) {
                (b'.', Some(b'.')) => (Tok::DotDot, 2),
                (b'<', Some(b'>')) => (Tok::Ne, 2),
                (b'<', Some(b'=')) => (Tok::Le, 2),
                (b'>', Some(b'=')) => (Tok::Ge, 2),
                (b'(', _) => (Tok::LParen, 1),
                (b')', _) => (Tok::RParen, 1),
                (b'[', _) => (Tok::LBracket, 1),
                (b']', _) => (Tok::RBracket, 1),
                (b'{', _) => (Tok::LBrace, 1),
                (b'}', _) => (Tok::RBrace, 1),
                (b':', _) => (Tok::Colon, 1),
                (b',', _) => (Tok::Comma, 1),
                (b'.', _) => (Tok::Dot, 1),
                (b'|', _) => (Tok::Pipe, 1),
                (b'*', _) => (Tok::Star, 1),
                (b'-', _) => (Tok::Dash, 1),
                (b'<', _) => (Tok::Lt, 1),
                (b'>', _) => (Tok::Gt, 1),
                (b'=', _) => (Tok::Eq, 1),
                (b';', _) => (Tok::Semicolon, 1),
                (b'$', _) => (Tok::Sigil('$'), 1),
                (b'@', _) => (Tok::Sigil('@'), 1),
                (b'+' | b'/' | b'%' | b'^', _) => (Tok::Sigil(c as char), 1),
                _ => {
                    let ch = text[i..].chars().next().unwrap_or('?');
                    return Err(err(i, &format!("unexpected character `{ch}`")));
                }
            };
            i += len;
            tok
        };
        out.push(Spanned { tok, offset: start });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        offset: text.len(),
    });
    Ok(out)
}
