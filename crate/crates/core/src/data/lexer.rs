//! Tokenizer shared by the filter language and feature expressions.

use crate::error::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Bare or backtick-quoted identifier.
    Ident {
        name: String,
        quoted: bool,
    },
    Number(f64),
    Str(String),
    Op(&'static str),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

const COMPARISONS: [&str; 6] = ["==", "!=", "<=", ">=", "<", ">"];

pub(crate) fn is_bare_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn quote_ident(name: &str) -> String {
    format!("`{}`", name.replace('`', "``"))
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'(' => {
                out.push(Token {
                    tok: Tok::LParen,
                    offset: start,
                });
                i += 1;
            }
            b')' => {
                out.push(Token {
                    tok: Tok::RParen,
                    offset: start,
                });
                i += 1;
            }
            b'+' => {
                out.push(Token {
                    tok: Tok::Plus,
                    offset: start,
                });
                i += 1;
            }
            b'-' => {
                out.push(Token {
                    tok: Tok::Minus,
                    offset: start,
                });
                i += 1;
            }
            b'*' => {
                out.push(Token {
                    tok: Tok::Star,
                    offset: start,
                });
                i += 1;
            }
            b'/' => {
                out.push(Token {
                    tok: Tok::Slash,
                    offset: start,
                });
                i += 1;
            }
            b'<' | b'>' | b'=' | b'!' => {
                while i < bytes.len() && matches!(bytes[i], b'<' | b'>' | b'=' | b'!') {
                    i += 1;
                }
                let run = &text[start..i];
                let op = COMPARISONS
                    .iter()
                    .find(|&&op| op == run)
                    .ok_or_else(|| SyntaxError::new(start, format!("unknown operator '{run}'")))?;
                out.push(Token {
                    tok: Tok::Op(op),
                    offset: start,
                });
            }
            b'"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    let Some(ch) = text[i..].chars().next() else {
                        return Err(SyntaxError::new(start, "unterminated string literal"));
                    };
                    i += ch.len_utf8();
                    match ch {
                        '"' => break,
                        '\\' => {
                            let Some(esc) = text[i..].chars().next() else {
                                return Err(SyntaxError::new(start, "unterminated string literal"));
                            };
                            i += esc.len_utf8();
                            match esc {
                                '"' | '\\' => s.push(esc),
                                'n' => s.push('\n'),
                                't' => s.push('\t'),
                                _ => {
                                    return Err(SyntaxError::new(
                                        i - esc.len_utf8() - 1,
                                        format!("unknown escape '\\{esc}'"),
                                    ))
                                }
                            }
                        }
                        _ => s.push(ch),
                    }
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    offset: start,
                });
            }
            b'`' => {
                i += 1;
                let mut s = String::new();
                loop {
                    let Some(ch) = text[i..].chars().next() else {
                        return Err(SyntaxError::new(start, "unterminated quoted identifier"));
                    };
                    i += ch.len_utf8();
                    if ch == '`' {
                        if bytes.get(i) == Some(&b'`') {
                            s.push('`');
                            i += 1;
                        } else {
                            break;
                        }
                    } else {
                        s.push(ch);
                    }
                }
                if s.is_empty() {
                    return Err(SyntaxError::new(start, "empty quoted identifier"));
                }
                out.push(Token {
                    tok: Tok::Ident {
                        name: s,
                        quoted: true,
                    },
                    offset: start,
                });
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit
                    .parse()
                    .map_err(|_| SyntaxError::new(start, format!("malformed number '{lit}'")))?;
                if !v.is_finite() {
                    return Err(SyntaxError::new(
                        start,
                        format!("number '{lit}' out of range"),
                    ));
                }
                out.push(Token {
                    tok: Tok::Number(v),
                    offset: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident {
                        name: text[start..i].to_string(),
                        quoted: false,
                    },
                    offset: start,
                });
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(SyntaxError::new(
                    start,
                    format!("unexpected character '{ch}'"),
                ));
            }
        }
    }
    out.push(Token {
        tok: Tok::End,
        offset: text.len(),
    });
    Ok(out)
}
