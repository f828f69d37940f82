use crate::error::{Error, Location, Result};
use crate::numeric::Value;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Int(Value),
    Ident(String),
    Str(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub at: Location,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Splits `text` into tokens. `origin` is the location of the first
/// character, so callers embedding expressions in larger files get
/// file-relative positions.
pub(crate) fn tokenize(text: &str, origin: Location) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (origin.line, origin.column);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let at = Location { line, column };
        let start = i;
        let tok = match c {
            '\n' => {
                line += 1;
                column = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                column += 1;
                i += 1;
                continue;
            }
            '+' => {
                i += 1;
                Tok::Plus
            }
            '-' => {
                i += 1;
                Tok::Minus
            }
            '*' => {
                i += 1;
                Tok::Star
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '[' => {
                i += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                Tok::RBracket
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '"' => {
                i += 1;
                let body_start = i;
                while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                    i += 1;
                }
                if i >= chars.len() || chars[i] != '"' {
                    return Err(Error::syntax(at.line, at.column, "unterminated string"));
                }
                let s: String = chars[body_start..i].iter().collect();
                i += 1;
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let v = Value::parse_literal(&lit).map_err(|_| {
                    Error::syntax(at.line, at.column, format!("malformed integer `{lit}`"))
                })?;
                Tok::Int(v)
            }
            c if is_ident_start(c) => {
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            other => {
                return Err(Error::syntax(
                    at.line,
                    at.column,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        column += i - start;
        out.push(Token { tok, at });
    }
    out.push(Token {
        tok: Tok::Eof,
        at: Location { line, column },
    });
    Ok(out)
}

/// Cursor over a token list with the small set of helpers both expression
/// parsers need.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(tokens: Vec<Token>) -> Self {
        Cursor { tokens, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub(crate) fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok, context: &str) -> Result<Token> {
        if &self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("expected {} {context}", tok.describe())))
        }
    }

    pub(crate) fn unexpected(&self, message: &str) -> Error {
        let t = self.peek();
        Error::syntax(
            t.at.line,
            t.at.column,
            format!("{message}, found {}", t.tok.describe()),
        )
    }

    pub(crate) fn expect_eof(&self) -> Result<()> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("expected end of expression"))
        }
    }
}
