//! Tokenizer shared by the `.lamg` and `.lamt` surface syntaxes.

use std::fmt;

use thiserror::Error;

/// A 1-based line/column position in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    One,
    Question,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Star,
    Plus,
    Arrow,
    FatArrow,
    Lt,
    Gt,
    Bar,
    Equals,
    // keywords
    Fun,
    Match,
    With,
    Inl,
    Inr,
    Case,
    Of,
    Err,
    Let,
    In,
    Roll,
    Unroll,
    Mu,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::One => "`1`",
            Tok::Question => "`?`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Dot => "`.`",
            Tok::Star => "`*`",
            Tok::Plus => "`+`",
            Tok::Arrow => "`->`",
            Tok::FatArrow => "`=>`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Bar => "`|`",
            Tok::Equals => "`=`",
            Tok::Fun => "`fun`",
            Tok::Match => "`match`",
            Tok::With => "`with`",
            Tok::Inl => "`inl`",
            Tok::Inr => "`inr`",
            Tok::Case => "`case`",
            Tok::Of => "`of`",
            Tok::Err => "`err`",
            Tok::Let => "`let`",
            Tok::In => "`in`",
            Tok::Roll => "`roll`",
            Tok::Unroll => "`unroll`",
            Tok::Mu => "`mu`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "fun" => Tok::Fun,
        "match" => Tok::Match,
        "with" => Tok::With,
        "inl" => Tok::Inl,
        "inr" => Tok::Inr,
        "case" => Tok::Case,
        "of" => Tok::Of,
        "err" => Tok::Err,
        "let" => Tok::Let,
        "in" => Tok::In,
        "roll" => Tok::Roll,
        "unroll" => Tok::Unroll,
        "mu" => Tok::Mu,
        _ => return None,
    })
}

/// Splits `src` into tokens. `#` starts a comment running to the end of the line.
/// The unicode spellings `℧`, `→`, `⇒`, `×` are accepted as aliases.
pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut pos = Pos { line: 1, col: 1 };
    let advance = |c: char, pos: &mut Pos| {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            advance(c, &mut pos);
            chars.next();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                advance(c, &mut pos);
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    word.push(c);
                    advance(c, &mut pos);
                    chars.next();
                } else {
                    break;
                }
            }
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push((tok, start));
            continue;
        }
        chars.next();
        advance(c, &mut pos);
        let tok = match c {
            '1' => {
                if matches!(chars.peek(), Some(d) if d.is_ascii_digit()) {
                    return Err(ParseError::new(start, "numeric literals other than `1` are not types"));
                }
                Tok::One
            }
            '?' => Tok::Question,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '*' | '×' => Tok::Star,
            '+' => Tok::Plus,
            '|' => Tok::Bar,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '→' => Tok::Arrow,
            '⇒' => Tok::FatArrow,
            '℧' => Tok::Err,
            '-' => {
                if chars.peek() == Some(&'>') {
                    chars.next();
                    advance('>', &mut pos);
                    Tok::Arrow
                } else {
                    return Err(ParseError::new(start, "expected `->`"));
                }
            }
            '=' => {
                if chars.peek() == Some(&'>') {
                    chars.next();
                    advance('>', &mut pos);
                    Tok::FatArrow
                } else {
                    Tok::Equals
                }
            }
            other => {
                return Err(ParseError::new(start, format!("unexpected character `{other}`")));
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, pos));
    Ok(out)
}

/// Cursor over a token stream with the helpers both parsers need.
pub(crate) struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(self.pos(), format!("expected {wanted}, found {}", self.peek()))
    }

    pub(crate) fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

/// Name scope used while parsing: innermost binder last.
#[derive(Default)]
pub(crate) struct Scope {
    names: Vec<String>,
}

impl Scope {
    pub(crate) fn push(&mut self, name: String) {
        self.names.push(name);
    }

    pub(crate) fn pop(&mut self) {
        self.names.pop();
    }

    pub(crate) fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().rev().position(|n| n == name)
    }
}

/// Binder name printed for the binder introduced at `depth`.
pub(crate) fn var_name(depth: usize) -> String {
    format!("x{depth}")
}

/// Renders a de Bruijn index as a name given the number of enclosing binders.
pub(crate) fn var_ref(index: usize, depth: usize) -> String {
    if index < depth {
        var_name(depth - 1 - index)
    } else {
        format!("free{}", index - depth)
    }
}
