//! Tokenizer and cursor shared by the real-number syntax, the function DSL
//! and the scenario language.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

/// A parse failure with a 1-based line/column location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Ident(String),
    Str(String),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

const SYMBOLS: &str = "+-*/^()[],;=";

/// Splits `src` into tokens. `#` and `//` start comments that run to the end
/// of the line.
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column);
        if c.is_whitespace() {
            bump!();
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump!();
            }
        } else if c == '/' && {
            let mut ahead = chars.clone();
            ahead.next();
            ahead.peek() == Some(&'/')
        } {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump!();
            }
        } else if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() {
                    digits.push(d);
                    bump!();
                } else if d == '_' {
                    bump!();
                } else {
                    break;
                }
            }
            let n = digits.parse::<BigInt>().expect("digits parse");
            out.push(Token { tok: Tok::Int(n), line: tl, column: tc });
        } else if c.is_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_alphanumeric() || d == '_' {
                    ident.push(d);
                    bump!();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(ident), line: tl, column: tc });
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match bump!() {
                    Some('"') => break,
                    Some(ch) => s.push(ch),
                    None => {
                        return Err(SyntaxError {
                            line: tl,
                            column: tc,
                            message: "unterminated string".into(),
                        })
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tl, column: tc });
        } else if SYMBOLS.contains(c) {
            bump!();
            out.push(Token { tok: Tok::Sym(c), line: tl, column: tc });
        } else {
            return Err(SyntaxError {
                line: tl,
                column: tc,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    out.push(Token { tok: Tok::Eof, line, column });
    Ok(out)
}

/// Recursive-descent cursor over a token stream.
#[derive(Debug, Clone)]
pub struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Cursor { tokens: tokenize(src)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    pub fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_sym(&self, c: char) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == c)
    }

    pub fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, name: &str) -> bool {
        if self.is_ident(name) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`, found {}", self.peek())))
        }
    }

    pub fn expect_keyword(&mut self, name: &str) -> Result<(), SyntaxError> {
        if self.eat_ident(name) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{name}`, found {}", self.peek())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected a name, found {other}"))),
        }
    }

    pub fn expect_int(&mut self) -> Result<BigInt, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            other => Err(self.error(format!("expected an integer, found {other}"))),
        }
    }

    /// Integer with an optional leading minus sign.
    pub fn expect_signed_int(&mut self) -> Result<BigInt, SyntaxError> {
        let neg = self.eat_sym('-');
        let n = self.expect_int()?;
        Ok(if neg { -n } else { n })
    }

    pub fn expect_eof(&self) -> Result<(), SyntaxError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.peek())))
        }
    }

    pub fn location(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.column)
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        let (line, column) = self.location();
        SyntaxError { line, column, message: message.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_carry_positions() {
        let toks = tokenize("a = 1;\n  sqrt(2) # trailing\n// full line\nb").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("a".into()));
        assert_eq!(kinds[2], Tok::Int(1.into()));
        let sqrt = &toks[4];
        assert_eq!((sqrt.line, sqrt.column), (2, 3));
        let b = toks.iter().find(|t| t.tok == Tok::Ident("b".into())).unwrap();
        assert_eq!(b.line, 4);
    }

    #[test]
    fn division_is_not_a_comment() {
        let toks = tokenize("3/2").unwrap();
        assert_eq!(toks.len(), 4);
        assert_eq!(toks[1].tok, Tok::Sym('/'));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("1 + $").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
    }
}
