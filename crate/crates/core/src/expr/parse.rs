//! Recursive-descent parser for the potential language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INTEGER)*
//! primary := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := exp | cos | sin | cosh
//! ```

use super::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: Option<u32> },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        if !src.is_ascii() {
            let offset = src.bytes().position(|b| !b.is_ascii()).unwrap_or(0);
            return Err(Error::Syntax { offset, message: "non-ASCII input".into() });
        }
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let done = t.1 == Tok::Eof;
            out.push(t);
            if done {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((start, Tok::Eof));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((start, t));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.src.get(self.pos).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok((start, Tok::Ident(name)));
        }
        Err(Error::Syntax { offset: start, message: format!("unexpected character `{}`", c as char) })
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok)> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let int_digits = digits(self);
        let mut integer = true;
        let mut frac_digits = 0;
        if self.src.get(self.pos) == Some(&b'.') {
            integer = false;
            self.pos += 1;
            frac_digits = digits(self);
        }
        if int_digits + frac_digits == 0 {
            return Err(Error::Syntax { offset: start, message: "malformed number".into() });
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` is not an exponent; leave the `e` for the identifier lexer
                self.pos = save;
            } else {
                integer = false;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 =
            text.parse().map_err(|_| Error::Syntax { offset: start, message: format!("malformed number `{text}`") })?;
        let integer = if integer { text.parse::<u32>().ok() } else { None };
        Ok((start, Tok::Num { value, integer }))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn offset(&self) -> usize {
        self.toks[self.i].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> Error {
        let found = match self.peek() {
            Tok::Eof => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        Error::Syntax { offset: self.offset(), message: format!("expected {what}, found {found}") }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let off = self.offset();
            match self.bump().1 {
                Tok::Num { integer: Some(n), .. } => base = Expr::Pow(Box::new(base), n),
                Tok::Num { .. } | Tok::Minus => return Err(Error::NonIntegerExponent { offset: off }),
                Tok::Eof => {
                    return Err(Error::Syntax { offset: off, message: "expected exponent, found end of input".into() })
                }
                _ => return Err(Error::NonIntegerExponent { offset: off }),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Expr::Const(value))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "x" {
                    return Ok(Expr::Var);
                }
                let func = match name.as_str() {
                    "exp" => Func::Exp,
                    "cos" => Func::Cos,
                    "sin" => Func::Sin,
                    "cosh" => Func::Cosh,
                    _ => return Err(Error::UnknownIdentifier { name, offset: off }),
                };
                if *self.peek() != Tok::LParen {
                    return Err(self.unexpected("`(` after function name"));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected("operand")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

pub(super) fn parse(src: &str) -> Result<Expr> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, i: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("operator or end of input"));
    }
    Ok(e)
}
