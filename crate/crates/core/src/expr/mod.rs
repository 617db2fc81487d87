//! A small expression language for one-dimensional potentials.
//!
//! Expressions are parsed once into an immutable [`Expr`] tree and evaluated
//! together with their first two derivatives through [`Dual2`] arithmetic.
//! Exponents are restricted to non-negative integer literals, so every
//! expression is smooth wherever its divisions are defined.

mod dual;
mod parse;

use std::fmt;
use std::sync::Arc;

pub use dual::Dual2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Cos,
    Sin,
    Cosh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::Cosh => "cosh",
        }
    }
}

/// Parsed potential expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        parse::parse(src)
    }

    /// Value, first and second derivative at `x`.
    pub fn eval_d2(&self, x: f64) -> Result<Dual2> {
        let r = self.eval_node(x)?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::NonFinite { x })
        }
    }

    fn eval_node(&self, x: f64) -> Result<Dual2> {
        Ok(match self {
            Expr::Const(c) => Dual2::constant(*c),
            Expr::Var => Dual2::variable(x),
            Expr::Add(a, b) => a.eval_node(x)? + b.eval_node(x)?,
            Expr::Sub(a, b) => a.eval_node(x)? - b.eval_node(x)?,
            Expr::Mul(a, b) => a.eval_node(x)? * b.eval_node(x)?,
            Expr::Div(a, b) => {
                let den = b.eval_node(x)?;
                if den.value == 0.0 {
                    return Err(Error::DivisionByZero { x });
                }
                a.eval_node(x)? / den
            }
            Expr::Pow(a, n) => a.eval_node(x)?.powi(*n),
            Expr::Neg(a) => -a.eval_node(x)?,
            Expr::Call(f, a) => {
                let a = a.eval_node(x)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Cos => a.cos(),
                    Func::Sin => a.sin(),
                    Func::Cosh => a.cosh(),
                }
            }
        })
    }

    /// Plain value, without derivative bookkeeping.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.eval_value(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    }

    fn eval_value(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval_value(x)? + b.eval_value(x)?,
            Expr::Sub(a, b) => a.eval_value(x)? - b.eval_value(x)?,
            Expr::Mul(a, b) => a.eval_value(x)? * b.eval_value(x)?,
            Expr::Div(a, b) => {
                let den = b.eval_value(x)?;
                if den == 0.0 {
                    return Err(Error::DivisionByZero { x });
                }
                a.eval_value(x)? / den
            }
            Expr::Pow(a, n) => a.eval_value(x)?.powi(*n as i32),
            Expr::Neg(a) => -a.eval_value(x)?,
            Expr::Call(f, a) => {
                let a = a.eval_value(x)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Cos => a.cos(),
                    Func::Sin => a.sin(),
                    Func::Cosh => a.cosh(),
                }
            }
        })
    }
}

/// Fully parenthesized form; parsing it back yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("x"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Shared handle to a parsed potential φ together with its source text.
#[derive(Debug, Clone)]
pub struct Potential {
    source: Arc<str>,
    expr: Arc<Expr>,
}

impl Potential {
    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self { source: Arc::from(src), expr: Arc::new(Expr::parse(src)?) })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.expr.eval(x)
    }

    pub fn eval_d2(&self, x: f64) -> Result<Dual2> {
        self.expr.eval_d2(x)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(self.expr.eval_d2(x)?.d1)
    }
}
