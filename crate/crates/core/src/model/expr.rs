//! Coefficient expressions `q ↦ c(q)` used to attach parameter dependence to
//! hopping matrices.
//!
//! The grammar is deliberately small: numbers, parameters `q1 … qN`
//! (1-based), `+ - * /`, unary minus, parentheses, `cos(·)` and `sin(·)`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based parameter index; printed as `q{index + 1}`.
    Param(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Cos(Box<Expr>),
    Sin(Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const(value)
    }

    /// Parameter `q_i` with the 1-based index used in documents.
    pub fn param(one_based: usize) -> Self {
        assert!(one_based >= 1, "parameters are 1-based");
        Expr::Param(one_based - 1)
    }

    pub fn eval(&self, q: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Param(i) => q.get(*i).copied().unwrap_or(0.0),
            Expr::Neg(a) => -a.eval(q),
            Expr::Add(a, b) => a.eval(q) + b.eval(q),
            Expr::Sub(a, b) => a.eval(q) - b.eval(q),
            Expr::Mul(a, b) => a.eval(q) * b.eval(q),
            Expr::Div(a, b) => a.eval(q) / b.eval(q),
            Expr::Cos(a) => a.eval(q).cos(),
            Expr::Sin(a) => a.eval(q).sin(),
        }
    }

    /// Number of parameters referenced (largest index + 1).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Param(i) => i + 1,
            Expr::Neg(a) | Expr::Cos(a) | Expr::Sin(a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!(
                "unexpected trailing input at {} in {src:?}",
                p.pos
            )));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Param(i) => write!(f, "q{}", i + 1),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Expr::Const(c) => s.serialize_f64(*c),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Expr::Const(v)),
            Raw::Text(t) => Expr::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at byte {}", self.pos))
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = if op == b'+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == b'*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match ident {
                    "cos" | "sin" => {
                        if self.peek() != Some(b'(') {
                            return Err(self.err("expected '(' after function name"));
                        }
                        let arg = self.atom()?;
                        Ok(if ident == "cos" {
                            Expr::Cos(Box::new(arg))
                        } else {
                            Expr::Sin(Box::new(arg))
                        })
                    }
                    _ => {
                        let idx = ident
                            .strip_prefix('q')
                            .and_then(|n| n.parse::<usize>().ok())
                            .filter(|&n| n >= 1)
                            .ok_or_else(|| Error::Parse(format!("unknown identifier {ident:?}")))?;
                        Ok(Expr::Param(idx - 1))
                    }
                }
            }
            _ => Err(self.err("expected expression")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'-' || c == b'+')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Parse(format!("bad number {text:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_basic_forms() {
        let q = [0.5, 2.0, -1.0];
        assert_eq!(Expr::parse("q1").unwrap().eval(&q), 0.5);
        assert_eq!(Expr::parse("-q3").unwrap().eval(&q), 1.0);
        assert_eq!(Expr::parse("1 + 2*q2").unwrap().eval(&q), 5.0);
        assert_eq!(Expr::parse("q2 / 4 - 1e-1").unwrap().eval(&q), 0.4);
        let c = Expr::parse("cos(q1) * sin(q2)").unwrap().eval(&q);
        assert!((c - 0.5f64.cos() * 2f64.sin()).abs() < 1e-15);
        assert_eq!(Expr::parse("2.5e+1").unwrap().eval(&q), 25.0);
    }

    #[test]
    fn precedence_and_parentheses() {
        let q = [3.0];
        assert_eq!(Expr::parse("1 + q1 * 2").unwrap().eval(&q), 7.0);
        assert_eq!(Expr::parse("(1 + q1) * 2").unwrap().eval(&q), 8.0);
        assert_eq!(Expr::parse("8 / 2 / 2").unwrap().eval(&q), 2.0);
    }

    #[test]
    fn display_round_trips() {
        for src in ["q1", "-q2 + 3", "cos(q1 * 2) - sin(q3) / 4"] {
            let e = Expr::parse(src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again);
        }
    }

    #[test]
    fn arity_counts_highest_parameter() {
        assert_eq!(Expr::parse("q1 + q3").unwrap().arity(), 3);
        assert_eq!(Expr::parse("2").unwrap().arity(), 0);
    }

    #[test]
    fn rejects_garbage() {
        for src in ["", "q0", "x1", "cos q1", "1 +", "(q1", "q1 q2"] {
            assert!(Expr::parse(src).is_err(), "{src}");
        }
    }
}
