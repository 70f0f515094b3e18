//! Closed-form scalar expressions.
//!
//! Profiles `B, a, b, c`, test fields and the planar fields are written as
//! small expression trees that can be evaluated on any [`Scalar`], which gives
//! exact derivatives to whatever depth the caller needs. A tiny infix parser
//! covers the config-file syntax (`2 + sin(theta)`, `z^2`, `pi`).

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::jet::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    PowI(Box<Expr>, i32),
    PowF(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn call(f: Func, x: Expr) -> Self {
        Expr::Call(f, Box::new(x))
    }

    pub fn powi(self, n: i32) -> Self {
        Expr::PowI(Box::new(self), n)
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> S {
        match self {
            Expr::Const(v) => S::cst(*v),
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Neg(a) => -a.eval(vars),
            Expr::PowI(a, n) => a.eval(vars).powi(*n),
            Expr::PowF(a, p) => a.eval(vars).powf(*p),
            Expr::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    /// Constant value when the tree has no variables.
    pub fn as_const(&self) -> Option<f64> {
        if self.max_var().is_none() {
            Some(self.eval::<f64>(&[]))
        } else {
            None
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, None) => x,
                    (None, y) => y,
                }
            }
            Expr::Neg(a) | Expr::PowI(a, _) | Expr::PowF(a, _) | Expr::Call(_, a) => a.max_var(),
        }
    }

    /// Parses infix syntax. `vars` lists the accepted variable names in
    /// evaluation order; `pi` is a reserved constant.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, vars };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(ParseError::new(p.col(), "unexpected trailing input"));
        }
        Ok(e)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $v:ident) => {
        impl core::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(column: usize, message: &str) -> Self {
        Self { column, message: message.to_string() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| ParseError::new(start + 1, "malformed number"))?;
            out.push((start + 1, Tok::Num(v)));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start + 1, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(ch) {
            out.push((i + 1, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(ParseError::new(i + 1, "unexpected character"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn col(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.0).unwrap_or(0)
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((_, Tok::Op(c))) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let col = self.col();
            let exponent = self.unary()?;
            return match exponent.as_const() {
                Some(p) if p == (p as i32) as f64 => Ok(base.powi(p as i32)),
                Some(p) => Ok(Expr::PowF(Box::new(base), p)),
                None => {
                    let _ = col;
                    Ok(Expr::call(Func::Exp, exponent * Expr::call(Func::Ln, base)))
                }
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        let tok = self.tokens.get(self.pos).cloned();
        match tok {
            Some((_, Tok::Num(v))) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some((_, Tok::Op('('))) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(ParseError::new(self.col(), "expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some((_, Tok::Ident(name))) => {
                self.pos += 1;
                if name == "pi" {
                    return Ok(Expr::Const(core::f64::consts::PI));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                if let Some(f) = Func::from_name(&name) {
                    if self.peek_op() != Some('(') {
                        return Err(ParseError::new(self.col(), "expected '(' after function name"));
                    }
                    let arg = self.atom()?;
                    return Ok(Expr::call(f, arg));
                }
                Err(ParseError::new(col, "unknown identifier"))
            }
            _ => Err(ParseError::new(col, "expected a number, variable, function or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    #[test]
    fn parses_precedence_and_functions() {
        let e = Expr::parse("2 + sin(theta) * 3^2 - -z/4", &["theta", "z"]).unwrap();
        let v = e.eval(&[0.5f64, 2.0]);
        assert!((v - (2.0 + 0.5f64.sin() * 9.0 + 0.5)).abs() < 1e-15);
        let p = Expr::parse("cos(pi*x)", &["x"]).unwrap();
        assert!((p.eval(&[1.0f64]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_columns() {
        let err = Expr::parse("1 + foo(x)", &["x"]).unwrap_err();
        assert_eq!(err.column, 5);
        assert!(Expr::parse("(1 + x", &["x"]).is_err());
        assert!(Expr::parse("1 $ 2", &[]).is_err());
    }

    #[test]
    fn jet_evaluation_matches_manual_derivative() {
        let e = Expr::parse("z^3 * exp(theta)", &["theta", "z"]).unwrap();
        let j = e.eval(&[Jet::theta(0.2), Jet::z(1.5)]);
        assert!((j.d(1, 2) - 6.0 * 1.5 * 0.2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn fractional_and_symbolic_powers() {
        let e = Expr::parse("x^1.5 + 2^x", &["x"]).unwrap();
        let v: f64 = e.eval(&[4.0]);
        assert!((v - (8.0 + 16.0)).abs() < 1e-12);
    }
}
