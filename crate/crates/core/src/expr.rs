//! Coordinate-expression parsing and evaluation.
//!
//! The grammar covers what metric components need: numbers, declared
//! coordinate names, `pi`, the binary operators `+ - * / ^` with standard
//! precedence (`^` right-associative and binding tighter than unary minus),
//! parentheses, and the functions sin, cos, tan, exp, log, sqrt, sinh, cosh,
//! tanh.
//!
//! Evaluation is generic over the scalar, so one AST evaluates over plain
//! floats, direction-pair duals or jets. Integer exponents are expanded by
//! repeated multiplication (any base sign); other exponents go through
//! exp/log and require a positive base.

use std::fmt;

use thiserror::Error;

use crate::scalar::{Dual2, Real};

#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    /// Hint for what the parser would have accepted here.
    pub expected: Option<&'static str>,
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("evaluation error at byte {offset}: {message}")]
pub struct EvalError {
    pub offset: usize,
    pub message: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExprAst {
    pub kind: ExprKind,
    /// Byte offset of the node in the source, for error reporting.
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Number(f64),
    Coord(usize),
    Pi,
    Neg(Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

impl ExprAst {
    fn new(kind: ExprKind, offset: usize) -> Self {
        ExprAst { kind, offset }
    }

    /// Structural equality, ignoring source offsets.
    pub fn structurally_equal(&self, other: &ExprAst) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Number(a), ExprKind::Number(b)) => a == b,
            (ExprKind::Coord(a), ExprKind::Coord(b)) => a == b,
            (ExprKind::Pi, ExprKind::Pi) => true,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a.structurally_equal(b),
            (ExprKind::Binary(oa, la, ra), ExprKind::Binary(ob, lb, rb)) => {
                oa == ob && la.structurally_equal(lb) && ra.structurally_equal(rb)
            }
            (ExprKind::Call(fa, a), ExprKind::Call(fb, b)) => {
                fa == fb && a.structurally_equal(b)
            }
            _ => false,
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    coords: &'a [String],
}

pub fn parse(text: &str, coordinates: &[String]) -> Result<ExprAst, ParseError> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        coords: coordinates,
    };
    p.skip_ws();
    if p.pos >= p.bytes.len() {
        return Err(ParseError {
            offset: 0,
            message: "empty expression".into(),
            expected: Some("expression"),
        });
    }
    let ast = p.parse_sum()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(ParseError {
            offset: p.pos,
            message: format!("unexpected trailing input starting at `{}`", &p.src[p.pos..]),
            expected: Some("end of expression"),
        });
    }
    Ok(ast)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while matches!(self.bytes.get(self.pos), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_sum(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            self.skip_ws();
            let offset = lhs.offset;
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.parse_term()?;
            lhs = ExprAst::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    fn parse_term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.parse_factor()?;
        loop {
            self.skip_ws();
            let offset = lhs.offset;
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.parse_factor()?;
            lhs = ExprAst::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    // factor := '-' factor | power
    fn parse_factor(&mut self) -> Result<ExprAst, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            let offset = self.pos;
            self.pos += 1;
            let inner = self.parse_factor()?;
            return Ok(ExprAst::new(ExprKind::Neg(Box::new(inner)), offset));
        }
        self.parse_power()
    }

    // power := atom ('^' factor)?   — right-associative, exponent may be signed
    fn parse_power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.parse_atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let offset = base.offset;
            let exponent = self.parse_factor()?;
            return Ok(ExprAst::new(
                ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                offset,
            ));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<ExprAst, ParseError> {
        self.skip_ws();
        let offset = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_sum()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(ParseError {
                        offset: self.pos,
                        message: "unclosed parenthesis".into(),
                        expected: Some(")"),
                    });
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.parse_ident(),
            Some(c) => Err(ParseError {
                offset,
                message: format!("unexpected character `{}`", c as char),
                expected: Some("number, name or ("),
            }),
            None => Err(ParseError {
                offset,
                message: "unexpected end of input".into(),
                expected: Some("number, name or ("),
            }),
        }
    }

    fn parse_number(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // bare `e` belongs to an identifier, not us
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(x) => Ok(ExprAst::new(ExprKind::Number(x), start)),
            Err(_) => Err(ParseError {
                offset: start,
                message: format!("malformed number `{text}`"),
                expected: Some("number"),
            }),
        }
    }

    fn parse_ident(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if name == "pi" {
            return Ok(ExprAst::new(ExprKind::Pi, start));
        }
        if let Some(func) = Func::from_name(name) {
            self.skip_ws();
            if !self.eat(b'(') {
                return Err(ParseError {
                    offset: self.pos,
                    message: format!("function `{name}` must be applied as {name}(...)"),
                    expected: Some("("),
                });
            }
            let arg = self.parse_sum()?;
            self.skip_ws();
            if !self.eat(b')') {
                return Err(ParseError {
                    offset: self.pos,
                    message: format!("unclosed argument list for `{name}`"),
                    expected: Some(")"),
                });
            }
            return Ok(ExprAst::new(ExprKind::Call(func, Box::new(arg)), start));
        }
        if let Some(idx) = self.coords.iter().position(|c| c == name) {
            return Ok(ExprAst::new(ExprKind::Coord(idx), start));
        }
        Err(ParseError {
            offset: start,
            message: format!("undeclared symbol `{name}`"),
            expected: Some("declared coordinate name"),
        })
    }
}

/// An exponent that is a literal integer (possibly negated) is expanded by
/// repeated multiplication, which stays total for negative bases.
fn integer_literal(ast: &ExprAst) -> Option<i64> {
    match &ast.kind {
        ExprKind::Number(x) if x.fract() == 0.0 && x.abs() <= 1e15 => Some(*x as i64),
        ExprKind::Neg(inner) => integer_literal(inner).map(|n| -n),
        _ => None,
    }
}

/// Evaluate over any differentiable scalar; `vars` supplies the (seeded)
/// value of each declared coordinate.
pub fn eval<S: Real>(ast: &ExprAst, vars: &impl Fn(usize) -> S) -> Result<S, EvalError> {
    match &ast.kind {
        ExprKind::Number(x) => Ok(S::from_f64(*x)),
        ExprKind::Coord(i) => Ok(vars(*i)),
        ExprKind::Pi => Ok(S::from_f64(std::f64::consts::PI)),
        ExprKind::Neg(inner) => Ok(-eval(inner, vars)?),
        ExprKind::Call(func, arg) => {
            let a = eval(arg, vars)?;
            match func {
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Tan => {
                    if a.val().cos() == 0.0 {
                        return Err(EvalError {
                            offset: arg.offset,
                            message: "tan at a pole".into(),
                        });
                    }
                    Ok(a.tan())
                }
                Func::Exp => Ok(a.exp()),
                Func::Log => {
                    if a.val() <= 0.0 {
                        return Err(EvalError {
                            offset: arg.offset,
                            message: format!("log of non-positive value {}", a.val()),
                        });
                    }
                    Ok(a.ln())
                }
                Func::Sqrt => {
                    if a.val() < 0.0 {
                        return Err(EvalError {
                            offset: arg.offset,
                            message: format!("sqrt of negative value {}", a.val()),
                        });
                    }
                    Ok(a.sqrt())
                }
                Func::Sinh => Ok(a.sinh()),
                Func::Cosh => Ok(a.cosh()),
                Func::Tanh => Ok(a.tanh()),
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let l = eval(lhs, vars)?;
            match op {
                BinOp::Add => Ok(l + eval(rhs, vars)?),
                BinOp::Sub => Ok(l - eval(rhs, vars)?),
                BinOp::Mul => Ok(l * eval(rhs, vars)?),
                BinOp::Div => {
                    let r = eval(rhs, vars)?;
                    if r.val() == 0.0 {
                        return Err(EvalError {
                            offset: rhs.offset,
                            message: "division by zero".into(),
                        });
                    }
                    Ok(l / r)
                }
                BinOp::Pow => {
                    if let Some(n) = integer_literal(rhs) {
                        if n < 0 && l.val() == 0.0 {
                            return Err(EvalError {
                                offset: lhs.offset,
                                message: "zero base with negative exponent".into(),
                            });
                        }
                        return Ok(l.powi(n));
                    }
                    let r = eval(rhs, vars)?;
                    if l.val() <= 0.0 {
                        return Err(EvalError {
                            offset: lhs.offset,
                            message: format!(
                                "non-integer power requires positive base, got {}",
                                l.val()
                            ),
                        });
                    }
                    Ok(l.powf(r))
                }
            }
        }
    }
}

pub fn eval_f64(ast: &ExprAst, point: &[f64; 4]) -> Result<f64, EvalError> {
    eval(ast, &|i| point[i])
}

/// Evaluate with a second-order dual seeded along the coordinate pair
/// (dir_a, dir_b): the result carries the value, both directional first
/// derivatives, and the mixed second derivative.
pub fn eval_dual2(
    ast: &ExprAst,
    point: &[f64; 4],
    dir_a: usize,
    dir_b: usize,
) -> Result<Dual2, EvalError> {
    eval(ast, &|i| Dual2::variable(point[i], i == dir_a, i == dir_b))
}

/// Render with minimal parentheses; reparsing yields a structurally
/// identical tree.
pub fn pretty(ast: &ExprAst) -> String {
    let mut out = String::new();
    write_prec(ast, 0, &mut out);
    out
}

// precedence levels: 0 sum, 1 term, 2 unary, 3 power, 4 atom
fn write_prec(ast: &ExprAst, min_prec: u8, out: &mut String) {
    let prec = match &ast.kind {
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 0,
        ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 1,
        ExprKind::Neg(..) => 2,
        ExprKind::Binary(BinOp::Pow, ..) => 3,
        _ => 4,
    };
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match &ast.kind {
        ExprKind::Number(x) => {
            use fmt::Write;
            write!(out, "{x}").unwrap();
        }
        ExprKind::Coord(i) => {
            use fmt::Write;
            write!(out, "c{i}").unwrap(); // replaced by name in pretty_named
        }
        ExprKind::Pi => out.push_str("pi"),
        ExprKind::Neg(inner) => {
            out.push('-');
            write_prec(inner, 2, out);
        }
        ExprKind::Call(func, arg) => {
            out.push_str(func.name());
            out.push('(');
            write_prec(arg, 0, out);
            out.push(')');
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => (" + ", 0, 1),
                BinOp::Sub => (" - ", 0, 1),
                BinOp::Mul => ("*", 1, 2),
                BinOp::Div => ("/", 1, 2),
                BinOp::Pow => ("^", 4, 2),
            };
            write_prec(lhs, lp, out);
            out.push_str(sym);
            write_prec(rhs, rp, out);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Like [`pretty`] but substituting the declared coordinate names.
pub fn pretty_named(ast: &ExprAst, coords: &[String]) -> String {
    let generic = pretty(ast);
    // coordinate placeholders are c0..c3; replace longest-first is not
    // needed because the digit disambiguates
    let mut out = generic;
    for (i, name) in coords.iter().enumerate() {
        out = out.replace(&format!("c{i}"), name);
    }
    out
}
