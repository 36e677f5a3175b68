//! Entry expressions in the block index `k`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?        right-associative
//! primary := number | 'k' | '(' sum ')'
//! ```

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: expected one of {expected:?}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(f64),
    #[error("negative base {base} raised to non-integer power {exponent}")]
    NegativeBase { base: f64, exponent: f64 },
    #[error("exponent must not depend on k")]
    NonConstantExponent,
    #[error("block index must be at least 1")]
    IndexOutOfRange,
    #[error("non-finite result")]
    NonFinite,
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error(&["operator", "')'", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let found = match self.src[self.pos..].chars().next() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        };
        ParseError {
            offset: self.pos,
            expected: expected.to_vec(),
            found,
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        const EXPECTED: &[&str] = &["number", "'k'", "'('", "'-'"];
        match self.peek() {
            Some('k') => {
                let next = self.src[self.pos + 1..].chars().next();
                if next.is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    return Err(self.error(EXPECTED));
                }
                self.pos += 1;
                Ok(Expr::Var)
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.error(&["')'"]));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            _ => Err(self.error(EXPECTED)),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp_end = end + 1;
            if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
                exp_end += 1;
            }
            let digits_start = exp_end;
            while exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                exp_end += 1;
            }
            if exp_end > digits_start {
                end = exp_end;
            }
        }
        match self.src[start..end].parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                Ok(Expr::Const(v))
            }
            _ => Err(self.error(&["number"])),
        }
    }
}

impl Expr {
    pub fn depends_on_k(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Neg(e) => e.depends_on_k(),
            Expr::Binary(_, l, r) => l.depends_on_k() || r.depends_on_k(),
        }
    }

    /// Evaluates every `k`-free subtree. Subtrees whose evaluation fails are
    /// kept as they are so the error surfaces at evaluation time.
    pub fn fold_constants(&self) -> Expr {
        let folded = match self {
            Expr::Const(_) | Expr::Var => return self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.fold_constants())),
            Expr::Binary(op, l, r) => Expr::Binary(
                *op,
                Box::new(l.fold_constants()),
                Box::new(r.fold_constants()),
            ),
        };
        if folded.depends_on_k() {
            return folded;
        }
        match folded.compile().run(1) {
            Ok(v) => Expr::Const(v),
            Err(_) => folded,
        }
    }

    /// Flattens the tree into a postfix program.
    pub fn compile(&self) -> Program {
        let mut ops = Vec::new();
        self.emit(&mut ops);
        Program { ops }
    }

    fn emit(&self, ops: &mut Vec<Op>) {
        match self {
            Expr::Const(v) => ops.push(Op::Const(*v)),
            Expr::Var => ops.push(Op::Var),
            Expr::Neg(e) => {
                e.emit(ops);
                ops.push(Op::Neg);
            }
            Expr::Binary(BinOp::Pow, l, r) => {
                l.emit(ops);
                if r.depends_on_k() {
                    ops.push(Op::Fail(EvalError::NonConstantExponent));
                    return;
                }
                r.emit(ops);
                ops.push(Op::Bin(BinOp::Pow));
            }
            Expr::Binary(op, l, r) => {
                l.emit(ops);
                r.emit(ops);
                ops.push(Op::Bin(*op));
            }
        }
    }
}

/// Fully parenthesized rendering; reparses to a structurally equal tree for
/// every tree produced by [`parse_expr`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) if *v < 0.0 => write!(f, "(-{})", -v),
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "k"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Const(f64),
    Var,
    Neg,
    Bin(BinOp),
    Fail(EvalError),
}

/// Postfix form of an [`Expr`], evaluated with an explicit stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
}

impl Program {
    pub fn run(&self, k: u64) -> Result<f64, EvalError> {
        if k == 0 {
            return Err(EvalError::IndexOutOfRange);
        }
        let kf = k as f64;
        let mut stack: Vec<f64> = Vec::with_capacity(8);
        for op in &self.ops {
            match op {
                Op::Const(v) => stack.push(*v),
                Op::Var => stack.push(kf),
                Op::Neg => {
                    let v = stack.pop().expect("well-formed program");
                    stack.push(-v);
                }
                Op::Bin(op) => {
                    let r = stack.pop().expect("well-formed program");
                    let l = stack.pop().expect("well-formed program");
                    stack.push(apply(*op, l, r)?);
                }
                Op::Fail(e) => return Err(e.clone()),
            }
        }
        let v = stack.pop().expect("well-formed program");
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

fn apply(op: BinOp, l: f64, r: f64) -> Result<f64, EvalError> {
    let v = match op {
        BinOp::Add => l + r,
        BinOp::Sub => l - r,
        BinOp::Mul => l * r,
        BinOp::Div => {
            if r == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            l / r
        }
        BinOp::Pow => power(l, r)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 {
        return if exponent < 0.0 {
            Err(EvalError::ZeroToNegativePower(exponent))
        } else if exponent == 0.0 {
            Ok(1.0)
        } else {
            Ok(0.0)
        };
    }
    if exponent.fract() == 0.0 && exponent.abs() <= 1024.0 {
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalError::NegativeBase { base, exponent });
    }
    Ok(base.powf(exponent))
}

pub fn eval_expr(e: &Expr, k: u64) -> Result<f64, EvalError> {
    e.compile().run(k)
}
