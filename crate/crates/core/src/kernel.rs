//! A small expression language for the nonlocal kernel `M(s, t)`.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr   = term , { ( "+" | "-" ) , term } ;
//! term   = unary , { ( "*" | "/" ) , unary } ;
//! unary  = "-" , unary | power ;
//! power  = atom , [ "^" , unary ] ;
//! atom   = number | "s" | "t" | func , "(" , expr , [ "," , expr ] , ")" | "(" , expr , ")" ;
//! func   = "exp" | "log" | "sqrt" | "abs" | "min" | "max" ;
//! number = digits , [ "." , digits ] , [ ( "e" | "E" ) , [ "+" | "-" ] , digits ]
//!        | "." , digits , [ exponent ] ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-s^2`
//! is `-(s^2)` and `2^-1` is `2^(-1)`. `min` and `max` take two arguments,
//! the other functions one.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    S,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Kernel syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    // binding strength used by the printer
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self)
            || match self {
                Expr::Num(_) | Expr::Var(_) => false,
                Expr::Neg(e) => e.any(pred),
                Expr::Binary(_, a, b) => a.any(pred) || b.any(pred),
                Expr::Call(_, args) => args.iter().any(|a| a.any(pred)),
            }
    }

    fn eval_at(&self, s: f64, t: f64) -> std::result::Result<f64, String> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::S) => s,
            Expr::Var(Var::T) => t,
            Expr::Neg(e) => -e.eval_at(s, t)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval_at(s, t)?, b.eval_at(s, t)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err("division by zero".into()),
                    BinOp::Div => a / b,
                    BinOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() {
                            return Err(format!("{a}^{b} is undefined"));
                        }
                        v
                    }
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval_at(s, t)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Log if x <= 0.0 => return Err(format!("log of nonpositive value {x}")),
                    Func::Log => x.ln(),
                    Func::Sqrt if x < 0.0 => return Err(format!("sqrt of negative value {x}")),
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                    Func::Min => x.min(args[1].eval_at(s, t)?),
                    Func::Max => x.max(args[1].eval_at(s, t)?),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err("non-finite intermediate value".into())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            // both forms round-trip; Debug switches to exponent notation at extreme magnitudes
            Expr::Num(v) if *v == 0.0 || (1e-5..1e16).contains(&v.abs()) => write!(f, "{v}"),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::S) => f.write_str("s"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                child(f, e, e.precedence() < 3)
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                child(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                child(f, b, b.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let prec = self.precedence();
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => unreachable!(),
                };
                child(f, a, a.precedence() < prec)?;
                f.write_str(sym)?;
                child(f, b, b.precedence() <= prec)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed kernel `M(s, t)`. Cheap to clone and shareable across threads.
#[derive(Debug, Clone)]
pub struct KernelExpr {
    ast: Arc<Expr>,
    source: Arc<str>,
}

impl PartialEq for KernelExpr {
    fn eq(&self, other: &Self) -> bool {
        self.ast == other.ast
    }
}

impl fmt::Display for KernelExpr {
    /// Canonical form; re-parsing it yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

impl std::str::FromStr for KernelExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_kernel(s)
    }
}

impl KernelExpr {
    pub fn from_ast(ast: Expr) -> Self {
        let source: Arc<str> = ast.to_string().into();
        Self {
            ast: Arc::new(ast),
            source,
        }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// The text the kernel was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// True when the kernel contains `abs`, `min` or `max`, whose kinks can
    /// make root counting by sign changes incomplete.
    pub fn is_nonsmooth(&self) -> bool {
        self.ast
            .any(&|e| matches!(e, Expr::Call(Func::Abs | Func::Min | Func::Max, _)))
    }

    pub fn uses_var(&self, var: Var) -> bool {
        self.ast.any(&|e| *e == Expr::Var(var))
    }

    /// `M(s, t)` for `s, t > 0`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        if !(s > 0.0 && t > 0.0) {
            return Err(Error::domain(format!(
                "kernel arguments must be positive, got s={s}, t={t}"
            )));
        }
        self.ast
            .eval_at(s, t)
            .map_err(|reason| Error::EvalFault { s, t, reason })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' | b',' => {
                out.push((Tok::Op(c as char), i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
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
                let lexeme = &text[start..i];
                let value: f64 = lexeme.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    found: format!("`{lexeme}`"),
                    expected: vec!["number".into()],
                })?;
                if !value.is_finite() {
                    return Err(Error::Syntax {
                        offset: start,
                        found: format!("`{lexeme}`"),
                        expected: vec!["finite number".into()],
                    });
                }
                out.push((Tok::Num(value), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[i..].chars().next().expect("in bounds");
                return Err(Error::Syntax {
                    offset: i,
                    found: format!("`{ch}`"),
                    expected: expected(&["number", "identifier", "operator", "(", ")", ","]),
                });
            }
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn expected(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, want: &[&str]) -> Error {
        Error::Syntax {
            offset: self.offset(),
            found: self.peek().describe(),
            expected: expected(want),
        }
    }

    fn expect_op(&mut self, c: char, want: &[&str]) -> Result<()> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(want))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            return Ok(Expr::binary(BinOp::Pow, base, self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        const ATOM: &[&str] = &["number", "identifier", "(", "-"];
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_op(')', &[")", "operator"])?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let offset = self.offset();
                self.bump();
                match name.as_str() {
                    "s" => Ok(Expr::Var(Var::S)),
                    "t" => Ok(Expr::Var(Var::T)),
                    other => {
                        let func =
                            Func::from_name(other).ok_or_else(|| Error::UnknownIdentifier {
                                name: other.to_string(),
                                offset,
                            })?;
                        self.expect_op('(', &["("])?;
                        let mut args = vec![self.expr()?];
                        for _ in 1..func.arity() {
                            self.expect_op(',', &[","])?;
                            args.push(self.expr()?);
                        }
                        self.expect_op(')', &[")"])?;
                        Ok(Expr::Call(func, args))
                    }
                }
            }
            _ => Err(self.error(ATOM)),
        }
    }
}

/// Parse kernel text into a [`KernelExpr`].
pub fn parse_kernel(text: &str) -> Result<KernelExpr> {
    let mut parser = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let ast = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error(&["+", "-", "*", "/", "^", "end of input"]));
    }
    Ok(KernelExpr {
        ast: Arc::new(ast),
        source: text.into(),
    })
}

/// The first sample at which a kernel is not positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityFailure {
    pub s: f64,
    pub t: f64,
    /// `None` when evaluation faulted.
    pub value: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub passed: bool,
    pub samples: usize,
    pub failure: Option<PositivityFailure>,
    pub note: &'static str,
}

pub const SCREENING_NOTE: &str =
    "screening is sampling-based: positivity between grid points is not certified";

/// Sample `M` on a `samples x samples` log-uniform grid over the two ranges
/// and report the first non-positive value or evaluation fault.
pub fn positivity_screen(
    expr: &KernelExpr,
    s_range: (f64, f64),
    t_range: (f64, f64),
    samples: usize,
) -> Result<PositivityReport> {
    for (lo, hi) in [s_range, t_range] {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::domain(format!(
                "screening range ({lo}, {hi}) must be positive"
            )));
        }
    }
    let samples = samples.max(2);
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        (0..samples)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (samples - 1) as f64).exp())
            .collect()
    };
    let (ss, ts) = (axis(s_range), axis(t_range));
    for &s in &ss {
        for &t in &ts {
            let failure = match expr.eval(s, t) {
                Ok(v) if v > 0.0 => continue,
                Ok(v) => PositivityFailure {
                    s,
                    t,
                    value: Some(v),
                    reason: "kernel is not positive".into(),
                },
                Err(e) => PositivityFailure {
                    s,
                    t,
                    value: None,
                    reason: e.to_string(),
                },
            };
            return Ok(PositivityReport {
                passed: false,
                samples: samples * samples,
                failure: Some(failure),
                note: SCREENING_NOTE,
            });
        }
    }
    Ok(PositivityReport {
        passed: true,
        samples: samples * samples,
        failure: None,
        note: SCREENING_NOTE,
    })
}
