//! A small expression language for test functions, with analytic partial
//! derivatives.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?          right-associative, binds tighter than unary minus
//! atom   := number | var | func '(' expr ')' | '(' expr ')'
//! var    := t | t1 | t2
//! func   := sin | cos | exp | log
//! ```
//!
//! `t` is an alias for `t1` in one-variable expressions and may not be mixed
//! with `t1` or `t2`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{cos, exp, ln, powf, sin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => sin(x),
            Func::Cos => cos(x),
            Func::Exp => exp(x),
            Func::Log => ln(x),
        }
    }
}

/// Expression tree. Variables are indexed from 0 (`t1`) and 1 (`t2`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => vars.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => {
                let base = a.eval(vars);
                match **b {
                    Expr::Num(c) if c == 2.0 => base * base,
                    Expr::Num(c) if c == 1.0 => base,
                    _ => powf(base, b.eval(vars)),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    /// Number of variables referenced: 0, 1 or 2.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Expr::Num(c) if *c == v)
    }

    fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    /// Partial derivative with respect to variable `var` (0-based), lightly
    /// simplified.
    pub fn derivative(&self, var: usize) -> Expr {
        use Expr::*;
        if !self.depends_on(var) {
            return Num(0.0);
        }
        match self {
            Num(_) => Num(0.0),
            Var(i) => Num(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(var)),
            Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Mul(a, b) => add(mul(a.derivative(var), (**b).clone()), mul((**a).clone(), b.derivative(var))),
            Div(a, b) => div(
                sub(mul(a.derivative(var), (**b).clone()), mul((**a).clone(), b.derivative(var))),
                pow((**b).clone(), Num(2.0)),
            ),
            Pow(a, b) => {
                if !b.depends_on(var) {
                    let lowered = match **b {
                        Num(c) => Num(c - 1.0),
                        _ => sub((**b).clone(), Num(1.0)),
                    };
                    mul(mul((**b).clone(), pow((**a).clone(), lowered)), a.derivative(var))
                } else {
                    // d(u^v) = u^v (v' ln u + v u'/u)
                    mul(
                        self.clone(),
                        add(
                            mul(b.derivative(var), Call(Func::Log, a.clone())),
                            div(mul((**b).clone(), a.derivative(var)), (**a).clone()),
                        ),
                    )
                }
            }
            Call(f, a) => {
                let inner = a.derivative(var);
                let outer = match f {
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => neg(Call(Func::Sin, a.clone())),
                    Func::Exp => Call(Func::Exp, a.clone()),
                    Func::Log => div(Num(1.0), (**a).clone()),
                };
                mul(outer, inner)
            }
        }
    }

    /// Replace variable `var` by the constant `value` and renumber the
    /// remaining variable to index 0.
    pub fn freeze(&self, var: usize, value: f64) -> Expr {
        use Expr::*;
        match self {
            Num(c) => Num(*c),
            Var(i) if *i == var => Num(value),
            Var(_) => Var(0),
            Neg(a) => Neg(bx(a.freeze(var, value))),
            Add(a, b) => Add(bx(a.freeze(var, value)), bx(b.freeze(var, value))),
            Sub(a, b) => Sub(bx(a.freeze(var, value)), bx(b.freeze(var, value))),
            Mul(a, b) => Mul(bx(a.freeze(var, value)), bx(b.freeze(var, value))),
            Div(a, b) => Div(bx(a.freeze(var, value)), bx(b.freeze(var, value))),
            Pow(a, b) => Pow(bx(a.freeze(var, value)), bx(b.freeze(var, value))),
            Call(f, a) => Call(*f, bx(a.freeze(var, value))),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(c) if c.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, child: &Expr, min: u8) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(c) => Expr::Num(-c),
        other => Expr::Neg(bx(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if a.is_const(0.0) {
        b
    } else if b.is_const(0.0) {
        a
    } else {
        Expr::Add(bx(a), bx(b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_const(0.0) {
        a
    } else if a.is_const(0.0) {
        neg(b)
    } else {
        Expr::Sub(bx(a), bx(b))
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_const(0.0) || b.is_const(0.0) {
        Expr::Num(0.0)
    } else if a.is_const(1.0) {
        b
    } else if b.is_const(1.0) {
        a
    } else {
        Expr::Mul(bx(a), bx(b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if a.is_const(0.0) {
        Expr::Num(0.0)
    } else if b.is_const(1.0) {
        a
    } else {
        Expr::Div(bx(a), bx(b))
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if b.is_const(1.0) {
        a
    } else if b.is_const(0.0) {
        Expr::Num(1.0)
    } else {
        Expr::Pow(bx(a), bx(b))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "t{}", i + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                self.write_child(f, a, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let p = self.precedence();
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                self.write_child(f, a, p)?;
                f.write_str(op)?;
                self.write_child(f, b, p + 1)
            }
            Expr::Pow(a, b) => {
                self.write_child(f, a, 5)?;
                f.write_str("^")?;
                self.write_child(f, b, 4)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    bare_t: Option<usize>,
    indexed_t: Option<usize>,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Syntax { offset, message: message.into() }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' { Expr::Add(bx(lhs), bx(rhs)) } else { Expr::Sub(bx(lhs), bx(rhs)) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' { Expr::Mul(bx(lhs), bx(rhs)) } else { Expr::Div(bx(lhs), bx(rhs)) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(bx(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(bx(base), bx(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => Err(self.syntax(start, "expected an operand, found end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_close(start)?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(start),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(start),
            Some(c) => Err(self.syntax(start, format!("unexpected character `{c}`"))),
        }
    }

    fn expect_close(&mut self, open: usize) -> Result<()> {
        match self.peek() {
            Some(')') => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.syntax(self.pos, format!("expected `)` to close `(` at offset {open}, found `{c}`"))),
            None => Err(self.syntax(self.pos, format!("unclosed `(` at offset {open}"))),
        }
    }

    fn number(&mut self, start: usize) -> Result<Expr> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text.parse().map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.syntax(start, format!("number `{text}` is out of range")));
        }
        self.pos = end;
        Ok(Expr::Num(value))
    }

    fn identifier(&mut self, start: usize) -> Result<Expr> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        let name = &self.src[start..end];
        self.pos = end;
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        };
        if let Some(func) = func {
            if self.peek() != Some('(') {
                return Err(self.syntax(self.pos, format!("expected `(` after `{name}`")));
            }
            let open = self.pos;
            self.pos += 1;
            let arg = self.expr()?;
            self.expect_close(open)?;
            return Ok(Expr::Call(func, bx(arg)));
        }
        let var = match name {
            "t" => {
                self.bare_t.get_or_insert(start);
                0
            }
            "t1" => {
                self.indexed_t.get_or_insert(start);
                0
            }
            "t2" => {
                self.indexed_t.get_or_insert(start);
                1
            }
            _ => return Err(Error::UnknownIdentifier { offset: start, name: name.to_string() }),
        };
        if let (Some(_), Some(other)) = (self.bare_t, self.indexed_t) {
            let at = self.bare_t.unwrap().max(other);
            return Err(self.syntax(at, "`t` cannot be mixed with `t1`/`t2`"));
        }
        Ok(Expr::Var(var))
    }
}

/// Parse an expression into a tree.
pub fn parse_tree(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0, bare_t: None, indexed_t: None };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(p.syntax(p.pos, format!("unexpected `{c}` after complete expression")));
    }
    Ok(e)
}

/// Parse an expression into a [`FuncSpec`] whose arity is inferred from the
/// variables used (at least 1).
pub fn parse_expression(src: &str) -> Result<FuncSpec> {
    let tree = parse_tree(src)?;
    let arity = tree.arity().max(1);
    Ok(FuncSpec {
        label: src.trim().to_string(),
        arity,
        body: Body::Expr(tree),
        smoothness: Smoothness::ContinuouslyDifferentiable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Continuous,
    ContinuouslyDifferentiable,
}

/// Opaque function of one or two variables.
pub type Callable = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Body {
    Expr(Expr),
    Callable { f: Callable, partials: [Option<Callable>; 2] },
}

/// A test function: expression tree or callable, with arity and declared
/// smoothness.
#[derive(Clone)]
pub struct FuncSpec {
    label: String,
    arity: usize,
    body: Body,
    smoothness: Smoothness,
}

impl fmt::Debug for FuncSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FuncSpec")
            .field("label", &self.label)
            .field("arity", &self.arity)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl FuncSpec {
    /// Parse `src` and require it to be usable as a function of `arity` variables.
    pub fn parse(src: &str, arity: usize) -> Result<Self> {
        parse_expression(src)?.expect_arity(arity)
    }

    pub fn from_expr(label: impl Into<String>, expr: Expr, arity: usize) -> Result<Self> {
        FuncSpec {
            label: label.into(),
            arity: expr.arity().max(1),
            body: Body::Expr(expr),
            smoothness: Smoothness::ContinuouslyDifferentiable,
        }
        .expect_arity(arity)
    }

    /// Wrap a callable of `arity` variables. Derivatives may be attached with
    /// [`FuncSpec::with_partial`]; without them the function is treated as
    /// merely continuous.
    pub fn callable<F>(label: impl Into<String>, arity: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(1..=2).contains(&arity) {
            return Err(Error::Arity { expected: 2, found: arity });
        }
        Ok(FuncSpec {
            label: label.into(),
            arity,
            body: Body::Callable { f: Arc::new(f), partials: [None, None] },
            smoothness: Smoothness::Continuous,
        })
    }

    /// Attach `∂f/∂t_{var+1}` to a callable body.
    pub fn with_partial<F>(mut self, var: usize, df: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if var >= self.arity {
            return Err(Error::domain(format!("partial index {var} out of range for arity {}", self.arity)));
        }
        match &mut self.body {
            Body::Callable { partials, .. } => {
                partials[var] = Some(Arc::new(df));
                if partials[..self.arity].iter().all(Option::is_some) {
                    self.smoothness = Smoothness::ContinuouslyDifferentiable;
                }
                Ok(self)
            }
            Body::Expr(_) => Err(Error::domain("expression bodies carry analytic derivatives already")),
        }
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Check that the function can be used with `arity` variables; a
    /// one-variable expression may be promoted to two variables.
    pub fn expect_arity(mut self, arity: usize) -> Result<Self> {
        let promotable = matches!(self.body, Body::Expr(_)) && self.arity <= arity;
        if self.arity == arity || promotable {
            self.arity = arity;
            Ok(self)
        } else {
            Err(Error::Arity { expected: arity, found: self.arity })
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn arity(&self) -> usize {
        self.arity
    }
    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }
    pub fn expr(&self) -> Option<&Expr> {
        match &self.body {
            Body::Expr(e) => Some(e),
            Body::Callable { .. } => None,
        }
    }

    #[inline]
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match &self.body {
            Body::Expr(e) => e.eval(vars),
            Body::Callable { f, .. } => f(vars),
        }
    }

    #[inline]
    pub fn eval1(&self, t: f64) -> f64 {
        self.eval(&[t])
    }

    #[inline]
    pub fn eval2(&self, t1: f64, t2: f64) -> f64 {
        self.eval(&[t1, t2])
    }

    /// `∂f/∂t_{var+1}` as a function of the same arity.
    pub fn partial(&self, var: usize) -> Result<FuncSpec> {
        if var >= self.arity {
            return Err(Error::domain(format!("partial index {var} out of range for arity {}", self.arity)));
        }
        if self.smoothness != Smoothness::ContinuouslyDifferentiable {
            return Err(Error::DerivativeUnavailable(format!("`{}` is declared only continuous", self.label)));
        }
        let name = if self.arity == 1 { String::from("t") } else { format!("t{}", var + 1) };
        let label = format!("d/d{name}[{}]", self.label);
        match &self.body {
            Body::Expr(e) => Ok(FuncSpec {
                label,
                arity: self.arity,
                body: Body::Expr(e.derivative(var)),
                smoothness: Smoothness::ContinuouslyDifferentiable,
            }),
            Body::Callable { partials, .. } => match &partials[var] {
                Some(df) => Ok(FuncSpec {
                    label,
                    arity: self.arity,
                    body: Body::Callable { f: df.clone(), partials: [None, None] },
                    smoothness: Smoothness::Continuous,
                }),
                None => Err(Error::DerivativeUnavailable(format!("no derivative supplied for `{}`", self.label))),
            },
        }
    }

    /// One-variable slice of a two-variable function: variable `keep`
    /// (0-based) stays free, the other is frozen at `value`.
    pub fn slice(&self, keep: usize, value: f64) -> Result<FuncSpec> {
        if self.arity != 2 || keep > 1 {
            return Err(Error::Arity { expected: 2, found: self.arity });
        }
        let frozen = 1 - keep;
        let label = format!("{}|t{}={value}", self.label, frozen + 1);
        match &self.body {
            Body::Expr(e) => {
                Ok(FuncSpec { label, arity: 1, body: Body::Expr(e.freeze(frozen, value)), smoothness: self.smoothness })
            }
            Body::Callable { f, partials } => {
                let lift = move |g: Callable| -> Callable {
                    Arc::new(move |v: &[f64]| {
                        let mut full = [value; 2];
                        full[keep] = v[0];
                        g(&full)
                    })
                };
                let d = partials[keep].clone().map(lift);
                let smoothness =
                    if d.is_some() { Smoothness::ContinuouslyDifferentiable } else { Smoothness::Continuous };
                Ok(FuncSpec {
                    label,
                    arity: 1,
                    body: Body::Callable { f: lift(f.clone()), partials: [d, None] },
                    smoothness,
                })
            }
        }
    }
}
