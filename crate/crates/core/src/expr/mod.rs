//! Scalar expression language for integrands, derivatives and η maps.
//!
//! Expressions are parsed once into an immutable [`Expr`] tree and then
//! evaluated either at real points ([`Expr::eval`], [`Expr::eval_xy`]) or at
//! dual numbers ([`Expr::eval_dual`]) to obtain exact first derivatives.
//! The grammar is documented in `docs/grammar.md`.

mod dual;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dual::DualValue;
pub use parser::{ParseError, ParseErrorKind};

/// Free variable of an expression. `Y` is only legal in bivariate (η) mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Abs,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

/// Guard interval `[lo, hi)` of a piecewise branch. The last branch of a
/// piecewise expression is also closed on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guard {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Var(Var),
    /// Named family parameter; must be bound with [`Expr::bind`] before evaluation.
    Param(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Branches sorted by `lo`, pairwise disjoint.
    Piecewise(Vec<(Guard, Expr)>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
}

fn domain(msg: impl Into<String>) -> EvalError {
    EvalError::Domain(msg.into())
}

/// Arithmetic needed by the evaluator, implemented for `f64` and [`DualValue`].
pub(crate) trait Scalar: Copy {
    fn constant(c: f64) -> Self;
    fn var(v: f64) -> Self;
    fn value(self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Result<Self, EvalError>;
    fn neg(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Result<Self, EvalError>;
    fn abs(self) -> Self;
    fn sqrt(self) -> Result<Self, EvalError>;
    fn powi(self, n: i32) -> Result<Self, EvalError>;
    fn powf(self, e: Self) -> Result<Self, EvalError>;
    fn min(self, o: Self) -> Self;
    fn max(self, o: Self) -> Self;
    /// True when the exponent carries no derivative information.
    fn is_constant(self) -> bool;
    fn flag_kink(self) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn var(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Result<Self, EvalError> {
        if o == 0.0 {
            return Err(domain("division by zero"));
        }
        Ok(self / o)
    }
    fn neg(self) -> Self {
        -self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Result<Self, EvalError> {
        if self <= 0.0 {
            return Err(domain(format!("log of non-positive value {self}")));
        }
        Ok(f64::ln(self))
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Result<Self, EvalError> {
        if self < 0.0 {
            return Err(domain(format!("sqrt of negative value {self}")));
        }
        Ok(f64::sqrt(self))
    }
    fn powi(self, n: i32) -> Result<Self, EvalError> {
        int_pow(self, n)
    }
    fn powf(self, e: Self) -> Result<Self, EvalError> {
        real_pow(self, e)
    }
    fn min(self, o: Self) -> Self {
        if o < self {
            o
        } else {
            self
        }
    }
    fn max(self, o: Self) -> Self {
        if o > self {
            o
        } else {
            self
        }
    }
    fn is_constant(self) -> bool {
        true
    }
    fn flag_kink(self) -> Self {
        self
    }
}

/// Integer power by repeated squaring; negative bases are fine.
pub(crate) fn int_pow(base: f64, n: i32) -> Result<f64, EvalError> {
    if n < 0 && base == 0.0 {
        return Err(domain("division by zero (zero base, negative exponent)"));
    }
    let mut e = n.unsigned_abs();
    let mut b = base;
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    Ok(if n < 0 { 1.0 / acc } else { acc })
}

pub(crate) fn real_pow(base: f64, e: f64) -> Result<f64, EvalError> {
    if base > 0.0 {
        Ok(base.powf(e))
    } else if base == 0.0 && e > 0.0 {
        Ok(0.0)
    } else {
        Err(domain(format!(
            "non-integer power {e} requires a positive base, got {base}"
        )))
    }
}

/// Exponent value that should go through [`int_pow`].
pub(crate) fn as_small_int(e: f64) -> Option<i32> {
    if e.fract() == 0.0 && e.abs() <= 1_048_576.0 {
        Some(e as i32)
    } else {
        None
    }
}

impl Expr {
    /// Parses a univariate expression in `x`.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parser::Parser::new(text, parser::Mode::Univariate).parse()
    }

    /// Parses a bivariate expression in `y` and `x` (used for η(y, x)).
    pub fn parse_bivariate(text: &str) -> Result<Expr, ParseError> {
        parser::Parser::new(text, parser::Mode::Bivariate).parse()
    }

    /// Parses a univariate expression that may also reference the given
    /// parameter names.
    pub fn parse_with_params(text: &str, params: &[&str]) -> Result<Expr, ParseError> {
        let names = params.iter().map(|s| s.to_string()).collect();
        parser::Parser::new(text, parser::Mode::Family(names)).parse()
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    /// `y - x`, the linear η map.
    pub fn linear_eta() -> Expr {
        Expr::Binary(
            BinaryOp::Sub,
            Box::new(Expr::Var(Var::Y)),
            Box::new(Expr::Var(Var::X)),
        )
    }

    /// Replaces every named parameter with its value.
    pub fn bind(&self, values: &[(&str, f64)]) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Param(name) => {
                let v = values
                    .iter()
                    .find(|(n, _)| n == name)
                    .ok_or_else(|| EvalError::UnboundParam(name.clone()))?;
                Expr::Const(v.1)
            }
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.bind(values)?)),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.bind(values)?), Box::new(b.bind(values)?))
            }
            Expr::Piecewise(branches) => Expr::Piecewise(
                branches
                    .iter()
                    .map(|(g, e)| Ok((*g, e.bind(values)?)))
                    .collect::<Result<_, EvalError>>()?,
            ),
        })
    }

    pub fn uses_y(&self) -> bool {
        match self {
            Expr::Var(Var::Y) => true,
            Expr::Const(_) | Expr::Var(Var::X) | Expr::Param(_) => false,
            Expr::Unary(_, a) => a.uses_y(),
            Expr::Binary(_, a, b) => a.uses_y() || b.uses_y(),
            Expr::Piecewise(br) => br.iter().any(|(_, e)| e.uses_y()),
        }
    }

    /// Evaluates a univariate expression at `x`.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.eval_xy(x, f64::NAN)
    }

    /// Evaluates with both variables bound; η(y, x) is `eval_xy(x, y)`.
    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        let v = self.eval_generic::<f64>(x, y, x)?;
        if !v.is_finite() {
            return Err(domain(format!("non-finite result {v}")));
        }
        Ok(v)
    }

    /// Value and derivative with respect to `x`.
    pub fn eval_dual(&self, x: f64) -> Result<DualValue, EvalError> {
        let v = self.eval_generic::<DualValue>(DualValue::var(x), DualValue::constant(f64::NAN), x)?;
        if !v.value.is_finite() || !v.deriv.is_finite() {
            return Err(domain(format!("non-finite dual result at x = {x}")));
        }
        Ok(v)
    }

    fn eval_generic<S: Scalar>(&self, x: S, y: S, xv: f64) -> Result<S, EvalError> {
        match self {
            Expr::Const(c) => Ok(S::constant(*c)),
            Expr::Var(Var::X) => Ok(x),
            Expr::Var(Var::Y) => {
                if y.value().is_nan() {
                    Err(domain("variable y is not bound in univariate evaluation"))
                } else {
                    Ok(y)
                }
            }
            Expr::Param(name) => Err(EvalError::UnboundParam(name.clone())),
            Expr::Unary(op, a) => {
                let a = a.eval_generic(x, y, xv)?;
                match op {
                    UnaryOp::Neg => Ok(a.neg()),
                    UnaryOp::Exp => Ok(a.exp()),
                    UnaryOp::Log => a.ln(),
                    UnaryOp::Abs => Ok(a.abs()),
                    UnaryOp::Sqrt => a.sqrt(),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.eval_generic(x, y, xv)?;
                let b = b.eval_generic(x, y, xv)?;
                match op {
                    BinaryOp::Add => Ok(a.add(b)),
                    BinaryOp::Sub => Ok(a.sub(b)),
                    BinaryOp::Mul => Ok(a.mul(b)),
                    BinaryOp::Div => a.div(b),
                    BinaryOp::Pow => match as_small_int(b.value()) {
                        Some(n) if b.is_constant() => a.powi(n),
                        _ => a.powf(b),
                    },
                    BinaryOp::Min => Ok(a.min(b)),
                    BinaryOp::Max => Ok(a.max(b)),
                }
            }
            Expr::Piecewise(branches) => {
                let last = branches.len() - 1;
                for (i, (g, e)) in branches.iter().enumerate() {
                    let inside = xv >= g.lo && (xv < g.hi || (i == last && xv == g.hi));
                    if inside {
                        let v = e.eval_generic(x, y, xv)?;
                        let at_break = (i > 0 && xv == g.lo && branches[i - 1].0.hi == g.lo)
                            || (i < last && xv == g.hi);
                        return Ok(if at_break { v.flag_kink() } else { v });
                    }
                }
                Err(domain(format!("x = {xv} is outside every piecewise branch")))
            }
        }
    }

    /// Points in the open interval `(lo, hi)` where the expression may fail
    /// to be differentiable: piecewise breakpoints, zeros of `abs`
    /// arguments, and crossings of `min`/`max` arguments. Located by
    /// sign-change scanning plus bisection, so tangential zeros can be missed.
    pub fn kink_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_kinks(lo, hi, &mut out);
        out.retain(|k| *k > lo && *k < hi);
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        out
    }

    fn collect_kinks(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => {}
            Expr::Unary(op, a) => {
                if *op == UnaryOp::Abs {
                    scan_zeros(|t| a.eval(t), lo, hi, out);
                }
                a.collect_kinks(lo, hi, out);
            }
            Expr::Binary(op, a, b) => {
                if matches!(op, BinaryOp::Min | BinaryOp::Max) {
                    scan_zeros(|t| Ok(a.eval(t)? - b.eval(t)?), lo, hi, out);
                }
                a.collect_kinks(lo, hi, out);
                b.collect_kinks(lo, hi, out);
            }
            Expr::Piecewise(branches) => {
                for (g, e) in branches {
                    out.push(g.lo);
                    out.push(g.hi);
                    e.collect_kinks(lo, hi, out);
                }
            }
        }
    }
}

fn scan_zeros(
    g: impl Fn(f64) -> Result<f64, EvalError>,
    lo: f64,
    hi: f64,
    out: &mut Vec<f64>,
) {
    const SCAN: usize = 256;
    let at = |i: usize| lo + (hi - lo) * i as f64 / SCAN as f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=SCAN {
        let t = at(i);
        let Ok(v) = g(t) else {
            prev = None;
            continue;
        };
        if v == 0.0 {
            out.push(t);
        } else if let Some((pt, pv)) = prev {
            if pv != 0.0 && pv.signum() != v.signum() {
                out.push(bisect(&g, pt, t, pv));
            }
        }
        prev = Some((t, v));
    }
}

fn bisect(g: &impl Fn(f64) -> Result<f64, EvalError>, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let sa = ga.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        match g(m) {
            Ok(0.0) => return m,
            Ok(v) if v.signum() == sa => a = m,
            Ok(_) => b = m,
            Err(_) => break,
        }
    }
    0.5 * (a + b)
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v == f64::INFINITY {
        write!(f, "inf")
    } else if v == f64::NEG_INFINITY {
        write!(f, "-inf")
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Exp => "exp",
                    UnaryOp::Log => "log",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Expr::Binary(BinaryOp::Min, a, b) => write!(f, "min({a}, {b})"),
            Expr::Binary(BinaryOp::Max, a, b) => write!(f, "max({a}, {b})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Pow => "^",
                    _ => unreachable!(),
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Piecewise(branches) => {
                write!(f, "piecewise(")?;
                for (i, (g, e)) in branches.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "(")?;
                    fmt_num(g.lo, f)?;
                    write!(f, ", ")?;
                    fmt_num(g.hi, f)?;
                    write!(f, "): {e}")?;
                }
                write!(f, ")")
            }
        }
    }
}
