use std::fmt;

use thiserror::Error;

use super::{BinaryOp, Expr, Guard, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier(String),
    Arity { function: String, expected: usize, found: usize },
    InvalidGuard,
}

/// Parse failure with the position where it was detected and the set of
/// tokens that would have been accepted there.
///
/// `offset` is a 1-based byte position; errors at end of input report
/// `text.len() + 1`.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: {}", self.offset, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

pub(crate) enum Mode {
    Univariate,
    Bivariate,
    Family(Vec<String>),
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    mode: Mode,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                offset: start + 1,
                kind: ParseErrorKind::Syntax,
                message: format!("malformed number `{text}`"),
                expected: vec![],
            })?;
            if !v.is_finite() {
                return Err(ParseError {
                    offset: start + 1,
                    kind: ParseErrorKind::Syntax,
                    message: format!("number `{text}` overflows"),
                    expected: vec![],
                });
            }
            out.push((start + 1, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start + 1, Tok::Ident(src[start..i].to_string())));
        } else if b"+-*/^(),:".contains(&c) {
            out.push((i + 1, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: i + 1,
                kind: ParseErrorKind::Syntax,
                message: format!("unexpected character `{ch}`"),
                expected: vec![],
            });
        }
    }
    out.push((src.len() + 1, Tok::End));
    Ok(out)
}

fn function_arity(name: &str) -> Option<usize> {
    match name {
        "exp" | "log" | "abs" | "sqrt" => Some(1),
        "min" | "max" => Some(2),
        _ => None,
    }
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, mode: Mode) -> Self {
        Parser { src, toks: Vec::new(), pos: 0, mode }
    }

    pub(crate) fn parse(mut self) -> Result<Expr, ParseError> {
        self.toks = lex(self.src)?;
        let e = self.expr()?;
        if self.peek() != &Tok::End {
            return Err(self.unexpected(&["operator", "end of input"]));
        }
        Ok(e)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax,
            message: format!("unexpected {}", self.peek().describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == &Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("\"{c}\"")]))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == &Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinaryOp::Add,
                Tok::Sym('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinaryOp::Mul,
                Tok::Sym('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek() {
            Tok::Num(_) | Tok::Sym('(') | Tok::Ident(_) => {}
            _ => return Err(self.unexpected(&["number", "identifier", "\"(\"", "\"-\""])),
        }
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Ident(name) => self.identifier(name, start),
            _ => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
        }
    }

    fn identifier(&mut self, name: String, start: usize) -> Result<Expr, ParseError> {
        if name == "piecewise" {
            return self.piecewise();
        }
        if let Some(arity) = function_arity(&name) {
            self.expect('(')?;
            let mut args = vec![self.expr()?];
            loop {
                if self.eat(',') {
                    args.push(self.expr()?);
                    continue;
                }
                if self.eat(')') {
                    break;
                }
                let expected: &[&str] = if args.len() >= arity { &["\")\""] } else { &["\",\"", "\")\""] };
                return Err(self.unexpected(expected));
            }
            if args.len() != arity {
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::Arity { function: name.clone(), expected: arity, found: args.len() },
                    message: format!("`{name}` takes {arity} argument(s), found {}", args.len()),
                    expected: vec![],
                });
            }
            let mut it = args.into_iter();
            let a = Box::new(it.next().unwrap());
            let op = match name.as_str() {
                "exp" => return Ok(Expr::Unary(UnaryOp::Exp, a)),
                "log" => return Ok(Expr::Unary(UnaryOp::Log, a)),
                "abs" => return Ok(Expr::Unary(UnaryOp::Abs, a)),
                "sqrt" => return Ok(Expr::Unary(UnaryOp::Sqrt, a)),
                "min" => BinaryOp::Min,
                _ => BinaryOp::Max,
            };
            return Ok(Expr::Binary(op, a, Box::new(it.next().unwrap())));
        }
        match (name.as_str(), &self.mode) {
            ("x", _) => Ok(Expr::Var(Var::X)),
            ("y", Mode::Bivariate) => Ok(Expr::Var(Var::Y)),
            (n, Mode::Family(params)) if params.iter().any(|p| p == n) => Ok(Expr::Param(name)),
            _ => Err(ParseError {
                offset: start,
                kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                message: format!("unknown identifier `{name}`"),
                expected: vec![],
            }),
        }
    }

    fn bound(&mut self) -> Result<f64, ParseError> {
        let sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(sign * v)
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(sign * f64::INFINITY)
            }
            _ => Err(self.unexpected(&["number", "inf"])),
        }
    }

    fn piecewise(&mut self) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let mut branches: Vec<(Guard, Expr, usize)> = Vec::new();
        loop {
            let at = self.offset();
            self.expect('(')?;
            let lo = self.bound()?;
            self.expect(',')?;
            let hi = self.bound()?;
            self.expect(')')?;
            self.expect(':')?;
            let e = self.expr()?;
            if lo >= hi {
                return Err(ParseError {
                    offset: at,
                    kind: ParseErrorKind::InvalidGuard,
                    message: format!("empty guard interval ({lo}, {hi})"),
                    expected: vec![],
                });
            }
            branches.push((Guard { lo, hi }, e, at));
            if self.eat(',') {
                continue;
            }
            if self.eat(')') {
                break;
            }
            return Err(self.unexpected(&["\",\"", "\")\""]));
        }
        branches.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
        for w in branches.windows(2) {
            if w[1].0.lo < w[0].0.hi {
                return Err(ParseError {
                    offset: w[1].2,
                    kind: ParseErrorKind::InvalidGuard,
                    message: "piecewise guards overlap".to_string(),
                    expected: vec![],
                });
            }
        }
        Ok(Expr::Piecewise(branches.into_iter().map(|(g, e, _)| (g, e)).collect()))
    }
}
