//! Holomorphic expression trees: parsing, printing, symbolic differentiation
//! and evaluation over any [`Scalar`] domain.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term { ("+" | "-") term }
//! term   := unary { ("*" | "/") unary }
//! unary  := ["-"] factor
//! factor := base [ "^" ["-"] number ]
//! base   := "z" | "i" | "e" | number | "(" expr ")" | ident "(" expr ")"
//! ident  := "exp" | "log" | "sqrt"
//! ```
//!
//! All multivalued functions use the principal branch. Real powers are
//! `exp(p * log x)` except for small integer exponents, which use repeated
//! multiplication.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, ParseDiagnostic, Result};
use crate::hypgeo::MobiusMap;

/// Arithmetic needed to evaluate an expression tree.
pub trait Scalar: Clone {
    fn lift(c: C64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;

    /// `rot * (a - u) / (1 - conj(a) u)`.
    fn mobius(&self, m: &MobiusMap) -> Self {
        let num = Self::lift(m.a).sub(self).mul(&Self::lift(m.rot));
        let den = Self::lift(C64::new(1.0, 0.0)).sub(&Self::lift(m.a.conj()).mul(self));
        num.div(&den)
    }
}

impl Scalar for C64 {
    fn lift(c: C64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn powi(&self, n: i32) -> Self {
        C64::powi(self, n)
    }
    fn powf(&self, p: f64) -> Self {
        (self.ln() * p).exp()
    }
    fn exp(&self) -> Self {
        C64::exp(*self)
    }
    fn ln(&self) -> Self {
        C64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        C64::sqrt(*self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(C64),
    Z,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, f64),
    Exp(Box<Node>),
    Log(Box<Node>),
    Sqrt(Box<Node>),
    Mobius(MobiusMap, Box<Node>),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn fold(c: C64) -> Option<Node> {
    (c.re.is_finite() && c.im.is_finite()).then_some(Node::Const(c))
}

fn is_const(n: &Node, v: f64) -> bool {
    matches!(n, Node::Const(c) if c.re == v && c.im == 0.0)
}

fn int_exponent(p: f64) -> Option<i32> {
    (p.fract() == 0.0 && p.abs() <= 1024.0).then_some(p as i32)
}

// Smart constructors: constant folding plus removal of neutral elements.
// They are idempotent on their own output, which keeps printing stable.

fn add(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Const(x), Node::Const(y)) => fold(x + y).unwrap_or(Node::Add(a.into(), b.into())),
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        _ => Node::Add(a.into(), b.into()),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Const(x), Node::Const(y)) => fold(x - y).unwrap_or(Node::Sub(a.into(), b.into())),
        _ if is_const(&b, 0.0) => a,
        _ if is_const(&a, 0.0) => neg(b),
        _ => Node::Sub(a.into(), b.into()),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Const(x), Node::Const(y)) => fold(x * y).unwrap_or(Node::Mul(a.into(), b.into())),
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => Node::Const(ZERO),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        _ => Node::Mul(a.into(), b.into()),
    }
}

fn div(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Const(x), Node::Const(y)) if !Scalar::is_zero(y) => {
            fold(x / y).unwrap_or(Node::Div(a.into(), b.into()))
        }
        _ if is_const(&b, 1.0) => a,
        _ => Node::Div(a.into(), b.into()),
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(x) => Node::Const(-x),
        Node::Neg(inner) => *inner,
        other => Node::Neg(other.into()),
    }
}

fn pow(a: Node, p: f64) -> Node {
    if p == 1.0 {
        return a;
    }
    if p == 0.0 {
        return Node::Const(ONE);
    }
    if let Node::Const(x) = &a {
        let folded = match int_exponent(p) {
            Some(n) if !(Scalar::is_zero(x) && n < 0) => fold(Scalar::powi(x, n)),
            None if !Scalar::is_zero(x) => fold(Scalar::powf(x, p)),
            _ => None,
        };
        if let Some(n) = folded {
            return n;
        }
    }
    Node::Pow(a.into(), p)
}

fn unary(a: Node, f: fn(&C64) -> C64, wrap: fn(Box<Node>) -> Node, needs_nonzero: bool) -> Node {
    if let Node::Const(x) = &a {
        if !(needs_nonzero && Scalar::is_zero(x)) {
            if let Some(n) = fold(f(x)) {
                return n;
            }
        }
    }
    wrap(a.into())
}

fn exp(a: Node) -> Node {
    unary(a, |x| Scalar::exp(x), Node::Exp, false)
}

fn log(a: Node) -> Node {
    unary(a, |x| Scalar::ln(x), Node::Log, true)
}

fn sqrt(a: Node) -> Node {
    unary(a, |x| Scalar::sqrt(x), Node::Sqrt, false)
}

/// Explicit rational form of `m(u)`.
fn mobius_expansion(m: &MobiusMap, u: Node) -> Node {
    div(
        mul(Node::Const(m.rot), sub(Node::Const(m.a), u.clone())),
        sub(Node::Const(ONE), mul(Node::Const(m.a.conj()), u)),
    )
}

impl Node {
    fn eval<S: Scalar>(&self, z: &S) -> Result<S> {
        Ok(match self {
            Node::Const(c) => S::lift(*c),
            Node::Z => z.clone(),
            Node::Add(a, b) => a.eval(z)?.add(&b.eval(z)?),
            Node::Sub(a, b) => a.eval(z)?.sub(&b.eval(z)?),
            Node::Mul(a, b) => a.eval(z)?.mul(&b.eval(z)?),
            Node::Div(a, b) => {
                let d = b.eval(z)?;
                if d.is_zero() {
                    return Err(Error::domain("division by zero"));
                }
                a.eval(z)?.div(&d)
            }
            Node::Neg(a) => a.eval(z)?.neg(),
            Node::Pow(a, p) => {
                let x = a.eval(z)?;
                match int_exponent(*p) {
                    Some(n) if n >= 0 || !x.is_zero() => x.powi(n),
                    None if !x.is_zero() => x.powf(*p),
                    None if *p > 0.0 => S::lift(ZERO),
                    _ => return Err(Error::domain("negative power of zero")),
                }
            }
            Node::Exp(a) => a.eval(z)?.exp(),
            Node::Log(a) => {
                let x = a.eval(z)?;
                if x.is_zero() {
                    return Err(Error::domain("logarithm of zero"));
                }
                x.ln()
            }
            Node::Sqrt(a) => a.eval(z)?.sqrt(),
            Node::Mobius(m, a) => {
                let u = a.eval(z)?;
                if S::lift(ONE).sub(&S::lift(m.a.conj()).mul(&u)).is_zero() {
                    return Err(Error::domain("pole of the Moebius map"));
                }
                u.mobius(m)
            }
        })
    }

    fn derivative(&self) -> Node {
        match self {
            Node::Const(_) => Node::Const(ZERO),
            Node::Z => Node::Const(ONE),
            Node::Add(a, b) => add(a.derivative(), b.derivative()),
            Node::Sub(a, b) => sub(a.derivative(), b.derivative()),
            Node::Mul(a, b) => add(
                mul(a.derivative(), (**b).clone()),
                mul((**a).clone(), b.derivative()),
            ),
            Node::Div(a, b) => div(
                sub(
                    mul(a.derivative(), (**b).clone()),
                    mul((**a).clone(), b.derivative()),
                ),
                pow((**b).clone(), 2.0),
            ),
            Node::Neg(a) => neg(a.derivative()),
            Node::Pow(a, p) => mul(
                mul(Node::Const(C64::new(*p, 0.0)), pow((**a).clone(), p - 1.0)),
                a.derivative(),
            ),
            Node::Exp(a) => mul(exp((**a).clone()), a.derivative()),
            Node::Log(a) => div(a.derivative(), (**a).clone()),
            Node::Sqrt(a) => div(
                a.derivative(),
                mul(Node::Const(C64::new(2.0, 0.0)), sqrt((**a).clone())),
            ),
            Node::Mobius(m, u) => {
                let k = m.rot * (m.a.norm_sqr() - 1.0);
                let den = sub(Node::Const(ONE), mul(Node::Const(m.a.conj()), (**u).clone()));
                mul(div(Node::Const(k), pow(den, 2.0)), u.derivative())
            }
        }
    }

    fn substitute_z(&self, with: &Node) -> Node {
        let s = |n: &Node| n.substitute_z(with);
        match self {
            Node::Const(c) => Node::Const(*c),
            Node::Z => with.clone(),
            Node::Add(a, b) => add(s(a), s(b)),
            Node::Sub(a, b) => sub(s(a), s(b)),
            Node::Mul(a, b) => mul(s(a), s(b)),
            Node::Div(a, b) => div(s(a), s(b)),
            Node::Neg(a) => neg(s(a)),
            Node::Pow(a, p) => pow(s(a), *p),
            Node::Exp(a) => exp(s(a)),
            Node::Log(a) => log(s(a)),
            Node::Sqrt(a) => sqrt(s(a)),
            Node::Mobius(m, a) => Node::Mobius(*m, s(a).into()),
        }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x == 0.0 {
        write!(f, "0")
    } else if x < 0.0 {
        write!(f, "(-{})", -x)
    } else {
        write!(f, "{x}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if *c == C64::new(0.0, 1.0) => write!(f, "i"),
            Node::Const(c) if c.im == 0.0 && c.re == std::f64::consts::E => write!(f, "e"),
            Node::Const(c) if c.im == 0.0 => write_real(f, c.re),
            Node::Const(c) => {
                write!(f, "(")?;
                if c.re != 0.0 {
                    write_real(f, c.re)?;
                    write!(f, "+")?;
                }
                write_real(f, c.im)?;
                write!(f, "*i)")
            }
            Node::Z => write!(f, "z"),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, p) if *p < 0.0 => write!(f, "({a}^-{})", -p),
            Node::Pow(a, p) => write!(f, "({a}^{p})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Mobius(m, a) => write!(f, "{}", mobius_expansion(m, (**a).clone())),
        }
    }
}

/// Immutable, cheaply clonable expression of one complex variable `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloExpr {
    root: Arc<Node>,
}

impl HoloExpr {
    fn from_node(n: Node) -> Self {
        HoloExpr { root: Arc::new(n) }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).run().map(Self::from_node).map_err(Error::Parse)
    }

    pub fn z() -> Self {
        Self::from_node(Node::Z)
    }

    pub fn constant(c: C64) -> Self {
        Self::from_node(Node::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(C64::new(x, 0.0))
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        self.eval_in(&z)
    }

    /// Evaluates in an arbitrary arithmetic domain.
    pub fn eval_in<S: Scalar>(&self, z: &S) -> Result<S> {
        let v = self.root.eval(z)?;
        if !v.is_finite() {
            return Err(Error::domain(format!("non-finite value of {self}")));
        }
        Ok(v)
    }

    pub fn differentiate(&self) -> Self {
        Self::from_node(self.root.derivative())
    }

    /// `self ∘ m`.
    pub fn precompose_mobius(&self, m: &MobiusMap) -> Self {
        Self::from_node(self.root.substitute_z(&Node::Mobius(*m, Box::new(Node::Z))))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &HoloExpr) -> Self {
        Self::from_node(self.root.substitute_z(&inner.root))
    }

    pub fn powf(&self, p: f64) -> Self {
        Self::from_node(pow((*self.root).clone(), p))
    }

    pub fn exp(&self) -> Self {
        Self::from_node(exp((*self.root).clone()))
    }

    pub fn log(&self) -> Self {
        Self::from_node(log((*self.root).clone()))
    }

    pub fn sqrt(&self) -> Self {
        Self::from_node(sqrt((*self.root).clone()))
    }

    pub fn is_constant(&self) -> bool {
        matches!(*self.root, Node::Const(_))
    }
}

impl fmt::Display for HoloExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr for HoloExpr {
            type Output = HoloExpr;
            fn $m(self, o: HoloExpr) -> HoloExpr {
                HoloExpr::from_node($f((*self.root).clone(), (*o.root).clone()))
            }
        }
        impl std::ops::$tr for &HoloExpr {
            type Output = HoloExpr;
            fn $m(self, o: &HoloExpr) -> HoloExpr {
                HoloExpr::from_node($f((*self.root).clone(), (*o.root).clone()))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl serde::Serialize for HoloExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::ops::Neg for HoloExpr {
    type Output = HoloExpr;
    fn neg(self) -> HoloExpr {
        HoloExpr::from_node(neg((*self.root).clone()))
    }
}

impl std::str::FromStr for HoloExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

type PResult<T> = std::result::Result<T, ParseDiagnostic>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn diag(&self, at: usize, message: impl Into<String>, expected: &str) -> ParseDiagnostic {
        let last = self.src.len().saturating_sub(1);
        ParseDiagnostic { offset: at.min(last), message: message.into(), expected: expected.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn run(mut self) -> PResult<Node> {
        if self.peek().is_none() {
            return Err(self.diag(0, "empty expression", "an expression"));
        }
        let e = self.expr()?;
        match self.peek() {
            None => Ok(e),
            Some(')') => Err(self.diag(self.pos, "unbalanced ')'", "operator or end of input")),
            Some(c) => Err(self.diag(self.pos, format!("unexpected '{c}'"), "operator or end of input")),
        }
    }

    fn expr(&mut self) -> PResult<Node> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = add(acc, self.term()?);
            } else if self.eat('-') {
                acc = sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<Node> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = mul(acc, self.unary()?);
            } else if self.eat('/') {
                acc = div(acc, self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> PResult<Node> {
        if self.eat('-') {
            Ok(neg(self.factor()?))
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> PResult<Node> {
        let b = self.base()?;
        if self.eat('^') {
            let negative = self.eat('-');
            self.skip_ws();
            let start = self.pos;
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == '.' => {}
                _ => return Err(self.diag(start, "missing exponent", "a real number")),
            }
            let p = self.number()?;
            Ok(pow(b, if negative { -p } else { p }))
        } else {
            Ok(b)
        }
    }

    fn number(&mut self) -> PResult<f64> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = start;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let mut n = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            n += digits(&mut i);
        }
        if n == 0 {
            return Err(self.diag(start, "malformed number", "digits"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                i = j;
                digits(&mut i);
            }
        }
        if i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphanumeric()) {
            return Err(self.diag(i, "malformed number", "operator after a number"));
        }
        let text = &self.src[start..i];
        let v: f64 = text.parse().map_err(|_| self.diag(start, "malformed number", "a decimal literal"))?;
        if !v.is_finite() {
            return Err(self.diag(start, "number out of range", "a finite decimal literal"));
        }
        self.pos = i;
        Ok(v)
    }

    fn base(&mut self) -> PResult<Node> {
        const EXPECTED: &str = "z, i, e, a number, '(' or exp/log/sqrt";
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => Err(self.diag(start, "unexpected end of input", EXPECTED)),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.diag(self.pos, "unbalanced '('", "')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Node::Const(C64::new(self.number()?, 0.0))),
            Some(c) if c.is_ascii_alphabetic() => {
                let bytes = self.src.as_bytes();
                let mut i = start;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &self.src[start..i];
                self.pos = i;
                let func: fn(Node) -> Node = match word {
                    "z" => return Ok(Node::Z),
                    "i" => return Ok(Node::Const(C64::new(0.0, 1.0))),
                    "e" => return Ok(Node::Const(C64::new(std::f64::consts::E, 0.0))),
                    "exp" => exp,
                    "log" => log,
                    "sqrt" => sqrt,
                    _ => return Err(self.diag(start, format!("unknown identifier '{word}'"), EXPECTED)),
                };
                if !self.eat('(') {
                    return Err(self.diag(self.pos, format!("'{word}' needs an argument"), "'('"));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.diag(self.pos, "unbalanced '('", "')'"));
                }
                Ok(func(arg))
            }
            Some(c) => Err(self.diag(start, format!("unexpected '{c}'"), EXPECTED)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, z: C64) -> C64 {
        HoloExpr::parse(s).unwrap().eval(z).unwrap()
    }

    #[test]
    fn literal_examples() {
        assert_eq!(ev("-z", C64::new(0.5, 0.0)), C64::new(-0.5, 0.0));
        assert_eq!(ev("(1-z)^2", ZERO), ONE);
        assert!((ev("log(e/(1-z))", ZERO) - ONE).norm() < 1e-15);
        assert!((ev("i*z", C64::new(0.3, 0.0)) - C64::new(0.0, 0.3)).norm() < 1e-16);
        assert_eq!(ev("z^2 - 1", ZERO), C64::new(-1.0, 0.0));
    }

    #[test]
    fn near_minus_one() {
        let v = ev("log(e/(1-z))", C64::new(-1.0 + 1e-9, 0.0));
        assert!((v.re - (1.0 - 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn derivatives() {
        let d = HoloExpr::parse("log(e/(1-z))").unwrap().differentiate();
        assert!((d.eval(ZERO).unwrap() - ONE).norm() < 1e-15);
        let z = C64::new(0.2, 0.3);
        assert!((d.eval(z).unwrap() - 1.0 / (1.0 - z)).norm() < 1e-14);
        assert_eq!(HoloExpr::parse("z").unwrap().differentiate().to_string(), "1");
        let d = HoloExpr::parse("(1-z)^2").unwrap().differentiate();
        assert_eq!(d.eval(ZERO).unwrap(), C64::new(-2.0, 0.0));
    }

    #[test]
    fn printing_is_stable() {
        for s in ["-z", "(1-z)^2", "log(e/(1-z))", "2.5*z^-0.5+i", "sqrt(1+z)*exp(-z)/(3-2*i)"] {
            let p = HoloExpr::parse(s).unwrap().to_string();
            let q = HoloExpr::parse(&p).unwrap().to_string();
            assert_eq!(p, q, "{s}");
        }
    }

    #[test]
    fn diagnostics() {
        let cases = [("(z+1", "unbalanced"), ("z+1)", "unbalanced"), ("foo(z)", "unknown"), ("1.2.3", "malformed"), ("", "empty")];
        for (src, msg) in cases {
            match HoloExpr::parse(src) {
                Err(Error::Parse(d)) => {
                    assert!(d.message.contains(msg), "{src}: {d}");
                    assert!(src.is_empty() || d.offset < src.len());
                }
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn pole_is_domain_error() {
        let e = HoloExpr::parse("1/(1-z)").unwrap();
        assert!(matches!(e.eval(ONE), Err(Error::Domain(_))));
    }
}
