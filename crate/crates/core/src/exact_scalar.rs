//! Exact arithmetic in the quartic field Q(r), r = 2^(1/4).
//!
//! An [`ExactScalar`] stores `c0 + c1·r + c2·r² + c3·r³` with rational
//! coefficients. Since `{1, r, r², r³}` is a Q-basis the representation is
//! unique, so structural equality is value equality. Products are reduced
//! with `r⁴ = 2`.
//!
//! Signs are decided by evaluating the polynomial over a dyadic enclosure
//! of `r` which is tightened until the value interval excludes zero. No
//! floating-point value is ever trusted for a comparison.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, Field};

pub type Rational = BigRational;

/// Build a rational `n/d`. Panics when `d == 0`.
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    c: [Rational; 4],
}

impl ExactScalar {
    pub fn from_coeffs(c: [Rational; 4]) -> Self {
        ExactScalar { c }
    }

    pub fn from_rational(q: Rational) -> Self {
        ExactScalar {
            c: [q, Rational::zero(), Rational::zero(), Rational::zero()],
        }
    }

    /// The rational `n/d`. Panics when `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_rational(rational(n, d))
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    /// `r^k` for `0 ≤ k < 4`.
    fn basis(k: usize) -> Self {
        let mut c: [Rational; 4] = Default::default();
        c[k] = Rational::one();
        ExactScalar { c }
    }

    /// The generator r = 2^(1/4).
    pub fn r() -> Self {
        Self::basis(1)
    }

    pub fn sqrt2() -> Self {
        Self::basis(2)
    }

    /// 1/√2 = r²/2.
    pub fn inv_sqrt2() -> Self {
        Self::sqrt2() * Self::ratio(1, 2)
    }

    /// Tsirelson's bound for the CH expression, 1/2 + 1/√2.
    pub fn tsirelson_bound() -> Self {
        Self::ratio(1, 2) + Self::inv_sqrt2()
    }

    pub fn coeffs(&self) -> &[Rational; 4] {
        &self.c
    }

    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.c[0])
    }

    /// Exact sign of the real value: -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        if self.is_rational() {
            return sign_of(&self.c[0]);
        }
        let mut bits = 32;
        loop {
            let (lo, hi) = self.enclosure(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
        }
    }

    pub fn is_negative_value(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Rational interval `[lo, hi]` containing the value, derived from a
    /// dyadic enclosure of r of width `2^-bits`.
    pub fn enclosure(&self, bits: u32) -> (Rational, Rational) {
        if self.is_rational() {
            return (self.c[0].clone(), self.c[0].clone());
        }
        let (r_lo, r_hi) = r_enclosure(bits);
        let mut lo_pow = Rational::one();
        let mut hi_pow = Rational::one();
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for c in &self.c {
            if c.is_positive() {
                lo += c * &lo_pow;
                hi += c * &hi_pow;
            } else if c.is_negative() {
                lo += c * &hi_pow;
                hi += c * &lo_pow;
            }
            lo_pow *= &r_lo;
            hi_pow *= &r_hi;
        }
        (lo, hi)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(Self::from_rational(q.recip()));
        }
        // Column j of the multiplication matrix holds the coefficients of self·r^j.
        let columns: Vec<ExactScalar> = (0..4).map(|j| self * &Self::basis(j)).collect();
        let matrix: Vec<Vec<Rational>> = (0..4)
            .map(|i| columns.iter().map(|col| col.c[i].clone()).collect())
            .collect();
        let mut rhs = vec![Rational::zero(); 4];
        rhs[0] = Rational::one();
        let x = linalg::solve(&matrix, &rhs).expect("multiplication by a non-zero element is invertible");
        Ok(ExactScalar {
            c: [x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()],
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inverse()?)
    }

    pub fn pow(&self, exp: i32) -> Result<Self> {
        let base = if exp < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..exp.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// The non-negative square root, when it lies in Q(r).
    pub fn sqrt(&self) -> Result<Self> {
        let unrepresentable = || Error::Unrepresentable(self.to_string());
        if self.signum() < 0 {
            return Err(unrepresentable());
        }
        // Q(r) = K(r) with K = Q(√2) and r² = √2; write self = u + v·r.
        let u = Quad::new(self.c[0].clone(), self.c[2].clone());
        let v = Quad::new(self.c[1].clone(), self.c[3].clone());
        let root = sqrt_over_quad(&u, &v).ok_or_else(unrepresentable)?;
        debug_assert_eq!(&(&root * &root), self);
        Ok(if root.signum() < 0 { -root } else { root })
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclosure(64);
        let mid = (lo + hi) / rational(2, 1);
        mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering rounded to `digits` places. Display only.
    pub fn to_decimal(&self, digits: usize) -> String {
        let ten_pow = BigInt::from(10u32).pow(digits as u32);
        let value = if let Some(q) = self.as_rational() {
            q.clone()
        } else {
            let tolerance = Rational::new(BigInt::one(), &ten_pow * BigInt::from(4));
            let mut bits = 64;
            loop {
                let (lo, hi) = self.enclosure(bits);
                if &hi - &lo < tolerance {
                    break (lo + hi) / rational(2, 1);
                }
                bits *= 2;
            }
        };
        format_decimal(&value, digits, &ten_pow)
    }

    /// The exact serialization `p0/q0 + p1/q1 r + p2/q2 r^2 + p3/q3 r^3`.
    pub fn to_canonical_string(&self) -> String {
        let q = |x: &Rational| format!("{}/{}", x.numer(), x.denom());
        format!(
            "{} + {} r + {} r^2 + {} r^3",
            q(&self.c[0]),
            q(&self.c[1]),
            q(&self.c[2]),
            q(&self.c[3])
        )
    }

    /// Parse an expression such as `1/2 + r^-3`, `BQ`, `(1 - 1/2 r^2)/2`
    /// or the canonical four-term form.
    pub fn parse(input: &str) -> Result<Self> {
        Parser::new(input)?.parse_all()
    }
}

fn sign_of(q: &Rational) -> i8 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Dyadic bracket `[N/2^bits, (N+1)/2^bits]` around 2^(1/4).
fn r_enclosure(bits: u32) -> (Rational, Rational) {
    let scaled_fourth = BigUint::one() << (4 * bits as usize + 1);
    let floor = BigInt::from(scaled_fourth.nth_root(4));
    let denom = BigInt::one() << bits as usize;
    (
        Rational::new(floor.clone(), denom.clone()),
        Rational::new(floor + 1, denom),
    )
}

fn format_decimal(value: &Rational, digits: usize, ten_pow: &BigInt) -> String {
    let scaled = value * Rational::from_integer(ten_pow.clone());
    let half = rational(1, 2);
    let rounded = if scaled.is_negative() {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    }
    .to_integer();
    let negative = rounded.is_negative();
    let mut digits_str = rounded.abs().to_string();
    if digits > 0 {
        if digits_str.len() <= digits {
            digits_str = format!("{}{}", "0".repeat(digits + 1 - digits_str.len()), digits_str);
        }
        digits_str.insert(digits_str.len() - digits, '.');
    }
    if negative {
        format!("-{digits_str}")
    } else {
        digits_str
    }
}

fn sqrt_rational(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

/// Element `a + b·√2` of Q(√2).
#[derive(Clone, Debug, PartialEq)]
struct Quad {
    a: Rational,
    b: Rational,
}

impl Quad {
    fn new(a: Rational, b: Rational) -> Self {
        Quad { a, b }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn add(&self, o: &Quad) -> Quad {
        Quad::new(&self.a + &o.a, &self.b + &o.b)
    }

    fn sub(&self, o: &Quad) -> Quad {
        Quad::new(&self.a - &o.a, &self.b - &o.b)
    }

    fn mul(&self, o: &Quad) -> Quad {
        let two = rational(2, 1);
        Quad::new(
            &self.a * &o.a + two * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
        )
    }

    fn scale(&self, q: &Rational) -> Quad {
        Quad::new(&self.a * q, &self.b * q)
    }

    fn neg(&self) -> Quad {
        Quad::new(-&self.a, -&self.b)
    }

    fn inverse(&self) -> Quad {
        // (a + b√2)^-1 = (a - b√2)/(a² - 2b²)
        let norm = &self.a * &self.a - rational(2, 1) * &self.b * &self.b;
        Quad::new(&self.a / &norm, -&self.b / &norm)
    }

    fn sqrt2() -> Quad {
        Quad::new(Rational::zero(), Rational::one())
    }

    /// Some square root in Q(√2), if one exists.
    fn sqrt(&self) -> Option<Quad> {
        if self.b.is_zero() {
            if let Some(p) = sqrt_rational(&self.a) {
                return Some(Quad::new(p, Rational::zero()));
            }
            return sqrt_rational(&(&self.a / rational(2, 1))).map(|q| Quad::new(Rational::zero(), q));
        }
        // (p + q√2)² = a + b√2  ⇔  p² + 2q² = a, 2pq = b.
        let disc = &self.a * &self.a - rational(2, 1) * &self.b * &self.b;
        let s = sqrt_rational(&disc)?;
        for t in [s.clone(), -s] {
            let Some(p) = sqrt_rational(&((&self.a + t) / rational(2, 1))) else {
                continue;
            };
            if p.is_zero() {
                continue;
            }
            let q = &self.b / (rational(2, 1) * &p);
            let cand = Quad::new(p, q);
            if cand.mul(&cand) == *self {
                return Some(cand);
            }
        }
        None
    }
}

/// Some square root of `u + v·r` (u, v ∈ Q(√2)) inside Q(r).
fn sqrt_over_quad(u: &Quad, v: &Quad) -> Option<ExactScalar> {
    let assemble = |p: Quad, q: Quad| ExactScalar {
        c: [p.a, q.a, p.b, q.b],
    };
    // (p + q·r)² = (p² + √2·q²) + 2pq·r.
    if v.is_zero() {
        if let Some(p) = u.sqrt() {
            return Some(assemble(p, Quad::new(Rational::zero(), Rational::zero())));
        }
        let q = u.mul(&Quad::sqrt2()).scale(&rational(1, 2)).sqrt()?;
        return Some(assemble(Quad::new(Rational::zero(), Rational::zero()), q));
    }
    let disc = u.mul(u).sub(&Quad::sqrt2().mul(v).mul(v));
    let s = disc.sqrt()?;
    for t in [s.clone(), s.neg()] {
        let Some(p) = u.add(&t).scale(&rational(1, 2)).sqrt() else {
            continue;
        };
        if p.is_zero() {
            continue;
        }
        let q = v.mul(&p.scale(&rational(2, 1)).inverse());
        let cand = assemble(p, q);
        let target = assemble(u.clone(), v.clone());
        if &cand * &cand == target {
            return Some(cand);
        }
    }
    None
}

// --- arithmetic -----------------------------------------------------------

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar {
            c: std::array::from_fn(|i| &self.c[i] + &rhs.c[i]),
        }
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar {
            c: std::array::from_fn(|i| &self.c[i] - &rhs.c[i]),
        }
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out: [Rational; 4] = Default::default();
        let two = rational(2, 1);
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let term = a * b;
                let k = i + j;
                if k >= 4 {
                    out[k - 4] += &two * term;
                } else {
                    out[k] += term;
                }
            }
        }
        ExactScalar { c: out }
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            c: std::array::from_fn(|i| -&self.c[i]),
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<ExactScalar> for &'a ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

/// Panics on division by zero, like the rational types it wraps; use
/// [`ExactScalar::checked_div`] for a fallible quotient.
impl Div<ExactScalar> for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        self.checked_div(&rhs).expect("division by zero")
    }
}

impl<'a> Div<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        *self += &rhs;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        *self = &*self * rhs;
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        ExactScalar {
            c: Default::default(),
        }
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        Self::basis(0)
    }
}

impl Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl Product for ExactScalar {
    fn product<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, x| acc * x)
    }
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl Field for ExactScalar {
    fn cmp_zero(&self) -> Ordering {
        self.signum().cmp(&0)
    }
}

impl From<Rational> for ExactScalar {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

// --- formatting and parsing -----------------------------------------------

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let power = match k {
                0 => "",
                1 => "r",
                2 => "r^2",
                _ => "r^3",
            };
            if k == 0 {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                f.write_str(power)?;
            } else {
                write!(f, "{magnitude} {power}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactScalar({self})")
    }
}

impl FromStr for ExactScalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ExactScalar::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(Rational),
    Root,
    Tsirelson,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

fn parse_error(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

impl Parser {
    fn new(input: &str) -> Result<Self> {
        let bytes = input.as_bytes();
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let ch = bytes[i] as char;
            if ch.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            let token = match ch {
                '+' => Token::Plus,
                '-' => Token::Minus,
                '*' => Token::Star,
                '/' => Token::Slash,
                '^' => Token::Caret,
                '(' => Token::LParen,
                ')' => Token::RParen,
                'r' => Token::Root,
                'B' if input[i..].starts_with("BQ") => {
                    i += 1;
                    Token::Tsirelson
                }
                '0'..='9' | '.' => {
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    tokens.push((start, Token::Number(parse_decimal(&input[start..i], start)?)));
                    continue;
                }
                other => return Err(parse_error(start, format!("unexpected character '{other}'"))),
            };
            tokens.push((start, token));
            i += 1;
        }
        Ok(Parser {
            tokens,
            pos: 0,
            end: input.len(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn parse_all(mut self) -> Result<ExactScalar> {
        if self.tokens.is_empty() {
            return Err(parse_error(0, "empty expression"));
        }
        let value = self.expr()?;
        if self.pos != self.tokens.len() {
            return Err(parse_error(self.position(), "unexpected trailing input"));
        }
        Ok(value)
    }

    fn expr(&mut self) -> Result<ExactScalar> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ExactScalar> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let at = self.position();
                    let divisor = self.unary()?;
                    acc = acc
                        .checked_div(&divisor)
                        .map_err(|_| parse_error(at, "division by zero"))?;
                }
                // Juxtaposition, as in `1/2 r^2`.
                Some(Token::Number(_) | Token::Root | Token::Tsirelson | Token::LParen) => {
                    acc = acc * self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ExactScalar> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ExactScalar> {
        let base = self.primary()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.position();
        let negative = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                true
            }
            _ => false,
        };
        let exp = match self.tokens.get(self.pos) {
            Some((_, Token::Number(n))) if n.is_integer() => n
                .to_integer()
                .to_i32()
                .filter(|e| *e <= 4096)
                .ok_or_else(|| parse_error(at, "exponent too large"))?,
            _ => return Err(parse_error(at, "expected integer exponent")),
        };
        self.pos += 1;
        let exp = if negative { -exp } else { exp };
        base.pow(exp).map_err(|_| parse_error(at, "negative power of zero"))
    }

    fn primary(&mut self) -> Result<ExactScalar> {
        let at = self.position();
        let Some((_, token)) = self.tokens.get(self.pos).cloned() else {
            return Err(parse_error(at, "unexpected end of expression"));
        };
        self.pos += 1;
        match token {
            Token::Number(q) => Ok(ExactScalar::from_rational(q)),
            Token::Root => Ok(ExactScalar::r()),
            Token::Tsirelson => Ok(ExactScalar::tsirelson_bound()),
            Token::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(&Token::RParen) {
                    return Err(parse_error(self.position(), "expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(parse_error(at, "expected a number, 'r', 'BQ' or '('")),
        }
    }
}

fn parse_decimal(text: &str, position: usize) -> Result<Rational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(parse_error(position, format!("malformed number '{text}'")));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits
        .parse()
        .map_err(|_| parse_error(position, format!("malformed number '{text}'")))?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Rational::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> ExactScalar {
        ExactScalar::parse(text).unwrap()
    }

    #[test]
    fn addition_examples() {
        let bq = ExactScalar::ratio(1, 2) + s("1/2 r^2");
        assert_eq!(bq, ExactScalar::tsirelson_bound());
        let x = s("3/7 - 2 r^3");
        assert_eq!(&x + &ExactScalar::zero(), x);
        assert_eq!(s("1 + r") + s("1 - r"), ExactScalar::int(2));
    }

    #[test]
    fn multiplication_reduces_modulo_r4() {
        assert_eq!(ExactScalar::r() * s("r^3"), ExactScalar::int(2));
        assert_eq!(ExactScalar::inv_sqrt2() * ExactScalar::inv_sqrt2(), ExactScalar::ratio(1, 2));
        // 2^(-3/4) squared is 1/(2√2).
        let t = s("r/2");
        let sq = &t * &t;
        assert_eq!(sq, s("1/4 r^2"));
        assert!((sq.to_f64() - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn sign_examples() {
        let bq = ExactScalar::tsirelson_bound();
        assert_eq!((&bq - &ExactScalar::ratio(3, 2)).signum(), -1);
        assert_eq!(ExactScalar::zero().signum(), 0);
        // Float oracle: 2^(-3/4) ≈ 0.5946 < 1/√2 ≈ 0.7071.
        let oracle = (0.5 + 2f64.powf(-0.75)) - (0.5 + 0.5f64.sqrt());
        assert!(oracle < 0.0);
        let threshold = ExactScalar::ratio(1, 2) + s("r^-3");
        assert_eq!((threshold - bq).signum(), -1);
    }

    #[test]
    fn sign_of_nearly_cancelling_value() {
        // 99/70 is a convergent of √2: the difference is ~7e-5.
        let d = ExactScalar::sqrt2() - ExactScalar::ratio(99, 70);
        assert_eq!(d.signum(), -1);
        let d = ExactScalar::sqrt2() - ExactScalar::ratio(665857, 470832);
        assert_eq!(d.signum(), -1);
        let d = ExactScalar::sqrt2() - ExactScalar::ratio(275807, 195025);
        assert_eq!(d.signum(), 1);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(ExactScalar::int(2).inverse().unwrap(), ExactScalar::ratio(1, 2));
        assert_eq!(ExactScalar::r().inverse().unwrap(), s("1/2 r^3"));
        let a = s("1 + r^2");
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, ExactScalar::one());
        assert_eq!(ExactScalar::zero().inverse(), Err(Error::DivisionByZero));
    }

    #[test]
    fn square_roots() {
        assert_eq!(s("1/2").sqrt().unwrap(), ExactScalar::inv_sqrt2());
        assert_eq!(s("1/4 r^2").sqrt().unwrap(), s("1/2 r"));
        assert_eq!(ExactScalar::sqrt2().sqrt().unwrap(), ExactScalar::r());
        // (1 + r)² = 1 + 2r + r²
        assert_eq!(s("1 + 2 r + r^2").sqrt().unwrap(), s("1 + r"));
        // (1 - r)² is positive; the root returned is r - 1.
        assert_eq!(s("1 - 2 r + r^2").sqrt().unwrap(), s("r - 1"));
        assert!(matches!(s("3").sqrt(), Err(Error::Unrepresentable(_))));
        assert!(matches!(s("3/5").sqrt(), Err(Error::Unrepresentable(_))));
        assert!(matches!(s("-1").sqrt(), Err(Error::Unrepresentable(_))));
        assert_eq!(ExactScalar::zero().sqrt().unwrap(), ExactScalar::zero());
    }

    #[test]
    fn sqrt_of_r_is_not_in_the_field() {
        assert!(ExactScalar::r().sqrt().is_err());
    }

    #[test]
    fn canonical_round_trip() {
        let x = s("-3/4 + 5 r - 1/9 r^3");
        let text = x.to_canonical_string();
        assert_eq!(text, "-3/4 + 5/1 r + 0/1 r^2 + -1/9 r^3");
        assert_eq!(s(&text), x);
        assert_eq!(s(&x.to_string()), x);
    }

    #[test]
    fn display_is_compact() {
        assert_eq!(ExactScalar::tsirelson_bound().to_string(), "1/2 + 1/2 r^2");
        assert_eq!(s("1/2 - r").to_string(), "1/2 - r");
        assert_eq!(s("-r^3").to_string(), "-r^3");
        assert_eq!(ExactScalar::zero().to_string(), "0");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(ExactScalar::tsirelson_bound().to_decimal(6), "1.207107");
        assert_eq!(ExactScalar::ratio(-1, 3).to_decimal(4), "-0.3333");
        assert_eq!(ExactScalar::ratio(2, 3).to_decimal(0), "1");
        assert_eq!(ExactScalar::ratio(1, 200).to_decimal(2), "0.01");
        assert_eq!(s("r").to_decimal(10), "1.1892071150");
    }

    #[test]
    fn parser_accepts_decimals_and_tokens() {
        assert_eq!(s("0.25"), ExactScalar::ratio(1, 4));
        assert_eq!(s("BQ"), ExactScalar::tsirelson_bound());
        assert_eq!(s("(1 - 1/2 r^2)/2"), ExactScalar::ratio(1, 2) - s("1/4 r^2"));
        assert_eq!(s("2^-3"), ExactScalar::ratio(1, 8));
        assert_eq!(s("2 * 3 - 4"), ExactScalar::int(2));
    }

    #[test]
    fn parser_reports_positions() {
        match ExactScalar::parse("1 + x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        match ExactScalar::parse("1/0") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(ExactScalar::parse("(1 + r").is_err());
        assert!(ExactScalar::parse("").is_err());
        assert!(ExactScalar::parse("1.2.3").is_err());
    }

    #[test]
    fn ordering_matches_values() {
        let mut v = [ExactScalar::tsirelson_bound(), ExactScalar::int(1), s("r"), s("1/2 + r^-3")];
        v.sort();
        let floats: Vec<f64> = v.iter().map(ExactScalar::to_f64).collect();
        assert!(floats.windows(2).all(|w| w[0] < w[1]));
    }
}
