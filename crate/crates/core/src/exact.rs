//! Exact arithmetic in real quadratic fields `Q(sqrt(m))`.
//!
//! Every coordinate in the crate is a [`QuadRational`] `a + b*sqrt(m)` with
//! rational `a`, `b` and squarefree `m > 1`. Pure rationals are stored with
//! `b = 0` and the sentinel `m = 1`, which lets them mix with any field.
//! Galois conjugation `a + b*sqrt(m) -> a - b*sqrt(m)` realizes the star map
//! of the quadratic-field schemes.
//!
//! All predicates (sign, comparison, floor) are decided exactly. The floating
//! view [`QuadRational::to_f64`] exists for plotting and phase computations.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary precision rational in canonical form.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("field mismatch: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u32, u32),
    #[error("field discriminator {0} is not a squarefree integer > 1")]
    BadField(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// An element `a + b*sqrt(m)` of a real quadratic field.
#[derive(Clone, Debug)]
pub struct QuadRational {
    a: Rational,
    b: Rational,
    m: u32,
}

pub fn is_squarefree(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut n = m;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl QuadRational {
    pub fn new(a: Rational, b: Rational, m: u32) -> Result<Self, ExactError> {
        if b.is_zero() {
            return Ok(Self::rational(a));
        }
        if !is_squarefree(m as u64) {
            return Err(ExactError::BadField(m as u64));
        }
        Ok(QuadRational { a, b, m })
    }

    pub fn rational(a: Rational) -> Self {
        QuadRational {
            a,
            b: Rational::zero(),
            m: 1,
        }
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn big_int(n: BigInt) -> Self {
        Self::rational(Rational::from_integer(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::rational(rat(n, d))
    }

    /// `sqrt(m)` itself. Panics if `m` is not squarefree.
    pub fn sqrt(m: u32) -> Self {
        Self::new(Rational::zero(), Rational::one(), m).expect("squarefree discriminator")
    }

    /// `(an/ad) + (bn/bd)*sqrt(m)`; convenience for tests and presets.
    pub fn from_parts(an: i64, ad: i64, bn: i64, bd: i64, m: u32) -> Self {
        Self::new(rat(an, ad), rat(bn, bd), m).expect("valid quadratic scalar")
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn surd_part(&self) -> &Rational {
        &self.b
    }

    /// Field discriminator; 1 for pure rationals.
    pub fn field(&self) -> u32 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    fn common_field(&self, other: &Self) -> Result<u32, ExactError> {
        match (self.m, other.m) {
            (1, m) | (m, 1) => Ok(m),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(ExactError::FieldMismatch(x, y)),
        }
    }

    fn build(a: Rational, b: Rational, m: u32) -> Self {
        if b.is_zero() {
            Self::rational(a)
        } else {
            QuadRational { a, b, m }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        let m = self.common_field(other)?;
        Ok(Self::build(&self.a + &other.a, &self.b + &other.b, m))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ExactError> {
        let m = self.common_field(other)?;
        Ok(Self::build(&self.a - &other.a, &self.b - &other.b, m))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        let m = self.common_field(other)?;
        let mm = Rational::from_integer(BigInt::from(m));
        let a = &self.a * &other.a + &self.b * &other.b * mm;
        let b = &self.a * &other.b + &other.a * &self.b;
        Ok(Self::build(a, b, m))
    }

    /// Field norm `a^2 - m b^2`.
    pub fn norm(&self) -> Rational {
        let mm = Rational::from_integer(BigInt::from(self.m));
        &self.a * &self.a - &self.b * &self.b * mm
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        if other.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = other.norm();
        let num = self.checked_mul(&other.conj())?;
        Ok(Self::build(num.a / &n, num.b / &n, num.m))
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        Self::one().checked_div(self)
    }

    /// Galois conjugate `a - b*sqrt(m)`.
    pub fn conj(&self) -> Self {
        Self::build(self.a.clone(), -self.b.clone(), self.m)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::build(&self.a * r, &self.b * r, self.m)
    }

    /// Exact sign of the real number `a + b*sqrt(m)`.
    pub fn sign(&self) -> i8 {
        let sa = rsign(&self.a);
        let sb = rsign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with m b^2
        let mm = Rational::from_integer(BigInt::from(self.m));
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * mm;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.m as f64).sqrt()
    }

    /// Largest integer `k` with `k <= self`, decided exactly.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        let approx = self.to_f64().floor();
        let mut k = if approx.is_finite() {
            BigInt::from(approx as i64)
        } else {
            BigInt::zero()
        };
        loop {
            let diff = self - &Self::big_int(k.clone());
            if diff.sign() < 0 {
                k -= 1;
                continue;
            }
            let next = self - &Self::big_int(&k + 1);
            if next.sign() >= 0 {
                k += 1;
                continue;
            }
            return k;
        }
    }

    /// Smallest integer `k` with `k >= self`.
    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Canonical re-normalization. Values are kept canonical by every
    /// constructor, so this is the identity on well-formed values.
    pub fn canonicalize(&self) -> Self {
        Self::build(self.a.clone(), self.b.clone(), self.m)
    }
}

fn rsign(r: &Rational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn q_add(x: &QuadRational, y: &QuadRational) -> Result<QuadRational, ExactError> {
    x.checked_add(y)
}

pub fn q_mul(x: &QuadRational, y: &QuadRational) -> Result<QuadRational, ExactError> {
    x.checked_mul(y)
}

pub fn q_conj(x: &QuadRational) -> QuadRational {
    x.conj()
}

pub fn q_sign(x: &QuadRational) -> i8 {
    x.sign()
}

impl PartialEq for QuadRational {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.m == other.m)
    }
}

impl Eq for QuadRational {}

impl Hash for QuadRational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
        if !self.b.is_zero() {
            self.m.hash(state);
        }
    }
}

impl PartialOrd for QuadRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order for values of compatible fields. Values from two different
/// irrational fields are ordered by discriminator, which is total but not
/// numeric.
impl Ord for QuadRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.checked_sub(other) {
            Ok(d) => d.sign().cmp(&0),
            Err(_) => self
                .m
                .cmp(&other.m)
                .then_with(|| self.a.cmp(&other.a))
                .then_with(|| self.b.cmp(&other.b)),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a QuadRational> for &'a QuadRational {
            type Output = QuadRational;
            fn $method(self, rhs: &'a QuadRational) -> QuadRational {
                self.$checked(rhs).expect("quadratic field mismatch")
            }
        }
        impl $tr<QuadRational> for QuadRational {
            type Output = QuadRational;
            fn $method(self, rhs: QuadRational) -> QuadRational {
                (&self).$checked(&rhs).expect("quadratic field mismatch")
            }
        }
        impl<'a> $tr<&'a QuadRational> for QuadRational {
            type Output = QuadRational;
            fn $method(self, rhs: &'a QuadRational) -> QuadRational {
                (&self).$checked(rhs).expect("quadratic field mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for QuadRational {
    type Output = QuadRational;
    fn neg(self) -> QuadRational {
        QuadRational::build(-self.a, -self.b, self.m)
    }
}

impl Neg for &QuadRational {
    type Output = QuadRational;
    fn neg(self) -> QuadRational {
        QuadRational::build(-self.a.clone(), -self.b.clone(), self.m)
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt({})", fmt_rational(&self.b), self.m);
        }
        let sep = if self.b.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{} {} {}*sqrt({})",
            fmt_rational(&self.a),
            sep,
            fmt_rational(&self.b.abs()),
            self.m
        )
    }
}

struct Lexer<'s> {
    text: &'s str,
    chars: Vec<char>,
    pos: usize,
}

impl<'s> Lexer<'s> {
    fn err(&self, reason: &str) -> ExactError {
        ExactError::Parse {
            text: self.text.to_string(),
            reason: reason.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// unsigned decimal or fraction
    fn number(&mut self) -> Result<Rational, ExactError> {
        let int = self.digits();
        if int.is_empty() {
            return Err(self.err("expected a number"));
        }
        let mut value = Rational::from_integer(int.parse::<BigInt>().map_err(|_| self.err("bad integer"))?);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            let frac: String = {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                self.chars[start..self.pos].iter().collect()
            };
            if !frac.is_empty() {
                let num: BigInt = frac.parse().map_err(|_| self.err("bad decimal"))?;
                let den = num_traits::pow(BigInt::from(10), frac.len());
                value += Rational::new(num, den);
            }
        }
        if self.eat('/') {
            let den = self.digits();
            if den.is_empty() {
                return Err(self.err("expected denominator"));
            }
            let den: BigInt = den.parse().map_err(|_| self.err("bad denominator"))?;
            if den.is_zero() {
                return Err(self.err("zero denominator"));
            }
            value /= Rational::from_integer(den);
        }
        Ok(value)
    }

    fn sqrt_factor(&mut self) -> Result<Option<u32>, ExactError> {
        self.skip_ws();
        let rest: String = self.chars[self.pos..].iter().collect();
        if !rest.starts_with("sqrt") {
            return Ok(None);
        }
        self.pos += 4;
        if !self.eat('(') {
            return Err(self.err("expected '(' after sqrt"));
        }
        let m = self.digits();
        if !self.eat(')') {
            return Err(self.err("expected ')'"));
        }
        let m: u64 = m.parse().map_err(|_| self.err("bad sqrt argument"))?;
        if !is_squarefree(m) || m > u32::MAX as u64 {
            return Err(self.err("sqrt argument must be a squarefree integer > 1"));
        }
        Ok(Some(m as u32))
    }
}

impl FromStr for QuadRational {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, ExactError> {
        let mut lx = Lexer {
            text: s,
            chars: s.chars().collect(),
            pos: 0,
        };
        let mut acc = QuadRational::zero();
        let mut first = true;
        loop {
            let mut negative = false;
            if lx.eat('-') {
                negative = true;
            } else if !lx.eat('+') && !first {
                return Err(lx.err("expected '+' or '-' between terms"));
            }
            first = false;
            let term = if let Some(m) = lx.sqrt_factor()? {
                QuadRational::sqrt(m)
            } else {
                let coef = lx.number()?;
                if lx.eat('*') {
                    match lx.sqrt_factor()? {
                        Some(m) => QuadRational::new(Rational::zero(), coef, m)?,
                        None => return Err(lx.err("expected sqrt(m) after '*'")),
                    }
                } else {
                    QuadRational::rational(coef)
                }
            };
            let term = if negative { -term } else { term };
            acc = acc.checked_add(&term)?;
            if lx.peek().is_none() {
                return Ok(acc);
            }
        }
    }
}

impl Serialize for QuadRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QuadRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact Gauss-Jordan inverse of a square matrix over one quadratic field.
pub fn invert_matrix(mat: &[Vec<QuadRational>]) -> Option<Vec<Vec<QuadRational>>> {
    let n = mat.len();
    let mut aug: Vec<Vec<QuadRational>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "square matrix expected");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { QuadRational::one() } else { QuadRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let inv = aug[col][col].recip().ok()?;
        for x in aug[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in 0..2 * n {
                    let sub = &factor * &aug[col][c];
                    aug[r][c] = &aug[r][c] - &sub;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Rank of a rational matrix (exact elimination).
pub fn rational_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = &m[r][col] / &pivot;
                for c in col..ncols {
                    let s = &f * &m[rank][c];
                    m[r][c] -= s;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `A x = b` over the rationals. Returns `None` when inconsistent and
/// `Some(Err(nullity))` when the solution is not unique.
pub fn solve_rational(a: &[Vec<Rational>], b: &[Rational]) -> Option<Result<Vec<Rational>, usize>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for c in col..=ncols {
            m[rank][c] = &m[rank][c] / &pivot;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=ncols {
                    let s = &f * &m[rank][c];
                    m[r][c] -= s;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if m[rank..].iter().any(|r| !r[ncols].is_zero()) {
        return None;
    }
    if rank < ncols {
        return Some(Err(ncols - rank));
    }
    let mut x = vec![Rational::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][ncols].clone();
    }
    Some(Ok(x))
}

/// The rational with the smallest denominator in the open interval `(lo, hi)`
/// (smallest numerator among ties). Requires `lo < hi`.
pub fn simplest_between(lo: &QuadRational, hi: &QuadRational) -> Rational {
    assert!(lo < hi, "empty interval");
    let fl = lo.floor();
    let mut candidate = QuadRational::big_int(&fl + 1);
    if &candidate < hi {
        // an integer fits; take the one closest to zero
        let lo_int = &fl + 1;
        let hi_int = hi.ceil() - 1;
        let pick = if lo_int <= BigInt::zero() && hi_int >= BigInt::zero() {
            BigInt::zero()
        } else if lo_int > BigInt::zero() {
            lo_int
        } else {
            hi_int
        };
        return Rational::from_integer(pick);
    }
    // search by increasing denominator
    let mut den = BigInt::from(2);
    loop {
        let d = QuadRational::big_int(den.clone());
        let scaled_lo = lo * &d;
        let num: BigInt = scaled_lo.floor() + 1;
        candidate = QuadRational::rational(Rational::new(num.clone(), den.clone()));
        if &candidate < hi {
            return Rational::new(num, den);
        }
        den += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> QuadRational {
        s.parse().unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(q("1") + q("1*sqrt(5)"), q("1 + 1*sqrt(5)"));
        assert_eq!(q("1/2 + 1/3*sqrt(5)") + q("1/2 + 2/3*sqrt(5)"), q("1 + 1*sqrt(5)"));
        let x = q("-3/7 + 2*sqrt(5)");
        assert_eq!(&x + &QuadRational::zero(), x);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(q("sqrt(5)") * q("sqrt(5)"), QuadRational::int(5));
        assert_eq!(q("1 + 1*sqrt(5)") * q("1 - 1*sqrt(5)"), QuadRational::int(-4));
        let x = q("2/3 - 1/4*sqrt(2)");
        assert_eq!(&x * &QuadRational::one(), x);
    }

    #[test]
    fn equal_rationals_hash_equal() {
        use std::collections::hash_map::DefaultHasher;
        let h = |x: &QuadRational| {
            let mut s = DefaultHasher::new();
            x.hash(&mut s);
            s.finish()
        };
        let a = QuadRational::from_parts(3, 2, 0, 1, 5);
        let b = QuadRational::from_parts(3, 2, 0, 1, 2);
        assert_eq!(a, b);
        assert_eq!(h(&a), h(&b));
    }

    #[test]
    fn mismatch_is_an_error() {
        let e = q_add(&q("1*sqrt(5)"), &q("1*sqrt(2)")).unwrap_err();
        assert_eq!(e, ExactError::FieldMismatch(5, 2));
        assert!(q_mul(&q("1*sqrt(3)"), &q("1*sqrt(2)")).is_err());
        // rationals live in every field
        assert!(q_add(&q("3"), &q("1*sqrt(2)")).is_ok());
    }

    #[test]
    fn conj_examples() {
        assert_eq!(q_conj(&q("3")), q("3"));
        assert_eq!(q_conj(&q("sqrt(5)")), q("-1*sqrt(5)"));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(q_sign(&QuadRational::zero()), 0);
        assert_eq!(q_sign(&q("2 - 1*sqrt(5)")), -1);
        assert_eq!(q_sign(&q("-1 + 1*sqrt(5)")), 1);
    }

    #[test]
    fn text_form() {
        assert_eq!(q(" 1/2*sqrt(5) ").to_string(), "1/2*sqrt(5)");
        assert_eq!(q("-1+1*sqrt(5)").to_string(), "-1 + 1*sqrt(5)");
        assert_eq!(q("4/8 - 2/4 * sqrt(5)").to_string(), "1/2 - 1/2*sqrt(5)");
        assert_eq!(q("0.25").to_string(), "1/4");
        assert_eq!(q("-sqrt(2)").to_string(), "-1*sqrt(2)");
        assert!("1 + ".parse::<QuadRational>().is_err());
        assert!("sqrt(4)".parse::<QuadRational>().is_err());
        assert!("1/0".parse::<QuadRational>().is_err());
    }

    #[test]
    fn floor_and_ceil() {
        let phi = q("1/2 + 1/2*sqrt(5)");
        assert_eq!(phi.floor(), BigInt::from(1));
        assert_eq!(phi.ceil(), BigInt::from(2));
        assert_eq!((-&phi).floor(), BigInt::from(-2));
        assert_eq!(QuadRational::int(3).floor(), BigInt::from(3));
        assert_eq!(QuadRational::int(3).ceil(), BigInt::from(3));
        // exact near-integer: 1000000 * (sqrt(2) - 1414213/1000000) is just above 0.56
        let big = q("-1414213 + 1000000*sqrt(2)");
        assert_eq!(big.floor(), BigInt::from(0));
    }

    #[test]
    fn inverse_matrix() {
        let phi = q("1/2 + 1/2*sqrt(5)");
        let m = vec![vec![QuadRational::one(), phi.clone()], vec![QuadRational::one(), phi.conj()]];
        let inv = invert_matrix(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = QuadRational::zero();
                for k in 0..2 {
                    s = s + &m[i][k] * &inv[k][j];
                }
                assert_eq!(s, if i == j { QuadRational::one() } else { QuadRational::zero() });
            }
        }
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_between(&q("1/3"), &q("1/2")), rat(2, 5));
        assert_eq!(simplest_between(&q("-1/2"), &q("1/2")), rat(0, 1));
        assert_eq!(simplest_between(&q("7/2"), &q("9/2")), rat(4, 1));
    }

    fn arb_q(m: u32) -> impl Strategy<Value = QuadRational> {
        (-50i64..50, 1i64..12, -50i64..50, 1i64..12)
            .prop_map(move |(an, ad, bn, bd)| QuadRational::from_parts(an, ad, bn, bd, m))
    }

    proptest! {
        #[test]
        fn ring_laws(x in arb_q(5), y in arb_q(5), z in arb_q(5)) {
            prop_assert_eq!((&x + &y) + z.clone(), &x + &(&y + &z));
            prop_assert_eq!(&x * &(&y + &z), &x * &y + &x * &z);
        }

        #[test]
        fn conj_is_automorphism(x in arb_q(2), y in arb_q(2)) {
            prop_assert_eq!((&x + &y).conj(), x.conj() + y.conj());
            prop_assert_eq!((&x * &y).conj(), x.conj() * y.conj());
            prop_assert_eq!(x.conj().conj(), x.clone());
        }

        #[test]
        fn sign_agrees_with_float(x in arb_q(7)) {
            let f = x.to_f64();
            if f.abs() > 1e-6 {
                prop_assert_eq!(x.sign(), if f > 0.0 { 1 } else { -1 });
            }
        }

        #[test]
        fn canonical_idempotent_and_text_roundtrip(x in arb_q(3)) {
            prop_assert_eq!(x.canonicalize().canonicalize(), x.canonicalize());
            let back: QuadRational = x.to_string().parse().unwrap();
            prop_assert_eq!(back.to_string(), x.to_string());
        }

        #[test]
        fn division_inverts_multiplication(x in arb_q(5), y in arb_q(5)) {
            prop_assume!(!y.is_zero());
            prop_assert_eq!((&x * &y).checked_div(&y).unwrap(), x);
        }

        #[test]
        fn floor_brackets(x in arb_q(5)) {
            let k = QuadRational::big_int(x.floor());
            prop_assert!(k <= x);
            prop_assert!(x < &k + &QuadRational::one());
        }
    }
}
