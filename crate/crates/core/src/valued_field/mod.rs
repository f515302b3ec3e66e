//! Exact arithmetic in the two supported valued fields.
//!
//! Elements of ℚ are treated as elements of ℚₚ, and elements of 𝔽ₚ(t) as
//! elements of 𝔽ₚ((t)). Both are exact, so valuations of traces are never
//! guessed. Digit expansions use the residue representatives `0..p`, and
//! the uniformiser is `p` (resp. `t`).
//!
//! The truncated digit-expansion backend lives in [`truncated`].

mod poly;
pub mod truncated;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use poly::{Poly, RationalFunction};
pub use truncated::{PrecisionLoss, TruncatedElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("malformed field descriptor `{0}` (expected qp:<prime> or fqt:<prime>)")]
    BadDescriptor(String),
    #[error("malformed element `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("element `{input}` is not written in the syntax of field {field}")]
    FieldMismatch { input: String, field: Field },
}

fn parse_err(input: &str, reason: impl Into<String>) -> FieldError {
    FieldError::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// A discrete valuation value; `Infinite` is reserved for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Which valued field a computation lives in, together with its prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    /// ℚ inside ℚₚ.
    Qp(u64),
    /// 𝔽ₚ(t) inside 𝔽ₚ((t)).
    FpT(u64),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn qp(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(Field::Qp(p))
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn fpt(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(Field::FpT(p))
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn prime(self) -> u64 {
        match self {
            Field::Qp(p) | Field::FpT(p) => p,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.from_int(0)
    }

    pub fn one(self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(self, n: i64) -> FieldElement {
        self.from_bigint(BigInt::from(n))
    }

    pub fn from_bigint(self, n: BigInt) -> FieldElement {
        match self {
            Field::Qp(_) => FieldElement::rational(self, BigRational::from_integer(n)),
            Field::FpT(p) => {
                let c = n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits");
                FieldElement::function(self, RationalFunction::from_poly(Poly::constant(p, c)))
            }
        }
    }

    /// `numer / denom` as a field element.
    pub fn from_ratio(self, numer: i64, denom: i64) -> Result<FieldElement, FieldError> {
        self.from_int(numer).checked_div(&self.from_int(denom))
    }

    /// `πᵏ` for the uniformiser π (`p` or `t`).
    pub fn uniformizer_pow(self, k: i64) -> FieldElement {
        match self {
            Field::Qp(p) => {
                let pk = num_traits::pow(BigInt::from(p), k.unsigned_abs() as usize);
                let r = if k >= 0 {
                    BigRational::from_integer(pk)
                } else {
                    BigRational::new(BigInt::one(), pk)
                };
                FieldElement::rational(self, r)
            }
            Field::FpT(p) => {
                let tk = Poly::monomial(p, 1, k.unsigned_abs() as usize);
                let one = Poly::constant(p, 1);
                let r = if k >= 0 {
                    RationalFunction::from_poly(tk)
                } else {
                    RationalFunction::new(one, tk).expect("nonzero")
                };
                FieldElement::function(self, r)
            }
        }
    }

    /// `Σ digitsᵢ · π^(lead + i)`.
    pub fn from_digits(self, lead: i64, digits: &[u64]) -> FieldElement {
        let p = self.prime();
        let unit = match self {
            Field::Qp(_) => {
                let base = BigInt::from(p);
                let mut acc = BigInt::zero();
                for &d in digits.iter().rev() {
                    acc = acc * &base + BigInt::from(d);
                }
                self.from_bigint(acc)
            }
            Field::FpT(_) => FieldElement::function(
                self,
                RationalFunction::from_poly(Poly::new(p, digits.to_vec())),
            ),
        };
        unit * self.uniformizer_pow(lead)
    }

    /// Parses an element in this field's text syntax: `a/b` for ℚₚ,
    /// `(poly)/(poly)` in `t` for 𝔽ₚ(t). Integers may carry a power, as in `2/7^7`.
    pub fn parse_element(self, input: &str) -> Result<FieldElement, FieldError> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(parse_err(input, "empty"));
        }
        match self {
            Field::Qp(_) => {
                if s.contains('t') {
                    return Err(FieldError::FieldMismatch {
                        input: input.to_string(),
                        field: self,
                    });
                }
                let (num, den) = split_ratio(&s).ok_or_else(|| parse_err(input, "misplaced `/`"))?;
                let n = parse_int_power(num).ok_or_else(|| parse_err(input, "bad numerator"))?;
                let d = match den {
                    Some(d) => parse_int_power(d).ok_or_else(|| parse_err(input, "bad denominator"))?,
                    None => BigInt::one(),
                };
                if d.is_zero() {
                    return Err(FieldError::DivisionByZero);
                }
                Ok(FieldElement::rational(self, BigRational::new(n, d)))
            }
            Field::FpT(p) => {
                let (num, den) = split_ratio(&s).ok_or_else(|| parse_err(input, "misplaced `/`"))?;
                let n = parse_poly(num, p).map_err(|r| parse_err(input, r))?;
                let d = match den {
                    Some(d) => parse_poly(d, p).map_err(|r| parse_err(input, r))?,
                    None => Poly::constant(p, 1),
                };
                let r = RationalFunction::new(n, d).ok_or(FieldError::DivisionByZero)?;
                Ok(FieldElement::function(self, r))
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Qp(p) => write!(f, "qp:{p}"),
            Field::FpT(p) => write!(f, "fqt:{p}"),
        }
    }
}

impl FromStr for Field {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::BadDescriptor(s.to_string());
        let (kind, prime) = s.trim().split_once(':').ok_or_else(bad)?;
        let p: u64 = prime.parse().map_err(|_| bad())?;
        match kind {
            "qp" => Field::qp(p),
            "fqt" | "fpt" => Field::fpt(p),
            _ => Err(bad()),
        }
    }
}

/// Splits `num/den` at the single top-level slash.
fn split_ratio(s: &str) -> Option<(&str, Option<&str>)> {
    let mut depth = 0i32;
    let mut at = None;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => {
                if at.is_some() {
                    return None;
                }
                at = Some(i);
            }
            _ => {}
        }
    }
    match at {
        Some(i) if i > 0 && i + 1 < s.len() => Some((&s[..i], Some(&s[i + 1..]))),
        Some(_) => None,
        None => Some((s, None)),
    }
}

fn strip_parens(s: &str) -> &str {
    let mut s = s;
    while s.starts_with('(') && s.ends_with(')') && matched_outer(s) {
        s = &s[1..s.len() - 1];
    }
    s
}

fn matched_outer(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i + 1 < s.len() {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// `[+-]digits[^digits]`, optionally parenthesised.
fn parse_int_power(s: &str) -> Option<BigInt> {
    let s = strip_parens(s);
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (base, exp) = match body.split_once('^') {
        Some((b, e)) => (b, Some(e)),
        None => (body, None),
    };
    if base.is_empty() || !base.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut n: BigInt = base.parse().ok()?;
    if let Some(e) = exp {
        if e.is_empty() || !e.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let e: usize = e.parse().ok()?;
        n = num_traits::pow(n, e);
    }
    Some(if neg { -n } else { n })
}

fn parse_poly(s: &str, p: u64) -> Result<Poly, String> {
    let s = strip_parens(s);
    if s.is_empty() {
        return Err("empty polynomial".into());
    }
    if !s
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, 't' | '^' | '+' | '-' | '*'))
    {
        return Err("unexpected character in polynomial".into());
    }
    let mut acc = Poly::zero(p);
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut negative = false;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            negative = bytes[i] == b'-';
            i += 1;
        } else if i > 0 {
            return Err("missing operator between terms".into());
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            i += 1;
        }
        let term = parse_term(&s[start..i], p)?;
        acc = if negative { acc.sub(&term) } else { acc.add(&term) };
    }
    Ok(acc)
}

fn parse_term(term: &str, p: u64) -> Result<Poly, String> {
    if term.is_empty() {
        return Err("empty term".into());
    }
    let (coef, var) = match term.find('t') {
        Some(i) => (term[..i].trim_end_matches('*'), Some(&term[i + 1..])),
        None => (term, None),
    };
    if coef.contains('*') || coef.contains('^') {
        return Err(format!("bad coefficient in term `{term}`"));
    }
    let c = if coef.is_empty() {
        if var.is_none() {
            return Err("empty term".into());
        }
        1
    } else {
        let n: BigInt = coef.parse().map_err(|_| format!("bad coefficient `{coef}`"))?;
        n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
    };
    let k = match var {
        None => 0,
        Some("") => 1,
        Some(rest) => {
            let e = rest
                .strip_prefix('^')
                .ok_or_else(|| format!("bad exponent in term `{term}`"))?;
            e.parse::<usize>().map_err(|_| format!("bad exponent in term `{term}`"))?
        }
    };
    Ok(Poly::monomial(p, c, k))
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Rational(BigRational),
    Function(RationalFunction),
}

/// An exact element of ℚ ⊂ ℚₚ or 𝔽ₚ(t) ⊂ 𝔽ₚ((t)).
///
/// Arithmetic between elements of different fields is a programming error
/// and panics; inputs are validated against one [`Field`] at parse time.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    repr: Repr,
}

/// Unit part of an element modulo `πᵏ`.
enum Residue {
    Int(BigInt),
    Poly(Poly),
}

impl FieldElement {
    fn rational(field: Field, value: BigRational) -> Self {
        Self {
            field,
            repr: Repr::Rational(value),
        }
    }

    fn function(field: Field, value: RationalFunction) -> Self {
        Self {
            field,
            repr: Repr::Function(value),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rational(r) => r.is_zero(),
            Repr::Function(f) => f.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Rational(r) => r.is_one(),
            Repr::Function(f) => f.num().is_one() && f.den().is_one(),
        }
    }

    /// The rational value, for elements of ℚₚ.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rational(r) => Some(r),
            Repr::Function(_) => None,
        }
    }

    pub fn as_rational_function(&self) -> Option<&RationalFunction> {
        match &self.repr {
            Repr::Function(f) => Some(f),
            Repr::Rational(_) => None,
        }
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Rational(r) => {
                if r.is_zero() {
                    return Valuation::Infinite;
                }
                let p = BigInt::from(self.field.prime());
                Valuation::Finite(count_factor(r.numer(), &p) - count_factor(r.denom(), &p))
            }
            Repr::Function(f) => match f.ord() {
                Some(v) => Valuation::Finite(v),
                None => Valuation::Infinite,
            },
        }
    }

    fn assert_same_field(&self, other: &Self) {
        assert_eq!(
            self.field, other.field,
            "arithmetic between elements of different fields"
        );
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        match &self.repr {
            Repr::Rational(r) => {
                if r.is_zero() {
                    Err(FieldError::DivisionByZero)
                } else {
                    Ok(Self::rational(self.field, r.recip()))
                }
            }
            Repr::Function(f) => f
                .inv()
                .map(|g| Self::function(self.field, g))
                .ok_or(FieldError::DivisionByZero),
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<Self, FieldError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = self.field.one();
        let mut sq = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Unit part `x·π^(−v(x))` reduced modulo `πᵏ`, with `v(x)`.
    fn unit_residue(&self, k: usize) -> Option<(i64, Residue)> {
        let v = self.valuation().finite()?;
        let p = self.field.prime();
        match &self.repr {
            Repr::Rational(r) => {
                let pb = BigInt::from(p);
                let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
                if v > 0 {
                    num /= num_traits::pow(pb.clone(), v as usize);
                } else if v < 0 {
                    den /= num_traits::pow(pb.clone(), (-v) as usize);
                }
                let modulus = num_traits::pow(pb, k);
                let den_inv = mod_inverse(&den, &modulus);
                Some((v, Residue::Int((num * den_inv).mod_floor(&modulus))))
            }
            Repr::Function(f) => {
                let num_ord = f.num().ord().expect("nonzero");
                let den_ord = f.den().ord().expect("nonzero");
                let num = f.num().shift_down(num_ord);
                let den = f.den().shift_down(den_ord);
                let residue = num.mul(&den.inverse_mod_t_pow(k)).truncate(k);
                Some((v, Residue::Poly(residue)))
            }
        }
    }

    /// π-adic digits of `self` from exponent `v(self)` through `hi` inclusive.
    /// Returns `(v(self), digits)`; the digit list is empty when `v(self) > hi`.
    pub fn expansion(&self, hi: i64) -> (i64, Vec<u64>) {
        let v = match self.valuation().finite() {
            Some(v) => v,
            None => return (hi + 1, Vec::new()),
        };
        if v > hi {
            return (v, Vec::new());
        }
        let k = (hi - v + 1) as usize;
        let p = self.field.prime();
        let digits = match self.unit_residue(k).expect("nonzero").1 {
            Residue::Int(mut n) => {
                let pb = BigInt::from(p);
                let mut out = Vec::with_capacity(k);
                for _ in 0..k {
                    let (q, r) = n.div_mod_floor(&pb);
                    out.push(r.to_u64().expect("digit fits"));
                    n = q;
                }
                out
            }
            Residue::Poly(poly) => (0..k).map(|i| poly.coeff(i)).collect(),
        };
        (v, digits)
    }

    /// The canonical representative of `self` modulo `πᵐ·O`: the digit sum
    /// `Σ_{i<m} aᵢπⁱ` with digits in `0..p`.
    pub fn reduce_mod_pi(&self, m: i64) -> FieldElement {
        let v = match self.valuation().finite() {
            Some(v) if v < m => v,
            _ => return self.field.zero(),
        };
        let k = (m - v) as usize;
        let lead = self.field.uniformizer_pow(v);
        let unit = match self.unit_residue(k).expect("nonzero").1 {
            Residue::Int(n) => self.field.from_bigint(n),
            Residue::Poly(poly) => {
                FieldElement::function(self.field, RationalFunction::from_poly(poly))
            }
        };
        &unit * &lead
    }

    /// True when `self` is the "negative" member of `{x, −x}`: a negative
    /// rational, or a rational function whose numerator has leading
    /// coefficient above `(p−1)/2`.
    pub fn is_sign_negative(&self) -> bool {
        match &self.repr {
            Repr::Rational(r) => r.is_negative(),
            Repr::Function(f) => {
                let p = self.field.prime();
                p > 2 && !f.is_zero() && f.num().lead() > (p - 1) / 2
            }
        }
    }
}

fn count_factor(n: &BigInt, p: &BigInt) -> i64 {
    if n.is_zero() {
        return 0;
    }
    let mut n = n.clone();
    let mut count = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return count;
        }
        n = q;
        count += 1;
    }
}

/// Inverse of `a` modulo `m`; `a` must be coprime to `m`.
fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    if m.is_one() {
        return BigInt::zero();
    }
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "non-invertible residue");
    e.x.mod_floor(m)
}

impl Add for &FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same_field(rhs);
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a + b),
            (Repr::Function(a), Repr::Function(b)) => Repr::Function(a.add(b)),
            _ => unreachable!("representation matches field"),
        };
        FieldElement {
            field: self.field,
            repr,
        }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same_field(rhs);
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a * b),
            (Repr::Function(a), Repr::Function(b)) => Repr::Function(a.mul(b)),
            _ => unreachable!("representation matches field"),
        };
        FieldElement {
            field: self.field,
            repr,
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        let repr = match &self.repr {
            Repr::Rational(a) => Repr::Rational(-a),
            Repr::Function(a) => Repr::Function(a.neg()),
        };
        FieldElement {
            field: self.field,
            repr,
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self + &(-rhs)
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rational(r) => write!(f, "{r}"),
            Repr::Function(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.field)
    }
}

/// Orders elements by their π-adic digit strings read from the most
/// significant (lowest exponent) end. Used only to break ties
/// deterministically.
pub(crate) fn digit_order(a: &FieldElement, b: &FieldElement, hi: i64) -> Ordering {
    let (va, da) = a.expansion(hi);
    let (vb, db) = b.expansion(hi);
    let lo = va.min(vb);
    let digit = |v: i64, d: &[u64], i: i64| -> u64 {
        if i < v {
            0
        } else {
            d.get((i - v) as usize).copied().unwrap_or(0)
        }
    };
    for i in lo..=hi {
        match digit(va, &da, i).cmp(&digit(vb, &db, i)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}
