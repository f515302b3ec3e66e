//! Determinant-one 2×2 matrices and their action length.

use std::fmt;

use thiserror::Error;

use crate::valued_field::{Field, FieldElement, FieldError, PrecisionLoss, TruncatedElement, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("determinant is {0}, expected 1")]
    Determinant(String),
    #[error("malformed matrix `{0}` (expected [[a,b],[c,d]])")]
    Syntax(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IsometryKind {
    Elliptic,
    Hyperbolic,
}

/// How an element moves the tree: `length` is 0 exactly when elliptic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IsometryClass {
    pub kind: IsometryKind,
    pub length: i64,
}

/// Why a cyclic subgroup is or is not discrete.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CyclicReason {
    /// `v(tr A) < 0`.
    NegativeTraceValuation,
    /// `Aᵏ = I` with this minimal `k`.
    FiniteOrder(u64),
    /// Elliptic with no power up to the bound equal to `I`.
    InfiniteOrderElliptic,
}

impl CyclicReason {
    pub fn is_discrete(self) -> bool {
        !matches!(self, CyclicReason::InfiniteOrderElliptic)
    }
}

/// `l(A) = −2·min{0, v(tr A)}`; a zero trace gives 0.
pub fn length_from_trace_valuation(v: Valuation) -> i64 {
    match v {
        Valuation::Finite(v) if v < 0 => -2 * v,
        _ => 0,
    }
}

/// `[[a, b], [c, d]]` with `ad − bc = 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    a: FieldElement,
    b: FieldElement,
    c: FieldElement,
    d: FieldElement,
}

impl Mat2 {
    pub fn new(
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
        d: FieldElement,
    ) -> Result<Self, MatrixError> {
        let field = a.field();
        for e in [&b, &c, &d] {
            if e.field() != field {
                return Err(FieldError::FieldMismatch {
                    input: e.to_string(),
                    field,
                }
                .into());
            }
        }
        let det = &a * &d - &b * &c;
        if !det.is_one() {
            return Err(MatrixError::Determinant(det.to_string()));
        }
        Ok(Self { a, b, c, d })
    }

    /// Caller guarantees the determinant.
    fn raw(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Self {
        debug_assert!((&a * &d - &b * &c).is_one());
        Self { a, b, c, d }
    }

    pub fn identity(field: Field) -> Self {
        Self::raw(field.one(), field.zero(), field.zero(), field.one())
    }

    /// `diag(x, 1/x)`.
    pub fn diagonal(x: &FieldElement) -> Result<Self, MatrixError> {
        let field = x.field();
        Ok(Self::raw(x.clone(), field.zero(), field.zero(), x.inv()?))
    }

    /// `[[1, x], [0, 1]]`.
    pub fn upper(x: &FieldElement) -> Self {
        let field = x.field();
        Self::raw(field.one(), x.clone(), field.zero(), field.one())
    }

    /// `[[1, 0], [x, 1]]`.
    pub fn lower(x: &FieldElement) -> Self {
        let field = x.field();
        Self::raw(field.one(), field.zero(), x.clone(), field.one())
    }

    pub fn parse(field: Field, input: &str) -> Result<Self, MatrixError> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let syntax = || MatrixError::Syntax(input.to_string());
        let inner = s
            .strip_prefix("[[")
            .and_then(|r| r.strip_suffix("]]"))
            .ok_or_else(syntax)?;
        let (row1, row2) = inner.split_once("],[").ok_or_else(syntax)?;
        let (a, b) = split_pair(row1).ok_or_else(syntax)?;
        let (c, d) = split_pair(row2).ok_or_else(syntax)?;
        if [a, b, c, d].iter().any(|e| e.contains('[') || e.contains(']')) {
            return Err(syntax());
        }
        Self::new(
            field.parse_element(a)?,
            field.parse_element(b)?,
            field.parse_element(c)?,
            field.parse_element(d)?,
        )
    }

    pub fn field(&self) -> Field {
        self.a.field()
    }

    pub fn entries(&self) -> [&FieldElement; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn a(&self) -> &FieldElement {
        &self.a
    }

    pub fn b(&self) -> &FieldElement {
        &self.b
    }

    pub fn c(&self) -> &FieldElement {
        &self.c
    }

    pub fn d(&self) -> &FieldElement {
        &self.d
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::raw(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn neg(&self) -> Self {
        Self::raw(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    pub fn pow(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity(self.field());
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.mul(self).mul(&g.inverse())
    }

    pub fn trace(&self) -> FieldElement {
        &self.a + &self.d
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.d.is_one() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn translation_length(&self) -> i64 {
        length_from_trace_valuation(self.trace().valuation())
    }

    pub fn classify(&self) -> IsometryClass {
        let length = self.translation_length();
        let kind = if length == 0 {
            IsometryKind::Elliptic
        } else {
            IsometryKind::Hyperbolic
        };
        IsometryClass { kind, length }
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.translation_length() > 0
    }

    pub fn min_entry_valuation(&self) -> Valuation {
        self.entries().iter().map(|e| e.valuation()).min().expect("four entries")
    }

    /// Smallest `k ≤ bound` with `selfᵏ = I`.
    pub fn finite_order(&self, bound: u64) -> Option<u64> {
        let mut power = self.clone();
        for k in 1..=bound {
            if power.is_identity() {
                return Some(k);
            }
            power = power.mul(self);
        }
        None
    }

    /// Discreteness of `⟨self⟩`, with order detection up to [`default_order_bound`].
    pub fn cyclic_discrete(&self) -> CyclicReason {
        self.cyclic_discrete_with_bound(default_order_bound(self.field()))
    }

    pub fn cyclic_discrete_with_bound(&self, bound: u64) -> CyclicReason {
        if self.is_hyperbolic() {
            return CyclicReason::NegativeTraceValuation;
        }
        match self.finite_order(bound) {
            Some(k) => CyclicReason::FiniteOrder(k),
            None => CyclicReason::InfiniteOrderElliptic,
        }
    }

    /// The representative of `{A, −A}` whose first nonzero entry (in the
    /// order a, b, c, d) is not sign-negative.
    pub fn normalize_psl(&self) -> Self {
        let first = self
            .entries()
            .into_iter()
            .find(|e| !e.is_zero())
            .expect("invertible matrix has a nonzero entry");
        if first.is_sign_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

/// Largest torsion order searched by [`Mat2::cyclic_discrete`].
///
/// Over ℚ the torsion orders are 1, 2, 3, 4, 6. Over 𝔽ₚ(t) a torsion
/// element has order dividing `p − 1`, `p + 1` or `2p`.
pub fn default_order_bound(field: Field) -> u64 {
    match field {
        Field::Qp(_) => 24,
        Field::FpT(p) => 24u64.max(2 * p),
    }
}

fn split_pair(row: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    let mut at = None;
    for (i, ch) in row.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                if at.is_some() {
                    return None;
                }
                at = Some(i);
            }
            _ => {}
        }
    }
    let i = at?;
    let (l, r) = (&row[..i], &row[i + 1..]);
    (!l.is_empty() && !r.is_empty()).then_some((l, r))
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A matrix whose entries are known only to finite precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedMat2 {
    entries: [TruncatedElement; 4],
}

impl TruncatedMat2 {
    pub fn truncate(m: &Mat2, precision: i64) -> Self {
        Self {
            entries: m.entries().map(|e| TruncatedElement::truncate(e, precision)),
        }
    }

    pub fn entries(&self) -> &[TruncatedElement; 4] {
        &self.entries
    }

    pub fn mul(&self, o: &Self) -> Self {
        let [a, b, c, d] = &self.entries;
        let [e, f, g, h] = &o.entries;
        Self {
            entries: [
                a.mul(e).add(&b.mul(g)),
                a.mul(f).add(&b.mul(h)),
                c.mul(e).add(&d.mul(g)),
                c.mul(f).add(&d.mul(h)),
            ],
        }
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = &self.entries;
        Self {
            entries: [d.clone(), b.neg(), c.neg(), a.clone()],
        }
    }

    pub fn trace(&self) -> TruncatedElement {
        self.entries[0].add(&self.entries[3])
    }

    pub fn min_precision(&self) -> i64 {
        self.entries.iter().map(|e| e.precision()).min().expect("four entries")
    }

    /// Translation length when the stored digits decide the sign of `v(tr)`.
    ///
    /// A trace that vanishes to precision `M ≥ −1` has `v(tr) ≥ 0`; below
    /// that the answer needs digits through exponent `−1`.
    pub fn translation_length(&self) -> Result<i64, PrecisionLoss> {
        let t = self.trace();
        match t.valuation() {
            Ok(v) => Ok(length_from_trace_valuation(v)),
            Err(_) if t.precision() >= -1 => Ok(0),
            Err(_) => Err(PrecisionLoss {
                available: t.precision(),
                required: -1,
            }),
        }
    }
}
