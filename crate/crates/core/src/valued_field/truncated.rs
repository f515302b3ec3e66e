//! Finite π-adic digit expansions with explicit precision.
//!
//! A [`TruncatedElement`] stores digits `a_N … a_M` and stands for every
//! field element congruent to `Σ aᵢπⁱ` modulo `π^(M+1)`. Arithmetic is done
//! exactly on that approximant and the result is cut back to the precision
//! the inputs actually determine:
//!
//! | op      | output precision                          |
//! |---------|-------------------------------------------|
//! | `x ± y` | `min(Mx, My)`                             |
//! | `x · y` | `min(Nx + My, Ny + Mx)`                   |
//! | `1 / x` | `M − 2N`                                  |
//!
//! where `N` is the leading exponent, taken as `M + 1` for a value that is
//! zero to its precision.

use std::fmt;

use thiserror::Error;

use super::{Field, FieldElement, Valuation};

/// Raised when a quantity is not determined by the stored digits.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("precision exhausted: have digits through exponent {available}, need {required}")]
pub struct PrecisionLoss {
    /// Highest exponent that was known.
    pub available: i64,
    /// Smallest highest-exponent that would have sufficed.
    pub required: i64,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedElement {
    field: Field,
    lead: i64,
    digits: Vec<u64>,
    precision: i64,
}

impl TruncatedElement {
    /// Digits of `x` through exponent `precision`.
    pub fn truncate(x: &FieldElement, precision: i64) -> Self {
        let (lead, digits) = x.expansion(precision);
        if digits.is_empty() {
            return Self::zero(x.field(), precision);
        }
        Self {
            field: x.field(),
            lead,
            digits,
            precision,
        }
    }

    /// The value known to be `≡ 0 mod π^(precision+1)`.
    pub fn zero(field: Field, precision: i64) -> Self {
        Self {
            field,
            lead: precision + 1,
            digits: Vec::new(),
            precision,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// Leading exponent `N`; equals `precision + 1` when zero to precision.
    pub fn lead(&self) -> i64 {
        self.lead
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn is_zero_to_precision(&self) -> bool {
        self.digits.is_empty()
    }

    /// The valuation, when the digits determine it.
    pub fn valuation(&self) -> Result<Valuation, PrecisionLoss> {
        if self.is_zero_to_precision() {
            Err(PrecisionLoss {
                available: self.precision,
                required: self.precision + 1,
            })
        } else {
            Ok(Valuation::Finite(self.lead))
        }
    }

    /// The digit sum `Σ aᵢπⁱ` as an exact element.
    pub fn approximant(&self) -> FieldElement {
        if self.digits.is_empty() {
            return self.field.zero();
        }
        self.field.from_digits(self.lead, &self.digits)
    }

    /// True when `x` is congruent to this value modulo `π^(precision+1)`.
    pub fn represents(&self, x: &FieldElement) -> bool {
        let diff = x - &self.approximant();
        diff.valuation() > Valuation::Finite(self.precision)
    }

    fn check_field(&self, other: &Self) {
        assert_eq!(
            self.field, other.field,
            "truncated arithmetic between different fields"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_field(other);
        let m = self.precision.min(other.precision);
        Self::truncate(&(self.approximant() + other.approximant()), m)
    }

    pub fn neg(&self) -> Self {
        Self::truncate(&(-self.approximant()), self.precision)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_field(other);
        let m = (self.lead + other.precision).min(other.lead + self.precision);
        Self::truncate(&(self.approximant() * other.approximant()), m)
    }

    pub fn inv(&self) -> Result<Self, PrecisionLoss> {
        if self.is_zero_to_precision() {
            return Err(PrecisionLoss {
                available: self.precision,
                required: self.precision + 1,
            });
        }
        let exact = self.approximant().inv().expect("nonzero approximant");
        Ok(Self::truncate(&exact, self.precision - 2 * self.lead))
    }
}

impl fmt::Display for TruncatedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}; N={}, digits {:?}, M={}}}",
            self.field.prime(),
            self.lead,
            self.digits,
            self.precision
        )
    }
}

impl fmt::Debug for TruncatedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: u64, s: &str) -> FieldElement {
        Field::Qp(p).parse_element(s).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let x = TruncatedElement::truncate(&q(7, "2/343"), 0);
        assert_eq!((x.lead(), x.digits().to_vec()), (-3, vec![2, 0, 0, 0]));
        let one = TruncatedElement::truncate(&q(3, "1"), 4);
        assert_eq!(one.digits(), &[1, 0, 0, 0, 0]);
        let m1 = TruncatedElement::truncate(&q(5, "-1"), 3);
        assert_eq!((m1.lead(), m1.digits().to_vec()), (0, vec![4, 4, 4, 4]));
        // adding 1 back leaves something divisible by 5^4
        let back = m1.approximant() + q(5, "1");
        assert!(back.valuation() > Valuation::Finite(3));
        let z = TruncatedElement::truncate(&q(5, "0"), 2);
        assert!(z.is_zero_to_precision());
        assert_eq!(z.lead(), 3);
    }

    #[test]
    fn multiplying_by_one_keeps_digits() {
        let x = TruncatedElement::truncate(&q(7, "19/49"), 3);
        let one = TruncatedElement::truncate(&q(7, "1"), 3);
        let y = x.mul(&one);
        assert_eq!(y.digits(), &x.digits()[..y.digits().len()]);
        assert_eq!(y.lead(), x.lead());
    }

    #[test]
    fn inverse_precision_and_round_trip() {
        let x = q(3, "5/9"); // N = -2
        let t = TruncatedElement::truncate(&x, 4);
        let inv = t.inv().unwrap();
        assert_eq!(inv.precision(), 8);
        assert!(inv.represents(&x.inv().unwrap()));
        let prod = t.mul(&inv);
        assert!(prod.represents(&q(3, "1")));
    }

    #[test]
    fn vanishing_sum_loses_valuation() {
        let x = TruncatedElement::truncate(&q(5, "1/5"), 1);
        let y = TruncatedElement::truncate(&q(5, "-1/5"), 1);
        let s = x.add(&y);
        assert!(s.is_zero_to_precision());
        assert!(s.valuation().is_err());
        assert!(s.inv().is_err());
    }

    fn arb_element(field: Field) -> impl Strategy<Value = FieldElement> {
        (-400i64..400, 1i64..400, -3i64..4)
            .prop_map(move |(n, d, k)| field.from_ratio(n, d).unwrap() * field.uniformizer_pow(k))
    }

    fn arb_function(p: u64) -> impl Strategy<Value = FieldElement> {
        let field = Field::FpT(p);
        (
            proptest::collection::vec(0..p, 0..5),
            proptest::collection::vec(0..p, 1..4),
            -2i64..3,
        )
            .prop_map(move |(num, den, k)| {
                let n = field.from_digits(0, &num);
                let mut d = field.from_digits(0, &den);
                if d.is_zero() {
                    d = field.one();
                }
                n.checked_div(&d).unwrap() * field.uniformizer_pow(k)
            })
    }

    proptest! {
        #[test]
        fn truncated_ops_match_exact_qp(
            x in arb_element(Field::Qp(3)),
            y in arb_element(Field::Qp(3)),
            mx in -4i64..8,
            my in -4i64..8,
        ) {
            let tx = TruncatedElement::truncate(&x, mx);
            let ty = TruncatedElement::truncate(&y, my);
            prop_assert!(tx.represents(&x));
            let s = tx.add(&ty);
            prop_assert_eq!(s.precision(), mx.min(my));
            prop_assert!(s.represents(&(&x + &y)));
            let m = tx.mul(&ty);
            prop_assert!(m.represents(&(&x * &y)));
            if let Ok(i) = tx.inv() {
                prop_assert!(i.represents(&x.inv().unwrap()));
            }
            if let Ok(v) = tx.valuation() {
                prop_assert_eq!(v, x.valuation());
            }
        }

        #[test]
        fn truncated_ops_match_exact_fpt(
            x in arb_function(5),
            y in arb_function(5),
            mx in -3i64..6,
            my in -3i64..6,
        ) {
            let tx = TruncatedElement::truncate(&x, mx);
            let ty = TruncatedElement::truncate(&y, my);
            prop_assert!(tx.add(&ty).represents(&(&x + &y)));
            prop_assert!(tx.mul(&ty).represents(&(&x * &y)));
            if let Ok(i) = tx.inv() {
                prop_assert!(i.represents(&x.inv().unwrap()));
            }
        }

        #[test]
        fn truncation_is_injective_below_precision(
            x in arb_element(Field::Qp(2)),
            y in arb_element(Field::Qp(2)),
            m in -3i64..6,
        ) {
            let same = TruncatedElement::truncate(&x, m) == TruncatedElement::truncate(&y, m);
            let close = (&x - &y).valuation() > Valuation::Finite(m);
            prop_assert_eq!(same, close);
        }
    }
}
