//! Dense univariate polynomials over a prime field 𝔽ₚ, and the rational
//! functions built from them.

use std::fmt;

/// Multiplies modulo `p` through a 128-bit intermediate.
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse in 𝔽ₚ via Fermat. `a` must be nonzero mod `p`.
pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// Polynomial with coefficients in 𝔽ₚ, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    p: u64,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut poly = Self {
            p,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        };
        poly.trim();
        poly
    }

    pub fn zero(p: u64) -> Self {
        Self { p, coeffs: Vec::new() }
    }

    pub fn constant(p: u64, c: u64) -> Self {
        Self::new(p, vec![c])
    }

    /// The monomial `c·tᵏ`.
    pub fn monomial(p: u64, c: u64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Self::new(p, coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    /// Order of vanishing at `t = 0`; `None` for the zero polynomial.
    pub fn ord(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let s = self.coeff(i) + other.coeff(i);
                if s >= self.p {
                    s - self.p
                } else {
                    s
                }
            })
            .collect();
        Self::new(self.p, coeffs)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if c == 0 { 0 } else { self.p - c })
            .collect();
        Self::new(self.p, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> Self {
        let coeffs = self.coeffs.iter().map(|&x| mul_mod(x, c, self.p)).collect();
        Self::new(self.p, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, self.p)) % self.p;
            }
        }
        Self::new(self.p, out)
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lead_inv = inv_mod(divisor.lead(), self.p);
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(self.p), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = mul_mod(rem[k + dd], lead_inv, self.p);
            quot[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                let sub = mul_mod(c, dc, self.p);
                rem[k + j] = (rem[k + j] + self.p - sub) % self.p;
            }
        }
        (Self::new(self.p, quot), Self::new(self.p, rem))
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.lead(), self.p))
    }

    /// Divides by `tᵏ`; the low coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        debug_assert!(self.coeffs.iter().take(k).all(|&c| c == 0));
        Self::new(self.p, self.coeffs.iter().skip(k).copied().collect())
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(self.p, coeffs)
    }

    /// Reduction modulo `tᵏ`.
    pub fn truncate(&self, k: usize) -> Self {
        Self::new(self.p, self.coeffs.iter().take(k).copied().collect())
    }

    /// Inverse modulo `tᵏ` of a polynomial with nonzero constant term.
    pub fn inverse_mod_t_pow(&self, k: usize) -> Self {
        let c0 = self.coeff(0);
        assert!(c0 != 0, "series inverse needs a unit constant term");
        let c0_inv = inv_mod(c0, self.p);
        let mut out = vec![0u64; k];
        for n in 0..k {
            // out[n] = -(Σ_{i=1..n} self[i]·out[n-i]) / c0, with out[0] = 1/c0
            let mut acc = if n == 0 { 1 } else { 0 };
            for i in 1..=n {
                let s = self.coeff(i);
                if s != 0 {
                    acc = (acc + self.p - mul_mod(s, out[n - i], self.p)) % self.p;
                }
            }
            out[n] = mul_mod(acc, c0_inv, self.p);
        }
        Self::new(self.p, out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, c) => write!(f, "{c}t")?,
                (i, 1) => write!(f, "t^{i}")?,
                (i, c) => write!(f, "{c}t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Element of 𝔽ₚ(t) in lowest terms with a monic denominator.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        let p = num.prime();
        if num.is_zero() {
            return Some(Self {
                num,
                den: Poly::constant(p, 1),
            });
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead_inv = inv_mod(den.lead(), p);
        Some(Self {
            num: num.scale(lead_inv),
            den: den.scale(lead_inv),
        })
    }

    pub fn from_poly(num: Poly) -> Self {
        let p = num.prime();
        Self {
            num,
            den: Poly::constant(p, 1),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Self::new(num, self.den.mul(&o.den)).expect("nonzero denominators")
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero denominators")
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Self::new(self.den.clone(), self.num.clone())
        }
    }

    /// `ord_t(num) − ord_t(den)`; `None` for zero.
    pub fn ord(&self) -> Option<i64> {
        let n = self.num.ord()? as i64;
        let d = self.den.ord().expect("nonzero denominator") as i64;
        Some(n - d)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
