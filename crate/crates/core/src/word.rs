//! Freely reduced words in two abstract generators `a`, `b`.
//!
//! Text form: `a`, `b` for the generators and `A`, `B` for their inverses,
//! optionally separated by whitespace; the empty word prints as `1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::sl2::Mat2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: Generator,
    pub inverted: bool,
}

impl Letter {
    pub const A: Letter = Letter::new(Generator::A, false);
    pub const A_INV: Letter = Letter::new(Generator::A, true);
    pub const B: Letter = Letter::new(Generator::B, false);
    pub const B_INV: Letter = Letter::new(Generator::B, true);
    pub const ALL: [Letter; 4] = [Letter::A, Letter::A_INV, Letter::B, Letter::B_INV];

    pub const fn new(generator: Generator, inverted: bool) -> Self {
        Self {
            generator,
            inverted,
        }
    }

    pub fn inverse(self) -> Self {
        Self::new(self.generator, !self.inverted)
    }

    pub fn as_char(self) -> char {
        match (self.generator, self.inverted) {
            (Generator::A, false) => 'a',
            (Generator::A, true) => 'A',
            (Generator::B, false) => 'b',
            (Generator::B, true) => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::A_INV),
            'b' => Some(Letter::B),
            'B' => Some(Letter::B_INV),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed word `{0}`: letters are a, b, A, B")]
pub struct WordParseError(pub String);

/// Invariant: no letter is adjacent to its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Self(vec![l])
    }

    pub fn a() -> Self {
        Self::letter(Letter::A)
    }

    pub fn b() -> Self {
        Self::letter(Letter::B)
    }

    /// Freely reduces `letters`.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// `a ↦ wa`, `b ↦ wb`.
    pub fn substitute(&self, wa: &Word, wb: &Word) -> Word {
        let (ia, ib) = (wa.inverse(), wb.inverse());
        Self::from_letters(self.0.iter().flat_map(|l| {
            let image = match (l.generator, l.inverted) {
                (Generator::A, false) => wa,
                (Generator::A, true) => &ia,
                (Generator::B, false) => wb,
                (Generator::B, true) => &ib,
            };
            image.0.iter().copied()
        }))
    }

    /// Evaluates in any group given by its operations.
    pub fn evaluate<T: Clone>(
        &self,
        a: &T,
        b: &T,
        identity: T,
        mul: impl Fn(&T, &T) -> T,
        inv: impl Fn(&T) -> T,
    ) -> T {
        let (ia, ib) = (inv(a), inv(b));
        self.0.iter().fold(identity, |acc, l| {
            let g = match (l.generator, l.inverted) {
                (Generator::A, false) => a,
                (Generator::A, true) => &ia,
                (Generator::B, false) => b,
                (Generator::B, true) => &ib,
            };
            mul(&acc, g)
        })
    }

    pub fn evaluate_mat(&self, a: &Mat2, b: &Mat2) -> Mat2 {
        self.evaluate(a, b, Mat2::identity(a.field()), Mat2::mul, Mat2::inverse)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() || compact == "1" {
            return Ok(Self::empty());
        }
        compact
            .chars()
            .map(Letter::from_char)
            .collect::<Option<Vec<_>>>()
            .map(Self::from_letters)
            .ok_or_else(|| WordParseError(s.to_string()))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
