//! The discreteness-and-freeness decision loop over a translation-length oracle.
//!
//! Starting from `(X, Y) = (A, B)`:
//!
//! 1. reject if `l(X) = 0` or `l(Y) = 0`;
//! 2. order so `l(X) ≤ l(Y)` (no swap on ties);
//! 3. compute `m = min{l(XY), l(X⁻¹Y)}`;
//! 4. reject if `m = 0`;
//! 5. if `m ≤ l(Y) − l(X)`, replace `Y` by the shorter product (`X⁻¹Y` on
//!    ties) and go to 2;
//! 6. otherwise certify `(X, Y)`.
//!
//! An iteration is one pass through step 3.

use std::cell::Cell;

use serde::Serialize;
use thiserror::Error;

use crate::sl2::{Mat2, TruncatedMat2};
use crate::valued_field::{PrecisionLoss, Valuation};
use crate::word::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    PrecisionLoss(#[from] PrecisionLoss),
    #[error("malformed oracle: {0}")]
    Malformed(String),
}

/// Translation lengths for a group acting on a tree without inversions.
///
/// Implementations must satisfy `length(x) = length(x⁻¹)` and return even
/// lengths whenever the tree is the Bruhat–Tits tree of SL₂.
pub trait LengthOracle {
    type Element: Clone;

    fn length(&self, x: &Self::Element) -> Result<i64, OracleError>;
    fn multiply(&self, x: &Self::Element, y: &Self::Element) -> Result<Self::Element, OracleError>;
    fn invert(&self, x: &Self::Element) -> Result<Self::Element, OracleError>;
}

/// Exact SL₂ arithmetic.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSl2;

impl LengthOracle for ExactSl2 {
    type Element = Mat2;

    fn length(&self, x: &Mat2) -> Result<i64, OracleError> {
        Ok(x.translation_length())
    }

    fn multiply(&self, x: &Mat2, y: &Mat2) -> Result<Mat2, OracleError> {
        Ok(x.mul(y))
    }

    fn invert(&self, x: &Mat2) -> Result<Mat2, OracleError> {
        Ok(x.inverse())
    }
}

/// SL₂ arithmetic on truncated digit expansions. Records the lowest trace
/// precision seen, a measure of how much precision the run consumed.
#[derive(Debug)]
pub struct TruncatedSl2 {
    min_trace_precision: Cell<Option<i64>>,
}

impl TruncatedSl2 {
    pub fn new() -> Self {
        Self {
            min_trace_precision: Cell::new(None),
        }
    }

    pub fn min_trace_precision(&self) -> Option<i64> {
        self.min_trace_precision.get()
    }
}

impl Default for TruncatedSl2 {
    fn default() -> Self {
        Self::new()
    }
}

impl LengthOracle for TruncatedSl2 {
    type Element = TruncatedMat2;

    fn length(&self, x: &TruncatedMat2) -> Result<i64, OracleError> {
        let m = x.trace().precision();
        let seen = self.min_trace_precision.get().map_or(m, |s| s.min(m));
        self.min_trace_precision.set(Some(seen));
        Ok(x.translation_length()?)
    }

    fn multiply(&self, x: &TruncatedMat2, y: &TruncatedMat2) -> Result<TruncatedMat2, OracleError> {
        Ok(x.mul(y))
    }

    fn invert(&self, x: &TruncatedMat2) -> Result<TruncatedMat2, OracleError> {
        Ok(x.inverse())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecisionError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("iteration cap {0} reached")]
    IterationCap(u64),
    #[error("l(X) + l(Y) did not decrease: {before} -> {after}")]
    VariantViolated { before: i64, after: i64 },
    #[error("precision {0} exceeds the configured maximum")]
    PrecisionExhausted(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// An input generator has length 0.
    EllipticGenerator,
    /// `XY` or `X⁻¹Y` has length 0.
    EllipticProduct,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<E> {
    DiscreteFree {
        x: E,
        y: E,
        word_x: Word,
        word_y: Word,
        iterations: u64,
    },
    NotDiscreteFree {
        witness: Word,
        kind: WitnessKind,
        iterations: u64,
    },
}

impl<E> Verdict<E> {
    pub fn is_discrete_free(&self) -> bool {
        matches!(self, Verdict::DiscreteFree { .. })
    }

    pub fn iterations(&self) -> u64 {
        match self {
            Verdict::DiscreteFree { iterations, .. } | Verdict::NotDiscreteFree { iterations, .. } => {
                *iterations
            }
        }
    }

    /// Replaces the certified elements, keeping words and counts.
    pub fn map_elements<F>(self, mut f: impl FnMut(E) -> F) -> Verdict<F> {
        match self {
            Verdict::DiscreteFree {
                x,
                y,
                word_x,
                word_y,
                iterations,
            } => Verdict::DiscreteFree {
                x: f(x),
                y: f(y),
                word_x,
                word_y,
                iterations,
            },
            Verdict::NotDiscreteFree {
                witness,
                kind,
                iterations,
            } => Verdict::NotDiscreteFree {
                witness,
                kind,
                iterations,
            },
        }
    }
}

/// Lengths seen in one pass through step 3, after the step-2 ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub lx: i64,
    pub ly: i64,
    pub lxy: i64,
    pub lxinvy: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision<E> {
    pub verdict: Verdict<E>,
    pub trace: Vec<IterationRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    pub iteration_cap: u64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self {
            iteration_cap: 1_000_000,
        }
    }
}

pub fn decide<O: LengthOracle>(
    oracle: &O,
    a: &O::Element,
    b: &O::Element,
) -> Result<Decision<O::Element>, DecisionError> {
    decide_with_options(oracle, a, b, DecideOptions::default())
}

pub fn decide_with_options<O: LengthOracle>(
    oracle: &O,
    a: &O::Element,
    b: &O::Element,
    options: DecideOptions,
) -> Result<Decision<O::Element>, DecisionError> {
    let (mut x, mut y) = (a.clone(), b.clone());
    let (mut wx, mut wy) = (Word::a(), Word::b());
    let (mut lx, mut ly) = (oracle.length(&x)?, oracle.length(&y)?);
    let mut trace = Vec::new();

    for (l, w) in [(lx, &wx), (ly, &wy)] {
        if l == 0 {
            return Ok(Decision {
                verdict: Verdict::NotDiscreteFree {
                    witness: w.clone(),
                    kind: WitnessKind::EllipticGenerator,
                    iterations: 0,
                },
                trace,
            });
        }
    }

    let mut iterations = 0u64;
    loop {
        if lx > ly {
            std::mem::swap(&mut x, &mut y);
            std::mem::swap(&mut wx, &mut wy);
            std::mem::swap(&mut lx, &mut ly);
        }
        if iterations == options.iteration_cap {
            return Err(DecisionError::IterationCap(options.iteration_cap));
        }
        iterations += 1;

        let xy = oracle.multiply(&x, &y)?;
        let xinvy = oracle.multiply(&oracle.invert(&x)?, &y)?;
        let (lxy, lxinvy) = (oracle.length(&xy)?, oracle.length(&xinvy)?);
        trace.push(IterationRecord {
            lx,
            ly,
            lxy,
            lxinvy,
        });
        let m = lxy.min(lxinvy);

        if m == 0 {
            let witness = if lxinvy == 0 {
                wx.inverse().mul(&wy)
            } else {
                wx.mul(&wy)
            };
            return Ok(Decision {
                verdict: Verdict::NotDiscreteFree {
                    witness,
                    kind: WitnessKind::EllipticProduct,
                    iterations,
                },
                trace,
            });
        }

        if m <= ly - lx {
            let before = lx + ly;
            if lxinvy <= lxy {
                y = xinvy;
                wy = wx.inverse().mul(&wy);
            } else {
                y = xy;
                wy = wx.mul(&wy);
            }
            ly = m;
            if lx + ly >= before {
                return Err(DecisionError::VariantViolated {
                    before,
                    after: lx + ly,
                });
            }
            continue;
        }

        return Ok(Decision {
            verdict: Verdict::DiscreteFree {
                x,
                y,
                word_x: wx,
                word_y: wy,
                iterations,
            },
            trace,
        });
    }
}

/// Exact-backend decision.
pub fn decide_sl2(a: &Mat2, b: &Mat2) -> Result<Decision<Mat2>, DecisionError> {
    decide(&ExactSl2, a, b)
}

pub fn decide_sl2_with_options(
    a: &Mat2,
    b: &Mat2,
    options: DecideOptions,
) -> Result<Decision<Mat2>, DecisionError> {
    decide_with_options(&ExactSl2, a, b, options)
}

/// Outcome of a truncated run that eventually had enough precision.
#[derive(Clone, Debug)]
pub struct RestartOutcome {
    pub decision: Decision<TruncatedMat2>,
    /// Input precision of the successful run.
    pub precision: i64,
    pub restarts: u32,
    /// Lowest trace precision in the successful run.
    pub min_trace_precision: Option<i64>,
}

/// Runs the loop on inputs truncated at `m0`, raising the precision after
/// every [`PrecisionLoss`] to `max(2M, M + deficit, 1)` until a run
/// completes or `max_precision` would be exceeded.
pub fn decide_with_restarts(
    a: &Mat2,
    b: &Mat2,
    m0: i64,
    max_precision: i64,
    options: DecideOptions,
) -> Result<RestartOutcome, DecisionError> {
    let mut m = m0;
    let mut restarts = 0u32;
    loop {
        if m > max_precision {
            return Err(DecisionError::PrecisionExhausted(m));
        }
        let oracle = TruncatedSl2::new();
        let ta = TruncatedMat2::truncate(a, m);
        let tb = TruncatedMat2::truncate(b, m);
        match decide_with_options(&oracle, &ta, &tb, options) {
            Ok(decision) => {
                return Ok(RestartOutcome {
                    decision,
                    precision: m,
                    restarts,
                    min_trace_precision: oracle.min_trace_precision(),
                })
            }
            Err(DecisionError::Oracle(OracleError::PrecisionLoss(loss))) => {
                let deficit = loss.required - loss.available;
                m = (2 * m).max(m + deficit).max(1);
                restarts += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// `−min{0, v(entry)}` over the entries of both inputs: the per-iteration
/// precision budget of the truncated backend.
pub fn input_depth(a: &Mat2, b: &Mat2) -> i64 {
    let v = a.min_entry_valuation().min(b.min_entry_valuation());
    match v {
        Valuation::Finite(v) => (-v).max(0),
        Valuation::Infinite => 0,
    }
}

/// Which overlap configuration four lengths force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum OverlapCase {
    /// Axes at distance `k`.
    Disjoint { k: i64 },
    /// Axes share a path of length `delta < min{l(A), l(B)}`.
    Overlap { delta: i64 },
    /// Axes meet with `delta ≥ min{l(A), l(B)}`; lengths alone cannot tell
    /// `delta > min` from `delta = min`.
    Ambiguous,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("lengths ({la}, {lb}, {lab}, {lainvb}) fit no overlap configuration")]
pub struct InconsistentLengths {
    pub la: i64,
    pub lb: i64,
    pub lab: i64,
    pub lainvb: i64,
}

/// Reads the axis configuration of `A`, `B` off `l(A)`, `l(B)`, `l(AB)`, `l(A⁻¹B)`.
pub fn overlap_from_lengths(
    la: i64,
    lb: i64,
    lab: i64,
    lainvb: i64,
) -> Result<OverlapCase, InconsistentLengths> {
    let bad = InconsistentLengths {
        la,
        lb,
        lab,
        lainvb,
    };
    if la <= 0 || lb <= 0 || lab < 0 || lainvb < 0 {
        return Err(bad);
    }
    let sum = la + lb;
    if lab == lainvb && lab > sum {
        let gap = lab - sum;
        return if gap % 2 == 0 {
            Ok(OverlapCase::Disjoint { k: gap / 2 })
        } else {
            Err(bad)
        };
    }
    let (lo, hi) = (lab.min(lainvb), lab.max(lainvb));
    if hi != sum {
        return Err(bad);
    }
    if lo > (la - lb).abs() {
        let twice = sum - lo;
        return if twice % 2 == 0 {
            Ok(OverlapCase::Overlap { delta: twice / 2 })
        } else {
            Err(bad)
        };
    }
    Ok(OverlapCase::Ambiguous)
}
