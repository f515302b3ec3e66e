//! Amalgamated free products `H *_C K` of finite groups as a length oracle.
//!
//! Every element has a unique normal form `c·x₁⋯xₙ` with `c ∈ C` and the
//! `xᵢ` non-identity right-coset representatives alternating between the
//! transversals of `H` and `K`. The translation length on the Bass–Serre
//! tree is the syllable count of a cyclically reduced conjugate, or 0 when
//! that count is at most 1.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::{decide, Decision, DecisionError, LengthOracle, OracleError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmalgamError {
    #[error("group {factor}: {reason}")]
    BadTable { factor: Factor, reason: String },
    #[error("embedding of C into {0} is not an injective homomorphism")]
    BadEmbedding(Factor),
    #[error("the two embeddings induce different multiplications on C")]
    InconsistentEmbeddings,
    #[error("transversal of {factor}: {reason}")]
    BadTransversal { factor: Factor, reason: String },
    #[error("unknown letter `{0}` (expected h<name> or k<name>)")]
    UnknownLetter(String),
    #[error("malformed spec: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    H,
    K,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::H => "H",
            Factor::K => "K",
        })
    }
}

/// A finite group as a multiplication table on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    /// Display names; defaults to the indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<String>>,
    pub table: Vec<Vec<usize>>,
}

impl GroupTable {
    /// `ℤ/n` with element `i` the residue `i`.
    pub fn cyclic(n: usize) -> Self {
        Self {
            elements: None,
            table: (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect(),
        }
    }
}

/// The on-disk description of `H *_C K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamSpecFile {
    pub h: GroupTable,
    pub k: GroupTable,
    /// `c_into_h[i]` is the image in `H` of the `i`-th element of `C`.
    pub c_into_h: Vec<usize>,
    pub c_into_k: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversal_h: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversal_k: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
struct FiniteGroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    fn new(factor: Factor, spec: &GroupTable) -> Result<Self, AmalgamError> {
        let bad = |reason: &str| AmalgamError::BadTable {
            factor,
            reason: reason.to_string(),
        };
        let n = spec.table.len();
        if n == 0 {
            return Err(bad("empty table"));
        }
        if spec.table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(bad("table is not a square table of element indices"));
        }
        let t = &spec.table;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| t[e][x] == x && t[x][e] == x))
            .ok_or_else(|| bad("no identity"))?;
        let inverse = (0..n)
            .map(|x| (0..n).find(|&y| t[x][y] == identity))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("an element has no inverse"))?;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if t[t[x][y]][z] != t[x][t[y][z]] {
                        return Err(bad("multiplication is not associative"));
                    }
                }
            }
        }
        let names = match &spec.elements {
            Some(names) if names.len() == n => names.clone(),
            Some(_) => return Err(bad("element list length differs from table size")),
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(Self {
            names,
            table: spec.table.clone(),
            identity,
            inverse,
        })
    }

    fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    fn order(&self) -> usize {
        self.table.len()
    }
}

/// One vertex group with its copy of `C` and a right transversal.
#[derive(Clone, Debug)]
struct Side {
    group: FiniteGroup,
    /// `C`-index to group element.
    embed: Vec<usize>,
    /// Group element to `C`-index, when in `C`.
    restrict: Vec<Option<usize>>,
    /// Each element `g` as `(c, t)` with `g = ι(c)·t`, `t` in the transversal.
    split: Vec<(usize, usize)>,
    transversal: Vec<usize>,
}

impl Side {
    fn new(
        factor: Factor,
        group: FiniteGroup,
        embed: &[usize],
        transversal: Option<&[usize]>,
    ) -> Result<Self, AmalgamError> {
        let n = group.order();
        if embed.iter().any(|&x| x >= n) {
            return Err(AmalgamError::BadEmbedding(factor));
        }
        let mut restrict = vec![None; n];
        for (ci, &g) in embed.iter().enumerate() {
            if restrict[g].replace(ci).is_some() {
                return Err(AmalgamError::BadEmbedding(factor));
            }
        }
        // image must be closed under multiplication (finite, so a subgroup)
        for &x in embed {
            for &y in embed {
                if restrict[group.mul(x, y)].is_none() {
                    return Err(AmalgamError::BadEmbedding(factor));
                }
            }
        }
        // coset id of g: the sorted set Cg
        let coset = |g: usize| {
            let mut s: Vec<usize> = embed.iter().map(|&c| group.mul(c, g)).collect();
            s.sort_unstable();
            s
        };
        let transversal: Vec<usize> = match transversal {
            Some(t) => t.to_vec(),
            None => {
                let mut reps: HashMap<Vec<usize>, usize> = HashMap::new();
                for g in 0..n {
                    reps.entry(coset(g)).or_insert(g);
                }
                reps.insert(coset(group.identity), group.identity);
                let mut t: Vec<usize> = reps.into_values().collect();
                t.sort_unstable();
                t
            }
        };
        let bad = |reason: &str| AmalgamError::BadTransversal {
            factor,
            reason: reason.to_string(),
        };
        if !transversal.contains(&group.identity) {
            return Err(bad("identity missing"));
        }
        if transversal.iter().any(|&t| t >= n) {
            return Err(bad("index out of range"));
        }
        if transversal.len() * embed.len() != n {
            return Err(bad("size is not [G : C]"));
        }
        let mut split = vec![None; n];
        for &t in &transversal {
            for (ci, &c) in embed.iter().enumerate() {
                let g = group.mul(c, t);
                if split[g].replace((ci, t)).is_some() {
                    return Err(bad("two representatives share a coset"));
                }
            }
        }
        Ok(Self {
            split: split.into_iter().map(|s| s.expect("cosets cover the group")).collect(),
            group,
            embed: embed.to_vec(),
            restrict,
            transversal,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AmalgamLetter {
    pub factor: Factor,
    pub element: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: Factor,
    /// A non-identity transversal element of `factor`.
    pub rep: usize,
}

/// `c·x₁⋯xₙ`; `c` indexes `C`, syllables alternate factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalForm {
    pub c: usize,
    pub syllables: Vec<Syllable>,
}

impl NormalForm {
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct AmalgamSpec {
    h: Side,
    k: Side,
    c_identity: usize,
    c_table: Vec<Vec<usize>>,
}

impl AmalgamSpec {
    pub fn from_json(text: &str) -> Result<Self, AmalgamError> {
        let file: AmalgamSpecFile =
            serde_json::from_str(text).map_err(|e| AmalgamError::Json(e.to_string()))?;
        Self::new(&file)
    }

    pub fn new(file: &AmalgamSpecFile) -> Result<Self, AmalgamError> {
        if file.c_into_h.len() != file.c_into_k.len() || file.c_into_h.is_empty() {
            return Err(AmalgamError::InconsistentEmbeddings);
        }
        let h = Side::new(
            Factor::H,
            FiniteGroup::new(Factor::H, &file.h)?,
            &file.c_into_h,
            file.transversal_h.as_deref(),
        )?;
        let k = Side::new(
            Factor::K,
            FiniteGroup::new(Factor::K, &file.k)?,
            &file.c_into_k,
            file.transversal_k.as_deref(),
        )?;
        let nc = file.c_into_h.len();
        let mut c_table = vec![vec![0; nc]; nc];
        for (i, row) in c_table.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let via_h = h.restrict[h.group.mul(h.embed[i], h.embed[j])].expect("closed");
                let via_k = k.restrict[k.group.mul(k.embed[i], k.embed[j])].expect("closed");
                if via_h != via_k {
                    return Err(AmalgamError::InconsistentEmbeddings);
                }
                *slot = via_h;
            }
        }
        let c_identity = h.restrict[h.group.identity].ok_or(AmalgamError::BadEmbedding(Factor::H))?;
        if k.embed[c_identity] != k.group.identity {
            return Err(AmalgamError::InconsistentEmbeddings);
        }
        Ok(Self {
            h,
            k,
            c_identity,
            c_table,
        })
    }

    fn side(&self, f: Factor) -> &Side {
        match f {
            Factor::H => &self.h,
            Factor::K => &self.k,
        }
    }

    pub fn transversal(&self, f: Factor) -> &[usize] {
        &self.side(f).transversal
    }

    pub fn order(&self, f: Factor) -> usize {
        self.side(f).group.order()
    }

    pub fn identity(&self) -> NormalForm {
        NormalForm {
            c: self.c_identity,
            syllables: Vec::new(),
        }
    }

    /// Non-identity elements of both factors, as letters.
    pub fn letters(&self) -> Vec<AmalgamLetter> {
        [Factor::H, Factor::K]
            .into_iter()
            .flat_map(|f| {
                let g = &self.side(f).group;
                (0..g.order())
                    .filter(move |&e| e != g.identity)
                    .map(move |element| AmalgamLetter { factor: f, element })
            })
            .collect()
    }

    /// Parses whitespace-separated letters `h<name>` / `k<name>`.
    pub fn parse_word(&self, text: &str) -> Result<Vec<AmalgamLetter>, AmalgamError> {
        text.split_whitespace()
            .map(|tok| {
                let unknown = || AmalgamError::UnknownLetter(tok.to_string());
                let factor = match tok.chars().next() {
                    Some('h') | Some('H') => Factor::H,
                    Some('k') | Some('K') => Factor::K,
                    _ => return Err(unknown()),
                };
                let name = tok[1..].trim_start_matches(':');
                let element = self
                    .side(factor)
                    .group
                    .names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(unknown)?;
                Ok(AmalgamLetter { factor, element })
            })
            .collect()
    }

    /// `ι(c)·g` pushed left through `syllables[..end]`, folding into `nf.c`.
    fn absorb_left(&self, nf: &mut NormalForm, mut c: usize, end: usize) {
        for s in nf.syllables[..end].iter_mut().rev() {
            let side = self.side(s.factor);
            let (c2, t) = side.split[side.group.mul(s.rep, side.embed[c])];
            debug_assert_ne!(t, side.group.identity);
            s.rep = t;
            c = c2;
        }
        nf.c = self.c_table[nf.c][c];
    }

    /// `nf · g`.
    pub fn multiply_letter(&self, nf: &NormalForm, g: AmalgamLetter) -> NormalForm {
        let mut out = nf.clone();
        let side = self.side(g.factor);
        let element = match out.syllables.last() {
            Some(last) if last.factor == g.factor => {
                let merged = side.group.mul(last.rep, g.element);
                out.syllables.pop();
                merged
            }
            _ => g.element,
        };
        let (c, t) = side.split[element];
        if t != side.group.identity {
            out.syllables.push(Syllable {
                factor: g.factor,
                rep: t,
            });
        }
        let end = out.syllables.len() - usize::from(t != side.group.identity);
        self.absorb_left(&mut out, c, end);
        out
    }

    pub fn normal_form(&self, word: &[AmalgamLetter]) -> NormalForm {
        word.iter()
            .fold(self.identity(), |nf, &g| self.multiply_letter(&nf, g))
    }

    /// `c·x₁⋯xₙ` as letters (the `c` letter is taken from `H`).
    pub fn to_letters(&self, nf: &NormalForm) -> Vec<AmalgamLetter> {
        let mut out = vec![AmalgamLetter {
            factor: Factor::H,
            element: self.h.embed[nf.c],
        }];
        out.extend(nf.syllables.iter().map(|s| AmalgamLetter {
            factor: s.factor,
            element: s.rep,
        }));
        out
    }

    pub fn multiply(&self, x: &NormalForm, y: &NormalForm) -> NormalForm {
        self.to_letters(y)
            .into_iter()
            .fold(x.clone(), |nf, g| self.multiply_letter(&nf, g))
    }

    pub fn inverse(&self, x: &NormalForm) -> NormalForm {
        let inv: Vec<AmalgamLetter> = self
            .to_letters(x)
            .into_iter()
            .rev()
            .map(|g| AmalgamLetter {
                factor: g.factor,
                element: self.side(g.factor).group.inverse[g.element],
            })
            .collect();
        self.normal_form(&inv)
    }

    /// Conjugates by the last syllable while the first and last syllables
    /// share a factor; returns the reduced conjugate.
    pub fn cyclically_reduce(&self, x: &NormalForm) -> NormalForm {
        let mut g = x.clone();
        while g.len() >= 2 && g.syllables[0].factor == g.syllables[g.len() - 1].factor {
            let last = g.syllables[g.len() - 1];
            let t = NormalForm {
                c: self.c_identity,
                syllables: vec![last],
            };
            g = self.multiply(&self.multiply(&t, &g), &self.inverse(&t));
        }
        g
    }

    pub fn translation_length(&self, x: &NormalForm) -> i64 {
        match self.cyclically_reduce(x).len() {
            n if n <= 1 => 0,
            n => n as i64,
        }
    }

    pub fn display(&self, nf: &NormalForm) -> String {
        let mut parts = vec![format!("c{}", self.h.group.names[self.h.embed[nf.c]])];
        for s in &nf.syllables {
            let (tag, side) = match s.factor {
                Factor::H => ("h", &self.h),
                Factor::K => ("k", &self.k),
            };
            parts.push(format!("{tag}{}", side.group.names[s.rep]));
        }
        parts.join(" ")
    }
}

/// The amalgam as a [`LengthOracle`] on normal forms.
#[derive(Clone, Copy, Debug)]
pub struct AmalgamOracle<'a> {
    pub spec: &'a AmalgamSpec,
}

impl LengthOracle for AmalgamOracle<'_> {
    type Element = NormalForm;

    fn length(&self, x: &NormalForm) -> Result<i64, OracleError> {
        Ok(self.spec.translation_length(x))
    }

    fn multiply(&self, x: &NormalForm, y: &NormalForm) -> Result<NormalForm, OracleError> {
        Ok(self.spec.multiply(x, y))
    }

    fn invert(&self, x: &NormalForm) -> Result<NormalForm, OracleError> {
        Ok(self.spec.inverse(x))
    }
}

pub fn decide_amalgam(
    spec: &AmalgamSpec,
    a: &[AmalgamLetter],
    b: &[AmalgamLetter],
) -> Result<Decision<NormalForm>, DecisionError> {
    decide(
        &AmalgamOracle { spec },
        &spec.normal_form(a),
        &spec.normal_form(b),
    )
}
