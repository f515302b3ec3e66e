//! Ping-pong certificates for certified pairs, and constructive membership.
//!
//! Positions along each axis are doubled so that the segment endpoints `p`,
//! `Xp` (and `q`, `Yq`) may sit at edge midpoints. With `c` the doubled
//! centre (midpoint of the common path, or the bridge end), `p = c − l(X)`
//! and `Xp = c + l(X)`. A vertex whose X-foot has doubled position at least
//! `Xp` lies in `U₊`, at most `p` in `U₋`; likewise for `V±` with `Y`.
//! Everything else is the domain `D`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bt_tree::{analyze_pair, Axis, PairGeometry, TreeError, TreeVertex};
use crate::sl2::{Mat2, MatrixError};
use crate::valued_field::{Field, FieldError};
use crate::word::{Generator, Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("pair fails |l(X) − l(Y)| < min(l(XY), l(X⁻¹Y)): lengths {lx}, {ly}, {lxy}, {lxinvy}")]
    NotCertified {
        lx: i64,
        ly: i64,
        lxy: i64,
        lxinvy: i64,
    },
    #[error("axes overlap for at least {0} edges, too long for ping-pong")]
    OverlapTooLong(i64),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("malformed certificate document: {0}")]
    Document(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MembershipError {
    #[error("query lives over {query}, certificate over {certificate}")]
    FieldMismatch { query: Field, certificate: Field },
    #[error("no progress towards the domain after {0} steps")]
    NoProgress(usize),
}

/// A point of the subdivided tree: a vertex or the midpoint of an edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreePoint {
    Vertex(TreeVertex),
    /// Endpoints in canonical order.
    Midpoint(TreeVertex, TreeVertex),
}

impl TreePoint {
    fn on_axis(axis: &Axis, doubled: i64) -> Self {
        if doubled % 2 == 0 {
            TreePoint::Vertex(axis.vertex_at(doubled / 2))
        } else {
            let u = axis.vertex_at(doubled.div_euclid(2));
            let v = axis.vertex_at(doubled.div_euclid(2) + 1);
            if u <= v {
                TreePoint::Midpoint(u, v)
            } else {
                TreePoint::Midpoint(v, u)
            }
        }
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreePoint::Vertex(v) => write!(f, "{v}"),
            TreePoint::Midpoint(u, v) => write!(f, "mid[{u}, {v}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    D,
    UPlus,
    UMinus,
    VPlus,
    VMinus,
}

impl Region {
    /// The generator letter whose positive powers map into this region.
    fn letter(self) -> Option<Letter> {
        match self {
            Region::D => None,
            Region::UPlus => Some(Letter::A),
            Region::UMinus => Some(Letter::A_INV),
            Region::VPlus => Some(Letter::B),
            Region::VMinus => Some(Letter::B_INV),
        }
    }

    pub fn of_letter(l: Letter) -> Self {
        match (l.generator, l.inverted) {
            (Generator::A, false) => Region::UPlus,
            (Generator::A, true) => Region::UMinus,
            (Generator::B, false) => Region::VPlus,
            (Generator::B, true) => Region::VMinus,
        }
    }
}

/// Bridge between disjoint axes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridge {
    /// End on the axis of `X`.
    pub near_x: TreeVertex,
    /// End on the axis of `Y`.
    pub near_y: TreeVertex,
    pub length: i64,
}

#[derive(Clone, Debug)]
pub struct PingPongCertificate {
    x: Mat2,
    y: Mat2,
    x_inv: Mat2,
    y_inv: Mat2,
    word_x: Word,
    word_y: Word,
    axis_x: Axis,
    axis_y: Axis,
    p_doubled: i64,
    xp_doubled: i64,
    q_doubled: i64,
    yq_doubled: i64,
    anchor: TreeVertex,
    bridge: Option<Bridge>,
    /// Common path of the axes, as X-axis positions.
    overlap: Option<(i64, i64)>,
}

/// Builds a certificate for a pair that passed the decision loop.
/// `word_x`, `word_y` express `X`, `Y` in the original generators.
pub fn build_certificate(
    x: &Mat2,
    y: &Mat2,
    word_x: &Word,
    word_y: &Word,
) -> Result<PingPongCertificate, CertificateError> {
    let (lx, ly) = (x.translation_length(), y.translation_length());
    let lxy = x.mul(y).translation_length();
    let lxinvy = x.inverse().mul(y).translation_length();
    if lx == 0 || ly == 0 || (lx - ly).abs() >= lxy.min(lxinvy) {
        return Err(CertificateError::NotCertified {
            lx,
            ly,
            lxy,
            lxinvy,
        });
    }
    let pair = analyze_pair(x, y)?;
    let (axis_x, axis_y) = (pair.first.clone(), pair.second.clone());
    let (cx, cy, bridge, overlap, anchor) = match pair.geometry {
        PairGeometry::Disjoint {
            distance,
            near_first,
            near_second,
        } => (
            2 * axis_x.position(&near_first),
            2 * axis_y.position(&near_second),
            Some(Bridge {
                near_x: near_first.clone(),
                near_y: near_second,
                length: distance,
            }),
            None,
            near_first,
        ),
        PairGeometry::Overlap {
            start, end, capped, ..
        } => {
            if capped || end - start >= lx.min(ly) {
                return Err(CertificateError::OverlapTooLong(end - start));
            }
            let (u0, u1) = (axis_x.vertex_at(start), axis_x.vertex_at(end));
            let cy = axis_y.position(&u0) + axis_y.position(&u1);
            let centre = start + end;
            let anchor = if centre % 2 == 0 {
                axis_x.vertex_at(centre / 2)
            } else {
                let a = axis_x.vertex_at(centre.div_euclid(2));
                let b = axis_x.vertex_at(centre.div_euclid(2) + 1);
                a.min(b)
            };
            (centre, cy, None, Some((start, end)), anchor)
        }
    };
    Ok(PingPongCertificate {
        x: x.clone(),
        y: y.clone(),
        x_inv: x.inverse(),
        y_inv: y.inverse(),
        word_x: word_x.clone(),
        word_y: word_y.clone(),
        p_doubled: cx - lx,
        xp_doubled: cx + lx,
        q_doubled: cy - ly,
        yq_doubled: cy + ly,
        axis_x,
        axis_y,
        anchor,
        bridge,
        overlap,
    })
}

/// Result of a membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipAnswer {
    pub member: bool,
    /// Word in the original generators, when a member.
    pub word: Option<Word>,
    /// Word in the certified generators `X = a`, `Y = b` that the pull-back produced.
    pub certified_word: Word,
    pub steps: usize,
    pub rejection: Option<Rejection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// The next letter would cancel the previous one.
    Backtrack,
    /// The pull-back reached the domain away from the anchor.
    WrongAnchor,
    /// The recovered word does not evaluate to the query.
    Mismatch,
}

impl PingPongCertificate {
    pub fn x(&self) -> &Mat2 {
        &self.x
    }

    pub fn y(&self) -> &Mat2 {
        &self.y
    }

    pub fn word_x(&self) -> &Word {
        &self.word_x
    }

    pub fn word_y(&self) -> &Word {
        &self.word_y
    }

    pub fn field(&self) -> Field {
        self.x.field()
    }

    pub fn anchor(&self) -> &TreeVertex {
        &self.anchor
    }

    pub fn bridge(&self) -> Option<&Bridge> {
        self.bridge.as_ref()
    }

    /// Length of the common path of the axes, when they meet.
    pub fn overlap_length(&self) -> Option<i64> {
        self.overlap.map(|(s, e)| e - s)
    }

    /// Doubled positions of the common path's ends on the X axis.
    pub fn overlap_doubled(&self) -> Option<(i64, i64)> {
        self.overlap.map(|(s, e)| (2 * s, 2 * e))
    }

    /// Doubled X-axis positions of `p` and `Xp`.
    pub fn x_segment(&self) -> (i64, i64) {
        (self.p_doubled, self.xp_doubled)
    }

    /// Doubled Y-axis positions of `q` and `Yq`.
    pub fn y_segment(&self) -> (i64, i64) {
        (self.q_doubled, self.yq_doubled)
    }

    pub fn axis_x(&self) -> &Axis {
        &self.axis_x
    }

    pub fn axis_y(&self) -> &Axis {
        &self.axis_y
    }

    pub fn p(&self) -> TreePoint {
        TreePoint::on_axis(&self.axis_x, self.p_doubled)
    }

    pub fn xp(&self) -> TreePoint {
        TreePoint::on_axis(&self.axis_x, self.xp_doubled)
    }

    pub fn q(&self) -> TreePoint {
        TreePoint::on_axis(&self.axis_y, self.q_doubled)
    }

    pub fn yq(&self) -> TreePoint {
        TreePoint::on_axis(&self.axis_y, self.yq_doubled)
    }

    pub fn classify_vertex(&self, z: &TreeVertex) -> Region {
        let (fx, _) = self.axis_x.project(z);
        let sx = 2 * self.axis_x.position(&fx);
        if sx >= self.xp_doubled {
            return Region::UPlus;
        }
        if sx <= self.p_doubled {
            return Region::UMinus;
        }
        let (fy, _) = self.axis_y.project(z);
        let sy = 2 * self.axis_y.position(&fy);
        if sy >= self.yq_doubled {
            Region::VPlus
        } else if sy <= self.q_doubled {
            Region::VMinus
        } else {
            Region::D
        }
    }

    fn letter_matrix(&self, l: Letter) -> &Mat2 {
        match (l.generator, l.inverted) {
            (Generator::A, false) => &self.x,
            (Generator::A, true) => &self.x_inv,
            (Generator::B, false) => &self.y,
            (Generator::B, true) => &self.y_inv,
        }
    }

    /// Strict SL₂ membership.
    pub fn membership(&self, c: &Mat2) -> Result<MembershipAnswer, MembershipError> {
        self.membership_with_mode(c, false)
    }

    /// With `psl`, `C` is accepted when `±C` lies in the group.
    pub fn membership_with_mode(&self, c: &Mat2, psl: bool) -> Result<MembershipAnswer, MembershipError> {
        if c.field() != self.field() {
            return Err(MembershipError::FieldMismatch {
                query: c.field(),
                certificate: self.field(),
            });
        }
        let start = self.anchor.act(c);
        let cap = self.anchor.edges_to(&start) as usize + 4;
        let mut z = start;
        let mut letters: Vec<Letter> = Vec::new();
        let reject = |letters: Vec<Letter>, why| MembershipAnswer {
            member: false,
            word: None,
            steps: letters.len(),
            certified_word: Word::from_letters(letters),
            rejection: Some(why),
        };
        while let Some(l) = self.classify_vertex(&z).letter() {
            if letters.last() == Some(&l.inverse()) {
                return Ok(reject(letters, Rejection::Backtrack));
            }
            if letters.len() == cap {
                return Err(MembershipError::NoProgress(cap));
            }
            letters.push(l);
            z = z.act(self.letter_matrix(l.inverse()));
        }
        if z != self.anchor {
            return Ok(reject(letters, Rejection::WrongAnchor));
        }
        let w = Word::from_letters(letters);
        let value = w.evaluate_mat(&self.x, &self.y);
        let matches = if psl {
            value.normalize_psl() == c.normalize_psl()
        } else {
            value == *c
        };
        if !matches {
            let mut answer = reject(Vec::new(), Rejection::Mismatch);
            answer.steps = w.len();
            answer.certified_word = w;
            return Ok(answer);
        }
        Ok(MembershipAnswer {
            member: true,
            word: Some(w.substitute(&self.word_x, &self.word_y)),
            steps: w.len(),
            certified_word: w,
            rejection: None,
        })
    }

    pub fn to_document(&self) -> CertificateDocument {
        CertificateDocument {
            field: self.field().to_string(),
            x: self.x.to_string(),
            y: self.y.to_string(),
            word_x: self.word_x.clone(),
            word_y: self.word_y.clone(),
            length_x: self.axis_x.length(),
            length_y: self.axis_y.length(),
            axis_x_origin: VertexDoc::from(self.axis_x.origin()),
            axis_y_origin: VertexDoc::from(self.axis_y.origin()),
            p_doubled: self.p_doubled,
            xp_doubled: self.xp_doubled,
            q_doubled: self.q_doubled,
            yq_doubled: self.yq_doubled,
            p: PointDoc::from(&self.p()),
            xp: PointDoc::from(&self.xp()),
            q: PointDoc::from(&self.q()),
            yq: PointDoc::from(&self.yq()),
            anchor: VertexDoc::from(&self.anchor),
            bridge: self.bridge.as_ref().map(|b| BridgeDoc {
                near_x: VertexDoc::from(&b.near_x),
                near_y: VertexDoc::from(&b.near_y),
                length: b.length,
            }),
            overlap: self.overlap.map(|(s, e)| [s, e]),
        }
    }

    /// Rebuilds a certificate and checks it against a fresh construction.
    pub fn from_document(doc: &CertificateDocument) -> Result<Self, CertificateError> {
        let field: Field = doc.field.parse()?;
        let x = Mat2::parse(field, &doc.x)?;
        let y = Mat2::parse(field, &doc.y)?;
        let axis_x_origin = doc.axis_x_origin.to_vertex(field)?;
        let axis_y_origin = doc.axis_y_origin.to_vertex(field)?;
        let axis_x = Axis::try_with_origin(&x, axis_x_origin)
            .ok_or_else(|| CertificateError::Document("X origin is off the axis".into()))?;
        let axis_y = Axis::try_with_origin(&y, axis_y_origin)
            .ok_or_else(|| CertificateError::Document("Y origin is off the axis".into()))?;
        let fresh = build_certificate(&x, &y, &doc.word_x, &doc.word_y)?;
        let shift_x = 2 * axis_x.position(fresh.axis_x.origin());
        let shift_y = 2 * axis_y.position(fresh.axis_y.origin());
        let cert = Self {
            p_doubled: fresh.p_doubled + shift_x,
            xp_doubled: fresh.xp_doubled + shift_x,
            q_doubled: fresh.q_doubled + shift_y,
            yq_doubled: fresh.yq_doubled + shift_y,
            overlap: fresh.overlap.map(|(s, e)| (s + shift_x / 2, e + shift_x / 2)),
            axis_x,
            axis_y,
            ..fresh
        };
        let stated = [doc.p_doubled, doc.xp_doubled, doc.q_doubled, doc.yq_doubled];
        let actual = [cert.p_doubled, cert.xp_doubled, cert.q_doubled, cert.yq_doubled];
        if stated != actual || doc.anchor.to_vertex(field)? != cert.anchor {
            return Err(CertificateError::Document(
                "stated positions disagree with the generators".into(),
            ));
        }
        Ok(cert)
    }
}

/// Serialized vertex: level `n` and the representative `b` in field syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub n: i64,
    pub b: String,
}

impl From<&TreeVertex> for VertexDoc {
    fn from(v: &TreeVertex) -> Self {
        Self {
            n: v.n(),
            b: v.b().to_string(),
        }
    }
}

impl VertexDoc {
    pub fn to_vertex(&self, field: Field) -> Result<TreeVertex, CertificateError> {
        Ok(TreeVertex::new(self.n, &field.parse_element(&self.b)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointDoc {
    Vertex(VertexDoc),
    Midpoint([VertexDoc; 2]),
}

impl From<&TreePoint> for PointDoc {
    fn from(p: &TreePoint) -> Self {
        match p {
            TreePoint::Vertex(v) => PointDoc::Vertex(v.into()),
            TreePoint::Midpoint(u, v) => PointDoc::Midpoint([u.into(), v.into()]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeDoc {
    pub near_x: VertexDoc,
    pub near_y: VertexDoc,
    pub length: i64,
}

/// Wire form of a certificate. Positions are doubled axis coordinates
/// relative to the stated axis origins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub field: String,
    pub x: String,
    pub y: String,
    pub word_x: Word,
    pub word_y: Word,
    pub length_x: i64,
    pub length_y: i64,
    pub axis_x_origin: VertexDoc,
    pub axis_y_origin: VertexDoc,
    pub p_doubled: i64,
    pub xp_doubled: i64,
    pub q_doubled: i64,
    pub yq_doubled: i64,
    pub p: PointDoc,
    pub xp: PointDoc,
    pub q: PointDoc,
    pub yq: PointDoc,
    pub anchor: VertexDoc,
    pub bridge: Option<BridgeDoc>,
    pub overlap: Option<[i64; 2]>,
}
