//! Geometry of the Bruhat–Tits tree of SL₂(K).
//!
//! A vertex is stored as `(n, b)`: the homothety class of the lattice spanned
//! by the columns of `[[πⁿ, b], [0, 1]]`, with `b` reduced to its digit sum
//! below `πⁿ`. The same pair names the closed ball `{x : v(x − b) ≥ n}` of K,
//! and the tree structure is ball inclusion: the parent of `(n, b)` is
//! `(n − 1, b)`, and its `p` children are `(n + 1, b + aπⁿ)` for `a ∈ 0..p`.
//! Geodesics therefore climb from one ball to the smallest ball containing
//! both, then descend.
//!
//! Public distances are in doubled units so edge midpoints have integer
//! coordinates; [`TreeVertex::edges_to`] gives plain edge counts.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::sl2::Mat2;
use crate::valued_field::{digit_order, Field, FieldElement, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("basis matrix is singular")]
    Singular,
    #[error("{0} is elliptic and has no axis")]
    Elliptic(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TreeVertex {
    n: i64,
    b: FieldElement,
}

impl TreeVertex {
    /// The class of the standard lattice `O²`.
    pub fn base(field: Field) -> Self {
        Self {
            n: 0,
            b: field.zero(),
        }
    }

    /// The vertex `(n, b mod πⁿ)`.
    pub fn new(n: i64, b: &FieldElement) -> Self {
        Self {
            n,
            b: b.reduce_mod_pi(n),
        }
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn b(&self) -> &FieldElement {
        &self.b
    }

    pub fn field(&self) -> Field {
        self.b.field()
    }

    pub fn parent(&self) -> Self {
        Self::new(self.n - 1, &self.b)
    }

    pub fn children(&self) -> Vec<Self> {
        let field = self.field();
        let step = field.uniformizer_pow(self.n);
        (0..field.prime() as i64)
            .map(|a| Self {
                n: self.n + 1,
                b: &self.b + &(&field.from_int(a) * &step),
            })
            .collect()
    }

    /// The `p + 1` adjacent vertices, parent first.
    pub fn neighbors(&self) -> Vec<Self> {
        let mut out = vec![self.parent()];
        out.extend(self.children());
        out
    }

    /// Level of the smallest ball containing both.
    fn meet_level(&self, other: &Self) -> i64 {
        let m = self.n.min(other.n);
        match (&self.b - &other.b).valuation() {
            Valuation::Finite(v) => m.min(v),
            Valuation::Infinite => m,
        }
    }

    /// Undoubled edge count, read off the elementary divisors of the
    /// transition matrix `M₁⁻¹M₂` between the two standard bases.
    pub fn edges_to(&self, other: &Self) -> i64 {
        let field = self.field();
        let inv_scale = field.uniformizer_pow(-self.n);
        let transition = [
            field.uniformizer_pow(other.n - self.n),
            &(&other.b - &self.b) * &inv_scale,
            field.zero(),
            field.one(),
        ];
        let (e1, e2) = elementary_divisor_valuations(&transition).expect("invertible transition");
        e2 - e1
    }

    /// Doubled distance.
    pub fn distance(&self, other: &Self) -> i64 {
        2 * self.edges_to(other)
    }

    /// `g · self`.
    pub fn act(&self, g: &Mat2) -> Self {
        let pin = self.field().uniformizer_pow(self.n);
        let cols = [
            g.a() * &pin,
            g.a() * &self.b + g.b(),
            g.c() * &pin,
            g.c() * &self.b + g.d(),
        ];
        canonical_vertex(&cols).expect("image of a lattice under SL2 is a lattice")
    }

    fn digit_text(&self) -> String {
        if self.b.is_zero() {
            return "0".into();
        }
        let (lead, digits) = self.b.expansion(self.n - 1);
        let body: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
        let sep = if self.field().prime() < 10 { "" } else { "." };
        format!("{}@{}", body.join(sep), lead)
    }
}

impl Ord for TreeVertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| digit_order(&self.b, &other.b, self.n - 1))
    }
}

impl PartialOrd for TreeVertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {})", self.n, self.digit_text())
    }
}

impl fmt::Debug for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Valuations `(e₁, e₂)`, `e₁ ≤ e₂`, of the elementary divisors of the
/// row-major 2×2 matrix `m`: pivot on an entry of least valuation and read
/// the second divisor off the remaining Schur complement.
pub fn elementary_divisor_valuations(m: &[FieldElement; 4]) -> Result<(i64, i64), TreeError> {
    let (pivot, e1) = m
        .iter()
        .enumerate()
        .filter_map(|(i, x)| x.valuation().finite().map(|v| (i, v)))
        .min_by_key(|&(_, v)| v)
        .ok_or(TreeError::Singular)?;
    // opposite corner minus the product of the pivot's row and column partners
    let (opposite, row_partner, col_partner) = match pivot {
        0 => (3, 1, 2),
        1 => (2, 0, 3),
        2 => (1, 3, 0),
        _ => (0, 2, 1),
    };
    let ratio = m[row_partner].checked_div(&m[pivot]).expect("pivot is nonzero");
    let complement = &m[opposite] - &(&ratio * &m[col_partner]);
    let e2 = complement.valuation().finite().ok_or(TreeError::Singular)?;
    Ok((e1, e2))
}

/// The vertex spanned by the columns of the row-major matrix `basis`.
pub fn canonical_vertex(basis: &[FieldElement; 4]) -> Result<TreeVertex, TreeError> {
    let [a, b, c, d] = basis;
    // columns u = (a, c), w = (b, d); make u the column with the smaller row-2 valuation
    let (u1, u2, w1, w2) = if c.valuation() <= d.valuation() {
        (a, c, b, d)
    } else {
        (b, d, a, c)
    };
    if u2.is_zero() {
        return Err(TreeError::Singular);
    }
    let u2_inv = u2.inv().expect("nonzero");
    let w1_reduced = w1 - &(&(w2 * &u2_inv) * u1);
    if w1_reduced.is_zero() {
        return Err(TreeError::Singular);
    }
    let n = (&w1_reduced * &u2_inv)
        .valuation()
        .finite()
        .expect("nonzero");
    Ok(TreeVertex::new(n, &(u1 * &u2_inv)))
}

pub fn distance(u: &TreeVertex, v: &TreeVertex) -> i64 {
    u.distance(v)
}

pub fn act(g: &Mat2, v: &TreeVertex) -> TreeVertex {
    v.act(g)
}

/// The vertex `k` edges from `u` along the geodesic to `v`.
pub fn vertex_on_geodesic(u: &TreeVertex, v: &TreeVertex, k: i64) -> TreeVertex {
    let m = u.meet_level(v);
    let up = u.n - m;
    debug_assert!(0 <= k && k <= up + v.n - m);
    if k <= up {
        TreeVertex::new(u.n - k, &u.b)
    } else {
        TreeVertex::new(m + (k - up), &v.b)
    }
}

/// Vertices from `u` to `v` inclusive.
pub fn geodesic(u: &TreeVertex, v: &TreeVertex) -> Vec<TreeVertex> {
    let len = u.edges_to(v);
    (0..=len).map(|k| vertex_on_geodesic(u, v, k)).collect()
}

fn require_hyperbolic(a: &Mat2) -> Result<i64, TreeError> {
    match a.translation_length() {
        0 => Err(TreeError::Elliptic(a.to_string())),
        l => Ok(l),
    }
}

/// A vertex on the axis of `a`: the midpoint of `[x, a·x]` for the base vertex `x`.
pub fn axis_vertex(a: &Mat2) -> Result<TreeVertex, TreeError> {
    require_hyperbolic(a)?;
    let x = TreeVertex::base(a.field());
    let ax = x.act(a);
    let d = x.edges_to(&ax);
    Ok(vertex_on_geodesic(&x, &ax, d / 2))
}

/// Nearest axis vertex to `z` and its edge distance `k` from `z`.
pub fn project_to_axis(a: &Mat2, z: &TreeVertex) -> Result<(TreeVertex, i64), TreeError> {
    let l = require_hyperbolic(a)?;
    Ok(project_with_length(a, l, z))
}

fn project_with_length(a: &Mat2, l: i64, z: &TreeVertex) -> (TreeVertex, i64) {
    let az = z.act(a);
    let k = (z.edges_to(&az) - l) / 2;
    (vertex_on_geodesic(z, &az, k), k)
}

/// The axis of a hyperbolic element with an integer coordinate along it.
///
/// Position 0 is `origin`; positions increase in the translation
/// direction, so `g` maps position `s` to `s + l`.
#[derive(Clone, Debug)]
pub struct Axis {
    g: Mat2,
    g_inv: Mat2,
    origin: TreeVertex,
    image: TreeVertex,
    length: i64,
}

impl Axis {
    pub fn new(g: &Mat2) -> Result<Self, TreeError> {
        let origin = axis_vertex(g)?;
        Ok(Self::with_origin(g, origin))
    }

    /// `origin` must lie on the axis.
    pub fn with_origin(g: &Mat2, origin: TreeVertex) -> Self {
        let length = g.translation_length();
        let image = origin.act(g);
        debug_assert_eq!(origin.edges_to(&image), length);
        Self {
            g: g.clone(),
            g_inv: g.inverse(),
            origin,
            image,
            length,
        }
    }

    /// `None` unless `g` is hyperbolic and `origin` lies on its axis.
    pub fn try_with_origin(g: &Mat2, origin: TreeVertex) -> Option<Self> {
        let length = g.translation_length();
        (length > 0 && origin.edges_to(&origin.act(g)) == length).then(|| Self::with_origin(g, origin))
    }

    pub fn element(&self) -> &Mat2 {
        &self.g
    }

    pub fn origin(&self) -> &TreeVertex {
        &self.origin
    }

    pub fn length(&self) -> i64 {
        self.length
    }

    pub fn contains(&self, y: &TreeVertex) -> bool {
        y.edges_to(&y.act(&self.g)) == self.length
    }

    /// Signed position of an axis vertex.
    pub fn position(&self, y: &TreeVertex) -> i64 {
        let d = self.origin.edges_to(y);
        if y.edges_to(&self.image) < d + self.length {
            d
        } else {
            -d
        }
    }

    pub fn vertex_at(&self, s: i64) -> TreeVertex {
        let j = s.div_euclid(self.length);
        let r = s.rem_euclid(self.length);
        let step = if j >= 0 { &self.g } else { &self.g_inv };
        let mut v = self.origin.clone();
        for _ in 0..j.unsigned_abs() {
            v = v.act(step);
        }
        let w = v.act(&self.g);
        vertex_on_geodesic(&v, &w, r)
    }

    /// Foot of `z` on the axis and its edge distance from `z`.
    pub fn project(&self, z: &TreeVertex) -> (TreeVertex, i64) {
        project_with_length(&self.g, self.length, z)
    }
}

/// Length of a common stretch of two axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlapLength {
    Finite(i64),
    /// At least the search window; possibly infinite.
    AtLeast(i64),
}

impl OverlapLength {
    pub fn finite(self) -> Option<i64> {
        match self {
            OverlapLength::Finite(d) => Some(d),
            OverlapLength::AtLeast(_) => None,
        }
    }

    /// True when the overlap is known to be `≥ bound`.
    pub fn at_least(self, bound: i64) -> bool {
        match self {
            OverlapLength::Finite(d) => d >= bound,
            OverlapLength::AtLeast(w) => w >= bound,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxesRelation {
    /// Axes at edge distance `distance > 0`.
    Disjoint { distance: i64 },
    /// Axes share a path of `length` edges. A single common vertex counts
    /// as `same_direction`.
    Overlap {
        length: OverlapLength,
        same_direction: bool,
    },
}

/// Detailed geometry of a pair of axes, in coordinates on the first axis.
#[derive(Clone, Debug)]
pub enum PairGeometry {
    Disjoint {
        distance: i64,
        /// Bridge end on the first axis.
        near_first: TreeVertex,
        /// Bridge end on the second axis.
        near_second: TreeVertex,
    },
    Overlap {
        /// Positions on the first axis bounding the common path.
        start: i64,
        end: i64,
        capped: bool,
        same_direction: bool,
    },
}

#[derive(Clone, Debug)]
pub struct AxisPair {
    pub first: Axis,
    pub second: Axis,
    pub geometry: PairGeometry,
}

impl AxisPair {
    pub fn relation(&self) -> AxesRelation {
        match &self.geometry {
            PairGeometry::Disjoint { distance, .. } => AxesRelation::Disjoint {
                distance: *distance,
            },
            PairGeometry::Overlap {
                start,
                end,
                capped,
                same_direction,
            } => AxesRelation::Overlap {
                length: if *capped {
                    OverlapLength::AtLeast(self.window())
                } else {
                    OverlapLength::Finite(end - start)
                },
                same_direction: *same_direction,
            },
        }
    }

    fn window(&self) -> i64 {
        4 * (self.first.length + self.second.length)
    }
}

/// Locates the axes of `a` and `b` relative to each other.
///
/// The second axis is projected onto from the first axis's origin; if
/// projecting back lands at positive distance the axes are disjoint and the
/// two feet bound the bridge. Otherwise the common path is found by binary
/// search along the first axis, at most `4·(l(a) + l(b))` edges each way.
pub fn analyze_pair(a: &Mat2, b: &Mat2) -> Result<AxisPair, TreeError> {
    let first = Axis::new(a)?;
    let second = Axis::new(b)?;
    let (f, _) = second.project(&first.origin);
    let (g, k) = first.project(&f);
    let mut pair = AxisPair {
        first,
        second,
        geometry: PairGeometry::Disjoint {
            distance: k,
            near_first: g.clone(),
            near_second: f,
        },
    };
    if k > 0 {
        return Ok(pair);
    }
    let window = pair.window();
    let (first, second) = (&pair.first, &pair.second);
    let anchor = first.position(&g);
    let on_second = |s: i64| second.contains(&first.vertex_at(s));
    let (ahead, capped_ahead) = extent(|t| on_second(anchor + t), window);
    let (behind, capped_behind) = extent(|t| on_second(anchor - t), window);
    let (start, end) = (anchor - behind, anchor + ahead);
    let same_direction = if end > start {
        let u0 = first.vertex_at(start);
        let u1 = first.vertex_at(start + 1);
        u1.edges_to(&u0.act(&second.g)) == second.length - 1
    } else {
        true
    };
    pair.geometry = PairGeometry::Overlap {
        start,
        end,
        capped: capped_ahead || capped_behind,
        same_direction,
    };
    Ok(pair)
}

/// Largest `t ∈ [0, cap]` with `holds(t)`, for a predicate true on an
/// initial segment; the flag reports hitting `cap`.
fn extent(holds: impl Fn(i64) -> bool, cap: i64) -> (i64, bool) {
    if holds(cap) {
        return (cap, true);
    }
    let (mut lo, mut hi) = (0, cap);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, false)
}

pub fn axes_relation(a: &Mat2, b: &Mat2) -> Result<AxesRelation, TreeError> {
    Ok(analyze_pair(a, b)?.relation())
}

/// Overlap `Δ′` between the axis of the longer element and its translate
/// by the shorter one: `B` against `A⁻¹BA` when `l(A) ≤ l(B)`, else `A`
/// against `B⁻¹AB`. An empty intersection counts as 0.
pub fn secondary_overlap(a: &Mat2, b: &Mat2) -> Result<OverlapLength, TreeError> {
    let (la, lb) = (require_hyperbolic(a)?, require_hyperbolic(b)?);
    let relation = if la <= lb {
        axes_relation(b, &b.conjugate_by(&a.inverse()))?
    } else {
        axes_relation(a, &a.conjugate_by(&b.inverse()))?
    };
    Ok(match relation {
        AxesRelation::Disjoint { .. } => OverlapLength::Finite(0),
        AxesRelation::Overlap { length, .. } => length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: u64, s: &str) -> FieldElement {
        Field::Qp(p).parse_element(s).unwrap()
    }

    fn mat(p: u64, s: &str) -> Mat2 {
        Mat2::parse(Field::Qp(p), s).unwrap()
    }

    fn basis(p: u64, entries: [&str; 4]) -> [FieldElement; 4] {
        entries.map(|e| q(p, e))
    }

    /// Ball-model distance, independent of the elementary-divisor route.
    fn ball_distance(u: &TreeVertex, v: &TreeVertex) -> i64 {
        u.n + v.n - 2 * u.meet_level(v)
    }

    #[test]
    fn canonical_vertex_examples() {
        let f = Field::Qp(3);
        assert_eq!(canonical_vertex(&basis(3, ["1", "0", "0", "1"])).unwrap(), TreeVertex::base(f));
        assert_eq!(
            canonical_vertex(&basis(3, ["3", "0", "0", "1"])).unwrap(),
            TreeVertex::new(1, &f.zero())
        );
        let unscaled = canonical_vertex(&basis(3, ["3", "1", "0", "1"])).unwrap();
        let scaled = canonical_vertex(&basis(3, ["9", "3", "0", "3"])).unwrap();
        assert_eq!(unscaled, scaled);
        // column operations over O
        let mixed = canonical_vertex(&basis(3, ["3", "4", "0", "1"])).unwrap();
        assert_eq!(mixed, unscaled);
        assert_eq!(
            canonical_vertex(&basis(3, ["1", "2", "2", "4"])),
            Err(TreeError::Singular)
        );
    }

    #[test]
    fn distances_and_geodesics() {
        let f = Field::Qp(2);
        let o = TreeVertex::base(f);
        let v1 = TreeVertex::new(1, &f.zero());
        let v2 = TreeVertex::new(2, &f.zero());
        assert_eq!(o.distance(&o), 0);
        assert_eq!(o.distance(&v1), 2);
        assert_eq!(geodesic(&o, &v2), vec![o.clone(), v1, v2]);
        assert_eq!(geodesic(&o, &o), vec![o.clone()]);
        let w = TreeVertex::new(3, &q(2, "5/2"));
        let path = geodesic(&w, &o);
        assert_eq!(path.len() as i64, w.edges_to(&o) + 1);
        for pair in path.windows(2) {
            assert_eq!(pair[0].distance(&pair[1]), 2);
        }
    }

    #[test]
    fn neighbors_are_adjacent_and_distinct() {
        let v = TreeVertex::new(-2, &q(5, "3/25"));
        let ns = v.neighbors();
        assert_eq!(ns.len(), 6);
        for (i, u) in ns.iter().enumerate() {
            assert_eq!(u.edges_to(&v), 1);
            for w in &ns[i + 1..] {
                assert_eq!(u.edges_to(w), 2);
            }
        }
    }

    #[test]
    fn diagonal_axis_passes_through_base() {
        let a = mat(7, "[[7^3,0],[0,1/7^3]]");
        let o = TreeVertex::base(Field::Qp(7));
        assert_eq!(o.distance(&o.act(&a)), 2 * a.translation_length());
        assert_eq!(project_to_axis(&a, &o).unwrap(), (o.clone(), 0));
        assert!(axis_vertex(&mat(7, "[[1,1],[0,1]]")).is_err());
    }

    #[test]
    fn one_edge_off_axis() {
        let f = Field::Qp(3);
        let a = mat(3, "[[9,0],[0,1/9]]");
        // axis of a diagonal element is the chain (n, 0); (1, 1) hangs off (0, 0)
        let z = TreeVertex::new(1, &f.one());
        let (foot, k) = project_to_axis(&a, &z).unwrap();
        assert_eq!((foot, k), (TreeVertex::base(f), 1));
        assert_eq!(z.edges_to(&z.act(&a)), a.translation_length() + 2);
    }

    #[test]
    fn self_overlap_is_unbounded() {
        let a = mat(5, "[[1/5,1],[-1,0]]");
        let rel = axes_relation(&a, &a).unwrap();
        assert_eq!(
            rel,
            AxesRelation::Overlap {
                length: OverlapLength::AtLeast(4 * 2 * a.translation_length()),
                same_direction: true
            }
        );
        let inv = axes_relation(&a, &a.inverse()).unwrap();
        assert!(matches!(inv, AxesRelation::Overlap { same_direction: false, .. }));
    }

    #[test]
    fn disjoint_axes_length_formula() {
        let p = 3;
        let a = mat(p, "[[9,0],[0,1/9]]");
        // h sends the ends 0, ∞ of a's axis to 1, 10; the new axis tops out at the ball v(x − 1) ≥ 2
        let h = mat(p, "[[10,1/9],[1,1/9]]");
        let b = a.conjugate_by(&h);
        match axes_relation(&a, &b).unwrap() {
            AxesRelation::Disjoint { distance } => {
                assert_eq!(distance, 2);
                let l = a.translation_length() + b.translation_length() + 2 * distance;
                assert_eq!(a.mul(&b).translation_length(), l);
                assert_eq!(a.inverse().mul(&b).translation_length(), l);
            }
            other => panic!("expected disjoint axes, got {other:?}"),
        }
    }

    #[test]
    fn elementary_divisors_by_pivot() {
        let m = basis(5, ["25", "5", "1", "3"]);
        assert_eq!(elementary_divisor_valuations(&m).unwrap(), (0, 1));
        let d = basis(5, ["1/5", "0", "0", "125"]);
        assert_eq!(elementary_divisor_valuations(&d).unwrap(), (-1, 3));
    }

    fn arb_vertex(p: u64) -> impl Strategy<Value = TreeVertex> {
        let f = Field::Qp(p);
        (-4i64..6, -50i64..50, 1i64..30).prop_map(move |(n, num, den)| {
            TreeVertex::new(n, &f.from_ratio(num, den).unwrap())
        })
    }

    fn arb_matrix(p: u64) -> impl Strategy<Value = Mat2> {
        let f = Field::Qp(p);
        proptest::collection::vec((0u8..3, -12i64..12, 1i64..10), 1..6).prop_map(move |steps| {
            steps.into_iter().fold(Mat2::identity(f), |acc, (kind, n, d)| {
                let x = f.from_ratio(n, d).unwrap();
                let g = match kind {
                    0 => Mat2::upper(&x),
                    1 => Mat2::lower(&x),
                    _ => Mat2::diagonal(&f.uniformizer_pow(n % 3)).unwrap(),
                };
                acc.mul(&g)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn metric_axioms(u in arb_vertex(3), v in arb_vertex(3), w in arb_vertex(3)) {
            let duv = u.distance(&v);
            prop_assert_eq!(duv, v.distance(&u));
            prop_assert_eq!(duv == 0, u == v);
            prop_assert!(duv <= u.distance(&w) + w.distance(&v));
            prop_assert_eq!(duv, 2 * ball_distance(&u, &v));
        }

        #[test]
        fn geodesic_vertices_split_distance(u in arb_vertex(2), v in arb_vertex(2)) {
            let path = geodesic(&u, &v);
            prop_assert_eq!(path.len() as i64, u.distance(&v) / 2 + 1);
            for w in &path {
                prop_assert_eq!(u.distance(&v), u.distance(w) + w.distance(&v));
            }
        }

        #[test]
        fn action_is_isometric(g in arb_matrix(3), h in arb_matrix(3), u in arb_vertex(3), v in arb_vertex(3)) {
            prop_assert_eq!(u.act(&g).distance(&v.act(&g)), u.distance(&v));
            prop_assert_eq!(u.act(&h).act(&g), u.act(&g.mul(&h)));
            prop_assert_eq!(u.act(&Mat2::identity(Field::Qp(3))), u.clone());
            // no inversions: adjacent vertices are never swapped
            for w in u.neighbors() {
                prop_assert!(!(u.act(&g) == w && w.act(&g) == u));
            }
        }

        #[test]
        fn displacement_matches_projection(a in arb_matrix(5), z in arb_vertex(5)) {
            let l = a.translation_length();
            if l > 0 {
                let w = axis_vertex(&a).unwrap();
                prop_assert_eq!(w.distance(&w.act(&a)), 2 * l);
                let (foot, k) = project_to_axis(&a, &z).unwrap();
                prop_assert_eq!(z.distance(&z.act(&a)), 2 * l + 4 * k);
                prop_assert_eq!(z.distance(&foot), 2 * k);
                let axis = Axis::new(&a).unwrap();
                prop_assert!(axis.contains(&foot));
                // the foot is on the way to every axis vertex past it
                let s = axis.position(&foot);
                for t in [s - 3, s + 2, s + l + 1] {
                    let y = axis.vertex_at(t);
                    prop_assert!(geodesic(&z, &y).contains(&foot));
                }
            }
        }

        #[test]
        fn axis_coordinates_are_consistent(a in arb_matrix(2), s in -20i64..20) {
            if a.is_hyperbolic() {
                let axis = Axis::new(&a).unwrap();
                let y = axis.vertex_at(s);
                prop_assert!(axis.contains(&y));
                prop_assert_eq!(axis.position(&y), s);
                prop_assert_eq!(axis.position(&y.act(&a)), s + a.translation_length());
                prop_assert_eq!(y.edges_to(&axis.vertex_at(s + 1)), 1);
            }
        }

        #[test]
        fn edge_on_axis_iff_equal_displacement(a in arb_matrix(3), z in arb_vertex(3)) {
            if a.is_hyperbolic() {
                let axis = Axis::new(&a).unwrap();
                for w in z.neighbors() {
                    let on_axis = axis.contains(&z) && axis.contains(&w);
                    let same = z.edges_to(&z.act(&a)) == w.edges_to(&w.act(&a));
                    prop_assert_eq!(on_axis, same);
                }
            }
        }

        #[test]
        fn conjugate_axis_is_translate(a in arb_matrix(7), g in arb_matrix(7)) {
            if a.is_hyperbolic() {
                let w = axis_vertex(&a.conjugate_by(&g)).unwrap();
                let back = w.act(&g.inverse());
                prop_assert!(Axis::new(&a).unwrap().contains(&back));
            }
        }
    }
}
