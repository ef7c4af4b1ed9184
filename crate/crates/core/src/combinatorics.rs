//! Triangulations of the reference n-gon.
//!
//! The polygon has vertices `0..n` in cyclic order and sides `e_1..e_n`, where
//! `e_i` joins vertex `i-1` to vertex `i` (so `e_n` joins `n-1` to `0`). A chord
//! between vertices `p < q` cuts off the sides `{p+1..q}`; this arc never
//! contains `n`, so it is the canonical arc of the diagonal.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest polygon size `enumerate_triangulations` accepts by default.
pub const DEFAULT_MAX_N: usize = 10;

/// A cyclic run of consecutive side indices, `start, start+1, ..` (mod n), 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicInterval {
    n: usize,
    start: usize,
    len: usize,
}

impl CyclicInterval {
    pub fn new(n: usize, start: usize, len: usize) -> Self {
        assert!(n >= 1 && (1..=n).contains(&start) && len <= n);
        CyclicInterval { n, start, len }
    }

    /// Sides cut off by walking from vertex `from` to vertex `to` in increasing
    /// cyclic order: `{from+1, .., to}`.
    pub fn between_vertices(n: usize, from: usize, to: usize) -> Self {
        let len = (to + n - from) % n;
        CyclicInterval::new(n, from % n + 1, len)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        (i + self.n - self.start) % self.n < self.len
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.len)
            .map(|k| (self.start - 1 + k) % self.n + 1)
            .collect()
    }

    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.indices();
        v.sort_unstable();
        v
    }

    pub fn complement(&self) -> Self {
        CyclicInterval::new(self.n, (self.start - 1 + self.len) % self.n + 1, self.n - self.len)
    }

    pub fn is_subset_of(&self, other: &CyclicInterval) -> bool {
        self.indices().iter().all(|&i| other.contains(i))
    }

    pub fn is_disjoint_from(&self, other: &CyclicInterval) -> bool {
        self.indices().iter().all(|&i| !other.contains(i))
    }
}

/// An unoriented diagonal, stored by its canonical arc `{lo..hi}` (`hi < n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagonal {
    lo: usize,
    hi: usize,
    n: usize,
}

impl Diagonal {
    /// The chord between polygon vertices `p` and `q`.
    pub fn from_chord(n: usize, p: usize, q: usize) -> Result<Self> {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        if q >= n || q - p < 2 || (p == 0 && q == n - 1) {
            return Err(Error::InvalidArgument(format!(
                "vertices {p} and {q} of a {n}-gon do not span a diagonal"
            )));
        }
        Ok(Diagonal { lo: p + 1, hi: q, n })
    }

    /// Accepts any cyclic interval of sides (in any order) with `2 <= |I| <= n-2`
    /// and canonicalizes to the arc that omits `n`.
    pub fn from_arc(n: usize, arc: &[usize]) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("{arc:?} is not a diagonal arc of a {n}-gon"));
        let set: BTreeSet<usize> = arc.iter().copied().collect();
        if set.len() != arc.len() || set.len() < 2 || set.len() + 2 > n {
            return Err(bad());
        }
        if set.iter().any(|&i| i == 0 || i > n) {
            return Err(bad());
        }
        let interval = interval_of(n, &set).ok_or_else(bad)?;
        let canonical = if interval.contains(n) { interval.complement() } else { interval };
        let idx = canonical.sorted_indices();
        Ok(Diagonal { lo: idx[0], hi: *idx.last().unwrap(), n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    /// Polygon vertices joined by this diagonal, smaller first.
    pub fn chord(&self) -> (usize, usize) {
        (self.lo - 1, self.hi)
    }

    pub fn arc(&self) -> Vec<usize> {
        (self.lo..=self.hi).collect()
    }

    pub fn interval(&self) -> CyclicInterval {
        CyclicInterval::new(self.n, self.lo, self.hi - self.lo + 1)
    }

    pub fn arc_len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.lo..=self.hi).contains(&i)
    }

    pub fn crosses(&self, other: &Diagonal) -> bool {
        let (p, q) = self.chord();
        let (s, t) = other.chord();
        (p < s && s < q && q < t) || (s < p && p < t && t < q)
    }
}

impl fmt::Display for Diagonal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{{{}..{}}}", self.lo, self.hi)
    }
}

fn interval_of(n: usize, set: &BTreeSet<usize>) -> Option<CyclicInterval> {
    let start = *set.iter().find(|&&i| !set.contains(&(if i == 1 { n } else { i - 1 })))?;
    let iv = CyclicInterval::new(n, start, set.len());
    iv.indices().iter().all(|i| set.contains(i)).then_some(iv)
}

/// A side `e_i` (1-based) or a diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Side(usize),
    Diagonal(Diagonal),
}

impl EdgeLabel {
    /// The edge joining polygon vertices `p` and `q`.
    pub fn between(n: usize, p: usize, q: usize) -> Result<Self> {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        if q >= n || p == q {
            return Err(Error::InvalidArgument(format!("bad vertex pair ({p}, {q})")));
        }
        if q - p == 1 {
            Ok(EdgeLabel::Side(q))
        } else if p == 0 && q == n - 1 {
            Ok(EdgeLabel::Side(n))
        } else {
            Diagonal::from_chord(n, p, q).map(EdgeLabel::Diagonal)
        }
    }
}

/// Serialized as its canonical arc.
impl Serialize for Diagonal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.arc().serialize(s)
    }
}

impl Serialize for EdgeLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Side(i) => write!(f, "e{i}"),
            EdgeLabel::Diagonal(d) => d.fmt(f),
        }
    }
}

/// A triangle with vertices `a < b < c`. Edges are `(a,b)`, `(b,c)`, `(a,c)`;
/// each comes with the arc of sides it cuts off on the far side from the triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub edges: [EdgeLabel; 3],
    pub arcs: [CyclicInterval; 3],
}

impl Triangle {
    fn new(n: usize, a: usize, b: usize, c: usize) -> Self {
        let edges = [
            EdgeLabel::between(n, a, b).unwrap(),
            EdgeLabel::between(n, b, c).unwrap(),
            EdgeLabel::between(n, a, c).unwrap(),
        ];
        let arcs = [
            CyclicInterval::between_vertices(n, a, b),
            CyclicInterval::between_vertices(n, b, c),
            CyclicInterval::between_vertices(n, c, a),
        ];
        Triangle { vertices: [a, b, c], edges, arcs }
    }

    pub fn has_edge(&self, e: &EdgeLabel) -> bool {
        self.edges.contains(e)
    }
}

/// `n` and a sorted list of `n-3` pairwise non-crossing diagonals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangulation {
    n: usize,
    diagonals: Vec<Diagonal>,
}

impl Triangulation {
    pub fn new(n: usize, diagonals: Vec<Diagonal>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSize(n));
        }
        let mut diagonals = diagonals;
        diagonals.sort_unstable();
        diagonals.dedup();
        if diagonals.len() != n - 3 {
            return Err(Error::InvalidArgument(format!(
                "a triangulation of a {n}-gon needs {} distinct diagonals, got {}",
                n - 3,
                diagonals.len()
            )));
        }
        if let Some(d) = diagonals.iter().find(|d| d.n != n) {
            return Err(Error::InvalidArgument(format!("{d} belongs to a {}-gon", d.n)));
        }
        for (i, d) in diagonals.iter().enumerate() {
            if let Some(e) = diagonals[i + 1..].iter().find(|e| d.crosses(e)) {
                return Err(Error::InvalidArgument(format!("{d} crosses {e}")));
            }
        }
        Ok(Triangulation { n, diagonals })
    }

    pub fn from_arcs(n: usize, arcs: &[Vec<usize>]) -> Result<Self> {
        let ds = arcs
            .iter()
            .map(|a| Diagonal::from_arc(n, a))
            .collect::<Result<Vec<_>>>()?;
        Triangulation::new(n, ds)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Diagonals in canonical order; position `α-1` holds `d_α`.
    pub fn diagonals(&self) -> &[Diagonal] {
        &self.diagonals
    }

    pub fn index_of(&self, d: &Diagonal) -> Option<usize> {
        self.diagonals.binary_search(d).ok()
    }

    pub fn contains(&self, d: &Diagonal) -> bool {
        self.index_of(d).is_some()
    }

    fn has_edge(&self, p: usize, q: usize) -> bool {
        match EdgeLabel::between(self.n, p, q) {
            Ok(EdgeLabel::Side(_)) => true,
            Ok(EdgeLabel::Diagonal(d)) => self.contains(&d),
            Err(_) => false,
        }
    }

    /// The `n-2` triangles, ordered by vertex triple.
    pub fn triangles(&self) -> Vec<Triangle> {
        let n = self.n;
        let mut out = Vec::with_capacity(n - 2);
        for a in 0..n {
            for b in a + 1..n {
                if !self.has_edge(a, b) {
                    continue;
                }
                for c in b + 1..n {
                    if self.has_edge(b, c) && self.has_edge(a, c) {
                        out.push(Triangle::new(n, a, b, c));
                    }
                }
            }
        }
        out
    }

    pub fn arcs(&self) -> Vec<Vec<usize>> {
        self.diagonals.iter().map(Diagonal::arc).collect()
    }
}

impl fmt::Display for Triangulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} [", self.n)?;
        for (k, d) in self.diagonals.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{")?;
            for (j, i) in d.arc().iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{i}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangulationJson {
    n: usize,
    diagonals: Vec<Vec<usize>>,
}

impl Serialize for Triangulation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TriangulationJson { n: self.n, diagonals: self.arcs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Triangulation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TriangulationJson::deserialize(d)?;
        Triangulation::from_arcs(j.n, &j.diagonals).map_err(serde::de::Error::custom)
    }
}

/// Diagonals `{1..α+1}` for `α = 1..n-3`.
pub fn caterpillar(n: usize) -> Result<Triangulation> {
    if n < 3 {
        return Err(Error::InvalidSize(n));
    }
    let ds = (1..=n.saturating_sub(3))
        .map(|a| Diagonal { lo: 1, hi: a + 1, n })
        .collect();
    Triangulation::new(n, ds)
}

pub fn enumerate_triangulations(n: usize) -> Result<Vec<Triangulation>> {
    enumerate_triangulations_with_limit(n, DEFAULT_MAX_N)
}

/// Every triangulation of the n-gon, sorted by their canonical arc lists.
pub fn enumerate_triangulations_with_limit(n: usize, max_n: usize) -> Result<Vec<Triangulation>> {
    if n < 3 {
        return Err(Error::InvalidSize(n));
    }
    if n > max_n {
        return Err(Error::ResourceLimit(format!(
            "enumerating triangulations of a {n}-gon exceeds the limit n <= {max_n}"
        )));
    }
    let mut memo = HashMap::new();
    let mut out: Vec<Triangulation> = sub_triangulations(n, 0, n - 1, &mut memo)
        .into_iter()
        .map(|mut ds| {
            ds.sort_unstable();
            Triangulation { n, diagonals: ds }
        })
        .collect();
    out.sort();
    Ok(out)
}

// Triangulations of the sub-polygon on vertices lo..=hi, whose base edge (lo, hi)
// is already present.
fn sub_triangulations(
    n: usize,
    lo: usize,
    hi: usize,
    memo: &mut HashMap<(usize, usize), Vec<Vec<Diagonal>>>,
) -> Vec<Vec<Diagonal>> {
    if hi - lo < 2 {
        return vec![Vec::new()];
    }
    if let Some(v) = memo.get(&(lo, hi)) {
        return v.clone();
    }
    let mut out = Vec::new();
    for apex in lo + 1..hi {
        let left = sub_triangulations(n, lo, apex, memo);
        let right = sub_triangulations(n, apex, hi, memo);
        for l in &left {
            for r in &right {
                let mut ds = Vec::with_capacity(l.len() + r.len() + 2);
                ds.extend_from_slice(l);
                ds.extend_from_slice(r);
                if apex - lo >= 2 {
                    ds.push(Diagonal::from_chord(n, lo, apex).unwrap());
                }
                if hi - apex >= 2 {
                    ds.push(Diagonal::from_chord(n, apex, hi).unwrap());
                }
                out.push(ds);
            }
        }
    }
    memo.insert((lo, hi), out.clone());
    out
}

/// The dual trivalent tree: one internal vertex per triangle, leaves `e_1..e_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivalentTree {
    n: usize,
    triangles: Vec<Triangle>,
    leaf_vertex: Vec<usize>,
    internal_edges: Vec<(Diagonal, usize, usize)>,
}

impl TrivalentTree {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Internal vertices, one per triangle.
    pub fn vertices(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Leaf labels in cyclic order.
    pub fn leaves(&self) -> Vec<EdgeLabel> {
        (1..=self.n).map(EdgeLabel::Side).collect()
    }

    /// Internal vertex carrying leaf `e_i`.
    pub fn leaf_vertex(&self, i: usize) -> usize {
        self.leaf_vertex[i - 1]
    }

    /// `(d, v, w)` for each diagonal `d` joining internal vertices `v` and `w`.
    pub fn internal_edges(&self) -> &[(Diagonal, usize, usize)] {
        &self.internal_edges
    }

    pub fn degree(&self, v: usize) -> usize {
        let leaves = self.leaf_vertex.iter().filter(|&&w| w == v).count();
        let inner = self
            .internal_edges
            .iter()
            .filter(|(_, a, b)| *a == v || *b == v)
            .count();
        leaves + inner
    }

    /// The two triangles on either side of `d`.
    pub fn adjacent_triangles(&self, d: &Diagonal) -> Option<(usize, usize)> {
        self.internal_edges
            .iter()
            .find(|(e, _, _)| e == d)
            .map(|&(_, a, b)| (a, b))
    }
}

pub fn dual_tree(t: &Triangulation) -> TrivalentTree {
    let n = t.n;
    let triangles = t.triangles();
    let mut leaf_vertex = vec![usize::MAX; n];
    let mut internal_edges = Vec::new();
    let mut seen: HashMap<Diagonal, usize> = HashMap::new();
    for (k, tri) in triangles.iter().enumerate() {
        for e in &tri.edges {
            match e {
                EdgeLabel::Side(i) => leaf_vertex[i - 1] = k,
                EdgeLabel::Diagonal(d) => {
                    if let Some(j) = seen.remove(d) {
                        internal_edges.push((*d, j, k));
                    } else {
                        seen.insert(*d, k);
                    }
                }
            }
        }
    }
    debug_assert!(seen.is_empty());
    internal_edges.sort();
    TrivalentTree { n, triangles, leaf_vertex, internal_edges }
}

/// Diagonals on the tree path between leaves `e_i` and `e_j`.
pub fn leaf_path(tree: &TrivalentTree, i: usize, j: usize) -> Result<BTreeSet<Diagonal>> {
    let n = tree.n;
    if i == j || !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::InvalidArgument(format!("leaf pair ({i}, {j}) in a {n}-gon")));
    }
    let (src, dst) = (tree.leaf_vertex(i), tree.leaf_vertex(j));
    let mut prev: Vec<Option<(usize, Diagonal)>> = vec![None; tree.triangles.len()];
    let mut visited = vec![false; tree.triangles.len()];
    let mut queue = VecDeque::from([src]);
    visited[src] = true;
    while let Some(v) = queue.pop_front() {
        if v == dst {
            break;
        }
        for &(d, a, b) in &tree.internal_edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !visited[w] {
                visited[w] = true;
                prev[w] = Some((v, d));
                queue.push_back(w);
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut v = dst;
    while let Some((u, d)) = prev[v] {
        out.insert(d);
        v = u;
    }
    Ok(out)
}

/// A flip of `removed` to `inserted` inside the quadrilateral with vertices
/// `quad = [p, x, q, y]` in cyclic order, where `removed = (p, q)` and
/// `inserted = (x, y)`. Side `a_k` joins `quad[k-1]` to `quad[k]`, so
/// `removed = a_1 + a_2` and `inserted = a_2 + a_3` as oriented paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadMove {
    pub removed: Diagonal,
    pub inserted: Diagonal,
    pub quad: [usize; 4],
    pub sides: [EdgeLabel; 4],
    /// `arcs[k]` is the set of polygon sides cut off by `a_{k+1}`, away from the quadrilateral.
    pub arcs: [CyclicInterval; 4],
}

impl WhiteheadMove {
    pub fn reverse(&self) -> WhiteheadMove {
        // Re-anchor at the inserted diagonal: (x, q, y, p) keeps the cyclic order.
        let [p, x, q, y] = self.quad;
        let quad = if x < y { [x, q, y, p] } else { [y, p, x, q] };
        build_move(self.removed.n, quad)
    }
}

fn build_move(n: usize, quad: [usize; 4]) -> WhiteheadMove {
    let [p, x, q, y] = quad;
    let side = |a: usize, b: usize| EdgeLabel::between(n, a, b).unwrap();
    WhiteheadMove {
        removed: Diagonal::from_chord(n, p, q).unwrap(),
        inserted: Diagonal::from_chord(n, x, y).unwrap(),
        quad,
        sides: [side(p, x), side(x, q), side(q, y), side(y, p)],
        arcs: [
            CyclicInterval::between_vertices(n, p, x),
            CyclicInterval::between_vertices(n, x, q),
            CyclicInterval::between_vertices(n, q, y),
            CyclicInterval::between_vertices(n, y, p),
        ],
    }
}

pub fn whitehead_move(t: &Triangulation, d: &Diagonal) -> Result<(Triangulation, WhiteheadMove)> {
    let idx = t
        .index_of(d)
        .ok_or_else(|| Error::NotFound(format!("{d} is not a diagonal of {t}")))?;
    let (p, q) = d.chord();
    let apexes: Vec<usize> = t
        .triangles()
        .iter()
        .filter(|tri| tri.vertices.contains(&p) && tri.vertices.contains(&q))
        .map(|tri| *tri.vertices.iter().find(|&&v| v != p && v != q).unwrap())
        .collect();
    let (x, y) = match apexes[..] {
        [a, b] if p < a && a < q => (a, b),
        [a, b] => (b, a),
        _ => return Err(Error::Invariant(format!("{d} does not border two triangles"))),
    };
    let mv = build_move(t.n, [p, x, q, y]);
    let mut ds = t.diagonals.clone();
    ds[idx] = mv.inserted;
    ds.sort_unstable();
    Ok((Triangulation { n: t.n, diagonals: ds }, mv))
}

/// All triangulations one flip away, with the moves, in diagonal order.
pub fn neighbours(t: &Triangulation) -> Vec<(Triangulation, WhiteheadMove)> {
    t.diagonals
        .iter()
        .map(|d| whitehead_move(t, d).expect("diagonal of t"))
        .collect()
}

/// A shortest flip sequence from `t1` to `t2` (breadth-first search).
pub fn flip_path(t1: &Triangulation, t2: &Triangulation) -> Result<Vec<WhiteheadMove>> {
    if t1.n != t2.n {
        return Err(Error::InvalidArgument(format!(
            "triangulations of a {}-gon and a {}-gon",
            t1.n, t2.n
        )));
    }
    let mut prev: HashMap<Triangulation, Option<(Triangulation, WhiteheadMove)>> = HashMap::new();
    prev.insert(t1.clone(), None);
    let mut queue = VecDeque::from([t1.clone()]);
    while let Some(t) = queue.pop_front() {
        if &t == t2 {
            break;
        }
        for (s, mv) in neighbours(&t) {
            if !prev.contains_key(&s) {
                prev.insert(s.clone(), Some((t.clone(), mv)));
                queue.push_back(s);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = t2.clone();
    while let Some(Some((from, mv))) = prev.get(&cur) {
        path.push(mv.clone());
        cur = from.clone();
    }
    if &cur != t1 {
        return Err(Error::Invariant("flip graph is disconnected".into()));
    }
    path.reverse();
    Ok(path)
}

/// Applies a flip sequence, checking that each move starts where the last ended.
pub fn apply_moves(t: &Triangulation, moves: &[WhiteheadMove]) -> Result<Triangulation> {
    let mut cur = t.clone();
    for mv in moves {
        let (next, actual) = whitehead_move(&cur, &mv.removed)?;
        if actual.inserted != mv.inserted {
            return Err(Error::InvalidArgument(format!(
                "flipping {} gives {}, not {}",
                mv.removed, actual.inserted, mv.inserted
            )));
        }
        cur = next;
    }
    Ok(cur)
}

/// A diagonal together with the arc chosen to represent it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StagedDiagonal {
    pub diagonal: Diagonal,
    pub arc: CyclicInterval,
}

/// Reindexes the diagonals so that `|I_1| = n-2` and, for `α < β`, either
/// `I_β ⊂ I_α` or the two arcs are disjoint.
pub fn stage_ordering(t: &Triangulation) -> Vec<StagedDiagonal> {
    let n = t.n;
    if t.diagonals.is_empty() {
        return Vec::new();
    }
    let first = t
        .diagonals
        .iter()
        .find(|d| d.arc_len() == n - 2)
        .map(|d| d.interval())
        .or_else(|| {
            t.diagonals
                .iter()
                .find(|d| d.arc_len() == 2)
                .map(|d| d.interval().complement())
        })
        .expect("every triangulation has an ear");
    let mut staged: Vec<StagedDiagonal> = t
        .diagonals
        .iter()
        .map(|&d| {
            let iv = d.interval();
            let arc = if iv == first || iv.complement() == first {
                first
            } else if iv.is_subset_of(&first) {
                iv
            } else {
                iv.complement()
            };
            StagedDiagonal { diagonal: d, arc }
        })
        .collect();
    staged.sort_by(|a, b| {
        b.arc
            .len()
            .cmp(&a.arc.len())
            .then_with(|| a.diagonal.cmp(&b.diagonal))
    });
    staged
}

/// `true` when every later arc is nested in or disjoint from every earlier one.
pub fn is_nested_order(staged: &[StagedDiagonal]) -> bool {
    staged.iter().enumerate().all(|(a, s)| {
        staged[a + 1..]
            .iter()
            .all(|t| t.arc.is_subset_of(&s.arc) || t.arc.is_disjoint_from(&s.arc))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arcs_of(t: &Triangulation) -> Vec<Vec<usize>> {
        t.arcs()
    }

    // All maximal non-crossing diagonal sets, by brute force over subsets.
    fn brute_force_triangulations(n: usize) -> BTreeSet<Vec<Diagonal>> {
        let mut all = Vec::new();
        for p in 0..n {
            for q in p + 2..n {
                if let Ok(d) = Diagonal::from_chord(n, p, q) {
                    all.push(d);
                }
            }
        }
        let m = all.len();
        let crossing: Vec<u32> = (0..m)
            .map(|i| (0..m).filter(|&j| all[i].crosses(&all[j])).fold(0, |acc, j| acc | 1 << j))
            .collect();
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << m) {
            let members: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
            if members.iter().any(|&i| crossing[i] & mask != 0) {
                continue;
            }
            let maximal = (0..m).all(|j| mask >> j & 1 == 1 || crossing[j] & mask != 0);
            if maximal {
                out.insert(members.iter().map(|&i| all[i]).collect());
            }
        }
        out
    }

    #[test]
    fn caterpillar_arcs() {
        assert_eq!(arcs_of(&caterpillar(4).unwrap()), vec![vec![1, 2]]);
        assert!(caterpillar(3).unwrap().diagonals().is_empty());
        assert_eq!(
            arcs_of(&caterpillar(6).unwrap()),
            vec![vec![1, 2], vec![1, 2, 3], vec![1, 2, 3, 4]]
        );
        assert_eq!(caterpillar(2), Err(Error::InvalidSize(2)));
    }

    #[test]
    fn arcs_are_canonicalized() {
        let d = Diagonal::from_arc(5, &[4, 5, 1]).unwrap();
        assert_eq!(d.arc(), vec![2, 3]);
        assert_eq!(Diagonal::from_arc(6, &[6, 1]).unwrap().arc(), vec![2, 3, 4, 5]);
        assert!(Diagonal::from_arc(5, &[1, 3]).is_err());
        assert!(Diagonal::from_arc(5, &[1]).is_err());
        assert!(Diagonal::from_arc(5, &[1, 2, 3, 4]).is_err());
    }

    #[test]
    fn counts_match_brute_force() {
        for n in 3..=8 {
            let fast: BTreeSet<Vec<Diagonal>> = enumerate_triangulations(n)
                .unwrap()
                .into_iter()
                .map(|t| t.diagonals)
                .collect();
            assert_eq!(fast, brute_force_triangulations(n), "n = {n}");
        }
        assert_eq!(enumerate_triangulations(4).unwrap().len(), 2);
        assert_eq!(enumerate_triangulations(5).unwrap().len(), 5);
        assert_eq!(enumerate_triangulations(3).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_is_sorted_and_limited() {
        let ts = enumerate_triangulations(6).unwrap();
        assert!(ts.windows(2).all(|w| arcs_of(&w[0]) < arcs_of(&w[1])));
        assert!(matches!(enumerate_triangulations(11), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn dual_tree_of_square() {
        let tree = dual_tree(&caterpillar(4).unwrap());
        assert_eq!(tree.vertices().len(), 2);
        assert_eq!(tree.leaf_vertex(1), tree.leaf_vertex(2));
        assert_eq!(tree.leaf_vertex(3), tree.leaf_vertex(4));
        assert_ne!(tree.leaf_vertex(1), tree.leaf_vertex(3));
    }

    #[test]
    fn dual_tree_of_caterpillar_five() {
        let tree = dual_tree(&caterpillar(5).unwrap());
        // e1, e2 hang off one end, e4, e5 off the other, e3 off the middle.
        assert_eq!(tree.leaf_vertex(1), tree.leaf_vertex(2));
        assert_eq!(tree.leaf_vertex(4), tree.leaf_vertex(5));
        let mid = tree.leaf_vertex(3);
        assert_eq!(tree.degree(mid), 3);
        assert_eq!(
            tree.internal_edges().iter().filter(|(_, a, b)| *a == mid || *b == mid).count(),
            2
        );
    }

    #[test]
    fn leaf_paths_in_caterpillar_five() {
        let t = caterpillar(5).unwrap();
        let tree = dual_tree(&t);
        assert!(leaf_path(&tree, 1, 2).unwrap().is_empty());
        let d = t.diagonals();
        assert_eq!(leaf_path(&tree, 1, 4).unwrap(), BTreeSet::from([d[0], d[1]]));
        assert!(leaf_path(&tree, 4, 5).unwrap().is_empty());
        assert!(leaf_path(&tree, 2, 2).is_err());
    }

    #[test]
    fn square_flip() {
        let t = caterpillar(4).unwrap();
        let (s, mv) = whitehead_move(&t, &t.diagonals()[0]).unwrap();
        assert_eq!(arcs_of(&s), vec![vec![2, 3]]);
        assert_eq!(mv.removed.arc(), vec![1, 2]);
        assert_eq!(mv.inserted.arc(), vec![2, 3]);
        let (back, _) = whitehead_move(&s, &s.diagonals()[0]).unwrap();
        assert_eq!(back, t);
        let missing = Diagonal::from_arc(4, &[2, 3]).unwrap();
        assert!(matches!(whitehead_move(&t, &missing), Err(Error::NotFound(_))));
    }

    #[test]
    fn quad_sides_add_up() {
        for t in enumerate_triangulations(7).unwrap() {
            for (_, mv) in neighbours(&t) {
                let [i1, i2, i3, i4] = mv.arcs;
                let sum12: BTreeSet<usize> = i1.indices().into_iter().chain(i2.indices()).collect();
                let sum23: BTreeSet<usize> = i2.indices().into_iter().chain(i3.indices()).collect();
                let d: BTreeSet<usize> = mv.removed.arc().into_iter().collect();
                let dc: BTreeSet<usize> = mv.inserted.interval().complement().indices().into_iter().collect();
                let di: BTreeSet<usize> = mv.inserted.arc().into_iter().collect();
                assert_eq!(sum12, d);
                assert!(sum23 == di || sum23 == dc);
                assert_eq!(i1.len() + i2.len() + i3.len() + i4.len(), 7);
                assert_eq!(mv.reverse().reverse(), mv);
                assert_eq!(mv.reverse().removed, mv.inserted);
            }
        }
    }

    #[test]
    fn example_pentagon_path_has_two_moves() {
        let g1 = Triangulation::from_arcs(5, &[vec![2, 3], vec![2, 3, 4]]).unwrap();
        let g2 = Triangulation::from_arcs(5, &[vec![1, 2], vec![4, 5]]).unwrap();
        let path = flip_path(&g1, &g2).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(apply_moves(&g1, &path).unwrap(), g2);
        assert!(flip_path(&g1, &g1).unwrap().is_empty());
        assert!(flip_path(&g1, &caterpillar(4).unwrap()).is_err());
    }

    #[test]
    fn flip_paths_reach_target() {
        for n in 4..=6 {
            let ts = enumerate_triangulations(n).unwrap();
            for a in &ts {
                for b in &ts {
                    let path = flip_path(a, b).unwrap();
                    assert_eq!(&apply_moves(a, &path).unwrap(), b);
                    assert_eq!(path.is_empty(), a == b);
                }
            }
        }
    }

    #[test]
    fn caterpillar_stage_order_is_reversed() {
        let t = caterpillar(6).unwrap();
        let staged = stage_ordering(&t);
        let order: Vec<Diagonal> = staged.iter().map(|s| s.diagonal).collect();
        let mut rev = t.diagonals().to_vec();
        rev.reverse();
        assert_eq!(order, rev);
        assert_eq!(staged[0].arc.len(), 4);
        assert_eq!(stage_ordering(&caterpillar(4).unwrap())[0].diagonal, caterpillar(4).unwrap().diagonals()[0]);
    }

    #[test]
    fn stage_orderings_are_nested() {
        for n in 4..=9 {
            for t in enumerate_triangulations(n).unwrap() {
                let staged = stage_ordering(&t);
                assert_eq!(staged[0].arc.len(), n - 2);
                assert!(is_nested_order(&staged), "{t}");
                let mut ds: Vec<Diagonal> = staged.iter().map(|s| s.diagonal).collect();
                ds.sort();
                assert_eq!(ds, t.diagonals());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let t = caterpillar(5).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":5,"diagonals":[[1,2],[1,2,3]]}"#);
        assert_eq!(serde_json::from_str::<Triangulation>(&s).unwrap(), t);
        let crossing = r#"{"n":5,"diagonals":[[1,2],[2,3]]}"#;
        assert!(serde_json::from_str::<Triangulation>(crossing).is_err());
        let extra = r#"{"n":4,"diagonals":[[1,2]],"x":1}"#;
        assert!(serde_json::from_str::<Triangulation>(extra).is_err());
    }

    fn any_triangulation(max_n: usize) -> impl Strategy<Value = Triangulation> {
        (3..=max_n).prop_flat_map(|n| {
            let ts = enumerate_triangulations(n).unwrap();
            (0..ts.len()).prop_map(move |k| ts[k].clone())
        })
    }

    proptest! {
        #[test]
        fn flips_are_involutions(t in any_triangulation(9), k in 0usize..8) {
            prop_assume!(!t.diagonals().is_empty());
            let d = t.diagonals()[k % t.diagonals().len()];
            let (s, mv) = whitehead_move(&t, &d).unwrap();
            let (back, _) = whitehead_move(&s, &mv.inserted).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn dual_tree_is_trivalent(t in any_triangulation(10)) {
            let tree = dual_tree(&t);
            let n = t.n();
            prop_assert_eq!(tree.vertices().len(), n - 2);
            prop_assert_eq!(tree.internal_edges().len(), n - 3);
            prop_assert_eq!(tree.leaves().len(), n);
            for v in 0..n - 2 {
                prop_assert_eq!(tree.degree(v), 3);
            }
        }

        #[test]
        fn leaf_path_matches_membership(t in any_triangulation(9)) {
            let tree = dual_tree(&t);
            let n = t.n();
            for i in 1..=n {
                for j in i + 1..=n {
                    let expected: BTreeSet<Diagonal> = t
                        .diagonals()
                        .iter()
                        .filter(|d| d.contains(i) != d.contains(j))
                        .copied()
                        .collect();
                    prop_assert_eq!(leaf_path(&tree, i, j).unwrap(), expected);
                }
            }
        }

        #[test]
        fn triangle_arcs_partition_sides(t in any_triangulation(10)) {
            for tri in t.triangles() {
                let mut all: Vec<usize> = tri.arcs.iter().flat_map(|a| a.indices()).collect();
                all.sort_unstable();
                prop_assert_eq!(all, (1..=t.n()).collect::<Vec<_>>());
            }
        }
    }
}
