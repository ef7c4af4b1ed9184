//! Exact rational polytopes given by halfspaces `ℓ(u) = ⟨v, u⟩ − τ ≥ 0`.
//!
//! The moment polytope of a triangulation lives in the frame
//! `(u_{e_1}, .., u_{e_{n-1}}, u_{d_1}, .., u_{d_{n-3}})`; the bending polytope for
//! fixed side lengths lives in the diagonal lengths `(u(d_1), .., u(d_{n-3}))`.

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

use itertools::Itertools;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{CyclicInterval, EdgeLabel, Triangulation};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{self, fmt_rat, int, Rat};

/// Largest dimension `ehrhart_volume` accepts by default.
pub const DEFAULT_MAX_DIM: usize = 8;

/// `ℓ(u) = ⟨v, u⟩ − τ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineForm {
    #[serde(with = "rational::vec")]
    pub v: Vec<Rat>,
    #[serde(with = "rational")]
    pub tau: Rat,
}

impl AffineForm {
    pub fn new(v: Vec<Rat>, tau: Rat) -> Self {
        AffineForm { v, tau }
    }

    pub fn zero(dim: usize) -> Self {
        AffineForm { v: vec![Rat::zero(); dim], tau: Rat::zero() }
    }

    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = AffineForm::zero(dim);
        f.v[i] = Rat::one();
        f
    }

    pub fn constant(dim: usize, c: Rat) -> Self {
        AffineForm { v: vec![Rat::zero(); dim], tau: -c }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// The constant term `−τ`.
    pub fn offset(&self) -> Rat {
        -self.tau
    }

    /// `⟨v, u⟩` with the given variable names, e.g. `u_e1 - 2*u_d1`.
    pub fn format_linear(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (c, name) in self.v.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = if mag.is_one() { name.clone() } else { format!("{}*{name}", fmt_rat(&mag)) };
            match (out.is_empty(), c.is_negative()) {
                (true, true) => out.push_str(&format!("-{body}")),
                (true, false) => out.push_str(&body),
                (false, true) => out.push_str(&format!(" - {body}")),
                (false, false) => out.push_str(&format!(" + {body}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// `ℓ(u)` written out, e.g. `u_e1 - u_d1 + 3`.
    pub fn format(&self, names: &[String]) -> String {
        let mut out = self.format_linear(names);
        let c = -self.tau;
        if !c.is_zero() {
            if out == "0" {
                return fmt_rat(&c);
            }
            let sign = if c.is_negative() { '-' } else { '+' };
            out.push_str(&format!(" {sign} {}", fmt_rat(&c.abs())));
        }
        out
    }

    pub fn eval(&self, u: &[Rat]) -> Rat {
        debug_assert_eq!(u.len(), self.v.len());
        self.v.iter().zip(u).map(|(a, b)| a * b).sum::<Rat>() - self.tau
    }

    pub fn eval_int(&self, u: &[i64]) -> Rat {
        self.v.iter().zip(u).map(|(a, &b)| a * int(b)).sum::<Rat>() - self.tau
    }

    /// `ℓ ∘ inner`, where `inner[j]` gives coordinate `j` as a form in new variables.
    pub fn compose(&self, inner: &[AffineForm]) -> AffineForm {
        assert_eq!(inner.len(), self.v.len());
        let dim = inner.first().map_or(0, AffineForm::dim);
        let mut out = AffineForm::constant(dim, -self.tau);
        for (c, f) in self.v.iter().zip(inner) {
            if !c.is_zero() {
                out = &out + &(f * *c);
            }
        }
        out
    }

    /// All coefficients and the constant are integers.
    pub fn is_integral(&self) -> bool {
        self.tau.is_integer() && self.v.iter().all(Rat::is_integer)
    }

    pub fn is_constant(&self) -> bool {
        self.v.iter().all(Zero::is_zero)
    }

    /// Positive rescaling with coprime integral coefficients, or `None` for a constant form.
    pub fn primitive(&self) -> Option<AffineForm> {
        if self.is_constant() {
            return None;
        }
        let l = rational::lcm_denominators(&self.v);
        let g = self
            .v
            .iter()
            .map(|c| (c * Rat::from_integer(l)).to_integer())
            .fold(0i128, |acc, x| acc.gcd(&x));
        let s = Rat::new(l, g);
        Some(self * s)
    }

    /// Integer row `(a, b)` with `a·u + b ≥ 0` equivalent to `ℓ(u) ≥ 0`.
    fn integer_row(&self) -> (Vec<i64>, i64) {
        let l = rational::lcm_denominators(self.v.iter().chain(std::iter::once(&self.tau)));
        let scale = Rat::from_integer(l);
        let a = self.v.iter().map(|c| to_i64(c * scale)).collect();
        (a, to_i64(-self.tau * scale))
    }
}

fn to_i64(q: Rat) -> i64 {
    i64::try_from(q.to_integer()).expect("integer halfspace coefficient fits in i64")
}

impl Add for &AffineForm {
    type Output = AffineForm;
    fn add(self, o: &AffineForm) -> AffineForm {
        assert_eq!(self.v.len(), o.v.len());
        AffineForm {
            v: self.v.iter().zip(&o.v).map(|(a, b)| a + b).collect(),
            tau: self.tau + o.tau,
        }
    }
}

impl Sub for &AffineForm {
    type Output = AffineForm;
    fn sub(self, o: &AffineForm) -> AffineForm {
        self + &(-o)
    }
}

impl Neg for &AffineForm {
    type Output = AffineForm;
    fn neg(self) -> AffineForm {
        AffineForm { v: self.v.iter().map(|a| -a).collect(), tau: -self.tau }
    }
}

impl Mul<Rat> for &AffineForm {
    type Output = AffineForm;
    fn mul(self, s: Rat) -> AffineForm {
        AffineForm { v: self.v.iter().map(|a| a * s).collect(), tau: self.tau * s }
    }
}

impl std::iter::Sum for AffineForm {
    fn sum<I: Iterator<Item = AffineForm>>(iter: I) -> AffineForm {
        let mut iter = iter.peekable();
        let dim = iter.peek().map_or(0, AffineForm::dim);
        iter.fold(AffineForm::zero(dim), |acc, f| &acc + &f)
    }
}

/// Coordinates `(u_{e_1}, .., u_{e_{n-1}}, u_{d_1}, .., u_{d_{n-3}})` for a triangulation,
/// with `d_α` the `α`-th diagonal in canonical order, and a fixed perimeter `|r|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateFrame {
    triangulation: Triangulation,
    perimeter: Rat,
}

impl CoordinateFrame {
    pub fn new(triangulation: Triangulation, perimeter: Rat) -> Self {
        CoordinateFrame { triangulation, perimeter }
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn perimeter(&self) -> Rat {
        self.perimeter
    }

    pub fn n(&self) -> usize {
        self.triangulation.n()
    }

    pub fn dim(&self) -> usize {
        2 * self.n() - 4
    }

    /// Position of `u_{e_i}`, `1 <= i < n`.
    pub fn side_index(&self, i: usize) -> usize {
        assert!(i >= 1 && i < self.n());
        i - 1
    }

    /// Position of `u_{d_α}` for the diagonal at position `alpha` (0-based).
    pub fn diagonal_index(&self, alpha: usize) -> usize {
        self.n() - 1 + alpha
    }

    pub fn variable_names(&self) -> Vec<String> {
        let n = self.n();
        (1..n)
            .map(|i| format!("u_e{i}"))
            .chain((1..=n - 3).map(|a| format!("u_d{a}")))
            .collect()
    }

    /// The length coordinate `u(a)` as an affine form in the frame.
    pub fn length_form(&self, a: &EdgeLabel) -> Result<AffineForm> {
        let n = self.n();
        let dim = self.dim();
        match *a {
            EdgeLabel::Side(i) if i >= 1 && i < n => {
                Ok(&AffineForm::coordinate(dim, self.side_index(i)) * rational::half())
            }
            EdgeLabel::Side(i) if i == n => {
                let sides: AffineForm = (1..n)
                    .map(|i| AffineForm::coordinate(dim, self.side_index(i)))
                    .sum();
                Ok(&AffineForm::constant(dim, self.perimeter) - &(&sides * rational::half()))
            }
            EdgeLabel::Side(i) => Err(Error::InvalidArgument(format!("no side e{i} in a {n}-gon"))),
            EdgeLabel::Diagonal(d) => {
                let alpha = self.triangulation.index_of(&d).ok_or_else(|| {
                    Error::InvalidArgument(format!("{d} is not a diagonal of {}", self.triangulation))
                })?;
                let half_sides: AffineForm = d
                    .arc()
                    .into_iter()
                    .map(|i| &AffineForm::coordinate(dim, self.side_index(i)) * rational::half())
                    .sum();
                Ok(&half_sides - &AffineForm::coordinate(dim, self.diagonal_index(alpha)))
            }
        }
    }

    /// `Σ_{i ∈ I} u(e_i)`.
    pub fn side_sum_form(&self, arc: &CyclicInterval) -> AffineForm {
        arc.indices()
            .into_iter()
            .map(|i| self.length_form(&EdgeLabel::Side(i)).unwrap())
            .fold(AffineForm::zero(self.dim()), |acc, f| &acc + &f)
    }
}

/// `u(b) + u(c) − u(long) ≥ 0` in the triangle with the given vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TriangleInequality {
    pub triangle: [usize; 3],
    pub long: EdgeLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<AffineForm>,
    origins: Vec<Option<TriangleInequality>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HRep {
    dim: usize,
    ineqs: Vec<AffineForm>,
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HRep { dim: self.dim, ineqs: self.halfspaces.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h = HRep::deserialize(d)?;
        Polytope::new(h.dim, h.ineqs).map_err(serde::de::Error::custom)
    }
}

impl Polytope {
    pub fn new(dim: usize, halfspaces: Vec<AffineForm>) -> Result<Self> {
        if let Some(f) = halfspaces.iter().find(|f| f.dim() != dim) {
            return Err(Error::InvalidArgument(format!(
                "halfspace of dimension {} in a polytope of dimension {dim}",
                f.dim()
            )));
        }
        let origins = vec![None; halfspaces.len()];
        Ok(Polytope { dim, halfspaces, origins })
    }

    /// The box `lo ≤ u ≤ hi`.
    pub fn cube(lo: &[Rat], hi: &[Rat]) -> Self {
        let dim = lo.len();
        let mut hs = Vec::new();
        for i in 0..dim {
            hs.push(&AffineForm::coordinate(dim, i) - &AffineForm::constant(dim, lo[i]));
            hs.push(&AffineForm::constant(dim, hi[i]) - &AffineForm::coordinate(dim, i));
        }
        Polytope::new(dim, hs).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[AffineForm] {
        &self.halfspaces
    }

    pub fn origins(&self) -> &[Option<TriangleInequality>] {
        &self.origins
    }

    pub fn contains(&self, u: &[Rat]) -> bool {
        self.halfspaces.iter().all(|f| !f.eval(u).is_negative())
    }

    pub fn contains_lattice_point(&self, u: &[i64]) -> bool {
        self.halfspaces.iter().all(|f| !f.eval_int(u).is_negative())
    }

    /// `{k·u : u ∈ P}` for `k > 0`.
    pub fn dilate(&self, k: Rat) -> Polytope {
        assert!(k.is_positive());
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|f| AffineForm { v: f.v.clone(), tau: f.tau * k })
            .collect();
        Polytope { dim: self.dim, halfspaces, origins: self.origins.clone() }
    }

    /// `{u + t : u ∈ P}`.
    pub fn translate(&self, t: &[Rat]) -> Polytope {
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|f| {
                let shift: Rat = f.v.iter().zip(t).map(|(a, b)| a * b).sum();
                AffineForm { v: f.v.clone(), tau: f.tau + shift }
            })
            .collect();
        Polytope { dim: self.dim, halfspaces, origins: self.origins.clone() }
    }

    // Columns spanning the row space of the coefficient matrix; fixing the
    // other coordinates to zero leaves a pointed polyhedron that is empty iff P is.
    fn pointed_columns(&self) -> Vec<usize> {
        let mut cols: Vec<Vec<Rat>> = (0..self.dim)
            .map(|j| self.halfspaces.iter().map(|f| f.v[j]).collect())
            .collect();
        let mut kept = Vec::new();
        let mut basis: Vec<Vec<Rat>> = Vec::new();
        for (j, col) in cols.drain(..).enumerate() {
            basis.push(col);
            if linalg::rank(&basis) == basis.len() {
                kept.push(j);
            } else {
                basis.pop();
            }
        }
        kept
    }

    /// Vertices in lexicographic order. Empty if P is empty or has a lineality space.
    pub fn vertices(&self) -> Vec<Vec<Rat>> {
        if self.dim == 0 {
            return if self.contains(&[]) { vec![vec![]] } else { vec![] };
        }
        if self.pointed_columns().len() < self.dim {
            return Vec::new();
        }
        self.basic_solutions(&(0..self.dim).collect::<Vec<_>>())
    }

    fn basic_solutions(&self, cols: &[usize]) -> Vec<Vec<Rat>> {
        let r = cols.len();
        let mut out = BTreeSet::new();
        for rows in (0..self.halfspaces.len()).combinations(r) {
            let a: Vec<Vec<Rat>> = rows
                .iter()
                .map(|&i| cols.iter().map(|&j| self.halfspaces[i].v[j]).collect())
                .collect();
            let b: Vec<Rat> = rows.iter().map(|&i| self.halfspaces[i].tau).collect();
            let Some(x) = linalg::solve(&a, &b) else {
                continue;
            };
            let mut u = vec![Rat::zero(); self.dim];
            for (&j, xj) in cols.iter().zip(x) {
                u[j] = xj;
            }
            if self.contains(&u) {
                out.insert(u);
            }
        }
        out.into_iter().collect()
    }

    pub fn is_empty(&self) -> bool {
        if self.dim == 0 {
            return !self.contains(&[]);
        }
        let cols = self.pointed_columns();
        if cols.is_empty() {
            return !self.contains(&vec![Rat::zero(); self.dim]);
        }
        self.basic_solutions(&cols).is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        if self.is_empty() || self.dim == 0 {
            return true;
        }
        if self.pointed_columns().len() < self.dim {
            return false;
        }
        // A pointed, nontrivial recession cone has an extreme ray on dim-1
        // independent tight constraints.
        let normals: Vec<&Vec<Rat>> = self.halfspaces.iter().map(|f| &f.v).collect();
        for rows in (0..normals.len()).combinations(self.dim - 1) {
            let a: Vec<Vec<Rat>> = rows.iter().map(|&i| normals[i].clone()).collect();
            let kernel = linalg::nullspace(&a, self.dim);
            if kernel.len() != 1 {
                continue;
            }
            let ray = &kernel[0];
            let dots: Vec<Rat> = normals
                .iter()
                .map(|v| v.iter().zip(ray).map(|(x, y)| x * y).sum())
                .collect();
            if dots.iter().all(|d| !d.is_negative()) || dots.iter().all(|d| !d.is_positive()) {
                return false;
            }
        }
        true
    }

    /// Drops duplicate and redundant halfspaces. Assumes P is bounded and full-dimensional.
    pub fn irredundant(&self) -> Polytope {
        let verts = self.vertices();
        let mut seen = BTreeSet::new();
        let mut halfspaces = Vec::new();
        let mut origins = Vec::new();
        for (f, o) in self.halfspaces.iter().zip(&self.origins) {
            let Some(p) = f.primitive() else {
                continue;
            };
            if !seen.insert(p) {
                continue;
            }
            let tight: Vec<&Vec<Rat>> = verts.iter().filter(|u| f.eval(u).is_zero()).collect();
            let Some((first, rest)) = tight.split_first() else {
                continue;
            };
            let diffs: Vec<Vec<Rat>> = rest
                .iter()
                .map(|u| u.iter().zip(first.iter()).map(|(a, b)| a - b).collect())
                .collect();
            if linalg::rank(&diffs) + 1 == self.dim {
                halfspaces.push(f.clone());
                origins.push(*o);
            }
        }
        Polytope { dim: self.dim, halfspaces, origins }
    }

    pub fn facet_count(&self) -> usize {
        self.irredundant().halfspaces.len()
    }

    fn enumerator(&self, scale: i64, verts: &[Vec<Rat>]) -> Enumerator {
        let rows: Vec<(Vec<i64>, i64)> = self
            .halfspaces
            .iter()
            .map(|f| {
                let (a, b) = f.integer_row();
                (a, b * scale)
            })
            .collect();
        let s = int(scale);
        let lo: Vec<i64> = (0..self.dim)
            .map(|j| verts.iter().map(|u| rational::ceil_i64(&(u[j] * s))).min().unwrap())
            .collect();
        let hi: Vec<i64> = (0..self.dim)
            .map(|j| verts.iter().map(|u| rational::floor_i64(&(u[j] * s))).max().unwrap())
            .collect();
        Enumerator::new(rows, lo, hi)
    }

    fn enumeration_vertices(&self) -> Result<Vec<Vec<Rat>>> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        if !self.is_bounded() {
            return Err(Error::Unbounded);
        }
        Ok(self.vertices())
    }

    /// `ℤ^N ∩ P` in lexicographic order.
    pub fn lattice_points(&self) -> Result<Vec<Vec<i64>>> {
        let verts = self.enumeration_vertices()?;
        if verts.is_empty() {
            return Ok(Vec::new());
        }
        if self.dim == 0 {
            return Ok(vec![vec![]]);
        }
        let mut out = Vec::new();
        self.enumerator(1, &verts).walk(&mut |prefix, lo, hi| {
            for x in lo..=hi {
                let mut p = prefix.to_vec();
                p.push(x);
                out.push(p);
            }
        });
        Ok(out)
    }

    pub fn lattice_count(&self) -> Result<u128> {
        self.lattice_count_dilated(1)
    }

    /// `|kP ∩ ℤ^N|` for an integer `k ≥ 1`.
    pub fn lattice_count_dilated(&self, k: i64) -> Result<u128> {
        let verts = self.enumeration_vertices()?;
        Ok(count_with(self, k, &verts))
    }

    pub fn ehrhart_volume(&self) -> Result<Rat> {
        self.ehrhart_volume_with_limit(DEFAULT_MAX_DIM)
    }

    /// Euclidean volume from the leading Ehrhart coefficient of `D·P`, where
    /// `D` clears the vertex denominators.
    pub fn ehrhart_volume_with_limit(&self, max_dim: usize) -> Result<Rat> {
        let n = self.dim;
        if n > max_dim {
            return Err(Error::ResourceLimit(format!(
                "Ehrhart volume in dimension {n} exceeds the limit {max_dim}"
            )));
        }
        let verts = self.enumeration_vertices()?;
        if verts.is_empty() {
            return Ok(Rat::zero());
        }
        let d = rational::lcm_denominators(verts.iter().flatten());
        let d = i64::try_from(d).map_err(|_| Error::ResourceLimit("vertex denominators".into()))?;
        let mut diff = 0i128;
        let mut binom = 1i128;
        for k in 0..=n {
            // binom = C(n, k)
            let count = if k == 0 { 1 } else { count_with(self, k as i64 * d, &verts) as i128 };
            let sign = if (n - k).is_multiple_of(2) { 1 } else { -1 };
            diff += sign * binom * count;
            binom = binom * (n - k) as i128 / (k + 1) as i128;
        }
        let factorial: i128 = (1..=n as i128).product();
        let dn = (d as i128).pow(n as u32);
        Ok(Rat::new(diff, factorial * dn))
    }
}

fn count_with(p: &Polytope, k: i64, verts: &[Vec<Rat>]) -> u128 {
    if verts.is_empty() {
        return 0;
    }
    if p.dim == 0 {
        return 1;
    }
    let mut total = 0u128;
    p.enumerator(k, verts).walk(&mut |_, lo, hi| total += (hi - lo + 1) as u128);
    total
}

// Depth-first lattice enumeration. At depth k the remaining coordinates are
// relaxed to their bounding box, which turns every halfspace into a bound on
// u_k; in the last coordinate the bounds are exact.
struct Enumerator {
    rows: Vec<(Vec<i64>, i64)>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    slack: Vec<Vec<i64>>,
}

impl Enumerator {
    fn new(rows: Vec<(Vec<i64>, i64)>, lo: Vec<i64>, hi: Vec<i64>) -> Self {
        let dim = lo.len();
        let slack = (0..dim)
            .map(|k| {
                rows.iter()
                    .map(|(a, _)| {
                        (k + 1..dim)
                            .map(|i| (a[i] * lo[i]).max(a[i] * hi[i]))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Enumerator { rows, lo, hi, slack }
    }

    fn walk(&self, leaf: &mut dyn FnMut(&[i64], i64, i64)) {
        if self.lo.iter().zip(&self.hi).any(|(l, h)| l > h) {
            return;
        }
        let mut sums: Vec<i64> = self.rows.iter().map(|(_, b)| *b).collect();
        let mut prefix = Vec::with_capacity(self.lo.len());
        self.descend(0, &mut sums, &mut prefix, leaf);
    }

    fn range(&self, k: usize, sums: &[i64]) -> Option<(i64, i64)> {
        let (mut lo, mut hi) = (self.lo[k], self.hi[k]);
        for (j, (a, _)) in self.rows.iter().enumerate() {
            let s = sums[j] + self.slack[k][j];
            let c = a[k];
            if c > 0 {
                lo = lo.max(ceil_div(-s, c));
            } else if c < 0 {
                hi = hi.min(floor_div(s, -c));
            } else if s < 0 {
                return None;
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    fn descend(
        &self,
        k: usize,
        sums: &mut [i64],
        prefix: &mut Vec<i64>,
        leaf: &mut dyn FnMut(&[i64], i64, i64),
    ) {
        let Some((lo, hi)) = self.range(k, sums) else {
            return;
        };
        if k + 1 == self.lo.len() {
            leaf(prefix, lo, hi);
            return;
        }
        for (j, (a, _)) in self.rows.iter().enumerate() {
            sums[j] += a[k] * lo;
        }
        for x in lo..=hi {
            prefix.push(x);
            self.descend(k + 1, sums, prefix, leaf);
            prefix.pop();
            for (j, (a, _)) in self.rows.iter().enumerate() {
                sums[j] += a[k];
            }
        }
        for (j, (a, _)) in self.rows.iter().enumerate() {
            sums[j] -= a[k] * (hi + 1);
        }
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    Integer::div_floor(&a, &b)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

pub fn length_form(frame: &CoordinateFrame, a: &EdgeLabel) -> Result<AffineForm> {
    frame.length_form(a)
}

/// Three triangle inequalities per triangle, in frame coordinates.
pub fn moment_polytope(t: &Triangulation, perimeter: Rat) -> Polytope {
    let frame = CoordinateFrame::new(t.clone(), perimeter);
    let mut halfspaces = Vec::new();
    let mut origins = Vec::new();
    for tri in t.triangles() {
        let forms: Vec<AffineForm> = tri
            .edges
            .iter()
            .map(|e| frame.length_form(e).expect("edge of t"))
            .collect();
        for long in 0..3 {
            let others = &forms[(long + 1) % 3] + &forms[(long + 2) % 3];
            halfspaces.push(&others - &forms[long]);
            origins.push(Some(TriangleInequality { triangle: tri.vertices, long: tri.edges[long] }));
        }
    }
    Polytope { dim: frame.dim(), halfspaces, origins }
}

/// Checks `r_i > 0` and `r_i < |r| − r_i`, returning `|r|`.
pub fn check_side_lengths(n: usize, r: &[Rat]) -> Result<Rat> {
    if r.len() != n {
        return Err(Error::InvalidArgument(format!("{} side lengths for a {n}-gon", r.len())));
    }
    let total: Rat = r.iter().sum();
    for (i, ri) in r.iter().enumerate() {
        if !ri.is_positive() || *ri * int(2) >= total {
            return Err(Error::EmptySpace(format!(
                "side r_{} = {ri} violates 0 < r_i < |r| - r_i",
                i + 1
            )));
        }
    }
    Ok(total)
}

/// The affine embedding of diagonal lengths `x` into the frame at side lengths `r`:
/// `u_{e_i} = 2 r_i`, `u_{d_α} = −x_α + Σ_{i ∈ I_α} r_i`.
pub fn bending_embedding(t: &Triangulation, r: &[Rat]) -> Vec<AffineForm> {
    let n = t.n();
    let m = n - 3;
    let mut out: Vec<AffineForm> = (1..n).map(|i| AffineForm::constant(m, r[i - 1] * int(2))).collect();
    for (alpha, d) in t.diagonals().iter().enumerate() {
        let s: Rat = d.arc().iter().map(|&i| r[i - 1]).sum();
        out.push(&AffineForm::constant(m, s) - &AffineForm::coordinate(m, alpha));
    }
    out
}

/// The slice of the moment polytope at `u(e_i) = r_i`, in diagonal lengths.
pub fn bending_polytope(t: &Triangulation, r: &[Rat]) -> Result<Polytope> {
    let total = check_side_lengths(t.n(), r)?;
    let moment = moment_polytope(t, total);
    let emb = bending_embedding(t, r);
    let halfspaces = moment.halfspaces.iter().map(|f| f.compose(&emb)).collect();
    Ok(Polytope { dim: t.n() - 3, halfspaces, origins: moment.origins })
}

pub fn lattice_points(p: &Polytope) -> Result<Vec<Vec<i64>>> {
    p.lattice_points()
}

pub fn ehrhart_volume(p: &Polytope) -> Result<Rat> {
    p.ehrhart_volume()
}

pub fn vertices(p: &Polytope) -> Vec<Vec<Rat>> {
    p.vertices()
}

/// Frame image of the torus fixed point `p_kl` at perimeter `|r|`: the polygon
/// folded onto the two sides `e_k`, `e_l` of length `|r|/2`.
pub fn fixed_point_image(t: &Triangulation, k: usize, l: usize, perimeter: Rat) -> Vec<Rat> {
    let n = t.n();
    let mut u: Vec<Rat> = (1..n)
        .map(|i| if i == k || i == l { perimeter } else { Rat::zero() })
        .collect();
    u.extend(t.diagonals().iter().map(|d| {
        if d.contains(k) && d.contains(l) {
            perimeter
        } else {
            Rat::zero()
        }
    }));
    u
}

/// Images of all `p_kl`, `k < l`, at `|r| = n`, ordered by `(k, l)`.
pub fn predicted_vertices(t: &Triangulation) -> Vec<Vec<i64>> {
    let n = t.n();
    (1..=n)
        .tuple_combinations()
        .map(|(k, l)| {
            fixed_point_image(t, k, l, int(n as i64))
                .iter()
                .map(|q| q.to_integer() as i64)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReflexivityReport {
    pub reflexive: bool,
    /// The shift point `u_{e_i} = 2`, `u_{d_α} = |I_α| − 1`.
    pub interior_point: Vec<i64>,
    pub integral_vertices: bool,
    pub facets: usize,
    /// Facets whose primitive form does not take the value 1 at the interior point.
    pub bad_facets: usize,
    pub interior_lattice_points: usize,
}

/// Reflexivity of the moment polytope at `|r| = n` about its shift point.
pub fn reflexivity_check(t: &Triangulation) -> Result<ReflexivityReport> {
    let n = t.n();
    let p = moment_polytope(t, int(n as i64)).irredundant();
    let mut c: Vec<i64> = vec![2; n - 1];
    c.extend(t.diagonals().iter().map(|d| d.arc_len() as i64 - 1));
    let integral_vertices = p.vertices().iter().flatten().all(Rat::is_integer);
    let forms: Vec<AffineForm> = p.halfspaces.iter().filter_map(AffineForm::primitive).collect();
    let bad_facets = forms.iter().filter(|f| f.eval_int(&c) != Rat::one()).count();
    let interior: Vec<Vec<i64>> = p
        .lattice_points()?
        .into_iter()
        .filter(|u| forms.iter().all(|f| f.eval_int(u).is_positive()))
        .collect();
    let reflexive = integral_vertices && bad_facets == 0 && interior == [c.clone()];
    Ok(ReflexivityReport {
        reflexive,
        interior_point: c,
        integral_vertices,
        facets: forms.len(),
        bad_facets,
        interior_lattice_points: interior.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{caterpillar, enumerate_triangulations};
    use crate::rational::rat;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| int(x)).collect()
    }

    // Brute force over a box that is known to contain P.
    fn box_count(p: &Polytope, lo: i64, hi: i64) -> usize {
        let dim = p.dim();
        let mut count = 0;
        let mut u = vec![lo; dim];
        loop {
            if p.contains_lattice_point(&u) {
                count += 1;
            }
            let mut k = 0;
            while k < dim {
                u[k] += 1;
                if u[k] <= hi {
                    break;
                }
                u[k] = lo;
                k += 1;
            }
            if k == dim {
                return count;
            }
        }
    }

    #[test]
    fn length_forms_of_square() {
        let frame = CoordinateFrame::new(caterpillar(4).unwrap(), int(4));
        let h = rational::half();
        let z = Rat::zero();
        assert_eq!(
            frame.length_form(&EdgeLabel::Side(1)).unwrap(),
            AffineForm::new(vec![h, z, z, z], z)
        );
        assert_eq!(
            frame.length_form(&EdgeLabel::Side(4)).unwrap(),
            AffineForm::new(vec![-h, -h, -h, z], int(-4))
        );
        let d = caterpillar(4).unwrap().diagonals()[0];
        assert_eq!(
            frame.length_form(&EdgeLabel::Diagonal(d)).unwrap(),
            AffineForm::new(vec![h, h, z, int(-1)], z)
        );
        assert!(frame.length_form(&EdgeLabel::Side(5)).is_err());
    }

    #[test]
    fn triangle_polytope() {
        let p = moment_polytope(&caterpillar(3).unwrap(), int(3));
        assert_eq!(p.dim(), 2);
        assert_eq!(p.halfspaces().len(), 3);
        assert_eq!(p.vertices().len(), 3);
    }

    #[test]
    fn square_lattice_count_matches_box() {
        let p = moment_polytope(&caterpillar(4).unwrap(), int(4));
        assert_eq!(p.halfspaces().len(), 6);
        let fast = p.lattice_points().unwrap();
        assert_eq!(fast.len(), box_count(&p, 0, 4));
        assert!(fast.windows(2).all(|w| w[0] < w[1]));
        assert!(fast.iter().all(|u| p.contains_lattice_point(u)));
    }

    #[test]
    fn simple_shapes() {
        let seg = Polytope::cube(&ints(&[0]), &ints(&[1]));
        assert_eq!(seg.lattice_points().unwrap(), vec![vec![0], vec![1]]);
        assert_eq!(seg.vertices(), vec![ints(&[0]), ints(&[1])]);
        let square = Polytope::cube(&ints(&[0, 0]), &ints(&[1, 1]));
        assert_eq!(square.ehrhart_volume().unwrap(), int(1));
        let simplex = Polytope::new(
            2,
            vec![
                AffineForm::coordinate(2, 0),
                AffineForm::coordinate(2, 1),
                AffineForm::new(ints(&[-1, -1]), int(-1)),
            ],
        )
        .unwrap();
        assert_eq!(simplex.ehrhart_volume().unwrap(), rat(1, 2));
        let empty = Polytope::new(
            1,
            vec![AffineForm::new(ints(&[1]), int(1)), AffineForm::new(ints(&[-1]), int(0))],
        )
        .unwrap();
        assert!(empty.is_empty());
        assert!(empty.lattice_points().unwrap().is_empty());
        assert_eq!(empty.ehrhart_volume().unwrap(), int(0));
    }

    #[test]
    fn rational_volume_and_unbounded() {
        let half = Polytope::cube(&ints(&[0, 0]), &[rat(1, 2), rat(3, 2)]);
        assert_eq!(half.ehrhart_volume().unwrap(), rat(3, 4));
        let ray = Polytope::new(1, vec![AffineForm::coordinate(1, 0)]).unwrap();
        assert!(!ray.is_bounded());
        assert_eq!(ray.lattice_points(), Err(Error::Unbounded));
        let strip = Polytope::new(
            2,
            vec![AffineForm::coordinate(2, 0), AffineForm::new(ints(&[-1, 0]), int(-1))],
        )
        .unwrap();
        assert!(!strip.is_bounded());
        assert!(strip.vertices().is_empty());
        assert!(!strip.is_empty());
    }

    #[test]
    fn dimension_limit() {
        let p = Polytope::cube(&ints(&[0; 9]), &ints(&[1; 9]));
        assert!(matches!(p.ehrhart_volume(), Err(Error::ResourceLimit(_))));
        assert_eq!(p.ehrhart_volume_with_limit(9).unwrap(), int(1));
    }

    #[test]
    fn square_interval() {
        let t = caterpillar(4).unwrap();
        let r = ints(&[3, 1, 2, 3]);
        let p = bending_polytope(&t, &r).unwrap();
        // u(d) ranges over [max(|r1-r2|, |r3-r4|), min(r1+r2, r3+r4)] = [2, 4].
        assert_eq!(p.vertices(), vec![ints(&[2]), ints(&[4])]);
        assert!(matches!(bending_polytope(&t, &ints(&[1, 1, 1, 3])), Err(Error::EmptySpace(_))));
        assert!(bending_polytope(&t, &ints(&[1, 1, 1])).is_err());
    }

    #[test]
    fn pentagon_rectangle() {
        let g1 = Triangulation::from_arcs(5, &[vec![2, 3], vec![2, 3, 4]]).unwrap();
        let r = ints(&[2, 1, 4, 4, 4]);
        let p = bending_polytope(&g1, &r).unwrap().irredundant();
        assert_eq!(p.halfspaces().len(), 4);
        // [r3 - r2, r3 + r2] x [r5 - r1, r5 + r1]
        assert_eq!(
            p.vertices(),
            vec![ints(&[3, 2]), ints(&[3, 6]), ints(&[5, 2]), ints(&[5, 6])]
        );
        assert_eq!(p.ehrhart_volume().unwrap(), int(8));
    }

    #[test]
    fn pentagon_heptagon() {
        let t = caterpillar(5).unwrap();
        let r = [int(1), rat(9, 10), int(1), rat(11, 10), int(1)];
        let p = bending_polytope(&t, &r).unwrap();
        assert_eq!(p.facet_count(), 7);
        assert_eq!(p.vertices().len(), 7);
    }

    #[test]
    fn bending_is_the_moment_slice() {
        let r = [int(2), int(1), int(4), int(4), int(4)];
        for t in enumerate_triangulations(5).unwrap() {
            let moment = moment_polytope(&t, int(15));
            let bending = bending_polytope(&t, &r).unwrap();
            let emb = bending_embedding(&t, &r);
            for x in -1..=9 {
                for y in -1..=9 {
                    let pt = [rat(x, 1), rat(y, 1)];
                    let u: Vec<Rat> = emb.iter().map(|f| f.eval(&pt)).collect();
                    assert_eq!(bending.contains(&pt), moment.contains(&u));
                }
            }
        }
    }

    #[test]
    fn square_reflexive() {
        let rep = reflexivity_check(&caterpillar(4).unwrap()).unwrap();
        assert!(rep.reflexive);
        assert_eq!(rep.interior_point, vec![2, 2, 2, 1]);
        assert_eq!(rep.interior_lattice_points, 1);
    }

    #[test]
    fn fixed_points_of_square() {
        let t = caterpillar(4).unwrap();
        let pv = predicted_vertices(&t);
        assert_eq!(pv.len(), 6);
        assert_eq!(pv[0], vec![4, 4, 0, 4]);
        let p = moment_polytope(&t, int(4));
        assert!(pv.iter().all(|u| p.contains_lattice_point(u)));
        let verts: BTreeSet<Vec<i64>> = p
            .vertices()
            .iter()
            .map(|u| u.iter().map(|q| q.to_integer() as i64).collect())
            .collect();
        assert_eq!(verts, pv.into_iter().collect());
    }

    #[test]
    fn facet_forms_are_integral() {
        for n in 3..=7 {
            for t in enumerate_triangulations(n).unwrap() {
                let p = moment_polytope(&t, int(n as i64));
                for f in p.halfspaces() {
                    assert!(f.is_integral(), "{t}: {f:?}");
                }
                if n <= 6 {
                    assert!(p.is_bounded());
                }
            }
        }
    }

    #[test]
    fn hrep_json_round_trip() {
        let p = moment_polytope(&caterpillar(4).unwrap(), rat(9, 2));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with(r#"{"dim":4,"ineqs":[{"v":["#));
        assert!(s.contains(r#""tau":"-9/2""#) || s.contains(r#""tau":"9/2""#));
        let back: Polytope = serde_json::from_str(&s).unwrap();
        assert_eq!(back.halfspaces(), p.halfspaces());
    }

    proptest! {
        #[test]
        fn enumeration_matches_box_in_random_polygons(
            rows in prop::collection::vec((prop::collection::vec(-3i64..=3, 3), -4i64..=8), 1..6)
        ) {
            // Intersect random halfspaces with a box so the result stays bounded.
            let mut p = Polytope::cube(&ints(&[-2, -2, -2]), &ints(&[3, 3, 3])).halfspaces().to_vec();
            p.extend(rows.iter().map(|(v, b)| AffineForm::new(ints(v), int(-*b))));
            let p = Polytope::new(3, p).unwrap();
            prop_assert_eq!(p.lattice_count().unwrap() as usize, box_count(&p, -2, 3));
            for k in 1..=2 {
                let d = p.dilate(int(k));
                prop_assert_eq!(p.lattice_count_dilated(k).unwrap() as usize, box_count(&d, -2 * k, 3 * k));
            }
        }

        #[test]
        fn vertices_are_feasible_and_tight(
            rows in prop::collection::vec((prop::collection::vec(-3i64..=3, 2), -4i64..=8), 0..5)
        ) {
            let mut hs = Polytope::cube(&ints(&[-2, -2]), &ints(&[3, 3])).halfspaces().to_vec();
            hs.extend(rows.iter().map(|(v, b)| AffineForm::new(ints(v), int(-*b))));
            let p = Polytope::new(2, hs).unwrap();
            for u in p.vertices() {
                prop_assert!(p.contains(&u));
                let tight = p.halfspaces().iter().filter(|f| f.eval(&u).is_zero()).count();
                prop_assert!(tight >= 2);
            }
        }
    }
}
