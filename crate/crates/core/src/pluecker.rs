//! Tree-path weights on Plücker coordinates, the multi-parameter toric
//! degeneration of `Gr(2, n)` they define, its central fiber, torus fixed points
//! and singular strata.

use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::combinatorics::{dual_tree, leaf_path, whitehead_move, Diagonal, EdgeLabel, Triangulation};
use crate::error::{Error, Result};
use crate::polytope::fixed_point_image;
use crate::rational::{int, Rat};

/// `Z_{ij}`, `1 <= i < j <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PlueckerVar(pub usize, pub usize);

impl PlueckerVar {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == 0 || i >= j {
            return Err(Error::InvalidArgument(format!("Z_{{{i}{j}}} needs 1 <= i < j")));
        }
        Ok(PlueckerVar(i, j))
    }
}

impl fmt::Display for PlueckerVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 < 10 {
            write!(f, "Z{}{}", self.0, self.1)
        } else {
            write!(f, "Z{}_{}", self.0, self.1)
        }
    }
}

/// Doubled weights: `W[(i, j)][α] = 1` iff the dual-tree path from leaf `i` to
/// leaf `j` crosses `d_α`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightMatrix {
    n: usize,
    rows: Vec<Vec<u8>>,
}

impl WeightMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        // Row-major over pairs i < j.
        let n = self.n;
        (i - 1) * (2 * n - i) / 2 + (j - i - 1)
    }

    pub fn row(&self, z: PlueckerVar) -> &[u8] {
        &self.rows[self.slot(z.0, z.1)]
    }

    pub fn rows(&self) -> impl Iterator<Item = (PlueckerVar, &[u8])> {
        (1..=self.n)
            .tuple_combinations()
            .map(move |(i, j)| (PlueckerVar(i, j), self.row(PlueckerVar(i, j))))
    }
}

pub fn weight_matrix(t: &Triangulation) -> WeightMatrix {
    let n = t.n();
    let tree = dual_tree(t);
    let rows = (1..=n)
        .tuple_combinations()
        .map(|(i, j)| {
            let path = leaf_path(&tree, i, j).expect("distinct leaves");
            t.diagonals().iter().map(|d| u8::from(path.contains(d))).collect()
        })
        .collect();
    WeightMatrix { n, rows }
}

/// `sign * t^t_exp * Z_a * Z_b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlueckerTerm {
    pub sign: i8,
    pub vars: [PlueckerVar; 2],
    pub t_exp: Vec<u32>,
}

impl PlueckerTerm {
    fn format_body(&self) -> String {
        let mut parts: Vec<String> = self
            .t_exp
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(a, &e)| if e == 1 { format!("t{}", a + 1) } else { format!("t{}^{e}", a + 1) })
            .collect();
        parts.extend(self.vars.iter().map(ToString::to_string));
        parts.join("*")
    }

    pub fn eval(&self, z: &dyn Fn(PlueckerVar) -> i128, t: &[i128]) -> i128 {
        let tm: i128 = self.t_exp.iter().zip(t).map(|(&e, &x)| x.pow(e)).product();
        i128::from(self.sign) * tm * z(self.vars[0]) * z(self.vars[1])
    }
}

/// Terms in order `Z_ij Z_kl`, `Z_ik Z_jl`, `Z_il Z_jk`, possibly filtered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeformedRelation {
    pub quad: [usize; 4],
    pub terms: Vec<PlueckerTerm>,
}

impl DeformedRelation {
    pub fn eval(&self, z: &dyn Fn(PlueckerVar) -> i128, t: &[i128]) -> i128 {
        self.terms.iter().map(|term| term.eval(z, t)).sum()
    }
}

impl fmt::Display for DeformedRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, term) in self.terms.iter().enumerate() {
            match (k, term.sign < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{}", term.format_body())?;
        }
        Ok(())
    }
}

/// The three Plücker terms with their signs.
fn plucker_terms(i: usize, j: usize, k: usize, l: usize) -> [(i8, [PlueckerVar; 2]); 3] {
    let z = PlueckerVar;
    [
        (1, [z(i, j), z(k, l)]),
        (-1, [z(i, k), z(j, l)]),
        (1, [z(i, l), z(j, k)]),
    ]
}

fn check_quad(n: usize, quad: [usize; 4]) -> Result<()> {
    let [i, j, k, l] = quad;
    if i < 1 || !(i < j && j < k && k < l) || l > n {
        return Err(Error::InvalidArgument(format!("quadruple {quad:?} is not 1 <= i<j<k<l <= {n}")));
    }
    Ok(())
}

fn deform_with(w: &WeightMatrix, quad: [usize; 4]) -> DeformedRelation {
    let [i, j, k, l] = quad;
    let terms = plucker_terms(i, j, k, l);
    let raw: Vec<Vec<u32>> = terms
        .iter()
        .map(|(_, [a, b])| w.row(*a).iter().zip(w.row(*b)).map(|(x, y)| u32::from(x + y)).collect())
        .collect();
    let dims = raw[0].len();
    let max: Vec<u32> = (0..dims).map(|a| raw.iter().map(|r| r[a]).max().unwrap()).collect();
    let terms = terms
        .iter()
        .zip(&raw)
        .map(|((sign, vars), own)| {
            let t_exp = (0..dims)
                .map(|a| {
                    let d = max[a] - own[a];
                    assert!(d.is_multiple_of(2), "odd t-exponent in relation {quad:?}");
                    d / 2
                })
                .collect();
            PlueckerTerm { sign: *sign, vars: *vars, t_exp }
        })
        .collect();
    DeformedRelation { quad, terms }
}

/// `Π_α t_α^{w_α(p)} p(t^{-w} Z)` for the Plücker quadric of `quad`.
pub fn deform_relation(t: &Triangulation, quad: [usize; 4]) -> Result<DeformedRelation> {
    check_quad(t.n(), quad)?;
    Ok(deform_with(&weight_matrix(t), quad))
}

/// All deformed relations, quadruples in lexicographic order.
pub fn deformed_relations(t: &Triangulation) -> Vec<DeformedRelation> {
    let w = weight_matrix(t);
    (1..=t.n())
        .tuple_combinations()
        .map(|(i, j, k, l)| deform_with(&w, [i, j, k, l]))
        .collect()
}

/// Binomial generators of the central fiber `t = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToricIdeal {
    pub generators: Vec<DeformedRelation>,
}

/// Drops every term with a positive `t`-exponent. Panics if some relation does
/// not leave exactly two terms.
pub fn central_fiber(t: &Triangulation) -> ToricIdeal {
    let generators = deformed_relations(t)
        .into_iter()
        .map(|mut rel| {
            rel.terms.retain(|term| term.t_exp.iter().all(|&e| e == 0));
            assert_eq!(rel.terms.len(), 2, "relation {:?} of {t} is not a binomial", rel.quad);
            rel
        })
        .collect();
    ToricIdeal { generators }
}

/// The one-parameter family `t_β = 1` for `β ≠ α`, from the position of the
/// quadruple relative to the arc `I_+` of `d_α`.
pub fn one_param_family(t: &Triangulation, alpha: usize) -> Result<Vec<DeformedRelation>> {
    let d = *t
        .diagonals()
        .get(alpha)
        .ok_or_else(|| Error::InvalidArgument(format!("no diagonal with index {alpha}")))?;
    let plus = |i: usize| d.contains(i);
    let dims = t.diagonals().len();
    Ok((1..=t.n())
        .tuple_combinations()
        .map(|(i, j, k, l)| {
            let deformed = if plus(i) == plus(j) && plus(k) == plus(l) && plus(i) != plus(k) {
                Some(0)
            } else if !plus(i) && !plus(l) && plus(j) && plus(k) {
                Some(2)
            } else {
                None
            };
            let terms = plucker_terms(i, j, k, l)
                .iter()
                .enumerate()
                .map(|(m, (sign, vars))| {
                    let mut t_exp = vec![0; dims];
                    if deformed == Some(m) {
                        t_exp[alpha] = 1;
                    }
                    PlueckerTerm { sign: *sign, vars: *vars, t_exp }
                })
                .collect();
            DeformedRelation { quad: [i, j, k, l], terms }
        })
        .collect())
}

/// Restricts to `t_β = 1` for `β ≠ α` by zeroing those exponents.
pub fn restrict_to_parameter(rel: &DeformedRelation, alpha: usize) -> DeformedRelation {
    let mut out = rel.clone();
    for term in &mut out.terms {
        for (b, e) in term.t_exp.iter_mut().enumerate() {
            if b != alpha {
                *e = 0;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedPoint {
    pub pair: (usize, usize),
    #[serde(with = "crate::rational::vec")]
    pub image: Vec<Rat>,
}

/// The `n(n-1)/2` coordinate points `p_kl` and their moment images at `|r| = n`.
pub fn fixed_points(t: &Triangulation) -> Vec<FixedPoint> {
    let n = t.n();
    (1..=n)
        .tuple_combinations()
        .map(|(k, l)| FixedPoint { pair: (k, l), image: fixed_point_image(t, k, l, int(n as i64)) })
        .collect()
}

/// `Z_{a_1 d} = Z_{a_2 d} = 0` on one triangle and `Z_{b_1 d} = Z_{b_2 d} = 0` on the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularStratum {
    pub diagonal: Diagonal,
    /// The two triangles' vertices; `sides[m]` are the edges of triangle `m` other than `d`.
    pub triangles: [[usize; 3]; 2],
    pub sides: [[EdgeLabel; 2]; 2],
}

impl SingularStratum {
    /// The four vanishing triangle coordinates `(a, d)`.
    pub fn coordinates(&self) -> Vec<(EdgeLabel, EdgeLabel)> {
        let d = EdgeLabel::Diagonal(self.diagonal);
        self.sides.iter().flatten().map(|a| (*a, d)).collect()
    }
}

pub fn singular_strata(t: &Triangulation) -> Vec<SingularStratum> {
    t.diagonals()
        .iter()
        .map(|d| {
            let (_, mv) = whitehead_move(t, d).expect("diagonal of t");
            let [p, x, q, y] = mv.quad;
            let mut first = [p, x, q];
            let mut second = [q, y, p];
            first.sort_unstable();
            second.sort_unstable();
            SingularStratum {
                diagonal: *d,
                triangles: [first, second],
                sides: [[mv.sides[0], mv.sides[1]], [mv.sides[2], mv.sides[3]]],
            }
        })
        .collect()
}
