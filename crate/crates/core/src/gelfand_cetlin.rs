//! The caterpillar triangulation as a Gelfand–Cetlin system: the affine change
//! of coordinates, the two-row pattern polytope and the matching change of
//! variables on the potential.

use std::collections::{BTreeMap, HashSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::combinatorics::{caterpillar, Triangulation};
use crate::error::{Error, Result};
use crate::linalg::determinant;
use crate::polytope::{moment_polytope, AffineForm, CoordinateFrame, Polytope};
use crate::rational::{int, Rat};
use crate::symbolic::{potential, LaurentPoly, Monomial, Var};

/// A pattern entry: `λ^{(k)}_j`, or one of the two fixed entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Entry {
    Lambda(usize, usize),
    /// `λ^{(n-1)}_1 = |r|`.
    Perimeter,
    Zero,
}

/// Free entries in row-major order: `λ^{(1)}_1, λ^{(2)}_1, λ^{(2)}_2, …, λ^{(n-2)}_2, λ^{(n-1)}_2`.
pub fn free_entries(n: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(1, 1)];
    for k in 2..n - 1 {
        out.push((k, 1));
        out.push((k, 2));
    }
    out.push((n - 1, 2));
    out
}

fn entry(n: usize, k: usize, j: usize) -> Entry {
    if (k, j) == (n - 1, 1) {
        Entry::Perimeter
    } else {
        Entry::Lambda(k, j)
    }
}

/// The interlacing inequalities `big ≥ small`, one per arrow of the pattern.
pub fn arrows(n: usize) -> Vec<(Entry, Entry)> {
    let mut out = Vec::new();
    for k in 2..n {
        out.push((entry(n, k, 1), entry(n, k - 1, 1)));
        out.push((entry(n, k - 1, 1), entry(n, k, 2)));
        if k >= 3 {
            out.push((entry(n, k, 2), entry(n, k - 1, 2)));
        }
    }
    out.push((Entry::Lambda(2, 2), Entry::Zero));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GCPattern {
    pub n: usize,
    #[serde(with = "crate::rational::vec")]
    pub entries: Vec<Rat>,
    #[serde(with = "crate::rational")]
    pub perimeter: Rat,
}

impl GCPattern {
    pub fn get(&self, e: Entry) -> Rat {
        match e {
            Entry::Perimeter => self.perimeter,
            Entry::Zero => Rat::zero(),
            Entry::Lambda(k, j) => {
                let pos = free_entries(self.n).iter().position(|&p| p == (k, j)).expect("pattern entry");
                self.entries[pos]
            }
        }
    }

    pub fn satisfies_interlacing(&self) -> bool {
        arrows(self.n).iter().all(|&(a, b)| self.get(a) >= self.get(b))
    }

    pub fn strictly_interlacing(&self) -> bool {
        arrows(self.n).iter().all(|&(a, b)| self.get(a) > self.get(b))
    }
}

fn require_caterpillar(t: &Triangulation) -> Result<()> {
    let n = t.n();
    if n < 4 || *t != caterpillar(n)? {
        return Err(Error::InvalidArgument(format!("{t} is not the caterpillar")));
    }
    Ok(())
}

/// The affine forms of the free entries on the caterpillar frame.
pub fn gc_forms(frame: &CoordinateFrame) -> Result<Vec<AffineForm>> {
    require_caterpillar(frame.triangulation())?;
    let n = frame.n();
    let dim = frame.dim();
    let e = |i: usize| AffineForm::coordinate(dim, frame.side_index(i));
    // Caterpillar diagonals in frame order are e_1+e_2, e_1+e_2+e_3, …
    let d = |alpha: usize| AffineForm::coordinate(dim, frame.diagonal_index(alpha - 1));
    let partial = |m: usize| (1..=m).map(e).sum::<AffineForm>();
    Ok(free_entries(n)
        .into_iter()
        .map(|(k, j)| match (k, j) {
            (1, 1) => e(1),
            (k, 2) if k == n - 1 => &partial(n - 1) - &AffineForm::constant(dim, frame.perimeter()),
            (k, 1) => &partial(k) - &d(k - 1),
            (k, _) => d(k - 1),
        })
        .collect())
}

pub fn gc_map(frame: &CoordinateFrame, u: &[Rat]) -> Result<GCPattern> {
    let forms = gc_forms(frame)?;
    Ok(GCPattern {
        n: frame.n(),
        entries: forms.iter().map(|f| f.eval(u)).collect(),
        perimeter: frame.perimeter(),
    })
}

/// The pattern polytope in the `2n - 4` free entries.
pub fn gc_polytope(n: usize, perimeter: Rat) -> Result<Polytope> {
    if n < 4 {
        return Err(Error::InvalidSize(n));
    }
    let free = free_entries(n);
    let dim = free.len();
    let form = |e: Entry| match e {
        Entry::Perimeter => AffineForm::constant(dim, perimeter),
        Entry::Zero => AffineForm::zero(dim),
        Entry::Lambda(k, j) => AffineForm::coordinate(dim, free.iter().position(|&p| p == (k, j)).unwrap()),
    };
    let halfspaces = arrows(n).into_iter().map(|(a, b)| &form(a) - &form(b)).collect();
    Polytope::new(dim, halfspaces)
}

/// Determinant of the linear part of the caterpillar-to-pattern map.
pub fn gc_determinant(n: usize) -> Result<Rat> {
    let frame = CoordinateFrame::new(caterpillar(n)?, int(n as i64));
    let forms = gc_forms(&frame)?;
    let dim = frame.dim();
    let matrix: Vec<Vec<Rat>> = forms
        .iter()
        .map(|f| {
            let base = f.eval(&vec![Rat::zero(); dim]);
            (0..dim)
                .map(|c| {
                    let mut x = vec![Rat::zero(); dim];
                    x[c] = Rat::one();
                    f.eval(&x) - base
                })
                .collect()
        })
        .collect();
    Ok(determinant(&matrix))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GCReport {
    pub unimodular: bool,
    pub lattice_bijection: bool,
    /// Lattice points of the caterpillar polytope and of the pattern polytope.
    pub counts: [usize; 2],
}

pub fn gc_equivalence_check(n: usize, perimeter: Rat) -> Result<GCReport> {
    let t = caterpillar(n)?;
    let frame = CoordinateFrame::new(t.clone(), perimeter);
    let forms = gc_forms(&frame)?;
    let unimodular = gc_determinant(n)?.abs().is_one() && forms.iter().all(AffineForm::is_integral);
    let source = moment_polytope(&t, perimeter).lattice_points()?;
    let target = gc_polytope(n, perimeter)?.lattice_points()?;
    let target_set: HashSet<&Vec<i64>> = target.iter().collect();
    let mut images = HashSet::new();
    let mut ok = true;
    for u in &source {
        let img: Option<Vec<i64>> = forms
            .iter()
            .map(|f| {
                let x = f.eval_int(u);
                x.is_integer().then(|| x.to_integer() as i64)
            })
            .collect();
        match img {
            Some(v) if target_set.contains(&v) && images.insert(v.clone()) => {}
            _ => ok = false,
        }
    }
    let lattice_bijection = ok && images.len() == target.len();
    Ok(GCReport { unimodular, lattice_bijection, counts: [source.len(), target.len()] })
}

fn gc_monomial(e: Entry) -> Monomial {
    match e {
        Entry::Perimeter => Monomial::var(Var::Q, 2),
        Entry::Zero => Monomial::one(),
        Entry::Lambda(k, j) => Monomial::var(Var::Gc(k, j), 2),
    }
}

/// The monomial change of variables lifting [`gc_forms`], expressed as the
/// caterpillar variables in terms of `y^{(k)}_j`:
/// `y_{e_1} = y^{(1)}_1`, `y_{d_α} = y^{(α+1)}_2`,
/// `y_{e_{m}} = y^{(m)}_1 y^{(m)}_2 / (y^{(m-1)}_1 y^{(m-1)}_2)` for `2 <= m <= n-2`,
/// and `y_{e_{n-1}} = Q y^{(n-1)}_2 / (y^{(n-2)}_1 y^{(n-2)}_2)`, with `y^{(1)}_2 = 1`.
pub fn ehx_substitution(n: usize) -> Result<BTreeMap<Var, Monomial>> {
    let t = caterpillar(n)?;
    let g = |k: usize, j: usize| {
        if (k, j) == (1, 2) {
            Monomial::one()
        } else {
            Monomial::var(Var::Gc(k, j), 2)
        }
    };
    let block = |k: usize| &g(k, 1) * &g(k, 2);
    let mut map = BTreeMap::new();
    map.insert(Var::E(1), g(1, 1));
    for m in 2..n - 1 {
        map.insert(Var::E(m), &block(m) * &block(m - 1).inverse());
    }
    let last = &(&Monomial::var(Var::Q, 2) * &g(n - 1, 2)) * &block(n - 2).inverse();
    map.insert(Var::E(n - 1), last);
    for (a, d) in t.diagonals().iter().enumerate() {
        map.insert(Var::D(*d), g(a + 2, 2));
    }
    Ok(map)
}

/// `Σ_arrows y_big / y_small` with `y_{|r|} = Q` and `y_0 = 1`.
pub fn ehx_target(n: usize) -> LaurentPoly {
    arrows(n).into_iter().fold(LaurentPoly::zero(), |acc, (a, b)| {
        let m = &gc_monomial(a) * &gc_monomial(b).inverse();
        &acc + &LaurentPoly::monomial(Rat::one(), m)
    })
}

/// The caterpillar potential in pattern variables.
pub fn ehx_potential(n: usize) -> Result<LaurentPoly> {
    potential(&caterpillar(n)?).substitute_monomials(&ehx_substitution(n)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EhxReport {
    pub n: usize,
    pub matches: bool,
    pub term_count: usize,
    pub expected_term_count: usize,
    /// Terms of the substituted potential.
    pub terms: Vec<String>,
    /// Terms of the arrow-ratio sum that are missing from the substituted potential.
    pub missing: Vec<String>,
    pub unexpected: Vec<String>,
}

fn term_strings(p: &LaurentPoly) -> Vec<String> {
    p.terms().map(|(m, c)| LaurentPoly::monomial(*c, m.clone()).to_string()).collect()
}

pub fn ehx_form(n: usize) -> Result<EhxReport> {
    let got = ehx_potential(n)?;
    let want = ehx_target(n);
    let missing = &want - &got;
    let (missing, unexpected): (Vec<_>, Vec<_>) = missing
        .terms()
        .map(|(m, c)| (c.is_positive(), LaurentPoly::monomial(c.abs(), m.clone()).to_string()))
        .partition(|(pos, _)| *pos);
    Ok(EhxReport {
        n,
        matches: got == want,
        term_count: got.len(),
        expected_term_count: want.len(),
        terms: term_strings(&got),
        missing: missing.into_iter().map(|x| x.1).collect(),
        unexpected: unexpected.into_iter().map(|x| x.1).collect(),
    })
}
