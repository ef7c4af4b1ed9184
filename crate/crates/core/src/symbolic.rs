//! Laurent polynomials in `y_{e_i}^{1/2}`, `y_d` and `Q`, subtraction-free rational
//! expressions, potential functions and their geometric lifts.
//!
//! Every exponent is stored doubled, so `y_{e_1}^{1/2}` is the exponent `1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::combinatorics::{flip_path, whitehead_move, Diagonal, EdgeLabel, Triangulation, WhiteheadMove};
use crate::error::{Error, Result};
use crate::plmap::{PLMap, TropExpr};
use crate::polytope::{AffineForm, CoordinateFrame};
use crate::rational::{fmt_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// `y_{e_i}`, `1 <= i < n`.
    E(usize),
    /// `y_d` for a diagonal, independent of its position in any triangulation.
    D(Diagonal),
    /// The Novikov-type parameter, with valuation `|r|`.
    Q,
    /// Gelfand–Cetlin variable `y^{(k)}_j`.
    Gc(usize, usize),
    /// Any other named variable.
    Named(String),
}

impl Var {
    /// Name with diagonals indexed by their position in `t`, when given.
    pub fn name(&self, t: Option<&Triangulation>) -> String {
        match self {
            Var::E(i) => format!("y_e{i}"),
            Var::D(d) => match t.and_then(|t| t.index_of(d)) {
                Some(a) => format!("y_d{}", a + 1),
                None => format!("y_d[{}..{}]", d.lo(), d.hi()),
            },
            Var::Q => "Q".into(),
            Var::Gc(k, j) => format!("y{k}_{j}"),
            Var::Named(s) => s.clone(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name(None))
    }
}

/// A Laurent monomial with doubled exponents; zero exponents are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(BTreeMap<Var, i64>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    /// `v^(doubled/2)`.
    pub fn var(v: Var, doubled: i64) -> Self {
        Monomial::one().with(v, doubled)
    }

    fn with(mut self, v: Var, doubled: i64) -> Self {
        let e = self.0.entry(v.clone()).or_insert(0);
        *e += doubled;
        if *e == 0 {
            self.0.remove(&v);
        }
        self
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, i64)>) -> Self {
        pairs.into_iter().fold(Monomial::one(), |m, (v, e)| m.with(v, e))
    }

    /// Doubled exponent of `v`.
    pub fn exponent(&self, v: &Var) -> i64 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &BTreeMap<Var, i64> {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), -e)).collect())
    }

    /// `self^(k/2)`; fails if some exponent would stop being a half-integer.
    pub fn pow_half(&self, k: i64) -> Option<Self> {
        let mut out = BTreeMap::new();
        for (v, e) in &self.0 {
            if (e * k) % 2 != 0 {
                return None;
            }
            out.insert(v.clone(), e * k / 2);
        }
        Some(Monomial(out))
    }

    pub fn pow(&self, k: i64) -> Self {
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), e * k)).collect())
    }

    fn without(&self, v: &Var) -> Self {
        let mut m = self.clone();
        m.0.remove(v);
        m
    }

    /// Componentwise minimum of exponents, treating absent variables as zero.
    fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = BTreeMap::new();
        for v in self.0.keys().chain(other.0.keys()) {
            let e = self.exponent(v).min(other.exponent(v));
            if e != 0 {
                out.insert(v.clone(), e);
            }
        }
        Monomial(out)
    }

    pub fn format(&self, t: Option<&Triangulation>) -> String {
        self.0
            .iter()
            .map(|(v, e)| format!("{}^{{{e}/2}}", v.name(t)))
            .collect::<Vec<_>>()
            .join(" * ")
    }
}

impl Mul for &Monomial {
    type Output = Monomial;
    fn mul(self, o: &Monomial) -> Monomial {
        o.0.iter().fold(self.clone(), |m, (v, e)| m.with(v.clone(), *e))
    }
}

/// A sparse map from monomials to nonzero rational coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly(BTreeMap<Monomial, Rat>);

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        LaurentPoly::monomial(Rat::one(), Monomial::one())
    }

    pub fn constant(c: Rat) -> Self {
        LaurentPoly::monomial(c, Monomial::one())
    }

    pub fn monomial(c: Rat, m: Monomial) -> Self {
        let mut p = LaurentPoly::zero();
        p.add_term(m, c);
        p
    }

    /// `v` to the first power.
    pub fn var(v: Var) -> Self {
        LaurentPoly::monomial(Rat::one(), Monomial::var(v, 2))
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(m.clone()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.0.get(m).copied().unwrap_or_else(Rat::zero)
    }

    /// Nonempty with all coefficients positive.
    pub fn is_subtraction_free(&self) -> bool {
        !self.0.is_empty() && self.0.values().all(Signed::is_positive)
    }

    pub fn as_monomial(&self) -> Option<(Rat, &Monomial)> {
        match self.0.iter().next() {
            Some((m, c)) if self.0.len() == 1 => Some((*c, m)),
            _ => None,
        }
    }

    pub fn scale_monomial(&self, m: &Monomial) -> Self {
        LaurentPoly(self.0.iter().map(|(k, c)| (k * m, *c)).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(LaurentPoly::one(), |acc, _| &acc * self)
    }

    /// The largest monomial dividing every term.
    fn content(&self) -> Option<Monomial> {
        let mut it = self.0.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |g, m| g.gcd(m)))
    }

    /// Replaces each variable by a monomial; `map` must cover every half-power used.
    pub fn substitute_monomials(&self, map: &BTreeMap<Var, Monomial>) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::zero();
        for (m, c) in &self.0 {
            let mut image = Monomial::one();
            for (v, e) in m.exponents() {
                let factor = match map.get(v) {
                    Some(r) => r.pow_half(*e).ok_or_else(|| {
                        Error::InvalidArgument(format!("{v}^({e}/2) has no monomial image"))
                    })?,
                    None => Monomial::var(v.clone(), *e),
                };
                image = &image * &factor;
            }
            out.add_term(image, *c);
        }
        Ok(out)
    }

    pub fn format(&self, t: Option<&Triangulation>) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        self.0
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    fmt_rat(c)
                } else {
                    format!("{} * {}", fmt_rat(c), m.format(t))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// One entry per term: coefficient and doubled exponents by variable name.
    pub fn to_json(&self, t: Option<&Triangulation>) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .0
            .iter()
            .map(|(m, c)| {
                let exps: BTreeMap<String, i64> =
                    m.exponents().iter().map(|(v, e)| (v.name(t), *e)).collect();
                serde_json::json!({ "coef": fmt_rat(c), "doubled_exponents": exps })
            })
            .collect();
        serde_json::Value::Array(terms)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(None))
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, o: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (m, c) in &o.0 {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, o: &LaurentPoly) -> LaurentPoly {
        self + &(-o)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                out.add_term(m1 * m2, c1 * c2);
            }
        }
        out
    }
}

/// `num / den`, kept with the common monomial content divided out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalExpr {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RationalExpr {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let mut r = RationalExpr { num, den };
        r.normalize();
        Ok(r)
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        RationalExpr { num: p, den: LaurentPoly::one() }
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_subtraction_free(&self) -> bool {
        self.num.is_subtraction_free() && self.den.is_subtraction_free()
    }

    fn normalize(&mut self) {
        let g = match (self.num.content(), self.den.content()) {
            (Some(a), Some(b)) => a.gcd(&b),
            (None, Some(b)) => b,
            _ => return,
        };
        if !g.is_one() {
            let inv = g.inverse();
            self.num = self.num.scale_monomial(&inv);
            self.den = self.den.scale_monomial(&inv);
        }
        // Monic denominator leading coefficient keeps the form canonical up to monomials.
        if let Some((_, c)) = self.den.0.iter().next() {
            let c = *c;
            if !c.is_one() {
                let s = LaurentPoly::constant(c.recip());
                self.num = &self.num * &s;
                self.den = &self.den * &s;
            }
        }
    }

    pub fn mul(&self, o: &RationalExpr) -> RationalExpr {
        RationalExpr::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }

    pub fn add(&self, o: &RationalExpr) -> RationalExpr {
        let num = &(&self.num * &o.den) + &(&o.num * &self.den);
        RationalExpr::new(num, &self.den * &o.den).unwrap()
    }

    pub fn recip(&self) -> Result<RationalExpr> {
        RationalExpr::new(self.den.clone(), self.num.clone())
    }

    /// Substitutes `rule` for `var` in numerator and denominator.
    pub fn substitute(&self, var: &Var, rule: &RationalExpr) -> Result<RationalExpr> {
        let a = substitute(&self.num, var, rule)?;
        let b = substitute(&self.den, var, rule)?;
        RationalExpr::new(&a.num * &b.den, &a.den * &b.num)
    }

    pub fn format(&self, t: Option<&Triangulation>) -> String {
        format!("({}) / ({})", self.num.format(t), self.den.format(t))
    }
}

/// Exact substitution `var := rule`. Half-integer powers of `var` are only
/// allowed when `rule` is a monomial.
pub fn substitute(p: &LaurentPoly, var: &Var, rule: &RationalExpr) -> Result<RationalExpr> {
    let monomial_rule = match (rule.num.as_monomial(), rule.den.as_monomial()) {
        (Some((a, m)), Some((b, w))) if (a / b).is_one() => Some(m * &w.inverse()),
        _ => None,
    };
    if let Some(m) = monomial_rule {
        let mut map = BTreeMap::new();
        map.insert(var.clone(), m);
        return Ok(RationalExpr::from_poly(p.substitute_monomials(&map)?));
    }
    // Group terms by the integer power k of `var`, then put everything over
    // den^b * num^(-a) with a <= 0 <= b the extreme powers.
    let mut by_power: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let e = m.exponent(var);
        if e % 2 != 0 {
            return Err(Error::InvalidArgument(format!("{var} appears with a half-integer power")));
        }
        by_power
            .entry(e / 2)
            .or_default()
            .add_term(m.without(var), *c);
    }
    let lo = by_power.keys().next().copied().unwrap_or(0).min(0);
    let hi = by_power.keys().last().copied().unwrap_or(0).max(0);
    let mut num = LaurentPoly::zero();
    for (k, coeff) in &by_power {
        let term = &(&rule.num.pow((k - lo) as u32) * &rule.den.pow((hi - k) as u32)) * coeff;
        num = &num + &term;
    }
    let den = &rule.den.pow(hi as u32) * &rule.num.pow((-lo) as u32);
    RationalExpr::new(num, den)
}

/// Cross-multiplication equality.
pub fn rational_equal(a: &RationalExpr, b: &RationalExpr) -> bool {
    &a.num * &b.den == &b.num * &a.den
}

/// The length monomial `y(a)`: `y_{e_i}^{1/2}`, `Q (y_{e_1}..y_{e_{n-1}})^{-1/2}`, or
/// `y_d^{-1} Π_{i ∈ I} y_{e_i}^{1/2}` over the canonical arc of `d`.
pub fn edge_monomial(t: &Triangulation, a: &EdgeLabel) -> Result<Monomial> {
    let n = t.n();
    match *a {
        EdgeLabel::Side(i) if i >= 1 && i < n => Ok(Monomial::var(Var::E(i), 1)),
        EdgeLabel::Side(i) if i == n => Ok(Monomial::from_pairs(
            std::iter::once((Var::Q, 2)).chain((1..n).map(|i| (Var::E(i), -1))),
        )),
        EdgeLabel::Side(i) => Err(Error::InvalidArgument(format!("no side e{i} in a {n}-gon"))),
        EdgeLabel::Diagonal(d) if t.contains(&d) => Ok(Monomial::from_pairs(
            std::iter::once((Var::D(d), -2)).chain(d.arc().into_iter().map(|i| (Var::E(i), 1))),
        )),
        EdgeLabel::Diagonal(d) => Err(Error::InvalidArgument(format!("{d} is not a diagonal of {t}"))),
    }
}

/// `Σ_triangles y(b)y(c)/y(a) + y(a)y(c)/y(b) + y(a)y(b)/y(c)`.
pub fn potential(t: &Triangulation) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for tri in t.triangles() {
        let y: Vec<Monomial> = tri.edges.iter().map(|e| edge_monomial(t, e).unwrap()).collect();
        for k in 0..3 {
            let m = &(&y[(k + 1) % 3] * &y[(k + 2) % 3]) * &y[k].inverse();
            out = &out + &LaurentPoly::monomial(Rat::one(), m);
        }
    }
    out
}

fn side_poly(t: &Triangulation, mv: &WhiteheadMove, k: usize) -> Monomial {
    edge_monomial(t, &mv.sides[k]).expect("quadrilateral side")
}

/// `Π_{i ∈ I} y_{e_i}^{1/2}` over the canonical arc of `d`.
fn half_arc(d: &Diagonal) -> Monomial {
    Monomial::from_pairs(d.arc().into_iter().map(|i| (Var::E(i), 1)))
}

fn binomial(a: Monomial, b: Monomial) -> LaurentPoly {
    &LaurentPoly::monomial(Rat::one(), a) + &LaurentPoly::monomial(Rat::one(), b)
}

/// A substitution `var := expr`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftRule {
    pub var: Var,
    pub expr: RationalExpr,
}

/// The source diagonal variable in terms of the target triangulation's variables:
/// `y_d = m_d (y_1 y_4 + y_2 y_3) / (y(d') (y_1 y_2 + y_3 y_4))`.
pub fn geometric_lift(mv: &WhiteheadMove, source: &Triangulation) -> Result<LiftRule> {
    let (target, actual) = whitehead_move(source, &mv.removed)?;
    if actual != *mv {
        return Err(Error::InvalidArgument("move does not start at the source triangulation".into()));
    }
    let y: Vec<Monomial> = (0..4).map(|k| side_poly(&target, mv, k)).collect();
    let y_new = edge_monomial(&target, &EdgeLabel::Diagonal(mv.inserted))?;
    let num = binomial(&y[0] * &y[3], &y[1] * &y[2]).scale_monomial(&half_arc(&mv.removed));
    let den = binomial(&y[0] * &y[1], &y[2] * &y[3]).scale_monomial(&y_new);
    Ok(LiftRule { var: Var::D(mv.removed), expr: RationalExpr::new(num, den)? })
}

/// The new diagonal variable in terms of the source variables:
/// `y_{d'} = m_{d'} (y_1 y_2 + y_3 y_4) / (y(d) (y_1 y_4 + y_2 y_3))`.
pub fn forward_lift(mv: &WhiteheadMove, source: &Triangulation) -> Result<LiftRule> {
    let (_, actual) = whitehead_move(source, &mv.removed)?;
    if actual != *mv {
        return Err(Error::InvalidArgument("move does not start at the source triangulation".into()));
    }
    let y: Vec<Monomial> = (0..4).map(|k| side_poly(source, mv, k)).collect();
    let y_old = edge_monomial(source, &EdgeLabel::Diagonal(mv.removed))?;
    let num = binomial(&y[0] * &y[1], &y[2] * &y[3]).scale_monomial(&half_arc(&mv.inserted));
    let den = binomial(&y[0] * &y[3], &y[1] * &y[2]).scale_monomial(&y_old);
    Ok(LiftRule { var: Var::D(mv.inserted), expr: RationalExpr::new(num, den)? })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftReport {
    pub passed: bool,
    pub steps: usize,
    /// Numerator and denominator term counts after each substitution.
    pub term_counts: Vec<[usize; 2]>,
}

/// Substitutes the lifts along a shortest flip path into the potential of `t1`
/// and compares with the potential of `t2`.
pub fn lift_verify(t1: &Triangulation, t2: &Triangulation) -> Result<LiftReport> {
    let path = flip_path(t1, t2)?;
    let mut expr = RationalExpr::from_poly(potential(t1));
    let mut cur = t1.clone();
    let mut term_counts = Vec::new();
    for mv in &path {
        let rule = geometric_lift(mv, &cur)?;
        expr = expr.substitute(&rule.var, &rule.expr)?;
        term_counts.push([expr.num.len(), expr.den.len()]);
        cur = whitehead_move(&cur, &mv.removed)?.0;
    }
    let passed = rational_equal(&expr, &RationalExpr::from_poly(potential(t2)));
    Ok(LiftReport { passed, steps: path.len(), term_counts })
}

fn trop_poly(p: &LaurentPoly, leaf: &dyn Fn(&Var) -> Option<AffineForm>, dim: usize) -> Result<TropExpr> {
    if !p.is_subtraction_free() {
        return Err(Error::NotSubtractionFree);
    }
    let mut args = Vec::new();
    for (m, _) in p.terms() {
        let mut f = AffineForm::zero(dim);
        for (v, e) in m.exponents() {
            let g = leaf(v).ok_or_else(|| Error::InvalidArgument(format!("no valuation for {v}")))?;
            f = &f + &(&g * Rat::new(*e as i128, 2));
        }
        args.push(TropExpr::Affine(f));
    }
    Ok(if args.len() == 1 { args.pop().unwrap() } else { TropExpr::Min(args) })
}

/// Valuation of a subtraction-free expression in the frame: `y_{e_i} ↦ u_{e_i}`,
/// `y_{d_α} ↦ u_{d_α}`, `Q ↦ |r|`; sums become minima and quotients differences.
pub fn tropicalize(r: &RationalExpr, frame: &CoordinateFrame) -> Result<TropExpr> {
    let dim = frame.dim();
    let t = frame.triangulation();
    let leaf = |v: &Var| -> Option<AffineForm> {
        match v {
            Var::E(i) if *i >= 1 && *i < frame.n() => Some(AffineForm::coordinate(dim, frame.side_index(*i))),
            Var::D(d) => t.index_of(d).map(|a| AffineForm::coordinate(dim, frame.diagonal_index(a))),
            Var::Q => Some(AffineForm::constant(dim, frame.perimeter())),
            _ => None,
        }
    };
    tropicalize_with(r, &leaf, dim)
}

/// Tropicalization with caller-supplied valuations of the variables.
pub fn tropicalize_with(
    r: &RationalExpr,
    leaf: &dyn Fn(&Var) -> Option<AffineForm>,
    dim: usize,
) -> Result<TropExpr> {
    let num = trop_poly(&r.num, leaf, dim)?;
    let den = trop_poly(&r.den, leaf, dim)?;
    Ok(match den {
        TropExpr::Affine(f) if f.is_constant() && f.offset().is_zero() => num,
        den => TropExpr::diff(num, den),
    })
}

/// The tropicalized forward lift as a map between the two frames.
pub fn tropical_flip_map(frame: &CoordinateFrame, mv: &WhiteheadMove) -> Result<PLMap> {
    let t = frame.triangulation();
    let rule = forward_lift(mv, t)?;
    let new_coord = tropicalize(&rule.expr, frame)?;
    let (target, _) = whitehead_move(t, &mv.removed)?;
    let dim = frame.dim();
    let mut coords: Vec<TropExpr> = (1..frame.n())
        .map(|i| TropExpr::Affine(AffineForm::coordinate(dim, frame.side_index(i))))
        .collect();
    for d in target.diagonals() {
        coords.push(match t.index_of(d) {
            Some(a) => TropExpr::Affine(AffineForm::coordinate(dim, frame.diagonal_index(a))),
            None => new_coord.clone(),
        });
    }
    Ok(PLMap::from_layer(dim, coords))
}
