//! Piecewise-linear expressions and the flip transformations between moment polytopes.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::combinatorics::{flip_path, whitehead_move, EdgeLabel, Triangulation, WhiteheadMove};
use crate::error::{Error, Result};
use crate::polytope::{bending_embedding, check_side_lengths, AffineForm, CoordinateFrame, Polytope};
use crate::rational::{fmt_rat, Rat};

/// A min-plus expression over affine leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TropExpr {
    Affine(AffineForm),
    Min(Vec<TropExpr>),
    Sum(Vec<TropExpr>),
    Diff(Box<TropExpr>, Box<TropExpr>),
    Scale(Rat, Box<TropExpr>),
}

impl TropExpr {
    pub fn affine(f: AffineForm) -> Self {
        TropExpr::Affine(f)
    }

    pub fn min(args: Vec<TropExpr>) -> Self {
        assert!(!args.is_empty(), "min of nothing");
        TropExpr::Min(args)
    }

    /// Flattens nested sums and merges their affine parts into one leaf.
    pub fn sum(args: Vec<TropExpr>) -> Self {
        let mut affine: Option<AffineForm> = None;
        let mut rest = Vec::new();
        let mut stack: Vec<TropExpr> = args.into_iter().rev().collect();
        while let Some(e) = stack.pop() {
            match e {
                TropExpr::Sum(inner) => stack.extend(inner.into_iter().rev()),
                TropExpr::Affine(f) => affine = Some(affine.map_or(f.clone(), |a| &a + &f)),
                other => rest.push(other),
            }
        }
        match (affine, rest.len()) {
            (Some(a), 0) => TropExpr::Affine(a),
            (None, 1) => rest.pop().unwrap(),
            (Some(a), 1) if a.is_constant() && a.offset().is_zero() => rest.pop().unwrap(),
            (Some(a), _) if !(a.is_constant() && a.offset().is_zero()) => {
                rest.insert(0, TropExpr::Affine(a));
                TropExpr::Sum(rest)
            }
            (None, 0) => panic!("sum of nothing"),
            _ => TropExpr::Sum(rest),
        }
    }

    pub fn diff(a: TropExpr, b: TropExpr) -> Self {
        TropExpr::Diff(Box::new(a), Box::new(b))
    }

    pub fn scale(k: Rat, e: TropExpr) -> Self {
        TropExpr::Scale(k, Box::new(e))
    }

    pub fn eval(&self, u: &[Rat]) -> Rat {
        match self {
            TropExpr::Affine(f) => f.eval(u),
            TropExpr::Min(args) => args.iter().map(|a| a.eval(u)).min().unwrap(),
            TropExpr::Sum(args) => args.iter().map(|a| a.eval(u)).sum(),
            TropExpr::Diff(a, b) => a.eval(u) - b.eval(u),
            TropExpr::Scale(k, e) => *k * e.eval(u),
        }
    }

    pub fn leaves(&self) -> Vec<&AffineForm> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a AffineForm>) {
        match self {
            TropExpr::Affine(f) => out.push(f),
            TropExpr::Min(args) | TropExpr::Sum(args) => {
                args.iter().for_each(|a| a.collect_leaves(out))
            }
            TropExpr::Diff(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            TropExpr::Scale(_, e) => e.collect_leaves(out),
        }
    }

    /// Integral leaves and integral scalars.
    pub fn is_integral(&self) -> bool {
        match self {
            TropExpr::Affine(f) => f.is_integral(),
            TropExpr::Min(args) | TropExpr::Sum(args) => args.iter().all(TropExpr::is_integral),
            TropExpr::Diff(a, b) => a.is_integral() && b.is_integral(),
            TropExpr::Scale(k, e) => k.is_integer() && e.is_integral(),
        }
    }

    /// Replaces variable `j` by `inner[j]`.
    pub fn substitute(&self, inner: &[TropExpr]) -> TropExpr {
        match self {
            TropExpr::Affine(f) => {
                let forms: Option<Vec<AffineForm>> = inner
                    .iter()
                    .map(|e| match e {
                        TropExpr::Affine(g) => Some(g.clone()),
                        _ => None,
                    })
                    .collect();
                if let Some(forms) = forms {
                    return TropExpr::Affine(f.compose(&forms));
                }
                let dim = inner.iter().find_map(|e| e.leaves().first().map(|g| g.dim())).unwrap_or(0);
                let mut terms = vec![TropExpr::Affine(AffineForm::constant(dim, f.offset()))];
                for (c, e) in f.v.iter().zip(inner) {
                    match e {
                        _ if c.is_zero() => {}
                        TropExpr::Affine(g) => terms.push(TropExpr::Affine(g * *c)),
                        _ if c.is_one() => terms.push(e.clone()),
                        _ => terms.push(TropExpr::scale(*c, e.clone())),
                    }
                }
                TropExpr::sum(terms)
            }
            TropExpr::Min(args) => TropExpr::Min(args.iter().map(|a| a.substitute(inner)).collect()),
            TropExpr::Sum(args) => TropExpr::sum(args.iter().map(|a| a.substitute(inner)).collect()),
            TropExpr::Diff(a, b) => TropExpr::diff(a.substitute(inner), b.substitute(inner)),
            TropExpr::Scale(k, e) => TropExpr::scale(*k, e.substitute(inner)),
        }
    }

    /// Infix form with the given variable names.
    pub fn format(&self, names: &[String]) -> String {
        match self {
            TropExpr::Affine(f) => f.format(names),
            TropExpr::Min(args) => {
                format!("min({})", args.iter().map(|a| a.format(names)).collect::<Vec<_>>().join(", "))
            }
            TropExpr::Sum(args) => {
                format!("({})", args.iter().map(|a| a.format(names)).collect::<Vec<_>>().join(" + "))
            }
            TropExpr::Diff(a, b) => {
                let rhs = match **b {
                    TropExpr::Affine(_) => format!("({})", b.format(names)),
                    _ => b.format(names),
                };
                format!("{} - {rhs}", a.format(names))
            }
            TropExpr::Scale(k, e) => format!("{}*({})", fmt_rat(k), e.format(names)),
        }
    }

    /// `{"affine": {"v": [..], "c": q}}`, `{"min": [..]}`, `{"sum": [..]}`,
    /// `{"diff": [a, b]}` or `{"scale": {"k": q, "expr": e}}`.
    pub fn to_json(&self) -> Value {
        match self {
            TropExpr::Affine(f) => json!({
                "affine": {
                    "v": f.v.iter().map(fmt_rat).collect::<Vec<_>>(),
                    "c": fmt_rat(&f.offset()),
                }
            }),
            TropExpr::Min(args) => json!({ "min": args.iter().map(TropExpr::to_json).collect::<Vec<_>>() }),
            TropExpr::Sum(args) => json!({ "sum": args.iter().map(TropExpr::to_json).collect::<Vec<_>>() }),
            TropExpr::Diff(a, b) => json!({ "diff": [a.to_json(), b.to_json()] }),
            TropExpr::Scale(k, e) => json!({ "scale": { "k": fmt_rat(k), "expr": e.to_json() } }),
        }
    }
}

/// A chain of coordinate layers; `layers[0]` is applied first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLMap {
    in_dim: usize,
    out_dim: usize,
    layers: Vec<Vec<TropExpr>>,
}

impl PLMap {
    pub fn identity(dim: usize) -> Self {
        PLMap { in_dim: dim, out_dim: dim, layers: Vec::new() }
    }

    pub fn from_layer(in_dim: usize, coords: Vec<TropExpr>) -> Self {
        assert!(coords.iter().flat_map(|e| e.leaves()).all(|f| f.dim() == in_dim));
        PLMap { in_dim, out_dim: coords.len(), layers: vec![coords] }
    }

    pub fn from_affine(in_dim: usize, coords: Vec<AffineForm>) -> Self {
        PLMap::from_layer(in_dim, coords.into_iter().map(TropExpr::Affine).collect())
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn layers(&self) -> &[Vec<TropExpr>] {
        &self.layers
    }

    pub fn apply(&self, u: &[Rat]) -> Vec<Rat> {
        assert_eq!(u.len(), self.in_dim);
        let mut cur = u.to_vec();
        for layer in &self.layers {
            cur = layer.iter().map(|e| e.eval(&cur)).collect();
        }
        cur
    }

    /// Image of an integer point, or `None` if some coordinate is not an integer.
    pub fn apply_int(&self, u: &[i64]) -> Option<Vec<i64>> {
        let q: Vec<Rat> = u.iter().map(|&x| Rat::from_integer(x as i128)).collect();
        self.apply(&q)
            .into_iter()
            .map(|x| x.is_integer().then(|| x.to_integer() as i64))
            .collect()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &PLMap) -> Result<PLMap> {
        if inner.out_dim != self.in_dim {
            return Err(Error::InvalidArgument(format!(
                "cannot compose a map from dimension {} after one into dimension {}",
                self.in_dim, inner.out_dim
            )));
        }
        let mut layers = inner.layers.clone();
        layers.extend(self.layers.iter().cloned());
        Ok(PLMap { in_dim: inner.in_dim, out_dim: self.out_dim, layers })
    }

    /// One expression per output coordinate in the input variables.
    pub fn coordinate_exprs(&self) -> Vec<TropExpr> {
        let mut cur: Vec<TropExpr> = (0..self.in_dim)
            .map(|i| TropExpr::Affine(AffineForm::coordinate(self.in_dim, i)))
            .collect();
        for layer in &self.layers {
            cur = layer.iter().map(|e| e.substitute(&cur)).collect();
        }
        cur
    }

    pub fn to_json(&self) -> Value {
        json!({
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "coords": self.coordinate_exprs().iter().map(TropExpr::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `maps[0] ∘ maps[1] ∘ ..`; the last map is applied first. The empty
/// composition is the identity on `ℝ^dim`.
pub fn compose_plmaps(dim: usize, maps: &[PLMap]) -> Result<PLMap> {
    maps.iter()
        .rev()
        .try_fold(PLMap::identity(dim), |acc, m| m.after(&acc))
}

/// New diagonal length after a flip, in length coordinates:
/// `u' = u − min(u_1+u_2, u_3+u_4) + min(u_1+u_4, u_2+u_3)`.
pub fn flip_length(sides: [Rat; 4], u: Rat) -> Rat {
    let [u1, u2, u3, u4] = sides;
    u - (u1 + u2).min(u3 + u4) + (u1 + u4).min(u2 + u3)
}

/// The same flip written with the differences of opposite sides.
pub fn flip_length_differences(sides: [Rat; 4], u: Rat) -> Rat {
    let [u1, u2, u3, u4] = sides;
    let m1 = [u1 - u2, u2 - u1, u3 - u4, u4 - u3].into_iter().min().unwrap();
    let m2 = [u1 - u4, u4 - u1, u2 - u3, u3 - u2].into_iter().min().unwrap();
    u + m1 - m2
}

/// Both sides of `min(a, b) + min(−a, b) − b = min(a, −a, b, −b)`.
pub fn min_identity(a: Rat, b: Rat) -> (Rat, Rat) {
    let lhs = a.min(b) + (-a).min(b) - b;
    let rhs = [a, -a, b, -b].into_iter().min().unwrap();
    (lhs, rhs)
}

/// Range lengths of the old and new diagonal for fixed quadrilateral sides.
pub fn range_lengths(sides: [Rat; 4]) -> (Rat, Rat) {
    let [u1, u2, u3, u4] = sides;
    let before = (u1 + u2).min(u3 + u4) + [u1 - u2, u2 - u1, u3 - u4, u4 - u3].into_iter().min().unwrap();
    let after = (u1 + u4).min(u2 + u3) + [u1 - u4, u4 - u1, u2 - u3, u3 - u2].into_iter().min().unwrap();
    (before, after)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub passed: bool,
    pub seed: u64,
    pub samples: usize,
    pub min_identity_failures: usize,
    pub range_length_failures: usize,
    pub flip_form_failures: usize,
}

fn random_rat(rng: &mut impl Rng) -> Rat {
    Rat::new(rng.gen_range(-60..=60), rng.gen_range(1..=12))
}

/// Evaluates the min identity, the range-length identity and the two flip
/// formulas on `samples` seeded random rational inputs each.
pub fn identity_check(seed: u64, samples: usize) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut min_f, mut range_f, mut flip_f) = (0, 0, 0);
    for _ in 0..samples {
        let (l, r) = min_identity(random_rat(&mut rng), random_rat(&mut rng));
        min_f += usize::from(l != r);
        let sides = [0; 4].map(|_| random_rat(&mut rng));
        let (a, b) = range_lengths(sides);
        range_f += usize::from(a != b);
        let u = random_rat(&mut rng);
        flip_f += usize::from(flip_length(sides, u) != flip_length_differences(sides, u));
    }
    IdentityReport {
        passed: min_f + range_f + flip_f == 0,
        seed,
        samples,
        min_identity_failures: min_f,
        range_length_failures: range_f,
        flip_form_failures: flip_f,
    }
}

/// The flip as a map between frames, written so every affine leaf is of the form
/// `u(a) ± v(a)` with `v(a)` the total side length cut off by `a`.
pub fn whitehead_plmap(frame: &CoordinateFrame, mv: &WhiteheadMove) -> Result<PLMap> {
    let t = frame.triangulation();
    let (target, actual) = whitehead_move(t, &mv.removed)
        .map_err(|_| Error::InvalidArgument(format!("{} is not a diagonal of {t}", mv.removed)))?;
    if actual != *mv {
        return Err(Error::InvalidArgument(format!(
            "move {} -> {} does not match the frame's triangulation {t}",
            mv.removed, mv.inserted
        )));
    }
    let n = frame.n();
    let dim = frame.dim();
    let r = AffineForm::constant(dim, frame.perimeter());
    let len = |a: &EdgeLabel| frame.length_form(a).expect("edge of the source triangulation");
    let v: Vec<AffineForm> = mv.arcs.iter().map(|arc| frame.side_sum_form(arc)).collect();
    let plus = |k: usize| &len(&mv.sides[k]) + &v[k];
    let minus = |k: usize| &len(&mv.sides[k]) - &v[k];

    let m1 = TropExpr::min(vec![
        TropExpr::Affine(&plus(0) + &plus(1)),
        TropExpr::Affine(&(&minus(2) + &minus(3)) + &r),
    ]);
    let m2 = TropExpr::min(vec![
        TropExpr::Affine(&plus(0) + &plus(3)),
        TropExpr::Affine(&(&minus(1) + &minus(2)) + &r),
    ]);
    let removed = EdgeLabel::Diagonal(mv.removed);
    let v_removed = frame.side_sum_form(&mv.removed.interval());
    let v14 = &v[0] + &v[3];
    let half_new: AffineForm = mv
        .inserted
        .arc()
        .into_iter()
        .map(|i| &AffineForm::coordinate(dim, frame.side_index(i)) * crate::rational::half())
        .sum();
    let c = &(&v14 - &(&len(&removed) + &v_removed)) + &half_new;
    let new_coord = TropExpr::diff(TropExpr::Sum(vec![TropExpr::Affine(c), m1]), m2);

    let mut coords: Vec<TropExpr> = (1..n)
        .map(|i| TropExpr::Affine(AffineForm::coordinate(dim, frame.side_index(i))))
        .collect();
    for d in target.diagonals() {
        if *d == mv.inserted {
            coords.push(new_coord.clone());
        } else {
            let alpha = t.index_of(d).expect("shared diagonal");
            coords.push(TropExpr::Affine(AffineForm::coordinate(dim, frame.diagonal_index(alpha))));
        }
    }
    Ok(PLMap::from_layer(dim, coords))
}

/// `T_{Γ_1,Γ_2}` in frame coordinates: the composite of the flips along `flip_path`.
/// Flips have monodromy around pentagon cycles, so the map depends on that path.
pub fn transition_map(t1: &Triangulation, t2: &Triangulation, perimeter: Rat) -> Result<PLMap> {
    let path = flip_path(t1, t2)?;
    let mut map = PLMap::identity(2 * t1.n() - 4);
    let mut cur = t1.clone();
    for mv in &path {
        let frame = CoordinateFrame::new(cur.clone(), perimeter);
        map = whitehead_plmap(&frame, mv)?.after(&map)?;
        cur = whitehead_move(&cur, &mv.removed)?.0;
    }
    Ok(map)
}

/// The transition map between bending polytopes at side lengths `r`, in diagonal lengths.
pub fn bending_transition_map(t1: &Triangulation, t2: &Triangulation, r: &[Rat]) -> Result<PLMap> {
    let total = check_side_lengths(t1.n(), r)?;
    let m = t1.n() - 3;
    let embed = PLMap::from_affine(m, bending_embedding(t1, r));
    let frame2 = CoordinateFrame::new(t2.clone(), total);
    let project = PLMap::from_affine(
        frame2.dim(),
        t2.diagonals()
            .iter()
            .map(|d| frame2.length_form(&EdgeLabel::Diagonal(*d)).unwrap())
            .collect(),
    );
    compose_plmaps(m, &[project, transition_map(t1, t2, total)?, embed])
}

/// True iff every affine leaf and scalar in the map is integral.
pub fn integrality_check(map: &PLMap) -> bool {
    map.layers.iter().flatten().all(TropExpr::is_integral)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    NonIntegralImage { point: Vec<i64> },
    OutsideTarget { point: Vec<i64>, image: Vec<i64> },
    Collision { first: Vec<i64>, second: Vec<i64>, image: Vec<i64> },
    Missed { point: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformReport {
    pub passed: bool,
    pub source_points: usize,
    pub target_points: usize,
    pub injective: bool,
    pub image_matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volumes: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Checks that `map` sends the lattice points of `p1` bijectively onto those of
/// `p2`; with `check_volume`, also compares Ehrhart volumes.
pub fn transform_polytope_check(
    map: &PLMap,
    p1: &Polytope,
    p2: &Polytope,
    check_volume: bool,
) -> Result<TransformReport> {
    if p1.dim() != map.in_dim() || p2.dim() != map.out_dim() {
        return Err(Error::InvalidArgument("map and polytope dimensions differ".into()));
    }
    let src = p1.lattice_points()?;
    let dst: BTreeSet<Vec<i64>> = p2.lattice_points()?.into_iter().collect();
    let mut image: BTreeMap<Vec<i64>, Vec<i64>> = BTreeMap::new();
    let mut witness = None;
    let mut injective = true;
    let mut image_matches = true;
    for u in &src {
        let Some(w) = map.apply_int(u) else {
            image_matches = false;
            witness.get_or_insert(Witness::NonIntegralImage { point: u.clone() });
            continue;
        };
        if !dst.contains(&w) {
            image_matches = false;
            witness.get_or_insert(Witness::OutsideTarget { point: u.clone(), image: w.clone() });
        }
        if let Some(prev) = image.get(&w) {
            injective = false;
            witness.get_or_insert(Witness::Collision {
                first: prev.clone(),
                second: u.clone(),
                image: w.clone(),
            });
        } else {
            image.insert(w, u.clone());
        }
    }
    if image_matches && image.len() != dst.len() {
        image_matches = false;
        if let Some(p) = dst.iter().find(|p| !image.contains_key(*p)) {
            witness.get_or_insert(Witness::Missed { point: p.clone() });
        }
    }
    let mut passed = injective && image_matches;
    let volumes = if check_volume {
        let (a, b) = (p1.ehrhart_volume()?, p2.ehrhart_volume()?);
        passed &= a == b;
        Some([fmt_rat(&a), fmt_rat(&b)])
    } else {
        None
    };
    Ok(TransformReport {
        passed,
        source_points: src.len(),
        target_points: dst.len(),
        injective,
        image_matches,
        volumes,
        witness,
    })
}

/// Swaps two output coordinates; a negative control for the checks above.
pub fn swap_outputs(map: &PLMap, i: usize, j: usize) -> PLMap {
    let dim = map.out_dim();
    let mut coords: Vec<TropExpr> = (0..dim)
        .map(|k| TropExpr::Affine(AffineForm::coordinate(dim, k)))
        .collect();
    coords.swap(i, j);
    PLMap::from_layer(dim, coords).after(map).unwrap()
}

/// Adds `c` to output coordinate `i`. Since a nonzero translation never maps a
/// bounded set onto itself, the shifted map always fails the polytope check.
pub fn shift_output(map: &PLMap, i: usize, c: Rat) -> PLMap {
    let dim = map.out_dim();
    let coords: Vec<AffineForm> = (0..dim)
        .map(|k| {
            let f = AffineForm::coordinate(dim, k);
            if k == i { &f + &AffineForm::constant(dim, c) } else { f }
        })
        .collect();
    PLMap::from_affine(dim, coords).after(map).unwrap()
}

/// Whether two maps agree on the given points.
pub fn agree_on(a: &PLMap, b: &PLMap, points: &[Vec<Rat>]) -> bool {
    points.iter().all(|p| a.apply(p) == b.apply(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{caterpillar, enumerate_triangulations, neighbours, Diagonal};
    use crate::polytope::{bending_polytope, moment_polytope};
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn q4(v: [i64; 4]) -> [Rat; 4] {
        v.map(int)
    }

    #[test]
    fn flip_formula_examples() {
        assert_eq!(flip_length(q4([1, 1, 1, 1]), int(1)), int(1));
        assert_eq!(flip_length(q4([3, 1, 1, 2]), int(2)), int(1));
        assert_eq!(flip_length_differences(q4([3, 1, 1, 2]), int(2)), int(1));
    }

    #[test]
    fn min_identity_examples() {
        assert_eq!(min_identity(int(1), int(2)), (int(-2), int(-2)));
        assert_eq!(min_identity(int(0), int(0)), (int(0), int(0)));
        assert_eq!(min_identity(int(-3), int(5)), (int(-5), int(-5)));
    }

    #[test]
    fn empty_composition_is_identity() {
        let p = ints(&[1, -2, 5]);
        let id = compose_plmaps(3, &[]).unwrap();
        assert_eq!(id.apply(&p), p);
        assert!(integrality_check(&id));
        assert!(compose_plmaps(2, &[PLMap::identity(3)]).is_err());
    }

    #[test]
    fn involutive_flip_composed_with_itself() {
        let t = caterpillar(4).unwrap();
        let (s, mv) = whitehead_move(&t, &t.diagonals()[0]).unwrap();
        let there = whitehead_plmap(&CoordinateFrame::new(t.clone(), int(4)), &mv).unwrap();
        let back = whitehead_plmap(&CoordinateFrame::new(s, int(4)), &mv.reverse()).unwrap();
        let round = compose_plmaps(4, &[back, there]).unwrap();
        for u in moment_polytope(&t, int(4)).lattice_points().unwrap() {
            assert_eq!(round.apply_int(&u).unwrap(), u);
        }
    }

    #[test]
    fn pentagon_first_move_on_bending_coordinates() {
        let g1 = Triangulation::from_arcs(5, &[vec![2, 3], vec![2, 3, 4]]).unwrap();
        let mid = Triangulation::from_arcs(5, &[vec![2, 3], vec![4, 5]]).unwrap();
        let r = ints(&[2, 1, 4, 4, 4]);
        let map = bending_transition_map(&g1, &mid, &r).unwrap();
        let p = bending_polytope(&g1, &r).unwrap();
        let d23 = Diagonal::from_arc(5, &[2, 3]).unwrap();
        let d45 = Diagonal::from_arc(5, &[4, 5]).unwrap();
        let (i23, i45) = (mid.index_of(&d23).unwrap(), mid.index_of(&d45).unwrap());
        for x in p.lattice_points().unwrap() {
            // Γ_1 orders (u({2,3}), u({2,3,4})); the image is (u_1, u_2 + u_1 - r_5).
            let (u1, u2) = (int(x[0]), int(x[1]));
            let w = map.apply(&[u1, u2]);
            assert_eq!((w[i23], w[i45]), (u1, u2 + u1 - r[4]));
        }
    }

    #[test]
    fn pentagon_two_step_bijection() {
        let g1 = Triangulation::from_arcs(5, &[vec![2, 3], vec![2, 3, 4]]).unwrap();
        let g2 = Triangulation::from_arcs(5, &[vec![1, 2], vec![4, 5]]).unwrap();
        let r = ints(&[2, 1, 4, 4, 4]);
        let map = bending_transition_map(&g1, &g2, &r).unwrap();
        let p1 = bending_polytope(&g1, &r).unwrap();
        let p2 = bending_polytope(&g2, &r).unwrap();
        let rep = transform_polytope_check(&map, &p1, &p2, true).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.source_points, 15);
    }

    #[test]
    fn moment_flips_are_lattice_bijections() {
        for n in 4..=5 {
            let per = int(n as i64);
            for t in enumerate_triangulations(n).unwrap() {
                let p1 = moment_polytope(&t, per);
                for (s, mv) in neighbours(&t) {
                    let map = whitehead_plmap(&CoordinateFrame::new(t.clone(), per), &mv).unwrap();
                    assert!(integrality_check(&map));
                    let p2 = moment_polytope(&s, per);
                    let rep = transform_polytope_check(&map, &p1, &p2, false).unwrap();
                    assert!(rep.passed, "{t} -> {s}: {rep:?}");
                    let back = whitehead_plmap(&CoordinateFrame::new(s.clone(), per), &mv.reverse()).unwrap();
                    let round = back.after(&map).unwrap();
                    for u in p1.lattice_points().unwrap() {
                        assert_eq!(round.apply_int(&u).unwrap(), u);
                    }
                }
            }
        }
    }

    #[test]
    fn frame_map_matches_length_formula() {
        // In length coordinates the new diagonal obeys the min-formula.
        let per = int(5);
        for t in enumerate_triangulations(5).unwrap() {
            let frame = CoordinateFrame::new(t.clone(), per);
            for (s, mv) in neighbours(&t) {
                let map = whitehead_plmap(&frame, &mv).unwrap();
                let target = CoordinateFrame::new(s.clone(), per);
                for u in moment_polytope(&t, per).lattice_points().unwrap() {
                    let u: Vec<Rat> = u.iter().map(|&x| int(x)).collect();
                    let sides = mv.sides.map(|a| frame.length_form(&a).unwrap().eval(&u));
                    let old = frame.length_form(&EdgeLabel::Diagonal(mv.removed)).unwrap().eval(&u);
                    let w = map.apply(&u);
                    let new = target.length_form(&EdgeLabel::Diagonal(mv.inserted)).unwrap().eval(&w);
                    assert_eq!(new, flip_length(sides, old));
                }
            }
        }
    }

    #[test]
    fn inconsistent_move_is_rejected() {
        let t = caterpillar(5).unwrap();
        let other = Triangulation::from_arcs(5, &[vec![2, 3], vec![4, 5]]).unwrap();
        let (_, mv) = whitehead_move(&other, &other.diagonals()[0]).unwrap();
        assert!(whitehead_plmap(&CoordinateFrame::new(t, int(5)), &mv).is_err());
    }

    #[test]
    fn swapped_map_fails_with_witness() {
        let t = caterpillar(5).unwrap();
        let p = moment_polytope(&t, int(5));
        let bad = swap_outputs(&PLMap::identity(6), 0, 4);
        let rep = transform_polytope_check(&bad, &p, &p, false).unwrap();
        assert!(!rep.passed);
        assert!(rep.witness.is_some());
        let id = transform_polytope_check(&PLMap::identity(6), &p, &p, true).unwrap();
        assert!(id.passed);
    }

    #[test]
    fn half_perimeter_constants_are_not_integral() {
        let t = caterpillar(4).unwrap();
        let (_, mv) = whitehead_move(&t, &t.diagonals()[0]).unwrap();
        let map = whitehead_plmap(&CoordinateFrame::new(t, rat(1, 2)), &mv).unwrap();
        // Constants carry |r|; the 1/2 shows up in the leaves.
        assert!(!integrality_check(&map));
    }

    #[test]
    fn flattened_map_evaluates_like_layers() {
        let ts = enumerate_triangulations(6).unwrap();
        let map = transition_map(&ts[0], &ts[ts.len() - 1], int(6)).unwrap();
        let flat = map.coordinate_exprs();
        for u in moment_polytope(&ts[0], int(6)).lattice_points().unwrap().iter().step_by(97) {
            let q: Vec<Rat> = u.iter().map(|&x| int(x)).collect();
            let a: Vec<Rat> = flat.iter().map(|e| e.eval(&q)).collect();
            assert_eq!(a, map.apply(&q));
        }
        let j = map.to_json();
        assert_eq!(j["coords"].as_array().unwrap().len(), 8);
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-50i64..=50, 1i64..=12).prop_map(|(a, b)| rat(a, b))
    }

    #[test]
    fn seeded_identities() {
        let a = identity_check(11, 300);
        assert!(a.passed);
        assert_eq!(a, identity_check(11, 300));
    }

    #[test]
    fn text_form() {
        let names: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let f = AffineForm::new(vec![int(1), int(-2)], int(3));
        assert_eq!(f.format(&names), "a - 2*b - 3");
        let e = TropExpr::min(vec![TropExpr::Affine(f), TropExpr::Affine(AffineForm::coordinate(2, 1))]);
        assert_eq!(e.format(&names), "min(a - 2*b - 3, b)");
        assert_eq!(AffineForm::constant(2, int(-1)).format(&names), "-1");
    }

    proptest! {
        #[test]
        fn min_identity_holds(a in small_rat(), b in small_rat()) {
            let (l, r) = min_identity(a, b);
            prop_assert_eq!(l, r);
        }

        #[test]
        fn range_lengths_agree(u in prop::array::uniform4(small_rat())) {
            let (a, b) = range_lengths(u);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn two_forms_of_the_flip_agree(u in prop::array::uniform4(small_rat()), d in small_rat()) {
            prop_assert_eq!(flip_length(u, d), flip_length_differences(u, d));
        }
    }
}
