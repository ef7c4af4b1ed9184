use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gr2n::combinatorics::{
    caterpillar, enumerate_triangulations, neighbours, whitehead_move, Diagonal, Triangulation,
};
use gr2n::gelfand_cetlin::{ehx_form, gc_equivalence_check};
use gr2n::plmap::{
    identity_check, shift_output, transform_polytope_check, transition_map, TransformReport,
};
use gr2n::pluecker::{
    central_fiber, deformed_relations, one_param_family, restrict_to_parameter, singular_strata,
    weight_matrix, DeformedRelation,
};
use gr2n::polytope::{
    bending_polytope, fixed_point_image, moment_polytope, predicted_vertices, reflexivity_check,
    CoordinateFrame, DEFAULT_MAX_DIM,
};
use gr2n::rational::{fmt_rat, int, parse_rat};
use gr2n::symbolic::{lift_verify, potential, tropical_flip_map};
use gr2n::{Error, Rat, Result};

#[derive(Parser)]
#[command(name = "gr2n", version, about = "Exact computations for toric degenerations of Gr(2,n)")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Number of polygon sides.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// `|r|` as an integer, `p/q` or decimal; defaults to n.
    #[arg(long, global = true)]
    perimeter: Option<String>,
    /// `caterpillar`, a JSON list of arcs such as `[[1,2],[1,2,3]]`, a JSON
    /// object `{"n":5,"diagonals":[...]}`, or a flip word `flip:2,1`.
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Shorthand for `--gamma caterpillar`.
    #[arg(long, global = true)]
    caterpillar: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest dimension for Ehrhart volumes.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// List all triangulations of the n-gon by canonical arcs.
    Triangulations,
    /// Moment or bending polytope of a triangulation.
    Polytope {
        #[command(subcommand)]
        action: PolytopeAction,
        /// Dilation factor applied before the action.
        #[arg(long, global = true)]
        dilate: Option<i64>,
        /// Side lengths `r_1,...,r_n`; selects the bending polytope.
        #[arg(long, global = true)]
        lengths: Option<String>,
    },
    /// Piecewise-linear transition maps between moment polytopes.
    Plmap {
        #[command(subcommand)]
        action: PlmapAction,
    },
    /// Potential functions and their geometric lifts.
    Potential {
        #[command(subcommand)]
        action: PotentialAction,
    },
    /// Deformed Plücker relations and the toric central fiber.
    Pluecker {
        #[command(subcommand)]
        action: PlueckerAction,
    },
    /// Caterpillar as a Gelfand–Cetlin system.
    Gc {
        #[command(subcommand)]
        action: GcAction,
    },
    /// Run checks; exits nonzero if any fails.
    Verify {
        what: VerifyWhat,
        #[command(flatten)]
        pair: Pair,
        /// Samples for the randomized identity check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum PolytopeAction {
    /// Halfspace representation.
    Hrep,
    Vertices,
    /// Number of lattice points.
    Lattice {
        /// Also list the points.
        #[arg(long)]
        points: bool,
    },
    /// Exact volume from Ehrhart counts.
    Volume,
    /// Reflexivity at |r| = n.
    Reflexive,
    /// Moment images of the torus fixed points at |r| = n.
    FixedPoints,
}

#[derive(Args)]
struct Pair {
    /// Source triangulation; defaults to --gamma.
    #[arg(long)]
    from: Option<String>,
    /// Target triangulation.
    #[arg(long)]
    to: Option<String>,
}

#[derive(Subcommand)]
enum PlmapAction {
    /// Print the composed transition map.
    Derive(Pair),
    /// Check the map bijects lattice points.
    Verify {
        #[command(flatten)]
        pair: Pair,
        /// Also compare Ehrhart volumes.
        #[arg(long)]
        volume: bool,
    },
}

#[derive(Subcommand)]
enum PotentialAction {
    Emit,
    /// Substitute the lifts along a flip path and compare potentials.
    LiftVerify(Pair),
}

#[derive(Subcommand)]
enum PlueckerAction {
    /// Deformed relations; with --stage, the one-parameter family of that diagonal.
    Deform {
        /// 1-based diagonal index.
        #[arg(long)]
        stage: Option<usize>,
    },
    CentralFiber,
    /// Doubled tree-path weights of each Z_ij.
    Weights,
    /// Singular strata, one per diagonal.
    Strata,
}

#[derive(Subcommand)]
enum GcAction {
    /// Unimodularity and lattice bijection with the pattern polytope.
    Verify,
    /// Potential in pattern variables.
    Ehx,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyWhat {
    All,
    Plmap,
    Lift,
    Trop,
    Gc,
    Pluecker,
    Invariance,
    Reflexive,
    Vertices,
    Identities,
    /// A deliberately corrupted transition map; always fails.
    NegativeControl,
}

struct Output {
    ok: bool,
    text: String,
    json: Value,
}

impl Output {
    fn info(text: String, json: Value) -> Self {
        Output { ok: true, text, json }
    }
}

struct Check {
    name: String,
    passed: bool,
    summary: String,
    detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, summary: impl Into<String>, detail: Value) -> Self {
        Check { name: name.into(), passed, summary: summary.into(), detail }
    }
}

fn checks_output(checks: Vec<Check>) -> Output {
    let ok = checks.iter().all(|c| c.passed);
    let text = checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.summary))
        .collect::<Vec<_>>()
        .join("\n");
    let json = json!({
        "passed": ok,
        "checks": checks.iter().map(|c| json!({
            "name": c.name, "passed": c.passed, "summary": c.summary, "detail": c.detail,
        })).collect::<Vec<_>>(),
    });
    Output { ok, text, json }
}

struct Ctx {
    n: Option<usize>,
    perimeter: Option<Rat>,
    gamma: Option<String>,
    seed: u64,
    max_dim: usize,
}

impl Ctx {
    fn from_global(g: &Global) -> Result<Self> {
        let perimeter = g.perimeter.as_deref().map(parse_rat).transpose()?;
        if perimeter.is_some_and(|p| p <= Rat::from_integer(0)) {
            return Err(Error::InvalidArgument("--perimeter must be positive".into()));
        }
        let gamma = if g.caterpillar { Some("caterpillar".to_string()) } else { g.gamma.clone() };
        Ok(Ctx { n: g.n, perimeter, gamma, seed: g.seed, max_dim: g.max_dim })
    }

    fn n(&self) -> Result<usize> {
        if let Some(n) = self.n {
            return Ok(n);
        }
        if let Some(t) = self.gamma.as_deref().and_then(|g| parse_object(g).ok()) {
            return Ok(t.n());
        }
        Err(Error::InvalidArgument("--n is required".into()))
    }

    fn perimeter(&self) -> Result<Rat> {
        Ok(self.perimeter.unwrap_or_else(|| int(self.n().unwrap_or(0) as i64)))
    }

    fn gamma(&self) -> Result<Triangulation> {
        self.parse(self.gamma.as_deref().unwrap_or("caterpillar"))
    }

    fn parse(&self, input: &str) -> Result<Triangulation> {
        let input = input.trim();
        if let Ok(t) = parse_object(input) {
            if self.n.is_some_and(|n| n != t.n()) {
                return Err(Error::InvalidArgument(format!("triangulation has n = {}", t.n())));
            }
            return Ok(t);
        }
        let n = self.n()?;
        if input == "caterpillar" {
            return caterpillar(n);
        }
        if let Some(word) = input.strip_prefix("flip:") {
            let mut t = caterpillar(n)?;
            for tok in word.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let a: usize = tok.parse().map_err(|_| Error::Parse(format!("flip index {tok:?}")))?;
                let d = *t
                    .diagonals()
                    .get(a.wrapping_sub(1))
                    .ok_or_else(|| Error::InvalidArgument(format!("no diagonal d{a} in {t}")))?;
                t = whitehead_move(&t, &d)?.0;
            }
            return Ok(t);
        }
        let arcs: Vec<Vec<usize>> = serde_json::from_str(input)
            .map_err(|e| Error::Parse(format!("triangulation {input:?}: {e}")))?;
        Triangulation::from_arcs(n, &arcs)
    }

    fn pair(&self, pair: &Pair) -> Result<(Triangulation, Option<Triangulation>)> {
        let from = match &pair.from {
            Some(s) => self.parse(s)?,
            None => self.gamma()?,
        };
        let to = pair.to.as_deref().map(|s| self.parse(s)).transpose()?;
        Ok((from, to))
    }
}

fn parse_object(input: &str) -> Result<Triangulation> {
    serde_json::from_str(input).map_err(|e| Error::Parse(e.to_string()))
}

fn arcs_json(t: &Triangulation) -> Value {
    json!(t.arcs())
}

fn arcs_text(t: &Triangulation) -> String {
    serde_json::to_string(&t.arcs()).unwrap()
}

fn rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

fn tuple_text(v: &[String]) -> String {
    format!("({})", v.join(", "))
}

fn cmd_triangulations(ctx: &Ctx) -> Result<Output> {
    let ts = enumerate_triangulations(ctx.n()?)?;
    let text = ts.iter().enumerate().map(|(i, t)| format!("{i}: {}", arcs_text(t))).collect::<Vec<_>>();
    let json = json!({ "n": ctx.n()?, "count": ts.len(), "triangulations": ts.iter().map(arcs_json).collect::<Vec<_>>() });
    Ok(Output::info(text.join("\n"), json))
}

fn cmd_polytope(ctx: &Ctx, action: &PolytopeAction, dilate: Option<i64>, lengths: Option<&str>) -> Result<Output> {
    let t = ctx.gamma()?;
    let n = t.n();
    match action {
        PolytopeAction::Reflexive => {
            let rep = reflexivity_check(&t)?;
            let text = format!(
                "{}\ninterior {}\nfacets {} (bad {})",
                rep.reflexive,
                tuple_text(&rep.interior_point.iter().map(ToString::to_string).collect::<Vec<_>>()),
                rep.facets,
                rep.bad_facets
            );
            return Ok(Output::info(text, serde_json::to_value(&rep).unwrap()));
        }
        PolytopeAction::FixedPoints => {
            let per = ctx.perimeter.unwrap_or_else(|| int(n as i64));
            let mut text = Vec::new();
            let mut js = Vec::new();
            for k in 1..=n {
                for l in k + 1..=n {
                    let img = rats(&fixed_point_image(&t, k, l, per));
                    text.push(format!("p{k},{l}: {}", tuple_text(&img)));
                    js.push(json!({ "pair": [k, l], "image": img }));
                }
            }
            return Ok(Output::info(text.join("\n"), json!(js)));
        }
        _ => {}
    }
    let (mut p, names) = match lengths {
        Some(s) => {
            let r: Vec<Rat> = s.split(',').map(parse_rat).collect::<Result<_>>()?;
            let names = (1..=n - 3).map(|a| format!("x{a}")).collect();
            (bending_polytope(&t, &r)?, names)
        }
        None => {
            let frame = CoordinateFrame::new(t.clone(), ctx.perimeter()?);
            (moment_polytope(&t, ctx.perimeter()?), frame.variable_names())
        }
    };
    if let Some(k) = dilate {
        if k <= 0 {
            return Err(Error::InvalidArgument("--dilate must be positive".into()));
        }
        p = p.dilate(int(k));
    }
    Ok(match action {
        PolytopeAction::Hrep => {
            let text = p
                .halfspaces()
                .iter()
                .map(|f| format!("{} >= {}", f.format_linear(&names), fmt_rat(&f.tau)))
                .collect::<Vec<_>>();
            Output::info(text.join("\n"), serde_json::to_value(&p).unwrap())
        }
        PolytopeAction::Vertices => {
            let mut vs: Vec<Vec<String>> = p.vertices().iter().map(|v| rats(v)).collect();
            vs.sort();
            let text = vs.iter().map(|v| tuple_text(v)).collect::<Vec<_>>().join("\n");
            Output::info(format!("{} vertices\n{text}", vs.len()), json!({ "count": vs.len(), "vertices": vs }))
        }
        PolytopeAction::Lattice { points } => {
            let pts = p.lattice_points()?;
            let mut text = pts.len().to_string();
            let mut js = json!({ "count": pts.len() });
            if *points {
                for u in &pts {
                    text.push('\n');
                    text.push_str(&tuple_text(&u.iter().map(ToString::to_string).collect::<Vec<_>>()));
                }
                js["points"] = json!(pts);
            }
            Output::info(text, js)
        }
        PolytopeAction::Volume => {
            let v = p.ehrhart_volume_with_limit(ctx.max_dim)?;
            Output::info(fmt_rat(&v), json!({ "volume": fmt_rat(&v), "dim": p.dim() }))
        }
        PolytopeAction::Reflexive | PolytopeAction::FixedPoints => unreachable!(),
    })
}

fn require_to(to: Option<Triangulation>) -> Result<Triangulation> {
    to.ok_or_else(|| Error::InvalidArgument("--to is required".into()))
}

fn transform_summary(rep: &TransformReport) -> String {
    let mut s = format!("{} -> {} lattice points", rep.source_points, rep.target_points);
    if let Some([a, b]) = &rep.volumes {
        s.push_str(&format!(", volumes {a} / {b}"));
    }
    if let Some(w) = &rep.witness {
        s.push_str(&format!(", witness {}", serde_json::to_string(w).unwrap()));
    }
    s
}

fn cmd_plmap(ctx: &Ctx, action: &PlmapAction) -> Result<Output> {
    let per = ctx.perimeter()?;
    match action {
        PlmapAction::Derive(pair) => {
            let (t1, t2) = ctx.pair(pair)?;
            let t2 = require_to(t2)?;
            let map = transition_map(&t1, &t2, per)?;
            let src = CoordinateFrame::new(t1, per).variable_names();
            let dst = CoordinateFrame::new(t2, per).variable_names();
            let text = map
                .coordinate_exprs()
                .iter()
                .zip(&dst)
                .map(|(e, name)| format!("{name}' = {}", e.format(&src)))
                .collect::<Vec<_>>();
            Ok(Output::info(text.join("\n"), map.to_json()))
        }
        PlmapAction::Verify { pair, volume } => {
            let (t1, t2) = ctx.pair(pair)?;
            let t2 = require_to(t2)?;
            let rep = plmap_check(&t1, &t2, per, *volume)?;
            Ok(checks_output(vec![rep]))
        }
    }
}

fn plmap_check(t1: &Triangulation, t2: &Triangulation, per: Rat, volume: bool) -> Result<Check> {
    let map = transition_map(t1, t2, per)?;
    let rep = transform_polytope_check(&map, &moment_polytope(t1, per), &moment_polytope(t2, per), volume)?;
    Ok(Check::new(
        format!("plmap {} -> {}", arcs_text(t1), arcs_text(t2)),
        rep.passed,
        transform_summary(&rep),
        serde_json::to_value(&rep).unwrap(),
    ))
}

fn lift_check(t1: &Triangulation, t2: &Triangulation) -> Result<Check> {
    let rep = lift_verify(t1, t2)?;
    Ok(Check::new(
        format!("lift {} -> {}", arcs_text(t1), arcs_text(t2)),
        rep.passed,
        format!("{} step(s), term counts {:?}", rep.steps, rep.term_counts),
        serde_json::to_value(&rep).unwrap(),
    ))
}

fn cmd_potential(ctx: &Ctx, action: &PotentialAction) -> Result<Output> {
    match action {
        PotentialAction::Emit => {
            let t = ctx.gamma()?;
            let p = potential(&t);
            let text = p.format(Some(&t)).replace(" + ", "\n+ ");
            Ok(Output::info(text, json!({ "triangulation": arcs_json(&t), "terms": p.to_json(Some(&t)) })))
        }
        PotentialAction::LiftVerify(pair) => {
            let (t1, t2) = ctx.pair(pair)?;
            Ok(checks_output(vec![lift_check(&t1, &require_to(t2)?)?]))
        }
    }
}

fn relations_output(rels: &[DeformedRelation]) -> Output {
    let text = rels.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n");
    Output::info(text, serde_json::to_value(rels).unwrap())
}

fn cmd_pluecker(ctx: &Ctx, action: &PlueckerAction) -> Result<Output> {
    let t = ctx.gamma()?;
    Ok(match action {
        PlueckerAction::Deform { stage: None } => relations_output(&deformed_relations(&t)),
        PlueckerAction::Deform { stage: Some(a) } => {
            if *a == 0 {
                return Err(Error::InvalidArgument("--stage is 1-based".into()));
            }
            relations_output(&one_param_family(&t, a - 1)?)
        }
        PlueckerAction::CentralFiber => relations_output(&central_fiber(&t).generators),
        PlueckerAction::Weights => {
            let w = weight_matrix(&t);
            let rows: Vec<(String, Vec<u8>)> = w.rows().map(|(z, r)| (z.to_string(), r.to_vec())).collect();
            let text = rows
                .iter()
                .map(|(z, r)| format!("{z}: {}", r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")))
                .collect::<Vec<_>>();
            let js: serde_json::Map<String, Value> = rows.into_iter().map(|(z, r)| (z, json!(r))).collect();
            Output::info(text.join("\n"), Value::Object(js))
        }
        PlueckerAction::Strata => {
            let strata = singular_strata(&t);
            let text = strata
                .iter()
                .map(|s| {
                    let coords = s.coordinates().iter().map(|(a, d)| format!("Z[{a},{d}]")).collect::<Vec<_>>();
                    format!("{}: {}", s.diagonal, coords.join(" = "))
                })
                .collect::<Vec<_>>();
            Output::info(text.join("\n"), serde_json::to_value(&strata).unwrap())
        }
    })
}

fn cmd_gc(ctx: &Ctx, action: &GcAction) -> Result<Output> {
    let n = ctx.n()?;
    Ok(match action {
        GcAction::Verify => checks_output(vec![gc_check(n, ctx.perimeter()?)?]),
        GcAction::Ehx => {
            let rep = ehx_form(n)?;
            let text = format!(
                "{}\n{}",
                if rep.matches { "matches arrow-ratio form" } else { "does not match arrow-ratio form" },
                rep.terms.join("\n")
            );
            Output { ok: rep.matches, text, json: serde_json::to_value(&rep).unwrap() }
        }
    })
}

fn gc_check(n: usize, per: Rat) -> Result<Check> {
    let rep = gc_equivalence_check(n, per)?;
    Ok(Check::new(
        "gc",
        rep.unimodular && rep.lattice_bijection,
        format!(
            "unimodular {}, lattice bijection {}, counts {:?}",
            rep.unimodular, rep.lattice_bijection, rep.counts
        ),
        serde_json::to_value(&rep).unwrap(),
    ))
}

/// Ordered pairs of adjacent triangulations.
fn adjacent_pairs(n: usize) -> Result<Vec<(Triangulation, Triangulation, Diagonal)>> {
    let mut out = Vec::new();
    for t in enumerate_triangulations(n)? {
        for (s, mv) in neighbours(&t) {
            out.push((t.clone(), s, mv.removed));
        }
    }
    Ok(out)
}

fn pairs_for(ctx: &Ctx, pair: &Pair) -> Result<Vec<(Triangulation, Triangulation)>> {
    if pair.from.is_none() && pair.to.is_none() {
        return Ok(adjacent_pairs(ctx.n()?)?.into_iter().map(|(a, b, _)| (a, b)).collect());
    }
    let (t1, t2) = ctx.pair(pair)?;
    Ok(vec![(t1, require_to(t2)?)])
}

fn aggregate(name: &str, checks: Vec<Check>) -> Check {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    let summary = match failed.first() {
        None => format!("{} case(s)", checks.len()),
        Some(c) => format!("{} of {} failed; first: {} ({})", failed.len(), checks.len(), c.name, c.summary),
    };
    let detail = json!(checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect::<Vec<_>>());
    Check::new(name, failed.is_empty(), summary, detail)
}

fn skipped(name: &str, why: &str) -> Check {
    Check::new(name, true, format!("skipped: {why}"), json!({ "skipped": why }))
}

fn verify_plmap(ctx: &Ctx, pair: &Pair) -> Result<Check> {
    let per = ctx.perimeter()?;
    let checks = pairs_for(ctx, pair)?
        .iter()
        .map(|(a, b)| plmap_check(a, b, per, false))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate("plmap", checks))
}

fn verify_lift(ctx: &Ctx, pair: &Pair) -> Result<Check> {
    let checks = pairs_for(ctx, pair)?.iter().map(|(a, b)| lift_check(a, b)).collect::<Result<Vec<_>>>()?;
    Ok(aggregate("lift", checks))
}

fn verify_trop(ctx: &Ctx) -> Result<Check> {
    let per = ctx.perimeter()?;
    let mut checks = Vec::new();
    for (t, s, d) in adjacent_pairs(ctx.n()?)? {
        let frame = CoordinateFrame::new(t.clone(), per);
        let (_, mv) = whitehead_move(&t, &d)?;
        let trop = tropical_flip_map(&frame, &mv)?;
        let pl = gr2n::plmap::whitehead_plmap(&frame, &mv)?;
        let pts = moment_polytope(&t, per).lattice_points()?;
        let bad = pts.iter().find(|u| trop.apply_int(u) != pl.apply_int(u));
        checks.push(Check::new(
            format!("trop {} -> {}", arcs_text(&t), arcs_text(&s)),
            bad.is_none(),
            match bad {
                None => format!("{} points", pts.len()),
                Some(u) => format!("differ at {u:?}"),
            },
            json!({ "points": pts.len() }),
        ));
    }
    Ok(aggregate("trop", checks))
}

fn verify_pluecker(ctx: &Ctx) -> Result<Check> {
    let mut checks = Vec::new();
    for t in enumerate_triangulations(ctx.n()?)? {
        let rels = deformed_relations(&t);
        let nonbinomial = rels
            .iter()
            .filter(|r| r.terms.iter().filter(|x| x.t_exp.iter().all(|&e| e == 0)).count() != 2)
            .count();
        let consistent = (0..t.diagonals().len()).all(|a| {
            one_param_family(&t, a).unwrap() == rels.iter().map(|r| restrict_to_parameter(r, a)).collect::<Vec<_>>()
        });
        checks.push(Check::new(
            format!("pluecker {}", arcs_text(&t)),
            nonbinomial == 0 && consistent,
            format!("{} relations, {nonbinomial} not binomial, stages consistent {consistent}", rels.len()),
            json!({ "relations": rels.len(), "non_binomial": nonbinomial, "stages_consistent": consistent }),
        ));
    }
    Ok(aggregate("pluecker", checks))
}

fn verify_invariance(ctx: &Ctx) -> Result<Check> {
    let n = ctx.n()?;
    let per = ctx.perimeter()?;
    let ts = enumerate_triangulations(n)?;
    let counts: Vec<usize> = ts
        .iter()
        .map(|t| moment_polytope(t, per).lattice_points().map(|p| p.len()))
        .collect::<Result<_>>()?;
    let dim = 2 * n - 4;
    let volumes: Option<Vec<Rat>> = if dim <= ctx.max_dim {
        Some(ts.iter().map(|t| moment_polytope(t, per).ehrhart_volume_with_limit(ctx.max_dim)).collect::<Result<_>>()?)
    } else {
        None
    };
    let same_counts = counts.windows(2).all(|w| w[0] == w[1]);
    let same_volumes = volumes.as_ref().is_none_or(|v| v.windows(2).all(|w| w[0] == w[1]));
    let summary = match &volumes {
        Some(v) => format!("lattice counts {:?}, volumes {:?}", counts, rats(v)),
        None => format!("lattice counts {counts:?}, volume skipped (dim {dim} > max-dim {})", ctx.max_dim),
    };
    Ok(Check::new(
        "invariance",
        same_counts && same_volumes,
        summary,
        json!({ "counts": counts, "volumes": volumes.map(|v| rats(&v)) }),
    ))
}

fn at_standard_perimeter(ctx: &Ctx) -> Result<bool> {
    Ok(ctx.perimeter()? == int(ctx.n()? as i64))
}

fn verify_reflexive(ctx: &Ctx) -> Result<Check> {
    if !at_standard_perimeter(ctx)? {
        return Ok(skipped("reflexive", "requires |r| = n"));
    }
    let mut checks = Vec::new();
    for t in enumerate_triangulations(ctx.n()?)? {
        let rep = reflexivity_check(&t)?;
        checks.push(Check::new(
            format!("reflexive {}", arcs_text(&t)),
            rep.reflexive,
            format!("{} facets, {} bad, {} interior points", rep.facets, rep.bad_facets, rep.interior_lattice_points),
            serde_json::to_value(&rep).unwrap(),
        ));
    }
    Ok(aggregate("reflexive", checks))
}

fn verify_vertices(ctx: &Ctx) -> Result<Check> {
    if !at_standard_perimeter(ctx)? {
        return Ok(skipped("vertices", "requires |r| = n"));
    }
    let n = ctx.n()?;
    let mut checks = Vec::new();
    for t in enumerate_triangulations(n)? {
        let mut got: Vec<Vec<Rat>> = moment_polytope(&t, int(n as i64)).vertices();
        got.sort();
        let mut want: Vec<Vec<Rat>> =
            predicted_vertices(&t).iter().map(|v| v.iter().map(|&x| int(x)).collect()).collect();
        want.sort();
        want.dedup();
        let ok = got == want && want.len() == n * (n - 1) / 2;
        checks.push(Check::new(
            format!("vertices {}", arcs_text(&t)),
            ok,
            format!("{} vertices, {} fixed points", got.len(), want.len()),
            json!({ "vertices": got.len(), "fixed_points": want.len() }),
        ));
    }
    Ok(aggregate("vertices", checks))
}

fn verify_identities(ctx: &Ctx, samples: usize) -> Check {
    let rep = identity_check(ctx.seed, samples);
    Check::new(
        "identities",
        rep.passed,
        format!(
            "{samples} samples, seed {}, failures {}/{}/{}",
            ctx.seed, rep.min_identity_failures, rep.range_length_failures, rep.flip_form_failures
        ),
        serde_json::to_value(&rep).unwrap(),
    )
}

fn verify_gc(ctx: &Ctx) -> Result<Check> {
    let n = ctx.n()?;
    if n < 4 {
        return Ok(skipped("gc", "requires n >= 4"));
    }
    let mut c = gc_check(n, ctx.perimeter()?)?;
    let ehx = ehx_form(n)?;
    c.passed &= ehx.matches;
    c.summary.push_str(&format!(", ehx form {}", if ehx.matches { "matches" } else { "differs" }));
    Ok(c)
}

fn negative_control(ctx: &Ctx, pair: &Pair) -> Result<Check> {
    let per = ctx.perimeter()?;
    let (t1, t2) = ctx.pair(pair)?;
    let t2 = match t2 {
        Some(t) => t,
        None => neighbours(&t1)
            .into_iter()
            .next()
            .map(|(s, _)| s)
            .ok_or_else(|| Error::InvalidArgument("triangulation has no neighbours".into()))?,
    };
    let map = transition_map(&t1, &t2, per)?;
    let bad = shift_output(&map, map.out_dim() - 1, int(1));
    let rep = transform_polytope_check(&bad, &moment_polytope(&t1, per), &moment_polytope(&t2, per), false)?;
    Ok(Check::new(
        format!("negative-control {} -> {}", arcs_text(&t1), arcs_text(&t2)),
        rep.passed,
        transform_summary(&rep),
        serde_json::to_value(&rep).unwrap(),
    ))
}

fn cmd_verify(ctx: &Ctx, what: VerifyWhat, pair: &Pair, samples: usize) -> Result<Output> {
    let checks = match what {
        VerifyWhat::All => vec![
            verify_plmap(ctx, pair)?,
            verify_lift(ctx, pair)?,
            verify_trop(ctx)?,
            verify_pluecker(ctx)?,
            verify_invariance(ctx)?,
            verify_reflexive(ctx)?,
            verify_vertices(ctx)?,
            verify_gc(ctx)?,
            verify_identities(ctx, samples),
        ],
        VerifyWhat::Plmap => vec![verify_plmap(ctx, pair)?],
        VerifyWhat::Lift => vec![verify_lift(ctx, pair)?],
        VerifyWhat::Trop => vec![verify_trop(ctx)?],
        VerifyWhat::Gc => vec![verify_gc(ctx)?],
        VerifyWhat::Pluecker => vec![verify_pluecker(ctx)?],
        VerifyWhat::Invariance => vec![verify_invariance(ctx)?],
        VerifyWhat::Reflexive => vec![verify_reflexive(ctx)?],
        VerifyWhat::Vertices => vec![verify_vertices(ctx)?],
        VerifyWhat::Identities => vec![verify_identities(ctx, samples)],
        VerifyWhat::NegativeControl => vec![negative_control(ctx, pair)?],
    };
    Ok(checks_output(checks))
}

fn run(cli: &Cli) -> Result<Output> {
    let ctx = Ctx::from_global(&cli.global)?;
    match &cli.command {
        Command::Triangulations => cmd_triangulations(&ctx),
        Command::Polytope { action, dilate, lengths } => cmd_polytope(&ctx, action, *dilate, lengths.as_deref()),
        Command::Plmap { action } => cmd_plmap(&ctx, action),
        Command::Potential { action } => cmd_potential(&ctx, action),
        Command::Pluecker { action } => cmd_pluecker(&ctx, action),
        Command::Gc { action } => cmd_gc(&ctx, action),
        Command::Verify { what, pair, samples } => cmd_verify(&ctx, *what, pair, *samples),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let body = match cli.global.format {
                Format::Text => out.text,
                Format::Json => serde_json::to_string_pretty(&out.json).unwrap(),
            };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
