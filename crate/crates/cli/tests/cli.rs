use std::process::{Command, Output};

use serde_json::Value;

fn gr2n(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gr2n")).args(args).output().expect("run gr2n")
}

fn stdout(args: &[&str]) -> String {
    let out = gr2n(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&a)).unwrap()
}

#[test]
fn triangulation_listing() {
    for (n, count) in [(3, 1), (4, 2), (5, 5), (6, 14)] {
        let v = json(&["triangulations", "--n", &n.to_string()]);
        assert_eq!(v["count"], count);
        assert_eq!(v["triangulations"].as_array().unwrap().len(), count);
    }
    let text = stdout(&["triangulations", "--n", "4"]);
    assert_eq!(text, "0: [[1,2]]\n1: [[2,3]]\n");
    assert_eq!(gr2n(&["triangulations", "--n", "11"]).status.code(), Some(2));
}

#[test]
fn reflexive_square() {
    let text = stdout(&["polytope", "--n", "4", "--caterpillar", "--perimeter", "4", "reflexive"]);
    assert!(text.starts_with("true\ninterior (2, 2, 2, 1)"), "{text}");
    let v = json(&["polytope", "reflexive", "--n", "4"]);
    assert_eq!(v["reflexive"], true);
    assert_eq!(v["interior_point"], serde_json::json!([2, 2, 2, 1]));
}

#[test]
fn pentagon_vertices_and_volumes() {
    let listing = json(&["triangulations", "--n", "5"]);
    let mut volumes = Vec::new();
    for arcs in listing["triangulations"].as_array().unwrap() {
        let g = arcs.to_string();
        let v = json(&["polytope", "vertices", "--n", "5", "--gamma", &g]);
        assert_eq!(v["count"], 10);
        volumes.push(json(&["polytope", "volume", "--n", "5", "--gamma", &g])["volume"].clone());
    }
    // Degree 5 of Gr(2,5) times 5^6 / 6!.
    assert!(volumes.iter().all(|v| v == "15625/144"), "{volumes:?}");
}

#[test]
fn dilation_and_lattice_points() {
    let base = stdout(&["polytope", "lattice", "--n", "4", "--perimeter", "2"]);
    let dilated = stdout(&["polytope", "lattice", "--n", "4", "--perimeter", "1", "--dilate", "2"]);
    assert_eq!(base, dilated);
    let v = json(&["polytope", "lattice", "--points", "--n", "4", "--perimeter", "1"]);
    assert_eq!(v["count"].as_u64().unwrap() as usize, v["points"].as_array().unwrap().len());
}

#[test]
fn bending_polytope_facets() {
    let v = json(&["polytope", "hrep", "--n", "5", "--lengths", "1,9/10,1,11/10,1"]);
    assert_eq!(v["dim"], 2);
    let text = stdout(&["polytope", "vertices", "--n", "5", "--lengths", "1,1,1,1,1"]);
    assert_eq!(text, "5 vertices\n(0, 1)\n(1, 0)\n(1, 2)\n(2, 1)\n(2, 2)\n");
}

#[test]
fn pentagon_relations() {
    let g = "[[1,2],[1,2,3]]";
    let text = stdout(&["pluecker", "deform", "--n", "5", "--gamma", g]);
    assert_eq!(
        text,
        "t1*Z12*Z34 - Z13*Z24 + Z14*Z23\n\
         t1*Z12*Z35 - Z13*Z25 + Z15*Z23\n\
         t1*t2*Z12*Z45 - Z14*Z25 + Z15*Z24\n\
         t2*Z13*Z45 - Z14*Z35 + Z15*Z34\n\
         t2*Z23*Z45 - Z24*Z35 + Z25*Z34\n"
    );
    let cf = stdout(&["pluecker", "central-fiber", "--n", "5", "--gamma", g]);
    assert_eq!(cf.lines().count(), 5);
    assert_eq!(cf.lines().next(), Some("-Z13*Z24 + Z14*Z23"));
    let stage = stdout(&["pluecker", "deform", "--stage", "2", "--n", "5", "--gamma", g]);
    assert!(stage.starts_with("Z12*Z34 - Z13*Z24 + Z14*Z23\n"));
    let v = json(&["pluecker", "deform", "--n", "5", "--gamma", g]);
    assert_eq!(v[2]["terms"][0]["t_exp"], serde_json::json!([1, 1]));
}

#[test]
fn potential_emit() {
    let text = stdout(&["potential", "emit", "--n", "4"]);
    assert_eq!(text.lines().count(), 6);
    assert!(text.contains("1 * y_d1^{2/2}"));
    let v = json(&["potential", "emit", "--n", "3"]);
    assert_eq!(v["terms"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_commands() {
    let out = gr2n(&["verify", "all", "--n", "5", "--perimeter", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    let lift = gr2n(&["verify", "lift", "--n", "4", "--from", "caterpillar", "--to", "[[2,3]]"]);
    assert!(lift.status.success());
    let lift = gr2n(&["potential", "lift-verify", "--n", "5", "--from", "[[2,3],[2,3,4]]", "--to", "[[1,2],[4,5]]"]);
    assert!(lift.status.success());
    let pl = gr2n(&["plmap", "verify", "--volume", "--n", "5", "--from", "[[2,3],[2,3,4]]", "--to", "[[1,2],[4,5]]"]);
    assert!(pl.status.success());
}

#[test]
fn negative_control_fails() {
    let out = gr2n(&["verify", "negative-control", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("FAIL"));
}

#[test]
fn gc_commands() {
    let v = json(&["gc", "verify", "--n", "4", "--perimeter", "4"]);
    assert_eq!(v["passed"], true);
    let detail = &v["checks"][0]["detail"];
    assert_eq!(detail["unimodular"], true);
    assert_eq!(detail["lattice_bijection"], true);
    assert_eq!(detail["counts"][0], detail["counts"][1]);
    let e = json(&["gc", "ehx", "--n", "4"]);
    assert_eq!(e["matches"], true);
    assert_eq!(e["term_count"], 6);
}

#[test]
fn plmap_derive() {
    let v = json(&["plmap", "derive", "--n", "4", "--to", "flip:1"]);
    assert_eq!(v["in_dim"], 4);
    assert_eq!(v["coords"].as_array().unwrap().len(), 4);
    let text = stdout(&["plmap", "derive", "--n", "4", "--to", "flip:1"]);
    assert!(text.starts_with("u_e1' = u_e1\n"));
}

#[test]
fn triangulation_inputs_agree() {
    let a = stdout(&["potential", "emit", "--n", "5", "--gamma", "flip:1"]);
    let b = stdout(&["potential", "emit", "--n", "5", "--gamma", "[[1,2,3],[2,3]]"]);
    let c = stdout(&["potential", "emit", "--gamma", r#"{"n":5,"diagonals":[[1,2,3],[2,3]]}"#]);
    assert_eq!(a, b);
    assert_eq!(b, c);
    assert_eq!(gr2n(&["potential", "emit", "--n", "5", "--gamma", "[[1,3]]"]).status.code(), Some(2));
    assert_eq!(gr2n(&["potential", "emit", "--n", "5", "--gamma", "flip:9"]).status.code(), Some(2));
    assert_eq!(gr2n(&["potential", "emit"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "identities", "--seed", "42", "--samples", "200", "--format", "json"];
    assert_eq!(gr2n(&args).stdout, gr2n(&args).stdout);
    let args = ["verify", "all", "--n", "4", "--format", "json"];
    assert_eq!(gr2n(&args).stdout, gr2n(&args).stdout);
}
