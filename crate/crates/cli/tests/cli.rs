use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn dman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dman")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_atlas_disjoint_cover() {
    let out = dman(&["check-atlas", path(&data("disjoint_atlas.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["atlas"], true);
}

#[test]
fn false_verdict_writes_replayable_witness() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let out = dman(&["check-atlas", path(&data("overlap_nonatlas.json")), "--witness-out", w.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["failure"]["kind"], "intersection");
    let witness: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let replay = dir.path().join("replay.json");
    std::fs::write(&replay, witness["input"].to_string()).unwrap();
    assert_eq!(dman(&["check-atlas", replay.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn vdim_of_square_cospan() {
    let out = dman(&["vdim", path(&data("cospan_x2.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out), serde_json::json!({"vdim": 0}));
}

#[test]
fn betti_of_point_loop() {
    let out = dman(&[
        "betti",
        path(&data("cospan_loop.json")),
        "--point",
        path(&data("p.json")),
        "--jet",
        "2",
        "--levels",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["betti"], serde_json::json!([1, 1, 0]));
    let nerve = dman(&["nerve-betti", path(&data("cospan_loop.json"))]);
    assert_eq!(json_of(&nerve)["betti"], serde_json::json!([1, 1, 0]));
    let two = dman(&["betti", path(&data("cospan_loop.json")), "--target", "2"]);
    assert_eq!(json_of(&two)["betti"], serde_json::json!([2, 2, 0]));
}

#[test]
fn tangent_parabola_is_not_transverse() {
    let out = dman(&["transverse", path(&data("parabola_vs_axis.json")), "--point", path(&data("origin_1_1.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let r = json_of(&out);
    assert_eq!(r["h_minus_1"], 1);
    assert!(r["witness"]["inputs"]["cospan"].is_object());
}

#[test]
fn sweeps_from_the_command_line() {
    let out = dman(&["sweep", "hypercover-equiv", "--points", "3", "--poset", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["instances"], r["agree"]);
    let out = dman(&["sweep", "transversality", "--corpus", "50", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["agree"], 50);
    assert_eq!(dman(&["sweep", "atlas-equiv", "--points", "2"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_deterministic() {
    let args = ["sweep", "sheaf-local", "--points", "2"];
    let a = dman(&args);
    let b = dman(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = dman(&["complete-cover", path(&data("cover.json"))]);
    let d = dman(&["complete-cover", path(&data("cover.json"))]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = dman(&["vdim", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"], "json");

    let closed = dir.path().join("closed.json");
    std::fs::write(
        &closed,
        r#"{"space":{"points":["a","b"],"opens":[[],["a"],["a","b"]]},"index":{"elements":["i"]},"assignment":{"i":["b"]}}"#,
    )
    .unwrap();
    let out = dman(&["check-atlas", closed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"], "assignment_values_open");

    assert_eq!(dman(&["vdim", path(&data("cospan_x2.json")), "--bogus"]).status.code(), Some(2));
    assert_eq!(dman(&["vdim", path(&data("cospan_x2.json")), "--trunc", "9"]).status.code(), Some(2));
    assert_eq!(dman(&["sweep", "sheaf-local", "--points", "4"]).status.code(), Some(2));
}

#[test]
fn hypercover_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    let out = dman(&["atlas-to-hypercover", path(&data("disjoint_atlas.json")), "--trunc", "2"]);
    assert_eq!(out.status.code(), Some(0));
    std::fs::write(&h, &out.stdout).unwrap();
    assert_eq!(dman(&["check-hypercover", h.to_str().unwrap()]).status.code(), Some(0));
    let back = dman(&["hypercover-to-atlas", h.to_str().unwrap()]);
    assert_eq!(back.status.code(), Some(0));
    assert_eq!(json_of(&back)["verdict"], true);
}

#[test]
fn sheafify_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dman(&["sheaf-check", path(&data("sierpinski_constant2.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["failure_open"], "{}");
    let s = dman(&["sheafify", path(&data("sierpinski_constant2.json"))]);
    assert_eq!(s.status.code(), Some(0));
    let sheaf = dir.path().join("sheaf.json");
    std::fs::write(&sheaf, json_of(&s)["sheaf"].to_string()).unwrap();
    assert_eq!(dman(&["sheaf-check", sheaf.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn site_and_composition_commands() {
    assert_eq!(dman(&["check-site", path(&data("discrete_site.json"))]).status.code(), Some(0));
    let out = dman(&["check-site", path(&data("trivial_atlas.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["atlas"], true);
    let out = dman(&["subordinate", path(&data("discrete_site.json")), path(&data("disjoint_atlas.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["is_site"], true);
    let out = dman(&["pullback-atlas", path(&data("disjoint_atlas.json")), "--map", path(&data("identity_map.json"))]);
    assert_eq!(json_of(&out)["input_was_atlas"], true);
}

#[test]
fn small_numeric_commands() {
    assert_eq!(json_of(&dman(&["koszul", "--codim", "2"]))["betti"], serde_json::json!([1, 2, 1]));
    let pl = dman(&["pl-check", "--bound", "3"]);
    assert_eq!(pl.status.code(), Some(0));
    assert_eq!(json_of(&pl)["witness"]["left_quotient"], "1");
    assert_eq!(dman(&["hochschild", path(&data("cospan_x2.json"))]).status.code(), Some(0));
}
