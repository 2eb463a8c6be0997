use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_string_lossy().into_owned()
}

fn pigeom(args: &[&str]) -> (i32, Value, Output) {
    let out = Command::new(env!("CARGO_BIN_EXE_pigeom")).args(args).output().expect("binary runs");
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), doc, out)
}

#[test]
fn validates_an_algebra_file() {
    let (code, doc, _) = pigeom(&["algebra", "validate", "--in", &data("m2.json")]);
    assert_eq!(code, 0);
    assert_eq!(doc["verdict"], true);
    assert_eq!(doc["reports"][0]["details"]["dim"], 4);
    assert_eq!(doc["config"]["command"], "algebra validate");
}

#[test]
fn grassmann_degree_three_has_codimension_four() {
    let (code, doc, _) = pigeom(&["identities", "kernel", "--algebra", "E:6", "--degree", "3"]);
    assert_eq!(code, 0);
    assert_eq!(doc["reports"][0]["details"]["codimension"], 4);
}

#[test]
fn polynomial_check_reports_failure_with_exit_one() {
    let (code, doc, _) = pigeom(&["identities", "check", "--algebra", "M:2", "--poly", "[x1,x2]"]);
    assert_eq!(code, 1);
    assert_eq!(doc["verdict"], false);
    assert!(!doc["reports"][0]["witness"].is_null());
}

#[test]
fn constant_presheaf_on_sierpinski_is_a_sheaf_but_not_on_pseudocircle() {
    let ps = data("constant_m2.json");
    let (code, _, _) = pigeom(&["sheaf", "check", "--presheaf", &ps, "--topology", &data("sierpinski.json")]);
    assert_eq!(code, 0);
    let (code, doc, _) = pigeom(&["sheaf", "check", "--presheaf", &ps, "--topology", &data("pseudocircle.json")]);
    assert_eq!(code, 1);
    assert_eq!(doc["reports"][0]["details"]["gluing"], false);
}

#[test]
fn cech_h1_of_the_pseudocircle() {
    let (code, doc, _) = pigeom(&["sheaf", "cech", "--presheaf", &data("circle_e2.json")]);
    assert_eq!(code, 0);
    let d = &doc["reports"][0]["details"];
    // Locally constant with fibre E_2: both groups are copies of the fibre.
    assert_eq!(d["h0"], 4);
    assert_eq!(d["h1"], 4);
}

#[test]
fn pushforward_requires_a_continuous_map() {
    let ps = data("circle_e2.json");
    let target = data("sierpinski.json");
    let ok = pigeom(&["sheaf", "pushforward", "--presheaf", &ps, "--target", &target, "--map", "a=open,b=open,x=closed,y=closed"]);
    assert_eq!(ok.0, 0);
    let bad = pigeom(&["sheaf", "pushforward", "--presheaf", &ps, "--target", &target, "--map", "a=closed,b=closed,x=open,y=open"]);
    assert_eq!(bad.0, 1);
    assert_eq!(bad.1["reports"][0]["check"], "continuity");
}

#[test]
fn morita_certificate_from_a_context_file() {
    let (code, doc, _) = pigeom(&["--in", &data("morita_m2.json"), "morita", "certify", "--degree", "3"]);
    assert_eq!(code, 0);
    let d = &doc["reports"][0]["details"];
    // e11 is not a full idempotent: the corner is the base field, whose
    // identities strictly contain those of M_2.
    assert_eq!(d["corner_dim"], 1);
    assert_eq!(d["matrix_and_corner_kernels_equal"], false);
}

#[test]
fn module_suite_passes() {
    let (code, doc, _) = pigeom(&["suite", "morita_varieties"]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["reports"][0]["details"]["criterion"], "12");
}

#[test]
fn errors_exit_two_with_a_code() {
    let (code, doc, out) = pigeom(&["suite", "no_such_suite"]);
    assert_eq!(code, 2);
    assert_eq!(doc["error"]["code"], "E-PRECOND");
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E-PRECOND]"));

    let (code, doc, _) = pigeom(&["algebra", "validate", "--in", "/nonexistent/a.json"]);
    assert_eq!(code, 2);
    assert_eq!(doc["error"]["code"], "E-IO");

    let (code, _, _) = pigeom(&["identities", "check", "--algebra", "M:2", "--poly", "[x1,"]);
    assert_eq!(code, 2);

    let (code, _, _) = pigeom(&["not-a-command"]);
    assert_eq!(code, 2);
}

#[test]
fn output_is_byte_identical_across_runs_and_modes() {
    let args = ["--seed", "7", "calculus", "fedosov", "--vars", "2", "--cap", "3", "--samples", "20"];
    let a = pigeom(&args).2.stdout;
    let b = pigeom(&args).2.stdout;
    assert_eq!(a, b);

    let kernel = ["identities", "codim", "--algebra", "UT:2", "--degree", "4"];
    let par = pigeom(&kernel).1;
    let mut seq_args = vec!["--sequential"];
    seq_args.extend(kernel);
    let seq = pigeom(&seq_args).1;
    assert_eq!(par["reports"], seq["reports"]);
}

#[test]
fn out_flag_writes_the_document_to_a_file() {
    let path = std::env::temp_dir().join(format!("pigeom-cli-{}.json", std::process::id()));
    let p = path.to_string_lossy().into_owned();
    let (code, _, out) = pigeom(&["--out", &p, "calculus", "hochschild", "--algebra", "UT:2"]);
    assert_eq!(code, 0);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["tool"], "pigeom");
    std::fs::remove_file(path).ok();
}
