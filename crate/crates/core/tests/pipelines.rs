//! End-to-end runs through the public API, starting from description files.

use serde_json::json;

use pigeom::grading::{build_matrix_algebra, build_named, matrix_idempotent};
use pigeom::identities::{patterns_of_degree, IdentitySource, KernelConfig};
use pigeom::io::{algebra_to_json, parse_polynomial, Loader, PresheafFile};
use pigeom::linalg::Matrix;
use pigeom::morita::{corner_variety_certificate, matrix_over, MoritaContext};
use pigeom::sheaves::{
    build_recovering_morphism, cech_h1, check_locally_ringed, check_sheaf, constant_presheaf, constant_sheaf, sheafify, FiniteTopology,
    RecoveringOptions, VectorPresheaf,
};

#[test]
fn presheaf_file_to_sheaf_verdicts() {
    let dir = std::env::temp_dir().join(format!("pigeom-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("m2.json"), serde_json::to_string(&algebra_to_json(&build_named("M:2").unwrap())).unwrap()).unwrap();
    std::fs::write(
        dir.join("circle.json"),
        json!({"points": ["a", "b", "x", "y"], "opens": [[], [0], [1], [0, 1], [0, 1, 2], [0, 1, 3], [0, 1, 2, 3]]}).to_string(),
    )
    .unwrap();
    let ps = json!({"topology": "circle.json", "kind": "constant", "algebra": "m2.json"});
    std::fs::write(dir.join("ps.json"), ps.to_string()).unwrap();

    let f = Loader::new(&dir).presheaf(&json!("ps.json")).unwrap();
    assert_eq!(f.topology(), &FiniteTopology::pseudocircle());
    let r = check_sheaf(&f).unwrap();
    assert!(!r.is_pass());
    assert_eq!(r.witness.unwrap()["axiom"], "gluing");
    let sff = sheafify(&f).unwrap();
    assert!(check_sheaf(&sff.sheaf).unwrap().is_pass());
    assert!(!check_locally_ringed(&sff.sheaf).unwrap().is_pass());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn explicit_presheaf_file_round_trips_through_json_text() {
    let f = constant_sheaf(&FiniteTopology::sierpinski(), &build_named("E:2").unwrap());
    let text = serde_json::to_string(&PresheafFile::from_presheaf(&f)).unwrap();
    let back = Loader::default().presheaf(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, f);
}

#[test]
fn cech_of_literal_and_locally_constant_presheaves() {
    let t = FiniteTopology::pseudocircle();
    let f = build_named("F").unwrap();
    assert_eq!(cech_h1(&VectorPresheaf::from_algebras(&constant_sheaf(&t, &f))).unwrap(), 1);
    assert_eq!(cech_h1(&VectorPresheaf::from_algebras(&constant_presheaf(&t, &f))).unwrap(), 0);
}

#[test]
fn matrix_kernels_lie_in_corner_kernels() {
    let cfg = KernelConfig::default();
    for name in ["F", "Poly:2", "E:2", "UT:2"] {
        let b = build_named(name).unwrap();
        let m = matrix_over(&b, 2).unwrap();
        let support = m.support().union(&b.support()).cloned().collect();
        for n in 1..=3 {
            for p in patterns_of_degree(b.group(), &support, n) {
                let km = m.kernel(&p, &cfg).unwrap().subspace();
                let kb = b.kernel(&p, &cfg).unwrap().subspace();
                assert!(km.is_subspace_of(&kb), "{name} at {}", p.describe());
            }
        }
    }
}

#[test]
fn full_idempotent_gives_equal_kernels() {
    let cfg = KernelConfig::default();
    let b = build_named("F").unwrap();
    let ctx = MoritaContext::new(build_matrix_algebra(3, None).unwrap(), b, 3, matrix_idempotent(3, 3)).with_iso(Matrix::identity(9));
    let r = corner_variety_certificate(&ctx, 3, &cfg).unwrap();
    assert!(r.is_pass());
    assert_eq!(r.details["matrix_and_corner_kernels_equal"], true);
}

#[test]
fn recovering_morphism_needs_compatible_varieties() {
    let t = FiniteTopology::sierpinski();
    let e4 = build_named("E:4").unwrap().trivialize();
    let m2 = build_named("M:2").unwrap();
    let f = constant_sheaf(&t, &e4);
    let g = constant_sheaf(&t, &m2);
    let out = build_recovering_morphism(&f, &g, 4, &RecoveringOptions::default()).unwrap();
    assert!(!out.report.is_pass());
    assert_eq!(out.report.witness.unwrap()["failed_hypothesis"], "variety_inclusion");
}

#[test]
fn standard_polynomial_from_text() {
    let g = pigeom::grading::GradingGroup::trivial();
    let s4 = parse_polynomial("s4(x1,x2,x3,x4)", &g).unwrap();
    let cfg = KernelConfig::default();
    assert!(pigeom::identities::is_graded_identity(&s4, &build_named("M:2").unwrap(), &cfg).unwrap().is_pass());
    assert!(!pigeom::identities::is_graded_identity(&s4, &build_named("M:3").unwrap(), &cfg).unwrap().is_pass());
}
