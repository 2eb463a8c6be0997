use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pigeom::calculus::FormsArena;
use pigeom::grading::{
    build_named, corner_algebra, validate_algebra, verify_isomorphism, GradedAlgebraMorphism, GradingGroup, HomogeneousElement,
};
use pigeom::identities::{GradedPolynomial, GradedVariable, IdentitySource, KernelConfig, MultilinearPattern, PreparedAlgebra};
use pigeom::io::parse_polynomial;
use pigeom::linalg::{Matrix, Subspace};
use pigeom::morita::{first_diagonal_idempotent, matrix_over};
use pigeom::rational::{fmt_q, parse_q, qr};
use pigeom::sheaves::{check_sheaf, homeomorphism_classes, random_presheaf, sheafify, RandomPresheafConfig};
use pigeom::{Exec, Q};

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| qr(n, d))
}

fn corpus_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["F", "Poly:2", "E:1", "E:2", "UT:2", "Cl:-1", "Fun:2"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rationals_round_trip(x in small_q()) {
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn subspace_basis_ignores_spanning_order(rows in prop::collection::vec(prop::collection::vec(small_q(), 4), 0..6)) {
        let a = Subspace::span(4, rows.clone());
        let b = Subspace::span(4, rows.into_iter().rev());
        prop_assert_eq!(a.basis(), b.basis());
        for v in a.basis() {
            prop_assert!(b.contains(&v));
        }
    }

    #[test]
    fn nullspace_is_annihilated(rows in prop::collection::vec(prop::collection::vec(small_q(), 5), 1..5)) {
        let m = Matrix::from_rows(rows, 5);
        let ns = m.nullspace();
        prop_assert_eq!(ns.len() + m.rank(), 5);
        for v in ns {
            prop_assert!(m.mul_vec(&v).iter().all(|x| *x == Q::from_integer(0.into())));
        }
    }

    #[test]
    fn matrix_algebras_over_corpus_are_valid(name in corpus_name(), n in 1usize..=3) {
        let b = build_named(name).unwrap();
        let m = matrix_over(&b, n).unwrap();
        prop_assert_eq!(m.dim(), n * n * b.dim());
        prop_assert!(validate_algebra(&m).is_pass());
        let e = HomogeneousElement::from_coords(&m, first_diagonal_idempotent(&b, n)).unwrap();
        let c = corner_algebra(&m, &e).unwrap();
        let phi = GradedAlgebraMorphism::new(b.clone(), c.algebra, Matrix::identity(b.dim())).unwrap();
        prop_assert!(verify_isomorphism(&phi).is_pass());
    }

    #[test]
    fn kernels_do_not_depend_on_scheduling(name in corpus_name(), n in 1usize..=3) {
        let a = build_named(name).unwrap().trivialize();
        let p = MultilinearPattern::ungraded(n);
        let prepared = PreparedAlgebra::new(&a);
        let seq = prepared.identity_kernel(&p, &KernelConfig::default().with_exec(Exec::Sequential)).unwrap();
        let par = prepared.identity_kernel(&p, &KernelConfig::default().with_exec(Exec::Parallel)).unwrap();
        prop_assert_eq!(seq.basis, par.basis);
    }

    #[test]
    fn polynomial_text_round_trips(terms in prop::collection::vec((small_q(), prop::collection::vec((1usize..=3, 0i64..=1), 0..4)), 0..4)) {
        let g = GradingGroup::z2();
        let f = GradedPolynomial::from_terms(terms.into_iter().map(|(c, w)| {
            // One degree per variable index keeps the word consistent.
            (w.into_iter().map(|(i, _)| GradedVariable::new(i, g.elem(&[(i % 2) as i64]).unwrap())).collect(), c)
        }));
        prop_assert_eq!(parse_polynomial(&f.to_string(), &g).unwrap(), f);
    }

    #[test]
    fn fedosov_commutator_is_d_wedge_d(seed in any::<u64>()) {
        let arena = FormsArena::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = arena.random_even(1, &mut rng);
        let b = arena.random_even(1, &mut rng);
        let lhs = arena.fedosov_commutator(&a, &b).unwrap();
        let rhs = arena.wedge(&arena.d(&a), &arena.d(&b)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sheafification_is_a_sheaf_and_fixes_sheaves(class in 0usize..12, seed in any::<u64>(), name in prop::sample::select(vec!["F", "Poly:2"])) {
        let classes: Vec<_> = (1..=3).flat_map(homeomorphism_classes).collect();
        let t = &classes[class % classes.len()];
        let a = build_named(name).unwrap();
        let f = random_presheaf(t, &a, &RandomPresheafConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed));
        let sff = sheafify(&f).unwrap();
        prop_assert!(check_sheaf(&sff.sheaf).unwrap().is_pass());
        prop_assert_eq!(sff.eta.is_isomorphism(), check_sheaf(&f).unwrap().is_pass());
        prop_assert!(sff.eta.verify().unwrap().is_pass());
    }
}

#[test]
fn grassmann_source_and_truncation_agree_on_small_patterns() {
    let e = build_named("E:4").unwrap().trivialize();
    let oracle = pigeom::identities::GrassmannOracle::ungraded();
    for n in 1..=2 {
        let p = MultilinearPattern::ungraded(n);
        let cfg = KernelConfig::default();
        assert_eq!(e.kernel(&p, &cfg).unwrap().basis, oracle.kernel(&p, &cfg).unwrap().basis);
    }
}
