mod common;

use common::*;
use proptest::prelude::*;
use skewform_core::catalog::canonical_check;
use skewform_core::relations::{
    classify, classify_on, degenerate_scan, integrate_chain, interior_d, poisson_bracket, pullback, Classification,
    Pseudostructure, Relation, ScanKind,
};
use skewform_core::{Chart, DiffForm, Expr};

/// Maps `(u, v) ↦ (x, y, z)` with the identity on the first two slots plus
/// polynomial corrections; candidates of deficient rank are discarded.
fn surface() -> impl Strategy<Value = Pseudostructure> {
    prop::collection::vec(poly(UV, 2), 3).prop_filter_map("rank", |p| {
        let map = vec![Expr::symbol("u") + p[0].clone(), Expr::symbol("v") + p[1].clone(), p[2].clone()];
        Pseudostructure::new(&Chart::of(XYZ), &Chart::of(UV), map).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pullback_commutes_with_d(s in surface(), a in (0usize..=2).prop_flat_map(|p| form_of(XYZ, p))) {
        let lhs = pullback(&a, &s).unwrap().ext_d();
        let rhs = pullback(&a.ext_d(), &s).unwrap();
        prop_assert!(lhs.equals(&rhs));
        prop_assert!(interior_d(&a, &s).unwrap().equals(&rhs));
    }

    #[test]
    fn pullback_respects_wedge(s in surface(), a in form_of(XYZ, 1), b in form_of(XYZ, 1)) {
        let lhs = pullback(&a.wedge(&b).unwrap(), &s).unwrap();
        let rhs = pullback(&a, &s).unwrap().wedge(&pullback(&b, &s).unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn exact_relations_are_identical(psi in (0usize..=2).prop_flat_map(|p| form_of(XYZ, p)), s in surface()) {
        let r = Relation::new(psi.clone(), psi.ext_d()).unwrap();
        prop_assert_eq!(classify(&r).unwrap().classification, Classification::Identical);
        prop_assert_eq!(classify_on(&r, &s).unwrap().classification, Classification::Identical);
    }

    #[test]
    fn classification_follows_closure(psi in form_of(XYZ, 1), w in form_of(XYZ, 2)) {
        let v = classify(&Relation::new(psi.clone(), w.clone()).unwrap()).unwrap();
        let expected = if w.equals(&psi.ext_d()) {
            Classification::Identical
        } else if w.is_closed() {
            Classification::ClosedRhs
        } else {
            Classification::Nonidentical
        };
        prop_assert_eq!(v.classification, expected);
        prop_assert!(v.commutator.equals(&w.ext_d()));
    }

    #[test]
    fn chain_step_is_a_verified_primitive(alpha in poly_form_of(XYZ, 1), psi in poly_form_of(XYZ, 1)) {
        let w = alpha.ext_d();
        let steps = integrate_chain(&Relation::new(psi.clone(), w.clone()).unwrap(), None, 8).unwrap();
        prop_assert!(!steps.is_empty());
        let first = &steps[0];
        prop_assert!(first.theta_verified);
        prop_assert!(first.theta.ext_d().equals(&w));
        // ψ − θ is closed exactly when dψ = ω
        prop_assert_eq!(first.remainder_closed, psi.ext_d().equals(&w));
        for pair in steps.windows(2) {
            prop_assert!(pair[0].remainder_closed);
            prop_assert_eq!(pair[1].degree() + 1, pair[0].degree());
        }
    }

    #[test]
    fn poisson_bracket_is_a_lie_bracket(f in poly(&["q", "p", "r", "s"], 3), g in poly(&["q", "p", "r", "s"], 3), h in poly(&["q", "p", "r", "s"], 2)) {
        let pairs = vec![("q".to_string(), "p".to_string()), ("r".to_string(), "s".to_string())];
        let pb = |a: &Expr, b: &Expr| poisson_bracket(a, b, &pairs);
        prop_assert_eq!(pb(&f, &g), -pb(&g, &f));
        let jacobi = pb(&f, &pb(&g, &h)) + pb(&g, &pb(&h, &f)) + pb(&h, &pb(&f, &g));
        prop_assert!(jacobi.is_zero());
    }

    #[test]
    fn shears_are_canonical(a in poly(&["q"], 3), b in poly(&["p"], 3)) {
        // (q, p) ↦ (q, p + a'(q)) and (q, p) ↦ (q + b'(p), p) preserve dq ∧ dp
        let c = Chart::of(&["q", "p"]);
        let pairs = vec![("q".to_string(), "p".to_string())];
        let kick = canonical_check(&c, &pairs, &[(e("q"), Expr::symbol("p") + a.diff("q"))]).unwrap();
        prop_assert!(kick.is_canonical);
        let w = kick.generating_function.unwrap();
        prop_assert!(DiffForm::scalar(&c, w).ext_d().equals(&kick.sigma));
        let drift = canonical_check(&c, &pairs, &[(Expr::symbol("q") + b.diff("p"), e("p"))]).unwrap();
        prop_assert!(drift.is_canonical);
    }
}

#[test]
fn identity_map_is_canonical() {
    let c = Chart::of(&["q1", "p1", "q2", "p2"]);
    let pairs = vec![("q1".to_string(), "p1".to_string()), ("q2".to_string(), "p2".to_string())];
    let r = canonical_check(&c, &pairs, &[(e("q1"), e("p1")), (e("q2"), e("p2"))]).unwrap();
    assert!(r.is_canonical && r.sigma.is_canonical_zero());
}

#[test]
fn scans_are_seeded() {
    let c = Chart::of(&["q", "p"]);
    let kind = ScanKind::Poisson { pairs: vec![("q".into(), "p".into())] };
    let exprs = [e("q^2 + p^2"), e("q*p")];
    let a = degenerate_scan(&exprs, &kind, &c, 7).unwrap();
    let b = degenerate_scan(&exprs, &kind, &c, 7).unwrap();
    let other = degenerate_scan(&exprs, &kind, &c, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.points, other.points);
    for p in &a.points {
        assert!((p[0].abs() - p[1].abs()).abs() < 1e-9 * (1.0 + p[0].abs()));
    }
}
