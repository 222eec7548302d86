mod common;

use common::*;
use proptest::prelude::*;
use skewform_core::{Chart, DiffForm};

fn sign(p: usize, q: usize) -> i64 {
    if p * q % 2 == 0 {
        1
    } else {
        -1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn d_squared_vanishes(a in any_form(XYZW)) {
        prop_assert!(a.ext_d().ext_d().is_zero());
    }

    #[test]
    fn leibniz_rule((a, b) in (0usize..=2, 0usize..=2).prop_flat_map(|(p, q)| (form_of(XYZ, p), form_of(XYZ, q)))) {
        let lhs = a.wedge(&b).unwrap().ext_d();
        let rhs = a.ext_d().wedge(&b).unwrap().add(&a.wedge(&b.ext_d()).unwrap().scale(&sign(a.degree(), 1).into())).unwrap();
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn graded_anticommutativity(a in form_of(XYZW, 1), b in form_of(XYZW, 2)) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert!(ab.equals(&ba.scale(&sign(1, 2).into())));
        let aa = a.wedge(&a).unwrap();
        prop_assert!(aa.is_zero());
    }

    #[test]
    fn homotopy_inverts_d_on_exact_forms(alpha in poly_form_of(XYZ, 1)) {
        let w = alpha.ext_d();
        let h = w.homotopy_antiderivative(None).unwrap();
        prop_assert!(h.ext_d().equals(&w));
    }

    #[test]
    fn exact_forms_are_closed(f in form_of(XYZ, 0), g in form_of(XYZ, 1)) {
        prop_assert!(f.ext_d().closure_check().unwrap().zero);
        prop_assert!(g.ext_d().closure_check().unwrap().zero);
    }

    #[test]
    fn text_round_trip(a in any_form(XYZ)) {
        // the text "0" carries no degree
        prop_assume!(!a.is_canonical_zero());
        let back = DiffForm::parse(a.chart(), &a.to_string()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn homotopy_of_a_volume_form() {
    let c = Chart::of(&["x", "y", "z"]);
    let vol = DiffForm::parse(&c, "d[x]^d[y]^d[z]").unwrap();
    let h = vol.homotopy_antiderivative(None).unwrap();
    assert_eq!(h, DiffForm::parse(&c, "(x*d[y]^d[z] - y*d[x]^d[z] + z*d[x]^d[y])/3").unwrap());
    assert_eq!(h.ext_d(), vol);
}

#[test]
fn form_json_round_trip() {
    let c = Chart::of(&["x", "y"]);
    let a = DiffForm::parse(&c, "sin(x)*d[x] + exp(y)/(1 + x^2)*d[y]").unwrap();
    assert_eq!(DiffForm::from_json(&a.to_json()).unwrap(), a);
}
