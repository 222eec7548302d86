mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use skewform_core::duality::Metric;
use skewform_core::manifold::Connection;
use skewform_core::{Chart, Error, Expr};

const N: usize = 3;

fn pair_index(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // upper-triangular position of (a, b) among 6 pairs
    [0, 1, 2, 1, 3, 4, 2, 4, 5][a * N + b]
}

fn symmetric_connection() -> impl Strategy<Value = Connection> {
    prop::collection::vec(poly(XYZ, 2), N * 6).prop_map(|c| {
        Connection::from_fn(&Chart::of(XYZ), |s, a, b| c[s * 6 + pair_index(a, b)].clone())
    })
}

fn any_connection() -> impl Strategy<Value = Connection> {
    prop::collection::vec(poly(XYZ, 2), N * N * N)
        .prop_map(|c| Connection::from_fn(&Chart::of(XYZ), |s, a, b| c[(s * N + a) * N + b].clone()))
}

/// `diag(f₁², f₂², f₃²)` with each `fᵢ` nonconstant or offset from zero.
fn square_diagonal_metric() -> impl Strategy<Value = Metric> {
    prop::collection::vec((1i64..=3, poly(XYZ, 2)), N).prop_filter_map("degenerate", |fs| {
        let entries = fs.into_iter().map(|(k, p)| {
            let f = Expr::int(k) + p;
            &f * &f
        });
        Metric::diagonal(&Chart::of(XYZ), entries.collect()).ok()
    })
}

fn at(point: &[f64]) -> BTreeMap<String, f64> {
    XYZ.iter().map(|v| v.to_string()).zip(point.iter().copied()).collect()
}

fn value(e: &Expr, point: &[f64]) -> f64 {
    e.eval_f64(&at(point)).unwrap()
}

/// Curvature from numerically evaluated connection coefficients and
/// central differences, independent of the symbolic path.
fn riemann_fd(c: &Connection, point: &[f64]) -> Vec<f64> {
    let gamma = |p: &[f64], s: usize, a: usize, b: usize| value(c.get(s, a, b), p);
    let h = 1e-4;
    let dgamma = |mu: usize, s: usize, a: usize, b: usize| {
        let mut plus = point.to_vec();
        let mut minus = point.to_vec();
        plus[mu] += h;
        minus[mu] -= h;
        (gamma(&plus, s, a, b) - gamma(&minus, s, a, b)) / (2.0 * h)
    };
    let mut out = Vec::new();
    for rho in 0..N {
        for sigma in 0..N {
            for mu in 0..N {
                for nu in 0..N {
                    let mut r = dgamma(mu, rho, nu, sigma) - dgamma(nu, rho, mu, sigma);
                    for l in 0..N {
                        r += gamma(point, rho, mu, l) * gamma(point, l, nu, sigma)
                            - gamma(point, rho, nu, l) * gamma(point, l, mu, sigma);
                    }
                    out.push(r);
                }
            }
        }
    }
    out
}

fn points(seed: u64, count: usize) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..N).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn torsion_is_antisymmetric(c in any_connection()) {
        let t = c.torsion();
        for s in 0..N {
            for a in 0..N {
                for b in 0..N {
                    prop_assert_eq!(t.get(&[s, a, b]).clone(), -t.get(&[s, b, a]));
                }
            }
        }
    }

    #[test]
    fn symmetric_connection_reduces_to_plain_commutator(c in symmetric_connection(), a in form_of(XYZ, 1)) {
        prop_assert!(c.torsion_free_check().zero);
        let k = c.evo_commutator(&a).unwrap();
        prop_assert!(k.equality_check(&a.commutator1().unwrap()).zero);
        prop_assert!(c.evo_d(&a).unwrap().equals(&a.ext_d()));
    }

    #[test]
    fn first_bianchi_for_symmetric_connections(c in symmetric_connection()) {
        prop_assert!(c.bianchi_first_check().unwrap().zero);
    }

    #[test]
    fn curvature_matches_finite_differences(c in symmetric_connection(), seed in any::<u64>()) {
        let r = c.riemann();
        for p in points(seed, 2) {
            let fd = riemann_fd(&c, &p);
            for (k, (idx, e)) in r.entries().enumerate() {
                let sym = value(e, &p);
                prop_assert!((sym - fd[k]).abs() <= 1e-6 * sym.abs().max(1.0), "{:?}: {} vs {}", idx, sym, fd[k]);
            }
        }
    }

    #[test]
    fn levi_civita_is_metric_compatible(g in square_diagonal_metric(), seed in any::<u64>()) {
        let c = Connection::levi_civita(&g);
        prop_assert!(c.torsion_free_check().zero);
        prop_assert!(c.bianchi_first_check().unwrap().zero);
        // ∂_μ g_{αβ} = Γ^λ_{μα} g_{λβ} + Γ^λ_{μβ} g_{αλ}
        let m = g.matrix();
        let h = 1e-5;
        for p in points(seed, 2) {
            for mu in 0..N {
                for a in 0..N {
                    for b in 0..N {
                        let mut plus = p.clone();
                        let mut minus = p.clone();
                        plus[mu] += h;
                        minus[mu] -= h;
                        let lhs = (value(m.get(a, b), &plus) - value(m.get(a, b), &minus)) / (2.0 * h);
                        let rhs: f64 = (0..N)
                            .map(|l| {
                                value(c.get(l, mu, a), &p) * value(m.get(l, b), &p)
                                    + value(c.get(l, mu, b), &p) * value(m.get(a, l), &p)
                            })
                            .sum();
                        prop_assert!((lhs - rhs).abs() <= 1e-5 * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
                    }
                }
            }
        }
    }
}

#[test]
fn curvature_of_sphere_and_half_plane() {
    let c = Chart::of(&["th", "ph"]);
    let sphere = Metric::diagonal(&c, vec![Expr::one(), e("sin(th)^2")]).unwrap();
    let r = Connection::levi_civita(&sphere).riemann();
    // R^th_{ph th ph} = sin²θ on the unit sphere
    assert!((r.get(&[0, 1, 0, 1]) - &e("sin(th)^2")).is_zero());
    let half_plane = Metric::diagonal(&c, vec![e("1/ph^2"), e("1/ph^2")]).unwrap();
    let r = Connection::levi_civita(&half_plane).riemann();
    assert_eq!(r.get(&[0, 1, 0, 1]).clone(), e("-1/ph^2"));
}

#[test]
fn irrational_volume_is_refused() {
    let c = Chart::of(&["x", "y"]);
    assert!(matches!(Metric::diagonal(&c, vec![e("1 + x^2"), Expr::one()]), Err(Error::IrrationalVolume(_))));
}

#[test]
fn torsion_fixture_and_guard() {
    let c = Chart::of(&["x", "y"]);
    let g = Connection::from_entries(&c, [((0, 1, 0), e("x"))]).unwrap();
    assert_eq!(g.torsion().get(&[0, 0, 1]).clone(), e("x"));
    let a = skewform_core::DiffForm::parse(&c, "y*d[x]").unwrap();
    assert_eq!(g.evo_commutator(&a).unwrap().get(0, 1).clone(), e("-1 + x*y"));
    assert_eq!(g.bianchi_first_check(), Err(Error::TorsionPresent));
}
