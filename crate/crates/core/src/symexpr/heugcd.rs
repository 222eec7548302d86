//! Heuristic polynomial gcd: evaluate one variable at a large integer,
//! recurse, and read the gcd back from the balanced base-ξ digits of the
//! image. Candidates are accepted only after exact trial division.

use std::collections::BTreeMap;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Atom, Monomial, Poly};

/// Integer polynomial keyed by exponent vectors over a fixed atom list.
type IntPoly = BTreeMap<Vec<u32>, BigInt>;

const ATTEMPTS: usize = 6;

/// `gcd(a, b)` up to a rational factor, or `None` when the heuristic gives up.
pub(super) fn heuristic_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let mut atoms: Vec<Atom> = a.atoms().into_iter().collect();
    for x in b.atoms() {
        if !atoms.contains(&x) {
            atoms.push(x);
        }
    }
    let (fa, fb) = (to_int(a, &atoms), to_int(b, &atoms));
    let g = heu(&fa, &fb)?;
    let g = from_int(&g, &atoms);
    (a.div_exact(&g).is_some() && b.div_exact(&g).is_some()).then_some(g)
}

fn to_int(p: &Poly, atoms: &[Atom]) -> IntPoly {
    let lcm = p.terms().fold(BigInt::one(), |l, (_, c)| l.lcm(c.denom()));
    p.terms()
        .map(|(m, c)| {
            let mut e = vec![0; atoms.len()];
            for (a, k) in m.factors() {
                e[atoms.iter().position(|x| x == a).expect("collected")] = *k;
            }
            (e, (c * BigRational::from_integer(lcm.clone())).to_integer())
        })
        .collect()
}

fn from_int(p: &IntPoly, atoms: &[Atom]) -> Poly {
    Poly::from_terms(p.iter().map(|(e, c)| {
        let m = atoms
            .iter()
            .zip(e)
            .filter(|(_, k)| **k > 0)
            .fold(Monomial::one(), |m, (a, k)| m.mul(&Monomial::atom(a.clone(), *k)));
        (m, BigRational::from_integer(c.clone()))
    }))
}

fn content(p: &IntPoly) -> BigInt {
    p.values().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn max_norm(p: &IntPoly) -> BigInt {
    p.values().map(|c| c.abs()).max().unwrap_or_default()
}

fn divide_ground(p: &IntPoly, k: &BigInt) -> IntPoly {
    p.iter().map(|(e, c)| (e.clone(), c / k)).collect()
}

fn main_var(f: &IntPoly, g: &IntPoly) -> Option<usize> {
    let n = f.keys().chain(g.keys()).map(Vec::len).next()?;
    (0..n).find(|&i| f.keys().chain(g.keys()).any(|e| e[i] > 0))
}

fn degree(p: &IntPoly, x: usize) -> u32 {
    p.keys().map(|e| e[x]).max().unwrap_or(0)
}

/// Largest coefficient among the terms of top degree in `x`.
fn lead_norm(p: &IntPoly, x: usize) -> BigInt {
    let d = degree(p, x);
    p.iter().filter(|(e, _)| e[x] == d).map(|(_, c)| c.abs()).max().unwrap_or_default()
}

fn evaluate(p: &IntPoly, x: usize, xi: &BigInt) -> IntPoly {
    let mut out = IntPoly::new();
    for (e, c) in p {
        let mut k = e.clone();
        k[x] = 0;
        let v = c * xi.pow(e[x]);
        let slot = out.entry(k).or_default();
        *slot += v;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Symmetric residue in `(−ξ/2, ξ/2]`.
fn sym_mod(c: &BigInt, xi: &BigInt) -> BigInt {
    let r = c.mod_floor(xi);
    if &r * 2 > *xi {
        r - xi
    } else {
        r
    }
}

fn interpolate(mut h: IntPoly, x: usize, xi: &BigInt) -> IntPoly {
    let mut out = IntPoly::new();
    let mut i = 0u32;
    while !h.is_empty() {
        let mut next = IntPoly::new();
        for (e, c) in &h {
            let digit = sym_mod(c, xi);
            if !digit.is_zero() {
                let mut k = e.clone();
                k[x] = i;
                out.insert(k, digit.clone());
            }
            let rest = (c - digit) / xi;
            if !rest.is_zero() {
                next.insert(e.clone(), rest);
            }
        }
        h = next;
        i += 1;
    }
    out
}

fn primitive(p: &IntPoly) -> IntPoly {
    let c = content(p);
    let sign = p.iter().next_back().map(|(_, c)| c.sign()).unwrap_or(Sign::Plus);
    let c = if sign == Sign::Minus { -c } else { c };
    divide_ground(p, &c)
}

fn divides(d: &IntPoly, p: &IntPoly) -> bool {
    let n = d.keys().chain(p.keys()).map(Vec::len).next().unwrap_or(0);
    let atoms: Vec<Atom> = (0..n).map(|i| Atom::var(&format!("_{i}"))).collect();
    from_int(p, &atoms).div_exact(&from_int(d, &atoms)).is_some()
}

fn heu(f: &IntPoly, g: &IntPoly) -> Option<IntPoly> {
    if f.is_empty() || g.is_empty() {
        let p = if f.is_empty() { g } else { f };
        return Some(primitive(p));
    }
    let (cf, cg) = (content(f), content(g));
    let c = cf.gcd(&cg);
    let Some(x) = main_var(f, g) else {
        let zero = f.keys().next().expect("nonempty").clone();
        return Some(IntPoly::from([(zero, c)]));
    };
    let (f, g) = (divide_ground(f, &cf), divide_ground(g, &cg));
    let (nf, ng) = (max_norm(&f), max_norm(&g));
    let b: BigInt = 2 * nf.clone().min(ng.clone()) + 29;
    let by_lead = 2 * (nf / lead_norm(&f, x).max(BigInt::one())).min(ng / lead_norm(&g, x).max(BigInt::one())) + 2;
    let mut xi = b.clone().min(99 * b.sqrt()).max(by_lead);
    for _ in 0..ATTEMPTS {
        let (ff, gg) = (evaluate(&f, x, &xi), evaluate(&g, x, &xi));
        if !ff.is_empty() && !gg.is_empty() {
            if let Some(h) = heu(&ff, &gg) {
                let cand = primitive(&interpolate(h, x, &xi));
                if !cand.is_empty() && divides(&cand, &f) && divides(&cand, &g) {
                    return Some(cand.into_iter().map(|(e, k)| (e, k * &c)).collect());
                }
            }
        }
        xi = &xi * 73794 * xi.sqrt().sqrt() / 27011;
    }
    None
}
