//! Sparse multivariate polynomials over ℚ whose indeterminates are [`Atom`]s.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is the
//! graded lexicographic order. The leading term is therefore the last entry.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Expr;

/// Elementary functions admitted inside expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            _ => None,
        }
    }

    pub fn apply_f64(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
        }
    }
}

/// An indeterminate: a named symbol or an elementary function applied to a
/// canonical expression. Variables sort before function applications.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Arc<str>),
    Func(Func, Box<Expr>),
}

impl Atom {
    pub fn var(name: &str) -> Atom {
        Atom::Var(Arc::from(name))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Atom::Var(v) => Some(v),
            Atom::Func(..) => None,
        }
    }
}

/// Power product of atoms, stored sorted by atom with nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, exp: u32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, exp)])
        }
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        self.0
            .binary_search_by(|(x, _)| x.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *a {
                let f = other.0[j].1;
                if f > *e {
                    return None;
                }
                if *e > f {
                    out.push((a.clone(), e - f));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *a {
                return None;
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes `a` entirely, returning its exponent and the rest.
    pub fn split_off(&self, a: &Atom) -> (u32, Monomial) {
        let mut rest = Vec::with_capacity(self.0.len());
        let mut exp = 0;
        for (x, e) in &self.0 {
            if x == a {
                exp = *e;
            } else {
                rest.push((x.clone(), *e));
            }
        }
        (exp, Monomial(rest))
    }

    fn halve(&self) -> Option<Monomial> {
        self.0
            .iter()
            .map(|(a, e)| (e % 2 == 0).then(|| (a.clone(), e / 2)))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // lex: the first atom (in atom order) with differing exponent decides,
        // a larger exponent on an earlier atom means a larger monomial
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, e)), Some((b, f))) => match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match e.cmp(f) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with rational coefficients. No stored coefficient
/// is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn atom(a: Atom) -> Self {
        Poly::term(Monomial::atom(a, 1), BigRational::one())
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub(super) fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&Monomial::one()))
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            Some(BigRational::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn lead(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(a, _)| a.clone()))
            .collect()
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        self.terms.keys().any(|m| m.exponent(a) > 0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(n, c)| (n.mul(m), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Poly::zero();
        for (m, c) in &small.terms {
            for (n, d) in &large.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact quotient `self / d`. Returns `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.lead()?;
        if let Some(k) = d.constant_value() {
            return Some(self.scale(&k.recip()));
        }
        let mut q = Poly::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.lead() {
            let m = rm.div(dm)?;
            let c = rc / dc;
            r = r.sub(&d.mul_term(&m, &c));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Poly {
        match self.lead() {
            Some((_, c)) => {
                let k = c.recip();
                self.scale(&k)
            }
            None => Poly::zero(),
        }
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms.keys().map(|m| m.exponent(a)).max().unwrap_or(0)
    }

    /// View as a univariate polynomial in `a` with polynomial coefficients.
    pub fn coeffs_in(&self, a: &Atom) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(a);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    fn lcoeff_in(&self, a: &Atom) -> Poly {
        self.coeffs_in(a)
            .into_iter()
            .next_back()
            .map(|(_, p)| p)
            .unwrap_or_default()
    }

    /// Formal partial derivative with respect to an atom.
    pub fn partial(&self, a: &Atom) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(a);
            if e > 0 {
                let m2 = rest.mul(&Monomial::atom(a.clone(), e - 1));
                out.add_term(m2, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Square root when `self` is the square of a polynomial. The root is
    /// returned with positive leading coefficient.
    pub fn sqrt(&self) -> Option<Poly> {
        let (lm, lc) = match self.lead() {
            Some(t) => t,
            None => return Some(Poly::zero()),
        };
        let root_m = lm.halve()?;
        let root_c = rational_sqrt(lc)?;
        let mut root = Poly::term(root_m.clone(), root_c.clone());
        let two_lead = &root_c * BigRational::from_integer(BigInt::from(2));
        let mut last: Option<Monomial> = None;
        loop {
            let rem = self.sub(&root.mul(&root));
            let Some((rm, rc)) = rem.lead() else {
                return Some(root);
            };
            let m = rm.div(&root_m)?;
            if let Some(prev) = &last {
                if m >= *prev {
                    return None;
                }
            }
            if m >= root_m {
                return None;
            }
            let c = rc / &two_lead;
            root.add_term(m.clone(), c);
            last = Some(m);
        }
    }
}

/// Square root of a nonnegative rational if it is a perfect square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

/// Greatest common divisor, normalized to be monic (or zero when both are zero).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if let Some(g) = trivial_gcd(a, b) {
        return g;
    }
    if coprime_mod_p(a, b) {
        return Poly::one();
    }
    if let Some(g) = super::heugcd::heuristic_gcd(a, b) {
        return g.monic();
    }
    gcd_prs(a, b)
}

fn trivial_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    if a.is_zero() {
        return Some(b.monic());
    }
    if b.is_zero() {
        return Some(a.monic());
    }
    if a.is_constant() || b.is_constant() {
        return Some(Poly::one());
    }
    (a == b).then(|| a.monic())
}

/// Recursive primitive-PRS gcd; the slow path.
fn gcd_prs(a: &Poly, b: &Poly) -> Poly {
    if let Some(g) = trivial_gcd(a, b) {
        return g;
    }
    let atoms_a = a.atoms();
    let atoms_b = b.atoms();
    if let Some(x) = atoms_a.difference(&atoms_b).next() {
        // b is free of x, so the gcd divides every coefficient of a in x
        return gcd_many(a.coeffs_in(x).values(), b.clone());
    }
    if let Some(x) = atoms_b.difference(&atoms_a).next() {
        return gcd_many(b.coeffs_in(x).values(), a.clone());
    }
    let x = atoms_a.iter().next().expect("nonconstant polynomial has atoms").clone();
    let ca = content_in(a, &x);
    let cb = content_in(b, &x);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = prs_gcd(pa, pb, &x);
    g.mul(&c).monic()
}

fn gcd_many<'a>(polys: impl Iterator<Item = &'a Poly>, start: Poly) -> Poly {
    let mut g = start;
    for p in polys {
        g = gcd(&g, p);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g.monic()
}

fn content_in(p: &Poly, x: &Atom) -> Poly {
    let coeffs = p.coeffs_in(x);
    let mut it = coeffs.values();
    let first = it.next().cloned().unwrap_or_default();
    gcd_many(it, first)
}

fn primitive_in(p: &Poly, x: &Atom) -> Poly {
    let c = content_in(p, x);
    p.div_exact(&c).expect("content divides").monic()
}

/// Primitive pseudo-remainder sequence for polynomials primitive in `x`.
fn prs_gcd(a: Poly, b: Poly, x: &Atom) -> Poly {
    let (mut f, mut g) = if a.degree_in(x) >= b.degree_in(x) { (a, b) } else { (b, a) };
    loop {
        let r = prem(&f, &g, x);
        if r.is_zero() {
            return primitive_in(&g, x);
        }
        if r.degree_in(x) == 0 {
            return Poly::one();
        }
        f = g;
        g = primitive_in(&r, x);
    }
}

fn prem(f: &Poly, g: &Poly, x: &Atom) -> Poly {
    let dg = g.degree_in(x);
    let lc = g.lcoeff_in(x);
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(x) >= dg {
        let dr = r.degree_in(x);
        let lr = r.lcoeff_in(x);
        let shift = Poly::term(Monomial::atom(x.clone(), dr - dg), BigRational::one());
        r = r.mul(&lc).sub(&lr.mul(&shift).mul(g));
    }
    r
}

const PRIME: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

fn int_mod(n: &BigInt) -> u64 {
    use num_traits::ToPrimitive;
    let p = BigInt::from(PRIME);
    (((n % &p) + &p) % &p).to_u64().expect("reduced below the prime")
}

fn rational_mod(q: &BigRational) -> Option<u64> {
    let d = int_mod(q.denom());
    (d != 0).then(|| mulmod(int_mod(q.numer()), powmod(d, PRIME - 2)))
}

/// Image of `p` in `F_P[x]` with every other atom replaced by `point`.
fn univariate_image(p: &Poly, x: &Atom, point: &BTreeMap<&Atom, u64>) -> Option<Vec<u64>> {
    let mut out = vec![0u64; p.degree_in(x) as usize + 1];
    for (m, c) in &p.terms {
        let mut v = rational_mod(c)?;
        let mut k = 0;
        for (a, e) in m.factors() {
            if a == x {
                k = *e as usize;
            } else {
                v = mulmod(v, powmod(point[a], *e as u64));
            }
        }
        out[k] = (out[k] + v) % PRIME;
    }
    Some(out)
}

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Degree of the gcd in `F_P[x]`; `None` when both are zero.
fn univariate_gcd_degree(mut f: Vec<u64>, mut g: Vec<u64>) -> Option<usize> {
    trim(&mut f);
    trim(&mut g);
    while !g.is_empty() {
        let inv = powmod(*g.last().expect("nonempty"), PRIME - 2);
        while f.len() >= g.len() {
            let k = mulmod(*f.last().expect("nonempty"), inv);
            let shift = f.len() - g.len();
            for (i, gi) in g.iter().enumerate() {
                f[shift + i] = (f[shift + i] + PRIME - mulmod(k, *gi)) % PRIME;
            }
            trim(&mut f);
        }
        std::mem::swap(&mut f, &mut g);
    }
    f.len().checked_sub(1)
}

/// Cheap certificate that `gcd(a, b) = 1`. For each shared atom `x`, both
/// polynomials are mapped to `F_P[x]` at a point where the leading
/// coefficient of `a` in `x` survives; the image of the true gcd divides
/// the image gcd and keeps its degree, so a constant image gcd proves
/// `x` does not occur in the gcd. `false` means "unknown".
fn coprime_mod_p(a: &Poly, b: &Poly) -> bool {
    let atoms_a = a.atoms();
    let atoms_b = b.atoms();
    let all: Vec<&Atom> = atoms_a.union(&atoms_b).collect();
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        // splitmix64
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        (z ^ (z >> 31)) % PRIME
    };
    for x in atoms_a.intersection(&atoms_b) {
        let point: BTreeMap<&Atom, u64> = all.iter().map(|v| (*v, next())).collect();
        let (Some(fa), Some(fb)) = (univariate_image(a, x, &point), univariate_image(b, x, &point)) else {
            return false;
        };
        if fa.last() == Some(&0) {
            return false;
        }
        if univariate_gcd_degree(fa, fb) != Some(0) {
            return false;
        }
    }
    true
}
