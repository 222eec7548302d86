use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{gcd, Atom, Func, Monomial, Poly};
use super::ExprError;

/// Canonical symbolic scalar: a reduced quotient `num / den` of polynomials
/// over ℚ in atoms (symbols and elementary function applications).
///
/// The denominator is monic and coprime to the numerator, so equal rational
/// functions have structurally equal representations. Zero is `0 / 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(q: BigRational) -> Expr {
        Expr { num: Poly::constant(q), den: Poly::one() }
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::from_poly(Poly::atom(Atom::var(name)))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr { num: p, den: Poly::one() }
    }

    /// Applies an elementary function, folding the exact values at 0 and 1.
    pub fn apply(f: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_rational() {
            if c.is_zero() {
                match f {
                    Func::Sin => return Expr::zero(),
                    Func::Cos | Func::Exp => return Expr::one(),
                    Func::Ln => {}
                }
            } else if c.is_one() && f == Func::Ln {
                return Expr::zero();
            }
        }
        Expr::from_poly(Poly::atom(Atom::Func(f, Box::new(arg))))
    }

    pub fn sin(self) -> Expr {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::apply(Func::Cos, self)
    }

    pub fn exp(self) -> Expr {
        Expr::apply(Func::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::apply(Func::Ln, self)
    }

    pub(crate) fn from_parts(num: Poly, den: Poly) -> Result<Expr, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        if let Some(k) = den.constant_value() {
            return Ok(Expr { num: num.scale(&k.recip()), den: Poly::one() });
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        let lc = den.lead().expect("nonzero denominator").1.recip();
        Ok(Expr { num: num.scale(&lc), den: den.scale(&lc) })
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    /// Structural zero test on the canonical form.
    pub fn is_canonical_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.den.is_constant() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    pub fn is_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    /// True when no elementary function occurs anywhere in the expression.
    pub fn is_rational(&self) -> bool {
        self.num.atoms().iter().chain(self.den.atoms().iter()).all(|a| matches!(a, Atom::Var(_)))
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant() && self.is_rational()
    }

    /// True when the expression is a polynomial in `vars` whose coefficients
    /// may depend on any other symbols (rationally or through functions).
    pub fn is_polynomial_in(&self, vars: &[Arc<str>]) -> bool {
        let depends = |a: &Atom| match a {
            Atom::Var(v) => vars.contains(v),
            Atom::Func(_, arg) => arg.depends_on_any(vars),
        };
        !self.den.atoms().iter().any(depends)
            && !self.num.atoms().iter().any(|a| matches!(a, Atom::Func(..)) && depends(a))
    }

    pub fn depends_on_any(&self, vars: &[Arc<str>]) -> bool {
        self.free_symbols().iter().any(|s| vars.iter().any(|v| v.as_ref() == s.as_ref()))
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.free_symbols().iter().any(|s| s.as_ref() == var)
    }

    /// Every symbol occurring in the expression, including inside function
    /// arguments.
    pub fn free_symbols(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Arc<str>>) {
        for a in self.num.atoms().into_iter().chain(self.den.atoms()) {
            match a {
                Atom::Var(v) => {
                    out.insert(v);
                }
                Atom::Func(_, arg) => arg.collect_symbols(out),
            }
        }
    }

    pub fn has_functions(&self) -> bool {
        !self.is_rational()
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        if other.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Expr::from_parts(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        Expr::one().checked_div(self)
    }

    pub fn powi(&self, e: i64) -> Result<Expr, ExprError> {
        let n = u32::try_from(e.unsigned_abs()).map_err(|_| ExprError::ExponentTooLarge(e))?;
        let p = Expr { num: self.num.pow(n), den: self.den.pow(n) };
        if e < 0 {
            p.recip()
        } else {
            Ok(p)
        }
    }

    pub fn scale(&self, k: &BigRational) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(k), den: self.den.clone() }
    }

    /// Partial derivative with respect to the symbol `var`.
    pub fn diff(&self, var: &str) -> Expr {
        let dn = poly_diff(&self.num, var);
        if self.den.is_one_poly() {
            return dn;
        }
        let dd = poly_diff(&self.den, var);
        if dd.is_canonical_zero() {
            return dn.mul_poly_div(&Poly::one(), &self.den);
        }
        // (n' d - n d') / d^2
        let n = Expr::from_poly(self.num.clone());
        let d = Expr::from_poly(self.den.clone());
        let top = &(&dn * &d) - &(&n * &dd);
        top.checked_div(&(&d * &d)).expect("denominator is nonzero")
    }

    fn mul_poly_div(&self, num: &Poly, den: &Poly) -> Expr {
        Expr::from_parts(self.num.mul(num), self.den.mul(den)).expect("nonzero denominator")
    }

    /// Simultaneous substitution of symbols by expressions.
    pub fn subs(&self, map: &BTreeMap<Arc<str>, Expr>) -> Result<Expr, ExprError> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        let mut cache = BTreeMap::new();
        let n = poly_subs(&self.num, map, &mut cache)?;
        let d = poly_subs(&self.den, map, &mut cache)?;
        n.checked_div(&d)
    }

    pub fn subs_one(&self, name: &str, value: &Expr) -> Result<Expr, ExprError> {
        let mut map = BTreeMap::new();
        map.insert(Arc::from(name), value.clone());
        self.subs(&map)
    }

    /// Exact evaluation for rational expressions.
    pub fn eval_exact(&self, point: &BTreeMap<String, BigRational>) -> Result<BigRational, ExprError> {
        let n = poly_eval_exact(&self.num, point)?;
        let d = poly_eval_exact(&self.den, point)?;
        if d.is_zero() {
            return Err(ExprError::Pole);
        }
        Ok(n / d)
    }

    /// Floating evaluation; `lookup` supplies symbol values.
    pub fn eval_f64_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        let n = poly_eval_f64(&self.num, lookup)?;
        let d = poly_eval_f64(&self.den, lookup)?;
        if d == 0.0 {
            return Err(ExprError::Pole);
        }
        let v = n / d;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain)
        }
    }

    pub fn eval_f64(&self, point: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
        self.eval_f64_with(&|s| point.get(s).copied())
    }

    /// Value of the numerator, the denominator, and the sum of absolute
    /// values of the numerator's terms at a floating point.
    pub(crate) fn eval_parts_f64(
        &self,
        lookup: &dyn Fn(&str) -> Option<f64>,
    ) -> Result<(f64, f64, f64), ExprError> {
        let mut atom_vals = BTreeMap::new();
        let mut num = 0.0;
        let mut scale = 0.0;
        for (m, c) in self.num.terms() {
            let t = c.to_f64().unwrap_or(f64::NAN) * monomial_f64(m, lookup, &mut atom_vals)?;
            num += t;
            scale += t.abs();
        }
        let den = poly_eval_f64(&self.den, lookup)?;
        Ok((num, den, scale))
    }

    /// Compiles to a fast numeric evaluator over the given symbol order.
    pub fn compile(&self, symbols: &[&str]) -> Result<super::Compiled, ExprError> {
        super::Compiled::new(self, symbols)
    }

    fn fmt_poly(p: &Poly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if p.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in p.terms().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", fmt_rational(&mag))?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{}*", fmt_rational(&mag))?;
            }
            fmt_monomial(m, f)?;
        }
        Ok(())
    }
}

impl Poly {
    fn is_one_poly(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_monomial(m: &Monomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, (a, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            write!(f, "*")?;
        }
        match a {
            Atom::Var(v) => write!(f, "{v}")?,
            Atom::Func(func, arg) => write!(f, "{}({})", func.name(), arg)?,
        }
        if *e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

fn poly_diff(p: &Poly, var: &str) -> Expr {
    let mut out = Expr::zero();
    for a in p.atoms() {
        let da = match &a {
            Atom::Var(v) if v.as_ref() == var => Expr::one(),
            Atom::Var(_) => continue,
            Atom::Func(f, arg) => {
                let darg = arg.diff(var);
                if darg.is_canonical_zero() {
                    continue;
                }
                let arg = (**arg).clone();
                match f {
                    Func::Sin => &arg.cos() * &darg,
                    Func::Cos => -(&arg.sin() * &darg),
                    Func::Exp => &arg.exp() * &darg,
                    Func::Ln => darg.checked_div(&arg).expect("ln argument is nonzero"),
                }
            }
        };
        out = &out + &(&Expr::from_poly(p.partial(&a)) * &da);
    }
    out
}

fn poly_subs(
    p: &Poly,
    map: &BTreeMap<Arc<str>, Expr>,
    cache: &mut BTreeMap<Atom, Expr>,
) -> Result<Expr, ExprError> {
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut t = Expr::rational(c.clone());
        for (a, e) in m.factors() {
            let base = match cache.get(a) {
                Some(v) => v.clone(),
                None => {
                    let v = match a {
                        Atom::Var(name) => match map.get(name) {
                            Some(v) => v.clone(),
                            None => Expr::from_poly(Poly::atom(a.clone())),
                        },
                        Atom::Func(f, arg) => Expr::apply(*f, arg.subs(map)?),
                    };
                    cache.insert(a.clone(), v.clone());
                    v
                }
            };
            t = &t * &base.powi(i64::from(*e))?;
        }
        acc = &acc + &t;
    }
    Ok(acc)
}

fn poly_eval_exact(p: &Poly, point: &BTreeMap<String, BigRational>) -> Result<BigRational, ExprError> {
    let mut acc = BigRational::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for (a, e) in m.factors() {
            let v = match a {
                Atom::Var(name) => point
                    .get(name.as_ref())
                    .ok_or_else(|| ExprError::Unbound(name.to_string()))?,
                Atom::Func(..) => return Err(ExprError::NotRational),
            };
            t *= num_traits::pow(v.clone(), *e as usize);
        }
        acc += t;
    }
    Ok(acc)
}

fn atom_f64(
    a: &Atom,
    lookup: &dyn Fn(&str) -> Option<f64>,
    cache: &mut BTreeMap<Atom, f64>,
) -> Result<f64, ExprError> {
    if let Some(v) = cache.get(a) {
        return Ok(*v);
    }
    let v = match a {
        Atom::Var(name) => lookup(name).ok_or_else(|| ExprError::Unbound(name.to_string()))?,
        Atom::Func(f, arg) => {
            let x = arg.eval_f64_with(lookup)?;
            let y = f.apply_f64(x);
            if !y.is_finite() {
                return Err(ExprError::Domain);
            }
            y
        }
    };
    cache.insert(a.clone(), v);
    Ok(v)
}

fn monomial_f64(
    m: &Monomial,
    lookup: &dyn Fn(&str) -> Option<f64>,
    cache: &mut BTreeMap<Atom, f64>,
) -> Result<f64, ExprError> {
    let mut t = 1.0;
    for (a, e) in m.factors() {
        t *= atom_f64(a, lookup, cache)?.powi(*e as i32);
    }
    Ok(t)
}

fn poly_eval_f64(p: &Poly, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
    let mut cache = BTreeMap::new();
    let mut acc = 0.0;
    for (m, c) in p.terms() {
        acc += c.to_f64().unwrap_or(f64::NAN) * monomial_f64(m, lookup, &mut cache)?;
    }
    Ok(acc)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one_poly() {
            return Expr::fmt_poly(&self.num, f);
        }
        let num_paren = self.num.num_terms() > 1;
        if num_paren {
            write!(f, "(")?;
        }
        Expr::fmt_poly(&self.num, f)?;
        if num_paren {
            write!(f, ")")?;
        }
        let single_factor = self.den.num_terms() == 1
            && self.den.lead().is_some_and(|(m, c)| c.is_one() && m.factors().len() == 1);
        if single_factor {
            write!(f, "/")?;
            Expr::fmt_poly(&self.den, f)
        } else {
            write!(f, "/(")?;
            Expr::fmt_poly(&self.den, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Add for &Expr {
    type Output = Expr;

    fn add(self, rhs: &Expr) -> Expr {
        if rhs.num.is_zero() {
            return self.clone();
        }
        if self.num.is_zero() {
            return rhs.clone();
        }
        if self.den == rhs.den {
            if self.den.is_one_poly() {
                return Expr::from_poly(self.num.add(&rhs.num));
            }
            return Expr::from_parts(self.num.add(&rhs.num), self.den.clone()).expect("nonzero");
        }
        // sum over lcm(d1, d2)
        let g = gcd(&self.den, &rhs.den);
        let (c1, c2) = if g.is_constant() {
            (rhs.den.clone(), self.den.clone())
        } else {
            (rhs.den.div_exact(&g).expect("gcd divides"), self.den.div_exact(&g).expect("gcd divides"))
        };
        Expr::from_parts(self.num.mul(&c1).add(&rhs.num.mul(&c2)), self.den.mul(&c1)).expect("nonzero")
    }
}

impl Sub for &Expr {
    type Output = Expr;

    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;

    fn mul(self, rhs: &Expr) -> Expr {
        if self.num.is_zero() || rhs.num.is_zero() {
            return Expr::zero();
        }
        if self.den.is_one_poly() && rhs.den.is_one_poly() {
            return Expr::from_poly(self.num.mul(&rhs.num));
        }
        // both factors are reduced, so cancelling across suffices
        let cancel = |n: &Poly, d: &Poly| {
            let g = gcd(n, d);
            if g.is_constant() {
                (n.clone(), d.clone())
            } else {
                (n.div_exact(&g).expect("gcd divides"), d.div_exact(&g).expect("gcd divides"))
            }
        };
        let (n1, d2) = cancel(&self.num, &rhs.den);
        let (n2, d1) = cancel(&rhs.num, &self.den);
        let (num, den) = (n1.mul(&n2), d1.mul(&d2));
        if let Some(k) = den.constant_value() {
            return Expr { num: num.scale(&k.recip()), den: Poly::one() };
        }
        let lc = den.lead().expect("nonzero denominator").1.recip();
        Expr { num: num.scale(&lc), den: den.scale(&lc) }
    }
}

impl Neg for &Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }
}

impl Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| &a + &b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}
