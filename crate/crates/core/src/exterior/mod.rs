//! Exterior algebra over a chart.
//!
//! A [`DiffForm`] of degree `p` stores one coefficient per strictly
//! increasing index tuple `i₁ < … < i_p`. Every operation folds permutation
//! signs into the coefficients and drops canonical zeros, so two forms are
//! equal exactly when their coefficients are.

mod homotopy;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::symexpr::{Chart, Expr, ZeroCheck};

pub use text::{FormEnv, FormJson, NoEnv, TermJson};

/// Sorts an index tuple, returning the permutation sign, or `None` when an
/// index repeats (the wedge of a basis 1-form with itself vanishes).
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = idx.to_vec();
    let mut inversions = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            match v[i].cmp(&v[j]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    v.sort_unstable();
    Some((v, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// Strictly increasing `p`-subsets of `0..n` in lexicographic order.
pub fn increasing_tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if p <= n {
        rec(0, n, p, &mut Vec::with_capacity(p), &mut out);
    }
    out
}

pub(crate) fn signed(e: Expr, sign: i32) -> Expr {
    if sign < 0 {
        -e
    } else {
        e
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct DiffForm {
    chart: Arc<Chart>,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl DiffForm {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> DiffForm {
        DiffForm { chart: chart.clone(), degree, terms: BTreeMap::new() }
    }

    /// A 0-form.
    pub fn scalar(chart: &Arc<Chart>, f: Expr) -> DiffForm {
        DiffForm::from_terms(chart, 0, [(vec![], f)]).expect("degree-0 term")
    }

    /// The coordinate differential `d[var]`.
    pub fn dx(chart: &Arc<Chart>, var: &str) -> Result<DiffForm> {
        let i = chart
            .index_of(var)
            .ok_or_else(|| crate::symexpr::ExprError::UndeclaredVariable(var.to_string()))?;
        DiffForm::from_terms(chart, 1, [(vec![i], Expr::one())])
    }

    /// Builds a form from index tuples in any order; tuples are sorted with
    /// their permutation sign, repeated indices vanish, like tuples add up.
    pub fn from_terms(
        chart: &Arc<Chart>,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Result<DiffForm> {
        let mut f = DiffForm::zero(chart, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::DegreeMismatch(format!("tuple {idx:?} in a {degree}-form")));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(Error::IndexOutOfRange { index: bad, dim: chart.dim() });
            }
            if let Some((sorted, sign)) = sort_with_sign(&idx) {
                f.add_term(sorted, signed(c, sign));
            }
        }
        Ok(f)
    }

    fn add_term(&mut self, idx: Vec<usize>, c: Expr) {
        if c.is_canonical_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(idx) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_canonical_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient on an arbitrary index tuple, with antisymmetry applied.
    pub fn component(&self, idx: &[usize]) -> Expr {
        if idx.len() != self.degree {
            return Expr::zero();
        }
        match sort_with_sign(idx) {
            Some((sorted, sign)) => self.terms.get(&sorted).cloned().map(|c| signed(c, sign)).unwrap_or_else(Expr::zero),
            None => Expr::zero(),
        }
    }

    /// The coefficient of a 0-form.
    pub fn as_scalar(&self) -> Option<Expr> {
        (self.degree == 0).then(|| self.component(&[]))
    }

    pub fn is_canonical_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn zero_check(&self) -> Result<ZeroCheck> {
        let mut acc = ZeroCheck::EXACT_ZERO;
        for c in self.terms.values() {
            acc = acc.and(c.zero_check()?);
            if !acc.zero {
                break;
            }
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.zero_check().map(|z| z.zero).unwrap_or(false)
    }

    /// Coefficients are polynomial in the chart coordinates.
    pub fn is_polynomial(&self) -> bool {
        self.terms.values().all(|c| c.is_polynomial_in(self.chart.vars()))
    }

    pub(crate) fn same_chart(&self, other: &DiffForm) -> Result<()> {
        if Arc::ptr_eq(&self.chart, &other.chart) || self.chart == other.chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch(self.chart.to_string(), other.chart.to_string()))
        }
    }

    fn same_shape(&self, other: &DiffForm) -> Result<()> {
        self.same_chart(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "cannot add a {}-form and a {}-form",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffForm {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, k: &Expr) -> DiffForm {
        self.map_coeffs(|c| c * k)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    pub fn try_map_coeffs(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<DiffForm> {
        let mut out = DiffForm::zero(&self.chart, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Re-labels the form onto an equal chart held in a different `Arc`.
    pub fn with_chart(&self, chart: &Arc<Chart>) -> Result<DiffForm> {
        if *self.chart != **chart {
            return Err(Error::ChartMismatch(self.chart.to_string(), chart.to_string()));
        }
        Ok(DiffForm { chart: chart.clone(), degree: self.degree, terms: self.terms.clone() })
    }

    /// Exterior product; `dx^i ∧ dx^i = 0` and `dx^i ∧ dx^j = −dx^j ∧ dx^i`.
    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm> {
        self.same_chart(other)?;
        let mut out = DiffForm::zero(&self.chart, self.degree + other.degree);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                if let Some((sorted, sign)) = sort_with_sign(&idx) {
                    out.add_term(sorted, signed(a * b, sign));
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative: `d(a dx^I) = Σ_k ∂_k a dx^k ∧ dx^I`.
    pub fn ext_d(&self) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree + 1);
        for (idx, a) in &self.terms {
            for k in 0..self.chart.dim() {
                if idx.contains(&k) {
                    continue;
                }
                let da = a.diff(self.chart.var(k));
                if da.is_canonical_zero() {
                    continue;
                }
                // moving dx^k past the indices of I smaller than k
                let pos = idx.iter().filter(|&&i| i < k).count();
                let mut key = idx.clone();
                key.insert(pos, k);
                out.add_term(key, signed(da, if pos % 2 == 0 { 1 } else { -1 }));
            }
        }
        out
    }

    pub fn closure_check(&self) -> Result<ZeroCheck> {
        self.ext_d().zero_check()
    }

    pub fn is_closed(&self) -> bool {
        self.closure_check().map(|z| z.zero).unwrap_or(false)
    }

    /// Commutator of a 1-form: `K_ij = ∂a_j/∂x^i − ∂a_i/∂x^j`.
    pub fn commutator1(&self) -> Result<SquareMatrix> {
        if self.degree != 1 {
            return Err(Error::DegreeMismatch(format!("commutator needs a 1-form, got degree {}", self.degree)));
        }
        let n = self.chart.dim();
        let a: Vec<Expr> = (0..n).map(|i| self.component(&[i])).collect();
        Ok(SquareMatrix::from_fn(n, |i, j| {
            &a[j].diff(self.chart.var(i)) - &a[i].diff(self.chart.var(j))
        }))
    }

    /// Zero test of `self − other`.
    pub fn equality_check(&self, other: &DiffForm) -> Result<ZeroCheck> {
        self.sub(other)?.zero_check()
    }

    pub fn equals(&self, other: &DiffForm) -> bool {
        self.equality_check(other).map(|z| z.zero).unwrap_or(false)
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffForm[{}; {}]({})", self.chart, self.degree, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart2() -> Arc<Chart> {
        Chart::of(&["x", "y"])
    }

    fn form(chart: &Arc<Chart>, s: &str) -> DiffForm {
        DiffForm::parse(chart, s).unwrap()
    }

    #[test]
    fn wedge_sign_rules() {
        let c = chart2();
        let dx = DiffForm::dx(&c, "x").unwrap();
        let dy = DiffForm::dx(&c, "y").unwrap();
        assert!(dx.wedge(&dx).unwrap().is_canonical_zero());
        assert_eq!(dx.wedge(&dy).unwrap(), form(&c, "d[x]^d[y]"));
        assert_eq!(dy.wedge(&dx).unwrap(), form(&c, "-d[x]^d[y]"));
        let a = form(&c, "x*d[y]");
        let b = form(&c, "y*d[x]");
        assert_eq!(a.wedge(&b).unwrap(), form(&c, "-x*y*d[x]^d[y]"));
    }

    #[test]
    fn exterior_derivative_examples() {
        let c = chart2();
        assert_eq!(form(&c, "x^2").ext_d(), form(&c, "2*x*d[x]"));
        assert_eq!(form(&c, "x*d[y]").ext_d(), form(&c, "d[x]^d[y]"));
        assert!(form(&c, "x*y").ext_d().ext_d().is_canonical_zero());
    }

    #[test]
    fn closedness_examples() {
        let c = chart2();
        assert!(form(&c, "y*d[x] + x*d[y]").is_closed());
        let w = form(&c, "-y*d[x] + x*d[y]");
        assert!(!w.is_closed());
        assert_eq!(w.ext_d(), form(&c, "2*d[x]^d[y]"));
        assert!(form(&c, "sin(x*y)*d[x]^d[y]").is_closed());
    }

    #[test]
    fn commutator1_examples() {
        let c = chart2();
        assert!(form(&c, "y*d[x] + x*d[y]").commutator1().unwrap().get(0, 1).is_canonical_zero());
        assert_eq!(*form(&c, "-y*d[x] + x*d[y]").commutator1().unwrap().get(0, 1), Expr::int(2));
        let c3 = Chart::of(&["x1", "x2", "x3"]);
        let k = form(&c3, "(x1^3 + 2*x1)*d[x1]").commutator1().unwrap();
        assert!(k.zero_check().zero);
        assert!(form(&c, "x").commutator1().is_err());
    }

    #[test]
    fn chart_and_degree_mismatch() {
        let c = chart2();
        let other = Chart::of(&["u", "v"]);
        assert!(matches!(form(&c, "d[x]").wedge(&form(&other, "d[u]")), Err(Error::ChartMismatch(..))));
        assert!(matches!(form(&c, "d[x]").add(&form(&c, "x")), Err(Error::DegreeMismatch(_))));
    }

    #[test]
    fn degree_above_dimension_is_zero() {
        let c = chart2();
        let f = form(&c, "d[x]^d[y]").wedge(&form(&c, "d[x]")).unwrap();
        assert_eq!(f.degree(), 3);
        assert!(f.is_canonical_zero());
    }
}
