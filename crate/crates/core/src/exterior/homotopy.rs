use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{signed, DiffForm};
use crate::error::{Error, Result};
use crate::symexpr::{Atom, Expr, Poly};

const HOMOTOPY_PARAM: &str = "__homotopy_t";

impl DiffForm {
    /// Radial homotopy operator around `base` (the origin when `None`):
    ///
    /// `H a = Σ_I Σ_r (−1)^r (∫₀¹ t^{p−1} a_I(x₀ + t(x − x₀)) dt) (x^{i_r} − x₀^{i_r}) dx^{I∖i_r}`
    ///
    /// For a closed form on a star-shaped domain `d(H a) = a`. The input must
    /// be closed with coefficients polynomial in the chart coordinates, so
    /// the `t`-integral is computed exactly.
    pub fn homotopy_antiderivative(&self, base: Option<&[Expr]>) -> Result<DiffForm> {
        if self.degree == 0 {
            return Err(Error::DegreeZero);
        }
        if let Some((_, c)) = self.terms.iter().find(|(_, c)| !c.is_polynomial_in(self.chart.vars())) {
            return Err(Error::NonPolynomial(c.to_string()));
        }
        if !self.closure_check()?.zero {
            return Err(Error::NotClosed);
        }
        Ok(self.radial_integral(base))
    }

    pub(crate) fn radial_integral(&self, base: Option<&[Expr]>) -> DiffForm {
        let n = self.chart.dim();
        let origin: Vec<Expr> = match base {
            Some(b) => b.to_vec(),
            None => vec![Expr::zero(); n],
        };
        let t = Expr::symbol(HOMOTOPY_PARAM);
        let t_atom = Atom::var(HOMOTOPY_PARAM);
        let offsets: Vec<Expr> = (0..n).map(|k| &self.chart.symbol(k) - &origin[k]).collect();
        let subs: BTreeMap<Arc<str>, Expr> = (0..n)
            .map(|k| (self.chart.vars()[k].clone(), &origin[k] + &(&t * &offsets[k])))
            .collect();
        let p = self.degree as i64;
        let mut out = DiffForm::zero(&self.chart, self.degree - 1);
        for (idx, a) in &self.terms {
            let along = a.subs(&subs).expect("polynomial substitution has no poles");
            let mut integrated = Poly::zero();
            for (m, c) in along.numer().coeffs_in(&t_atom) {
                let k = BigRational::from_integer(BigInt::from(p + i64::from(m))).recip();
                integrated = integrated.add(&c.scale(&k));
            }
            let radial = Expr::from_poly(integrated)
                .checked_div(&Expr::from_poly(along.denom().clone()))
                .expect("denominator free of coordinates");
            for (r, &i) in idx.iter().enumerate() {
                let mut rest = idx.clone();
                rest.remove(r);
                let c = signed(&radial * &offsets[i], if r % 2 == 0 { 1 } else { -1 });
                out.add_term(rest, c);
            }
        }
        out
    }

    /// The homotopy antiderivative when the form is closed with polynomial
    /// coefficients; `None` otherwise, and always for 0-forms.
    pub fn is_exact(&self) -> Option<DiffForm> {
        self.homotopy_antiderivative(None).ok()
    }
}
