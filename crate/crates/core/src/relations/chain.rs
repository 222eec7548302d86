//! Sequential integration of a relation that has become closable.

use serde::Serialize;

use super::{pullback, Pseudostructure, Relation};
use crate::error::{Error, Result};
use crate::exterior::DiffForm;

/// One descent step: integrate `ω` to `θ` with `dθ = ω` and compare with
/// the left side, `ψ = θ + (closed)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub psi: DiffForm,
    pub omega: DiffForm,
    pub theta: DiffForm,
    /// `dθ = ω` checked after integration.
    pub theta_verified: bool,
    /// `ψ − θ`.
    pub remainder: DiffForm,
    /// `d(ψ − θ) = 0`. Holds exactly when `dψ = ω`.
    pub remainder_closed: bool,
}

impl ChainStep {
    pub fn degree(&self) -> usize {
        self.omega.degree()
    }

    pub fn to_json(&self) -> ChainStepJson {
        ChainStepJson {
            degree: self.degree(),
            psi: self.psi.to_string(),
            omega: self.omega.to_string(),
            theta: self.theta.to_string(),
            theta_verified: self.theta_verified,
            remainder: self.remainder.to_string(),
            remainder_closed: self.remainder_closed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainStepJson {
    pub degree: usize,
    pub psi: String,
    pub omega: String,
    pub theta: String,
    pub theta_verified: bool,
    pub remainder: String,
    pub remainder_closed: bool,
}

/// Restricts `r` to `s` (when given), then repeatedly integrates the
/// closed right side with the homotopy operator. The remainder `ψ − θ`
/// becomes the right side of the next step while it is closed and of
/// positive degree. At most `max_steps` steps are produced.
pub fn integrate_chain(r: &Relation, s: Option<&Pseudostructure>, max_steps: usize) -> Result<Vec<ChainStep>> {
    if max_steps == 0 {
        return Ok(Vec::new());
    }
    let (mut psi, mut omega) = match s {
        Some(s) => (pullback(r.psi(), s)?, pullback(r.omega(), s)?),
        None => (r.psi().clone(), r.omega().clone()),
    };
    if !omega.closure_check()?.zero {
        return Err(Error::NotClosed);
    }
    let mut steps = Vec::new();
    while steps.len() < max_steps {
        let theta = omega.homotopy_antiderivative(None)?;
        let theta_verified = theta.ext_d().equality_check(&omega)?.zero;
        let remainder = psi.sub(&theta)?;
        let remainder_closed = remainder.closure_check()?.zero;
        let next = remainder.clone();
        steps.push(ChainStep { psi, omega, theta, theta_verified, remainder, remainder_closed });
        if next.degree() == 0 || !remainder_closed {
            break;
        }
        psi = DiffForm::zero(next.chart(), next.degree() - 1);
        omega = next;
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{Chart, Expr};

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn one_step_on_trajectory() {
        let tqp = Chart::of(&["t", "q", "p"]);
        let s = Pseudostructure::new(&tqp, &Chart::of(&["u"]), vec![e("u"), e("c*u"), e("c")]).unwrap();
        let w = DiffForm::parse(&tqp, "p*d[q] - (p^2/2)*d[t]").unwrap();

        let bare = integrate_chain(&Relation::with_zero_lhs(w.clone()).unwrap(), Some(&s), 8).unwrap();
        assert_eq!(bare.len(), 1);
        assert_eq!(bare[0].theta, DiffForm::parse(s.params(), "c^2*u/2").unwrap());
        assert!(bare[0].theta_verified);
        // ψ = 0 does not satisfy the restricted relation
        assert!(!bare[0].remainder_closed);

        let action = DiffForm::parse(&tqp, "p*q - (p^2/2)*t").unwrap();
        let steps = integrate_chain(&Relation::new(action, w).unwrap(), Some(&s), 8).unwrap();
        assert_eq!(steps.len(), 1);
        assert!(steps[0].remainder_closed && steps[0].remainder.is_zero());
    }

    #[test]
    fn exact_relation_and_guards() {
        let c = Chart::of(&["x", "y"]);
        let psi = DiffForm::parse(&c, "x*y").unwrap();
        let r = Relation::new(psi.clone(), psi.ext_d()).unwrap();
        let steps = integrate_chain(&r, None, 8).unwrap();
        assert_eq!(steps[0].theta, psi);
        assert!(steps[0].remainder_closed);
        assert!(integrate_chain(&r, None, 0).unwrap().is_empty());
        let open = Relation::with_zero_lhs(DiffForm::parse(&c, "-y*d[x] + x*d[y]").unwrap()).unwrap();
        assert_eq!(integrate_chain(&open, None, 8), Err(Error::NotClosed));
    }

    #[test]
    fn descends_through_degrees() {
        let c = Chart::of(&["x", "y", "z"]);
        let r = Relation::with_zero_lhs(DiffForm::parse(&c, "d[x]^d[y]^d[z]").unwrap()).unwrap();
        let steps = integrate_chain(&r, None, 8).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].degree(), 3);
        assert!(!steps[0].remainder_closed);
    }
}
