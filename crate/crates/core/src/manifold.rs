//! Connections, the evolutionary differential and curvature.
//!
//! Sign convention: the covariant derivative of a 1-form is taken as
//!
//! ```text
//! a_{β;α} = ∂a_β/∂x^α + Γ^σ_{βα} a_σ
//! ```
//!
//! with a plus sign (most texts use `−Γ^σ_{αβ}` for covectors). The
//! commutator `K_{αβ} = a_{β;α} − a_{α;β}` then reads
//!
//! ```text
//! K_{αβ} = (∂a_β/∂x^α − ∂a_α/∂x^β) + (Γ^σ_{βα} − Γ^σ_{αβ}) a_σ
//! ```
//!
//! so only the antisymmetric part of Γ in its lower indices (the torsion)
//! enters the commutator. For forms of degree `p ≥ 2`, [`Connection::evo_d`]
//! extends this by correcting every lower index with the same `+Γ` rule and
//! antisymmetrizing; that extension is a modelling choice, not a classical
//! identity.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::duality::Metric;
use crate::error::{Error, Result};
use crate::exterior::{increasing_tuples, DiffForm};
use crate::linalg::{IndexArray, SquareMatrix};
use crate::symexpr::{Chart, Expr, ZeroCheck};

/// Connection coefficients `Γ^σ_{αβ}`, stored as `[σ, α, β]`. No symmetry
/// in the lower indices is assumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    chart: Arc<Chart>,
    gamma: IndexArray,
}

impl Connection {
    pub fn zero(chart: &Arc<Chart>) -> Connection {
        Connection { chart: chart.clone(), gamma: IndexArray::zeros(chart.dim(), 3) }
    }

    /// Entries `((σ, α, β), Γ^σ_{αβ})`; unlisted entries are zero.
    pub fn from_entries(
        chart: &Arc<Chart>,
        entries: impl IntoIterator<Item = ((usize, usize, usize), Expr)>,
    ) -> Result<Connection> {
        let mut c = Connection::zero(chart);
        let n = chart.dim();
        for ((s, a, b), e) in entries {
            if let Some(&bad) = [s, a, b].iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: bad, dim: n });
            }
            c.gamma.set(&[s, a, b], e);
        }
        Ok(c)
    }

    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(usize, usize, usize) -> Expr) -> Connection {
        Connection { chart: chart.clone(), gamma: IndexArray::from_fn(chart.dim(), 3, |i| f(i[0], i[1], i[2])) }
    }

    /// Christoffel symbols of the second kind of a metric.
    pub fn levi_civita(metric: &Metric) -> Connection {
        let chart = metric.chart();
        let n = chart.dim();
        let g = metric.matrix();
        let ginv = metric.inverse();
        // ∂_k g_ij
        let dg: Vec<SquareMatrix> =
            (0..n).map(|k| SquareMatrix::from_fn(n, |i, j| g.get(i, j).diff(chart.var(k)))).collect();
        let half = Expr::ratio(1, 2);
        Connection::from_fn(chart, |s, a, b| {
            let sum: Expr = (0..n)
                .map(|l| {
                    let bracket = &(dg[a].get(l, b) + dg[b].get(l, a)) - dg[l].get(a, b);
                    ginv.get(s, l) * &bracket
                })
                .sum();
            &half * &sum
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn get(&self, sigma: usize, alpha: usize, beta: usize) -> &Expr {
        self.gamma.get(&[sigma, alpha, beta])
    }

    pub fn coefficients(&self) -> &IndexArray {
        &self.gamma
    }

    fn check_form(&self, a: &DiffForm, degree: Option<usize>) -> Result<()> {
        if **a.chart() != *self.chart {
            return Err(Error::ChartMismatch(a.chart().to_string(), self.chart.to_string()));
        }
        if let Some(p) = degree {
            if a.degree() != p {
                return Err(Error::DegreeMismatch(format!("expected a {p}-form, got degree {}", a.degree())));
            }
        }
        Ok(())
    }

    /// Matrix with entry `(β, α)` equal to `a_{β;α}`.
    pub fn covariant_deriv(&self, a: &DiffForm) -> Result<SquareMatrix> {
        self.check_form(a, Some(1))?;
        let n = self.chart.dim();
        let comps: Vec<Expr> = (0..n).map(|i| a.component(&[i])).collect();
        Ok(SquareMatrix::from_fn(n, |beta, alpha| {
            let correction: Expr = (0..n).map(|s| self.get(s, beta, alpha) * &comps[s]).sum();
            &comps[beta].diff(self.chart.var(alpha)) + &correction
        }))
    }

    /// `K_{αβ} = (∂a_β/∂x^α − ∂a_α/∂x^β) + (Γ^σ_{βα} − Γ^σ_{αβ}) a_σ`.
    pub fn evo_commutator(&self, a: &DiffForm) -> Result<SquareMatrix> {
        self.check_form(a, Some(1))?;
        let n = self.chart.dim();
        let comps: Vec<Expr> = (0..n).map(|i| a.component(&[i])).collect();
        Ok(SquareMatrix::from_fn(n, |alpha, beta| {
            let ordinary =
                &comps[beta].diff(self.chart.var(alpha)) - &comps[alpha].diff(self.chart.var(beta));
            let torsion: Expr = (0..n)
                .map(|s| &(self.get(s, beta, alpha) - self.get(s, alpha, beta)) * &comps[s])
                .sum();
            &ordinary + &torsion
        }))
    }

    /// `(∇_α a)_{β₁…β_p} = ∂_α a_{β₁…β_p} + Σ_k Γ^σ_{β_k α} a_{β₁…σ…β_p}`.
    fn covariant_component(&self, a: &DiffForm, alpha: usize, betas: &[usize]) -> Expr {
        let n = self.chart.dim();
        let mut acc = a.component(betas).diff(self.chart.var(alpha));
        let mut idx = betas.to_vec();
        for (k, &bk) in betas.iter().enumerate() {
            for s in 0..n {
                let g = self.get(s, bk, alpha);
                if g.is_canonical_zero() {
                    continue;
                }
                idx[k] = s;
                let c = a.component(&idx);
                if !c.is_canonical_zero() {
                    acc = &acc + &(g * &c);
                }
            }
            idx[k] = bk;
        }
        acc
    }

    /// Differential including the basis term: the antisymmetrized covariant
    /// derivative. Degree 0 reduces to `ext_d`; degree 1 gives
    /// `Σ_{α<β} K_{αβ} dx^α ∧ dx^β`.
    pub fn evo_d(&self, a: &DiffForm) -> Result<DiffForm> {
        self.check_form(a, None)?;
        let p = a.degree();
        if p == 0 {
            return Ok(a.ext_d());
        }
        let n = self.chart.dim();
        let mut terms = Vec::new();
        for j in increasing_tuples(n, p + 1) {
            let mut coeff = Expr::zero();
            for r in 0..=p {
                let mut rest = j.clone();
                let alpha = rest.remove(r);
                let c = self.covariant_component(a, alpha, &rest);
                coeff = if r % 2 == 0 { &coeff + &c } else { &coeff - &c };
            }
            terms.push((j, coeff));
        }
        DiffForm::from_terms(&self.chart, p + 1, terms)
    }

    /// `T^σ_{αβ} = Γ^σ_{βα} − Γ^σ_{αβ}`, indexed `[σ, α, β]`.
    pub fn torsion(&self) -> IndexArray {
        IndexArray::from_fn(self.chart.dim(), 3, |i| self.get(i[0], i[2], i[1]) - self.get(i[0], i[1], i[2]))
    }

    /// Zero test of the torsion.
    pub fn torsion_free_check(&self) -> ZeroCheck {
        self.torsion().zero_check()
    }

    /// `R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{μσ}`,
    /// indexed `[ρ, σ, μ, ν]`.
    pub fn riemann(&self) -> IndexArray {
        let n = self.chart.dim();
        IndexArray::from_fn(n, 4, |i| {
            let (rho, sigma, mu, nu) = (i[0], i[1], i[2], i[3]);
            if mu == nu {
                return Expr::zero();
            }
            let deriv = &self.get(rho, nu, sigma).diff(self.chart.var(mu))
                - &self.get(rho, mu, sigma).diff(self.chart.var(nu));
            let quad: Expr = (0..n)
                .map(|l| {
                    &(self.get(rho, mu, l) * self.get(l, nu, sigma))
                        - &(self.get(rho, nu, l) * self.get(l, mu, sigma))
                })
                .sum();
            &deriv + &quad
        })
    }

    /// Cyclic sum `R^ρ_{σμν} + R^ρ_{μνσ} + R^ρ_{νσμ}`, indexed `[ρ, σ, μ, ν]`.
    pub fn bianchi_cyclic_sum(&self) -> IndexArray {
        let r = self.riemann();
        IndexArray::from_fn(self.chart.dim(), 4, |i| {
            let (rho, s, m, v) = (i[0], i[1], i[2], i[3]);
            &(r.get(&[rho, s, m, v]) + r.get(&[rho, m, v, s])) + r.get(&[rho, v, s, m])
        })
    }

    /// First Bianchi identity for a torsion-free connection. A connection
    /// with torsion is a precondition violation, not a failed identity.
    pub fn bianchi_first_check(&self) -> Result<ZeroCheck> {
        if !self.torsion_free_check().zero {
            return Err(Error::TorsionPresent);
        }
        Ok(self.bianchi_cyclic_sum().zero_check())
    }

    pub fn to_json(&self) -> ConnectionJson {
        let chart = &self.chart;
        ConnectionJson {
            chart: chart.vars().iter().map(|v| v.to_string()).collect(),
            entries: self
                .gamma
                .entries()
                .filter(|(_, e)| !e.is_canonical_zero())
                .map(|(i, e)| GammaEntry {
                    upper: chart.var(i[0]).to_string(),
                    lower: [chart.var(i[1]).to_string(), chart.var(i[2]).to_string()],
                    value: e.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &ConnectionJson) -> Result<Connection> {
        let chart = Arc::new(Chart::new(&json.chart)?);
        let idx = |name: &str| {
            chart
                .index_of(name)
                .ok_or_else(|| Error::from(crate::symexpr::ExprError::UndeclaredVariable(name.to_string())))
        };
        let entries = json
            .entries
            .iter()
            .map(|e| Ok(((idx(&e.upper)?, idx(&e.lower[0])?, idx(&e.lower[1])?), Expr::parse(&e.value)?)))
            .collect::<Result<Vec<_>>>()?;
        Connection::from_entries(&chart, entries)
    }
}

/// JSON listing of the nonzero `Γ^upper_{lower[0] lower[1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionJson {
    pub chart: Vec<String>,
    pub entries: Vec<GammaEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub upper: String,
    pub lower: [String; 2],
    pub value: String,
}
