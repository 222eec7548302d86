//! Pseudostructures, relations `dψ = ω` and their classification.
//!
//! The interior differential `d_π` is pull back to the parameter chart, then
//! take `d` there. That is the only choice compatible with the ambient `d`
//! (`pullback ∘ d = d ∘ pullback`).

mod chain;
mod scan;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use chain::{integrate_chain, ChainStep};
pub use scan::{degenerate_scan, hessian, poisson_bracket, ScanKind, ZeroLocusReport, SCAN_LINES, SCAN_TOLERANCE};

use crate::duality::Metric;
use crate::error::{Error, Result};
use crate::exterior::DiffForm;
use crate::linalg::SquareMatrix;
use crate::symexpr::{sample_coordinate, sampling_seed, Chart, Expr, ZeroCheck};

const RANK_ATTEMPTS: usize = 16;

/// A parametrized submanifold `x = φ(u)` of the ambient chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pseudostructure {
    ambient: Arc<Chart>,
    params: Arc<Chart>,
    map: Vec<Expr>,
}

impl Pseudostructure {
    /// `map[i]` is the ambient coordinate `x^i` as a function of the
    /// parameters. Requires fewer parameters than ambient coordinates and a
    /// Jacobian of full rank at some sampled parameter point.
    pub fn new(ambient: &Arc<Chart>, params: &Arc<Chart>, map: Vec<Expr>) -> Result<Pseudostructure> {
        let (n, m) = (ambient.dim(), params.dim());
        if map.len() != n {
            return Err(Error::Pseudostructure(format!("{} components for a {n}-dimensional chart", map.len())));
        }
        if m >= n {
            return Err(Error::Pseudostructure(format!("{m} parameters in a {n}-dimensional chart")));
        }
        let s = Pseudostructure { ambient: ambient.clone(), params: params.clone(), map };
        if !s.has_full_rank() {
            return Err(Error::Pseudostructure(format!("Jacobian has rank < {m} at every sampled point")));
        }
        Ok(s)
    }

    pub fn ambient(&self) -> &Arc<Chart> {
        &self.ambient
    }

    pub fn params(&self) -> &Arc<Chart> {
        &self.params
    }

    pub fn map(&self) -> &[Expr] {
        &self.map
    }

    /// `∂φ^i/∂u^k`, rows indexed by ambient coordinate.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.map.iter().map(|f| self.params.vars().iter().map(|u| f.diff(u)).collect()).collect()
    }

    fn has_full_rank(&self) -> bool {
        let jac = self.jacobian();
        let mut symbols = std::collections::BTreeSet::new();
        for e in jac.iter().flatten() {
            symbols.extend(e.free_symbols());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sampling_seed() ^ 0x7073_6575_646f);
        for _ in 0..RANK_ATTEMPTS {
            let point: BTreeMap<String, f64> = symbols
                .iter()
                .map(|s| (s.to_string(), sample_coordinate(&mut rng).to_f64().unwrap_or(0.0)))
                .collect();
            let rows: Option<Vec<Vec<f64>>> =
                jac.iter().map(|r| r.iter().map(|e| e.eval_f64(&point).ok()).collect()).collect();
            if let Some(rows) = rows {
                if numeric_rank(rows) == self.params.dim() {
                    return true;
                }
            }
        }
        false
    }

    fn substitution(&self) -> BTreeMap<Arc<str>, Expr> {
        self.ambient.vars().iter().cloned().zip(self.map.iter().cloned()).collect()
    }

    /// Metric induced on the parameter chart, `h = Jᵀ g J`.
    pub fn induced_metric(&self, g: &Metric) -> Result<Metric> {
        if **g.chart() != *self.ambient {
            return Err(Error::ChartMismatch(g.chart().to_string(), self.ambient.to_string()));
        }
        let sub = self.substitution();
        let n = self.ambient.dim();
        let mut pulled = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                pulled.set(i, j, g.matrix().get(i, j).subs(&sub)?);
            }
        }
        let jac = self.jacobian();
        let m = self.params.dim();
        let h = SquareMatrix::from_fn(m, |k, l| {
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| &(pulled.get(i, j) * &jac[i][k]) * &jac[j][l])
                .sum()
        });
        Metric::from_matrix(&self.params, h)
    }
}

impl fmt::Display for Pseudostructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<&str> = self.params.vars().iter().map(|v| v.as_ref()).collect();
        write!(f, "({}):", params.join(", "))?;
        for (k, (x, e)) in self.ambient.vars().iter().zip(&self.map).enumerate() {
            write!(f, "{} {x}={e}", if k == 0 { "" } else { "," })?;
        }
        Ok(())
    }
}

fn numeric_rank(mut rows: Vec<Vec<f64>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-9 * scale;
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else {
            break;
        };
        if rows[pivot][c].abs() <= tol {
            continue;
        }
        rows.swap(rank, pivot);
        for r in rank + 1..rows.len() {
            let f = rows[r][c] / rows[rank][c];
            for k in c..cols {
                rows[r][k] -= f * rows[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// Restriction of `a` to the pseudostructure: substitute `x = φ(u)` and
/// `dx^i = Σ_k ∂φ^i/∂u^k du^k`. Forms of degree above the parameter count
/// pull back to zero.
pub fn pullback(a: &DiffForm, s: &Pseudostructure) -> Result<DiffForm> {
    if **a.chart() != *s.ambient {
        return Err(Error::ChartMismatch(a.chart().to_string(), s.ambient.to_string()));
    }
    let p = a.degree();
    if p > s.params.dim() {
        return Ok(DiffForm::zero(&s.params, p));
    }
    let sub = s.substitution();
    let dphi = s
        .jacobian()
        .into_iter()
        .map(|row| DiffForm::from_terms(&s.params, 1, row.into_iter().enumerate().map(|(k, e)| (vec![k], e))))
        .collect::<Result<Vec<_>>>()?;
    let mut out = DiffForm::zero(&s.params, p);
    for (idx, c) in a.terms() {
        let mut term = DiffForm::scalar(&s.params, c.subs(&sub)?);
        for &i in idx {
            term = term.wedge(&dphi[i])?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// `d_π a`, the differential of the restriction.
pub fn interior_d(a: &DiffForm, s: &Pseudostructure) -> Result<DiffForm> {
    Ok(pullback(a, s)?.ext_d())
}

/// Where the Hodge dual is taken when testing `d_π ⋆a = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualOrder {
    /// `⋆` with the ambient metric, then restrict.
    AmbientThenPullback,
    /// Restrict, then `⋆` with the induced metric on the parameter chart.
    InducedMetric,
}

/// Closure of the dual form on a pseudostructure.
pub fn dual_closure_on(a: &DiffForm, g: &Metric, s: &Pseudostructure, order: DualOrder) -> Result<ZeroCheck> {
    let dual = match order {
        DualOrder::AmbientThenPullback => pullback(&g.hodge_star(a)?, s)?,
        DualOrder::InducedMetric => s.induced_metric(g)?.hodge_star(&pullback(a, s)?)?,
    };
    dual.ext_d().zero_check()
}

/// The relation `dψ = ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    psi: DiffForm,
    omega: DiffForm,
}

impl Relation {
    pub fn new(psi: DiffForm, omega: DiffForm) -> Result<Relation> {
        if **psi.chart() != **omega.chart() {
            return Err(Error::ChartMismatch(psi.chart().to_string(), omega.chart().to_string()));
        }
        if omega.degree() != psi.degree() + 1 {
            return Err(Error::DegreeMismatch(format!(
                "relation between a {}-form and a {}-form",
                psi.degree(),
                omega.degree()
            )));
        }
        Ok(Relation { psi, omega })
    }

    /// `d0 = ω` with the zero form on the left.
    pub fn with_zero_lhs(omega: DiffForm) -> Result<Relation> {
        if omega.degree() == 0 {
            return Err(Error::DegreeMismatch("right side of a relation must have positive degree".into()));
        }
        let psi = DiffForm::zero(omega.chart(), omega.degree() - 1);
        Relation::new(psi, omega)
    }

    pub fn psi(&self) -> &DiffForm {
        &self.psi
    }

    pub fn omega(&self) -> &DiffForm {
        &self.omega
    }

    pub fn pullback(&self, s: &Pseudostructure) -> Result<Relation> {
        Relation::new(pullback(&self.psi, s)?, pullback(&self.omega, s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    /// `ω = dψ`.
    Identical,
    /// `ω` closed but different from `dψ`.
    ClosedRhs,
    /// `dω ≠ 0`.
    Nonidentical,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Identical => "IDENTICAL",
            Classification::ClosedRhs => "CLOSED_RHS",
            Classification::Nonidentical => "NONIDENTICAL",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "IDENTICAL" => Ok(Classification::Identical),
            "CLOSED_RHS" => Ok(Classification::ClosedRhs),
            "NONIDENTICAL" => Ok(Classification::Nonidentical),
            other => Err(Error::Invalid(format!("unknown classification '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub classification: Classification,
    /// `ω − dψ`.
    pub residual: DiffForm,
    /// `dω`.
    pub commutator: DiffForm,
    /// Whether `dω` vanishes on the chart the verdict was computed on.
    pub pi_closure: bool,
    /// Set when any zero test involved random sampling.
    pub probabilistic: bool,
}

impl Verdict {
    pub fn to_json(&self) -> VerdictJson {
        VerdictJson {
            classification: self.classification,
            residual: self.residual.to_string(),
            commutator: self.commutator.to_string(),
            pi_closure: self.pi_closure,
            probabilistic: self.probabilistic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub classification: Classification,
    pub residual: String,
    pub commutator: String,
    pub pi_closure: bool,
    pub probabilistic: bool,
}

pub fn classify(r: &Relation) -> Result<Verdict> {
    let residual = r.omega.sub(&r.psi.ext_d())?;
    let commutator = r.omega.ext_d();
    let res = residual.zero_check()?;
    let closed = commutator.zero_check()?;
    let classification = if res.zero {
        Classification::Identical
    } else if closed.zero {
        Classification::ClosedRhs
    } else {
        Classification::Nonidentical
    };
    Ok(Verdict {
        classification,
        residual,
        commutator,
        pi_closure: closed.zero,
        probabilistic: res.probabilistic || closed.probabilistic,
    })
}

/// Classification of the restricted relation `d_π ψ_π = ω_π`.
pub fn classify_on(r: &Relation, s: &Pseudostructure) -> Result<Verdict> {
    classify(&r.pullback(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn trajectory(ambient: &Arc<Chart>) -> Pseudostructure {
        Pseudostructure::new(ambient, &Chart::of(&["u"]), vec![e("u"), e("c*u"), e("c")]).unwrap()
    }

    #[test]
    fn pullback_examples() {
        let xy = Chart::of(&["x", "y"]);
        let diag = Pseudostructure::new(&xy, &Chart::of(&["u"]), vec![e("u"), e("u")]).unwrap();
        let area = DiffForm::parse(&xy, "d[x]^d[y]").unwrap();
        assert!(pullback(&area, &diag).unwrap().is_canonical_zero());

        let tqp = Chart::of(&["t", "q", "p"]);
        let w = DiffForm::parse(&tqp, "p*d[q] - (p^2/2)*d[t]").unwrap();
        let pw = pullback(&w, &trajectory(&tqp)).unwrap();
        assert_eq!(pw, DiffForm::parse(pw.chart(), "(c^2/2)*d[u]").unwrap());

        let x = Chart::of(&["x", "z"]);
        let para = Pseudostructure::new(&x, &Chart::of(&["u"]), vec![e("u^2"), e("u")]).unwrap();
        let f = DiffForm::parse(&x, "x").unwrap();
        assert_eq!(interior_d(&f, &para).unwrap(), DiffForm::parse(para.params(), "2*u*d[u]").unwrap());
    }

    #[test]
    fn rejects_bad_pseudostructures() {
        let xy = Chart::of(&["x", "y"]);
        let u = Chart::of(&["u"]);
        assert!(Pseudostructure::new(&xy, &u, vec![e("1"), e("2")]).is_err());
        assert!(Pseudostructure::new(&xy, &u, vec![e("u")]).is_err());
        assert!(Pseudostructure::new(&xy, &Chart::of(&["u", "v"]), vec![e("u"), e("v")]).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = Chart::of(&["x", "y"]);
        let psi = DiffForm::parse(&c, "x^2*y - sin(x)").unwrap();
        let v = classify(&Relation::new(psi.clone(), psi.ext_d()).unwrap()).unwrap();
        assert_eq!(v.classification, Classification::Identical);

        let v = classify(&Relation::with_zero_lhs(DiffForm::parse(&c, "y*d[x] + x*d[y]").unwrap()).unwrap()).unwrap();
        assert_eq!(v.classification, Classification::ClosedRhs);

        let v = classify(&Relation::with_zero_lhs(DiffForm::parse(&c, "-y*d[x] + x*d[y]").unwrap()).unwrap()).unwrap();
        assert_eq!(v.classification, Classification::Nonidentical);
        assert_eq!(v.commutator, DiffForm::parse(&c, "2*d[x]^d[y]").unwrap());
        assert!(!v.pi_closure);
        let js = serde_json::to_string(&v.to_json()).unwrap();
        assert!(js.contains("\"classification\":\"NONIDENTICAL\""));
    }

    #[test]
    fn poincare_on_trajectory() {
        let tqp = Chart::of(&["t", "q", "p"]);
        let w = DiffForm::parse(&tqp, "p*d[q] - (p^2/2)*d[t]").unwrap();
        let r = Relation::with_zero_lhs(w).unwrap();
        let amb = classify(&r).unwrap();
        assert_eq!(amb.classification, Classification::Nonidentical);
        assert_eq!(amb.commutator, DiffForm::parse(&tqp, "d[p]^d[q] - p*d[p]^d[t]").unwrap());
        let on = classify_on(&r, &trajectory(&tqp)).unwrap();
        assert_eq!(on.classification, Classification::ClosedRhs);
        assert!(on.pi_closure);

        // two-parameter family (t, c): d_π ω_π equals the pullback of dω
        let fam = Pseudostructure::new(&tqp, &Chart::of(&["t", "c"]), vec![e("t"), e("c*t"), e("c")]).unwrap();
        let lhs = interior_d(r.omega(), &fam).unwrap();
        assert_eq!(lhs, pullback(&r.omega().ext_d(), &fam).unwrap());
        // the trajectories through the origin sweep an invariant surface
        assert!(lhs.is_zero());
        assert_eq!(classify_on(&r, &fam).unwrap().classification, Classification::ClosedRhs);
        let skew = Pseudostructure::new(&tqp, &Chart::of(&["u", "v"]), vec![e("u"), e("v"), e("u")]).unwrap();
        let v = classify_on(&r, &skew).unwrap();
        assert_eq!(v.classification, Classification::Nonidentical);
        assert_eq!(v.commutator, DiffForm::parse(skew.params(), "d[u]^d[v]").unwrap());
    }

    #[test]
    fn dual_closure_orders() {
        let c = Chart::of(&["x", "y", "z"]);
        let g = Metric::euclidean(&c);
        let plane = Pseudostructure::new(&c, &Chart::of(&["u", "v"]), vec![e("u"), e("v"), e("0")]).unwrap();
        // ⋆dz = dx∧dy, closed after restriction either way
        let dz = DiffForm::parse(&c, "d[z]").unwrap();
        assert!(dual_closure_on(&dz, &g, &plane, DualOrder::AmbientThenPullback).unwrap().zero);
        assert!(dual_closure_on(&dz, &g, &plane, DualOrder::InducedMetric).unwrap().zero);
        let h = plane.induced_metric(&g).unwrap();
        assert!(h.matrix().equality_check(&SquareMatrix::identity(2)).zero);
    }
}
