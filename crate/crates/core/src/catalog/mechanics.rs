//! Legendre transform and canonical transformations.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::DiffForm;
use crate::linalg::SquareMatrix;
use crate::relations::{degenerate_scan, ScanKind, ZeroLocusReport};
use crate::symexpr::{Chart, Expr};

/// Result of [`legendre_transform`]. When the Hessian in the velocities
/// depends on the velocities the elimination is refused: `hamiltonian` is
/// `None` and `locus` samples the zero set of the degeneracy.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreReport {
    /// `p_j = ∂L/∂q̇_j`.
    pub momenta: Vec<Expr>,
    /// `det ∂²L/∂q̇_i∂q̇_j`.
    pub degeneracy: Expr,
    /// `q̇_j` in terms of the momenta, when eliminated.
    pub velocities: Option<Vec<Expr>>,
    /// `H = Σ p_j q̇_j − L` in `(q, p)`.
    pub hamiltonian: Option<Expr>,
    pub locus: Option<ZeroLocusReport>,
}

impl LegendreReport {
    pub fn to_json(&self) -> LegendreJson {
        LegendreJson {
            momenta: self.momenta.iter().map(Expr::to_string).collect(),
            degeneracy: self.degeneracy.to_string(),
            velocities: self.velocities.as_ref().map(|v| v.iter().map(Expr::to_string).collect()),
            hamiltonian: self.hamiltonian.as_ref().map(Expr::to_string),
            locus: self.locus.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LegendreJson {
    pub momenta: Vec<String>,
    pub degeneracy: String,
    pub velocities: Option<Vec<String>>,
    pub hamiltonian: Option<String>,
    pub locus: Option<ZeroLocusReport>,
}

/// Passes from `(q, q̇)` to `(q, p)`. `velocities[j]` and `momenta[j]` name
/// `q̇_j` and `p_j`; every other symbol in `L` (coordinates, constants) is
/// carried along. `seed` drives the locus sampling of the degenerate case.
pub fn legendre_transform(l: &Expr, velocities: &[&str], momenta: &[&str], seed: u64) -> Result<LegendreReport> {
    if velocities.len() != momenta.len() || velocities.is_empty() {
        return Err(Error::Legendre(format!("{} velocities and {} momenta", velocities.len(), momenta.len())));
    }
    let vel: Vec<Arc<str>> = velocities.iter().map(|v| Arc::from(*v)).collect();
    if !l.is_polynomial_in(&vel) {
        return Err(Error::Legendre(format!("L is not polynomial in the velocities: {l}")));
    }
    let k = velocities.len();
    let p: Vec<Expr> = velocities.iter().map(|v| l.diff(v)).collect();
    let w = SquareMatrix::from_fn(k, |i, j| p[i].diff(velocities[j]));
    let degeneracy = w.det();
    if degeneracy.is_zero() {
        return Err(Error::Legendre(format!("Hessian in the velocities vanishes identically; L = {l}")));
    }
    let quadratic = (0..k).all(|i| (0..k).all(|j| !w.get(i, j).depends_on_any(&vel)));
    if !quadratic {
        let mut names: Vec<&str> = velocities.to_vec();
        let extra: Vec<String> =
            degeneracy.free_symbols().iter().filter(|s| !vel.contains(s)).map(|s| s.to_string()).collect();
        names.extend(extra.iter().map(String::as_str));
        let chart = Arc::new(Chart::new(&names)?);
        let entries: Vec<Expr> = w.rows().into_iter().flatten().collect();
        let locus = degenerate_scan(&entries, &ScanKind::Determinant, &chart, seed)?;
        return Ok(LegendreReport { momenta: p, degeneracy, velocities: None, hamiltonian: None, locus: Some(locus) });
    }
    // p = W q̇ + b with W, b free of velocities
    let at_rest: BTreeMap<Arc<str>, Expr> = vel.iter().map(|v| (v.clone(), Expr::zero())).collect();
    let b = p.iter().map(|pj| pj.subs(&at_rest)).collect::<std::result::Result<Vec<_>, _>>()?;
    let (winv, _) = w.inverse()?;
    let qdot: Vec<Expr> = (0..k)
        .map(|i| (0..k).map(|j| winv.get(i, j) * &(&Expr::symbol(momenta[j]) - &b[j])).sum())
        .collect();
    let sub: BTreeMap<Arc<str>, Expr> = vel.iter().cloned().zip(qdot.iter().cloned()).collect();
    let pq: Expr = (0..k).map(|j| Expr::symbol(momenta[j]) * &qdot[j]).sum();
    let h = &pq - &l.subs(&sub)?;
    Ok(LegendreReport { momenta: p, degeneracy, velocities: Some(qdot), hamiltonian: Some(h), locus: None })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalReport {
    /// `σ = Σ p_j dq_j − Σ P_j dQ_j`.
    pub sigma: DiffForm,
    pub is_canonical: bool,
    pub probabilistic: bool,
    /// `W` with `dW = σ`, when `σ` is closed and polynomial.
    pub generating_function: Option<Expr>,
}

impl CanonicalReport {
    pub fn to_json(&self) -> CanonicalJson {
        CanonicalJson {
            sigma: self.sigma.to_string(),
            is_canonical: self.is_canonical,
            probabilistic: self.probabilistic,
            generating_function: self.generating_function.as_ref().map(Expr::to_string),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalJson {
    pub sigma: String,
    pub is_canonical: bool,
    pub probabilistic: bool,
    pub generating_function: Option<String>,
}

/// Tests `p_j dq_j = P_j dQ_j + dW` for the map `(q, p) ↦ (Q, P)`.
/// `pairs` names the `(q_j, p_j)` coordinates of `chart`; `new[j]` is
/// `(Q_j, P_j)`.
pub fn canonical_check(chart: &Arc<Chart>, pairs: &[(String, String)], new: &[(Expr, Expr)]) -> Result<CanonicalReport> {
    if pairs.len() != new.len() {
        return Err(Error::Invalid(format!("{} pairs but {} transformed pairs", pairs.len(), new.len())));
    }
    let mut sigma = DiffForm::zero(chart, 1);
    for ((q, p), (big_q, big_p)) in pairs.iter().zip(new) {
        let pdq = DiffForm::dx(chart, q)?.scale(&Expr::symbol(p));
        let pdq_new = DiffForm::scalar(chart, big_q.clone()).ext_d().scale(big_p);
        sigma = sigma.add(&pdq)?.sub(&pdq_new)?;
    }
    let closed = sigma.closure_check()?;
    let generating_function = if closed.zero && sigma.is_polynomial() {
        if sigma.is_canonical_zero() {
            Some(Expr::zero())
        } else {
            sigma.homotopy_antiderivative(None)?.as_scalar()
        }
    } else {
        None
    };
    Ok(CanonicalReport { sigma, is_canonical: closed.zero, probabilistic: closed.probabilistic, generating_function })
}
