//! Metric duality: Hodge star, codifferential and Laplacian.
//!
//! # Conventions
//!
//! For a metric `g` on an oriented chart `(x^1, …, x^n)` the star of a
//! `p`-form is
//!
//! ```text
//! ⋆α = √|det g| Σ_I α^I ε(I, Ī) dx^Ī
//! ```
//!
//! where `I` runs over increasing `p`-tuples, `Ī` is the increasing
//! complement, `ε` the sign of the concatenated permutation and
//! `α^I = Σ_K det(g^{-1}[I, K]) α_K` the raised components. Hence
//! `⋆1 = √|det g| dx^1 ∧ … ∧ dx^n` and `⋆⋆ = (−1)^{p(n−p)} s` with `s` the
//! sign of `det g`. In Minkowski `(t, x)` with `diag(1, −1)` this gives
//! `⋆dt = dx`, `⋆dx = dt`.
//!
//! The codifferential on `p`-forms, `p ≥ 1`, is
//! `δ = (−1)^{n(p+1)+1} s ⋆d⋆`, the formal adjoint of `d`. On
//! 0-forms it is zero.
//!
//! [`Metric::laplacian`] is `dδ − δd`, which equals the ordinary
//! Laplacian `Σ ∂²` on functions in Euclidean space (and the wave operator
//! `∂_t² − ∂_x²` in Minkowski). [`Metric::hodge_laplacian`] is the
//! non-negative `dδ + δd`, its negative on functions.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{increasing_tuples, signed, sort_with_sign, DiffForm};
use crate::linalg::SquareMatrix;
use crate::symexpr::{sample_coordinate, Chart, Expr, ZeroCheck};

const BASE_POINT_ATTEMPTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    chart: Arc<Chart>,
    g: SquareMatrix,
    inv: SquareMatrix,
    det: Expr,
    sqrt_abs_det: Expr,
    det_sign: i32,
}

impl Metric {
    /// Validates symmetry and non-degeneracy. The sign of `det g` is read at
    /// a deterministic sample point and `√|det g|` must be a rational
    /// function.
    pub fn from_matrix(chart: &Arc<Chart>, g: SquareMatrix) -> Result<Metric> {
        let n = chart.dim();
        if g.dim() != n {
            return Err(Error::Invalid(format!("metric is {0}x{0} on a {n}-dimensional chart", g.dim())));
        }
        if !g.equality_check(&g.transpose()).zero {
            return Err(Error::AsymmetricMetric);
        }
        let det = g.det();
        if det.is_zero() {
            return Err(Error::DegenerateMetric);
        }
        let (inv, _) = g.inverse()?;
        let point = base_point(&det).ok_or(Error::DegenerateMetric)?;
        let det_sign = if eval_at(&det, &point).is_some_and(|v| v > 0.0) { 1 } else { -1 };
        let abs = if det_sign > 0 { det.clone() } else { -det.clone() };
        let sqrt_abs_det = rational_function_sqrt(&abs).ok_or_else(|| Error::IrrationalVolume(abs.to_string()))?;
        let sqrt_abs_det = match eval_at(&sqrt_abs_det, &point) {
            Some(v) if v < 0.0 => -sqrt_abs_det,
            _ => sqrt_abs_det,
        };
        Ok(Metric { chart: chart.clone(), g, inv, det, sqrt_abs_det, det_sign })
    }

    pub fn diagonal(chart: &Arc<Chart>, entries: Vec<Expr>) -> Result<Metric> {
        Metric::from_matrix(chart, SquareMatrix::diagonal(entries))
    }

    pub fn euclidean(chart: &Arc<Chart>) -> Metric {
        Metric::diagonal(chart, vec![Expr::one(); chart.dim()]).expect("identity metric")
    }

    /// `diag(1, −1, …, −1)`, the first coordinate being time.
    pub fn minkowski(chart: &Arc<Chart>) -> Metric {
        let entries = (0..chart.dim()).map(|i| if i == 0 { Expr::one() } else { Expr::int(-1) }).collect();
        Metric::diagonal(chart, entries).expect("minkowski metric")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.g
    }

    pub fn inverse(&self) -> &SquareMatrix {
        &self.inv
    }

    pub fn det(&self) -> &Expr {
        &self.det
    }

    pub fn sqrt_abs_det(&self) -> &Expr {
        &self.sqrt_abs_det
    }

    pub fn det_sign(&self) -> i32 {
        self.det_sign
    }

    fn check(&self, a: &DiffForm) -> Result<()> {
        if **a.chart() != *self.chart {
            return Err(Error::ChartMismatch(a.chart().to_string(), self.chart.to_string()));
        }
        if a.degree() > self.chart.dim() {
            return Err(Error::DegreeMismatch(format!("{}-form on a {}-dimensional chart", a.degree(), self.chart.dim())));
        }
        Ok(())
    }

    /// Components `α^I` for every increasing tuple `I`.
    fn raise(&self, a: &DiffForm) -> Vec<(Vec<usize>, Expr)> {
        increasing_tuples(self.chart.dim(), a.degree())
            .into_iter()
            .map(|i| {
                let up: Expr = a.terms().map(|(k, c)| self.inv.minor(&i, k) * c).sum();
                (i, up)
            })
            .filter(|(_, e)| !e.is_canonical_zero())
            .collect()
    }

    pub fn hodge_star(&self, a: &DiffForm) -> Result<DiffForm> {
        self.check(a)?;
        let n = self.chart.dim();
        let terms = self.raise(a).into_iter().map(|(i, up)| {
            let comp: Vec<usize> = (0..n).filter(|k| !i.contains(k)).collect();
            let mut all = i.clone();
            all.extend(&comp);
            let (_, sign) = sort_with_sign(&all).expect("disjoint tuples");
            (comp, signed(&self.sqrt_abs_det * &up, sign))
        });
        DiffForm::from_terms(&self.chart, n - a.degree(), terms)
    }

    /// Pointwise inner product `⟨α, β⟩ = Σ_I α^I β_I`.
    pub fn inner(&self, a: &DiffForm, b: &DiffForm) -> Result<Expr> {
        self.check(a)?;
        self.check(b)?;
        if a.degree() != b.degree() {
            return Err(Error::DegreeMismatch(format!("inner product of degrees {} and {}", a.degree(), b.degree())));
        }
        Ok(self.raise(a).into_iter().map(|(i, up)| up * b.component(&i)).sum())
    }

    /// Closure of the dual form, `d⋆α`.
    pub fn dual_closure_check(&self, a: &DiffForm) -> Result<ZeroCheck> {
        self.hodge_star(a)?.ext_d().zero_check()
    }

    pub fn codifferential(&self, a: &DiffForm) -> Result<DiffForm> {
        self.check(a)?;
        let p = a.degree();
        if p == 0 {
            return Err(Error::DegreeMismatch("codifferential of a 0-form".into()));
        }
        let n = self.chart.dim();
        let star = self.hodge_star(a)?;
        let back = self.hodge_star(&star.ext_d())?;
        let odd = (n * (p + 1) + 1) % 2 == 1;
        let sign = if odd { -self.det_sign } else { self.det_sign };
        Ok(if sign < 0 { back.neg() } else { back })
    }

    /// δ extended by zero to 0-forms and forms of degree above the dimension.
    fn delta_or_zero(&self, a: &DiffForm) -> Result<DiffForm> {
        if a.degree() == 0 {
            return Ok(DiffForm::zero(&self.chart, 0));
        }
        if a.degree() > self.chart.dim() {
            return Ok(DiffForm::zero(&self.chart, a.degree() - 1));
        }
        self.codifferential(a)
    }

    /// `dδ − δd`.
    pub fn laplacian(&self, a: &DiffForm) -> Result<DiffForm> {
        self.check(a)?;
        let d_delta = self.delta_or_zero(a)?.ext_d();
        let delta_d = self.delta_or_zero(&a.ext_d())?;
        if a.degree() == 0 {
            return Ok(delta_d.neg());
        }
        d_delta.sub(&delta_d)
    }

    /// `dδ + δd`.
    pub fn hodge_laplacian(&self, a: &DiffForm) -> Result<DiffForm> {
        self.check(a)?;
        let d_delta = self.delta_or_zero(a)?.ext_d();
        let delta_d = self.delta_or_zero(&a.ext_d())?;
        if a.degree() == 0 {
            return Ok(delta_d);
        }
        d_delta.add(&delta_d)
    }
}

/// Deterministic point (all free symbols) where `e` is finite and nonzero.
pub(crate) fn base_point(e: &Expr) -> Option<BTreeMap<String, f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_7472_6963);
    let symbols: Vec<_> = e.free_symbols().into_iter().collect();
    for _ in 0..BASE_POINT_ATTEMPTS {
        let point: BTreeMap<String, f64> =
            symbols.iter().map(|s| (s.to_string(), sample_coordinate(&mut rng).to_f64().unwrap_or(0.0))).collect();
        if eval_at(e, &point).is_some_and(|v| v != 0.0) {
            return Some(point);
        }
    }
    None
}

fn eval_at(e: &Expr, point: &BTreeMap<String, f64>) -> Option<f64> {
    e.eval_f64(point).ok().filter(|v| v.is_finite())
}

/// Square root of a rational function whose numerator and denominator are
/// perfect squares.
pub(crate) fn rational_function_sqrt(e: &Expr) -> Option<Expr> {
    let (num, den) = (e.numer(), e.denom());
    let (num, den) = match (num.sqrt(), den.sqrt()) {
        (Some(a), Some(b)) => (a, b),
        _ => (num.neg().sqrt()?, den.neg().sqrt()?),
    };
    Expr::from_parts(num, den).ok()
}
