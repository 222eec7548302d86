//! Vanishing loci of Jacobians, determinants and Poisson brackets.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::symexpr::{Chart, Compiled, Expr};

pub const SCAN_LINES: usize = 64;
pub const SCAN_TOLERANCE: f64 = 1e-9;
const LINE_HALF_LENGTH: f64 = 10.0;
const LINE_CELLS: usize = 64;
const BISECTION_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScanKind {
    /// `det ∂f_i/∂x_j` for `n` functions on an `n`-dimensional chart.
    Jacobian,
    /// Determinant of a `k × k` matrix given row by row.
    Determinant,
    /// `{f, g}` over the `(q, p)` pairs.
    Poisson { pairs: Vec<(String, String)> },
}

impl ScanKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScanKind::Jacobian => "jacobian",
            ScanKind::Determinant => "determinant",
            ScanKind::Poisson { .. } => "poisson",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroLocusReport {
    pub kind: String,
    /// The functional expression `F` in canonical form.
    pub function: String,
    pub identically_zero: bool,
    pub probabilistic: bool,
    /// Coordinate order of `points`.
    pub variables: Vec<String>,
    pub points: Vec<Vec<f64>>,
    /// Largest `|F|` over the reported points.
    pub max_abs_value: f64,
}

/// `{f, g} = Σ_j (∂f/∂q_j ∂g/∂p_j − ∂f/∂p_j ∂g/∂q_j)`.
pub fn poisson_bracket(f: &Expr, g: &Expr, pairs: &[(String, String)]) -> Expr {
    pairs
        .iter()
        .map(|(q, p)| &(f.diff(q) * g.diff(p)) - &(f.diff(p) * g.diff(q)))
        .sum()
}

/// Matrix of second derivatives of `l` in `vars`.
pub fn hessian(l: &Expr, vars: &[&str]) -> SquareMatrix {
    SquareMatrix::from_fn(vars.len(), |i, j| l.diff(vars[i]).diff(vars[j]))
}

fn functional(exprs: &[Expr], kind: &ScanKind, chart: &Arc<Chart>) -> Result<Expr> {
    match kind {
        ScanKind::Jacobian => {
            let n = chart.dim();
            if exprs.len() != n {
                return Err(Error::Scan(format!("jacobian needs {n} functions on this chart, got {}", exprs.len())));
            }
            Ok(SquareMatrix::from_fn(n, |i, j| exprs[i].diff(chart.var(j))).det())
        }
        ScanKind::Determinant => {
            let k = (exprs.len() as f64).sqrt().round() as usize;
            if k * k != exprs.len() || k == 0 {
                return Err(Error::Scan(format!("{} entries do not form a square matrix", exprs.len())));
            }
            Ok(SquareMatrix::from_fn(k, |i, j| exprs[i * k + j].clone()).det())
        }
        ScanKind::Poisson { pairs } => {
            if exprs.len() != 2 {
                return Err(Error::Scan(format!("poisson bracket takes two functions, got {}", exprs.len())));
            }
            if pairs.is_empty() {
                return Err(Error::Scan("poisson bracket needs at least one (q, p) pair".into()));
            }
            let mut seen = std::collections::BTreeSet::new();
            for (q, p) in pairs {
                for v in [q, p] {
                    if chart.index_of(v).is_none() {
                        return Err(Error::Scan(format!("'{v}' is not a coordinate of {chart}")));
                    }
                    if !seen.insert(v.clone()) {
                        return Err(Error::Scan(format!("'{v}' appears in more than one pair")));
                    }
                }
            }
            Ok(poisson_bracket(&exprs[0], &exprs[1], pairs))
        }
    }
}

/// Builds `F` and samples its zero set by sign changes along
/// [`SCAN_LINES`] random lines, each drawn from its own ChaCha stream of
/// `seed`. Sign changes are bisected until the bracket stops shrinking and
/// points with `|F| ≤ SCAN_TOLERANCE` are reported.
pub fn degenerate_scan(exprs: &[Expr], kind: &ScanKind, chart: &Arc<Chart>, seed: u64) -> Result<ZeroLocusReport> {
    let f = functional(exprs, kind, chart)?;
    let check = f.zero_check()?;
    let mut variables: Vec<String> = chart.vars().iter().map(|v| v.to_string()).collect();
    for s in f.free_symbols() {
        if chart.index_of(&s).is_none() {
            variables.push(s.to_string());
        }
    }
    let mut report = ZeroLocusReport {
        kind: kind.name().to_string(),
        function: f.to_string(),
        identically_zero: check.zero,
        probabilistic: check.probabilistic,
        variables: variables.clone(),
        points: Vec::new(),
        max_abs_value: 0.0,
    };
    if check.zero || f.is_constant() {
        return Ok(report);
    }
    let names: Vec<&str> = variables.iter().map(String::as_str).collect();
    let compiled = f.compile(&names)?;
    for line in 0..SCAN_LINES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(line as u64);
        for (point, value) in scan_line(&compiled, names.len(), &mut rng) {
            report.max_abs_value = report.max_abs_value.max(value.abs());
            report.points.push(point);
        }
    }
    Ok(report)
}

fn scan_line(f: &Compiled, dim: usize, rng: &mut ChaCha8Rng) -> Vec<(Vec<f64>, f64)> {
    let origin: Vec<f64> = (0..dim).map(|_| rng.gen_range(-LINE_HALF_LENGTH..LINE_HALF_LENGTH)).collect();
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-3 {
        return Vec::new();
    }
    dir.iter_mut().for_each(|v| *v /= norm);
    let at = |s: f64| -> Vec<f64> { origin.iter().zip(&dir).map(|(o, d)| o + s * d).collect() };
    let value = |s: f64| f.eval(&at(s)).ok().filter(|v| v.is_finite());

    let mut roots = Vec::new();
    let step = 2.0 * LINE_HALF_LENGTH / LINE_CELLS as f64;
    let mut prev = (-LINE_HALF_LENGTH, value(-LINE_HALF_LENGTH));
    for k in 1..=LINE_CELLS {
        let s = -LINE_HALF_LENGTH + step * k as f64;
        let cur = (s, value(s));
        match (prev.1, cur.1) {
            (Some(a), _) if a == 0.0 => roots.push((prev.0, 0.0)),
            (Some(a), Some(b)) if a.signum() != b.signum() && b != 0.0 => {
                roots.extend(bisect(&value, prev.0, cur.0, a));
            }
            _ => {}
        }
        prev = cur;
    }
    if prev.1 == Some(0.0) {
        roots.push((prev.0, 0.0));
    }
    // a sign change across a pole bisects to a large value and is dropped
    roots.into_iter().filter(|(_, v)| v.abs() <= SCAN_TOLERANCE).map(|(s, v)| (at(s), v)).collect()
}

fn bisect(value: &dyn Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Option<(f64, f64)> {
    let mut best = (lo, f_lo);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = value(mid)?;
        if f_mid.abs() < best.1.abs() {
            best = (mid, f_mid);
        }
        if f_mid == 0.0 {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn qp() -> Vec<(String, String)> {
        vec![("q".to_string(), "p".to_string())]
    }

    #[test]
    fn bracket_fixture() {
        let c = Chart::of(&["q", "p"]);
        let kind = ScanKind::Poisson { pairs: qp() };
        let r = degenerate_scan(&[e("q^2 + p^2"), e("q*p")], &kind, &c, 0).unwrap();
        assert_eq!(Expr::parse(&r.function).unwrap(), e("2*(q^2 - p^2)"));
        assert!(!r.identically_zero);
        assert!(!r.points.is_empty());
        for pt in &r.points {
            assert!((pt[0].abs() - pt[1].abs()).abs() < 1e-6, "{pt:?}");
        }
        let same = degenerate_scan(&[e("q^2 + p^2"), e("q^2 + p^2")], &kind, &c, 0).unwrap();
        assert!(same.identically_zero && same.points.is_empty());
    }

    #[test]
    fn hessian_locus() {
        let c = Chart::of(&["qdot"]);
        let l = e("qdot^3/3");
        let grad = [l.diff("qdot")];
        let r = degenerate_scan(&grad, &ScanKind::Jacobian, &c, 3).unwrap();
        assert_eq!(r.function, "2*qdot");
        assert_eq!(hessian(&l, &["qdot"]).det(), e("2*qdot"));
        assert!(!r.points.is_empty());
        assert!(r.points.iter().all(|p| (2.0 * p[0]).abs() < 1e-9));
    }

    #[test]
    fn scan_is_seeded() {
        let c = Chart::of(&["x", "y"]);
        let m = [e("x"), e("y"), e("y"), e("x")];
        let a = degenerate_scan(&m, &ScanKind::Determinant, &c, 11).unwrap();
        let b = degenerate_scan(&m, &ScanKind::Determinant, &c, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, degenerate_scan(&m, &ScanKind::Determinant, &c, 12).unwrap().points);
    }

    #[test]
    fn scan_input_errors() {
        let c = Chart::of(&["q", "p"]);
        assert!(degenerate_scan(&[e("q"), e("p"), e("1")], &ScanKind::Determinant, &c, 0).is_err());
        assert!(degenerate_scan(&[e("q")], &ScanKind::Jacobian, &c, 0).is_err());
        let bad = ScanKind::Poisson { pairs: vec![("q".into(), "z".into())] };
        assert!(degenerate_scan(&[e("q"), e("p")], &bad, &c, 0).is_err());
        assert!(degenerate_scan(&[e("q"), e("p")], &ScanKind::Poisson { pairs: vec![] }, &c, 0).is_err());
    }
}
