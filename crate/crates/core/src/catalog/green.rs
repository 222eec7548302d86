//! Green's theorem on the unit square by composite Simpson quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symexpr::{Compiled, Expr};

/// Below this `abs_diff` the quadrature error is at roundoff level and a
/// convergence ratio carries no information.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenReport {
    pub grid_n: usize,
    /// `∮ P dx + Q dy`, counterclockwise.
    pub circulation: f64,
    /// `∬ (∂Q/∂x − ∂P/∂y) dx dy`.
    pub area_integral: f64,
    pub abs_diff: f64,
}

fn simpson_weights(n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

fn eval(f: &Compiled, x: f64, y: f64) -> Result<f64> {
    match f.eval(&[x, y]) {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Quadrature(format!("integrand is singular at ({x}, {y})"))),
    }
}

/// Both sides of Green's theorem for `P dx + Q dy` on `[0,1]²` with
/// `grid_n` Simpson subintervals per edge (and per axis for the area).
/// `P` and `Q` are expressions in `x` and `y`.
pub fn green_check(p: &Expr, q: &Expr, grid_n: usize) -> Result<GreenReport> {
    if grid_n == 0 || grid_n % 2 == 1 {
        return Err(Error::Quadrature(format!("grid_n must be even and positive, got {grid_n}")));
    }
    let vars = ["x", "y"];
    let curl = &q.diff("x") - &p.diff("y");
    let (pc, qc, cc) = (p.compile(&vars)?, q.compile(&vars)?, curl.compile(&vars)?);
    let w = simpson_weights(grid_n);
    let nodes: Vec<f64> = (0..=grid_n).map(|i| i as f64 / grid_n as f64).collect();

    let mut circulation = 0.0;
    for (t, wt) in nodes.iter().zip(&w) {
        let bottom = eval(&pc, *t, 0.0)?;
        let right = eval(&qc, 1.0, *t)?;
        let top = eval(&pc, *t, 1.0)?;
        let left = eval(&qc, 0.0, *t)?;
        circulation += wt * (bottom + right - top - left);
    }
    let mut area_integral = 0.0;
    for (x, wx) in nodes.iter().zip(&w) {
        let mut col = 0.0;
        for (y, wy) in nodes.iter().zip(&w) {
            col += wy * eval(&cc, *x, *y)?;
        }
        area_integral += wx * col;
    }
    Ok(GreenReport { grid_n, circulation, area_integral, abs_diff: (circulation - area_integral).abs() })
}

/// `abs_diff(grid_n / 2) / abs_diff(grid_n)`, or `None` when either
/// difference is under [`ROUNDOFF_FLOOR`].
pub fn halving_ratio(p: &Expr, q: &Expr, grid_n: usize) -> Result<Option<f64>> {
    let coarse = green_check(p, q, grid_n / 2)?;
    let fine = green_check(p, q, grid_n)?;
    if coarse.abs_diff < ROUNDOFF_FLOOR || fine.abs_diff < ROUNDOFF_FLOOR {
        return Ok(None);
    }
    Ok(Some(coarse.abs_diff / fine.abs_diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn rotation_field() {
        let r = green_check(&e("-y"), &e("x"), 8).unwrap();
        assert!((r.circulation - 2.0).abs() < 1e-12);
        assert!((r.area_integral - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_field() {
        let r = green_check(&e("x^2"), &e("y^2"), 8).unwrap();
        assert!(r.circulation.abs() < 1e-12 && r.area_integral.abs() < 1e-12);
    }

    #[test]
    fn quintic_converges_at_fourth_order() {
        let ratio = halving_ratio(&e("-y^5"), &e("x^5"), 32).unwrap().unwrap();
        assert!((ratio - 16.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn bad_inputs() {
        assert!(green_check(&e("x"), &e("y"), 7).is_err());
        assert!(green_check(&e("1/x"), &e("y"), 8).is_err());
        assert!(green_check(&e("ln(x)"), &e("y"), 8).is_err());
    }
}
