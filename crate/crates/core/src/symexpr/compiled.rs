use num_traits::ToPrimitive;

use super::poly::{Atom, Func, Poly};
use super::{Expr, ExprError};

enum Slot {
    Var(usize),
    Func(Func, Box<Compiled>),
}

struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

/// Numeric evaluator for an [`Expr`] with symbols bound by position.
pub struct Compiled {
    slots: Vec<Slot>,
    num: CompiledPoly,
    den: CompiledPoly,
}

impl Compiled {
    pub(crate) fn new(e: &Expr, symbols: &[&str]) -> Result<Compiled, ExprError> {
        let mut atoms: Vec<Atom> = Vec::new();
        let num = compile_poly(e.numer(), &mut atoms);
        let den = compile_poly(e.denom(), &mut atoms);
        let slots = atoms
            .into_iter()
            .map(|a| match a {
                Atom::Var(v) => symbols
                    .iter()
                    .position(|s| *s == v.as_ref())
                    .map(Slot::Var)
                    .ok_or_else(|| ExprError::Unbound(v.to_string())),
                Atom::Func(f, arg) => Ok(Slot::Func(f, Box::new(Compiled::new(&arg, symbols)?))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Compiled { slots, num, den })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        let vals = self
            .slots
            .iter()
            .map(|s| match s {
                Slot::Var(i) => Ok(x[*i]),
                Slot::Func(f, arg) => {
                    let y = f.apply_f64(arg.eval(x)?);
                    if y.is_finite() {
                        Ok(y)
                    } else {
                        Err(ExprError::Domain)
                    }
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let n = eval_poly(&self.num, &vals);
        let d = eval_poly(&self.den, &vals);
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
}

fn compile_poly(p: &Poly, atoms: &mut Vec<Atom>) -> CompiledPoly {
    let terms = p
        .terms()
        .map(|(m, c)| {
            let factors = m
                .factors()
                .iter()
                .map(|(a, e)| {
                    let idx = match atoms.iter().position(|b| b == a) {
                        Some(i) => i,
                        None => {
                            atoms.push(a.clone());
                            atoms.len() - 1
                        }
                    };
                    (idx, *e as i32)
                })
                .collect();
            (c.to_f64().unwrap_or(f64::NAN), factors)
        })
        .collect();
    CompiledPoly { terms }
}

fn eval_poly(p: &CompiledPoly, vals: &[f64]) -> f64 {
    p.terms
        .iter()
        .map(|(c, fs)| fs.iter().fold(*c, |acc, (i, e)| acc * vals[*i].powi(*e)))
        .sum()
}
