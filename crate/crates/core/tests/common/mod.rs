#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use skewform_core::exterior::increasing_tuples;
use skewform_core::{Chart, DiffForm, Expr};

pub fn e(s: &str) -> Expr {
    Expr::parse(s).unwrap()
}

/// Sum of up to `terms` monomials with small integer coefficients and
/// exponents at most 2 in each of `vars`.
pub fn poly(vars: &'static [&'static str], terms: usize) -> impl Strategy<Value = Expr> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(0u32..=2, vars.len())), 0..=terms).prop_map(move |ts| {
        ts.into_iter()
            .map(|(c, pows)| {
                let mut m = Expr::int(c);
                for (v, k) in vars.iter().zip(pows) {
                    for _ in 0..k {
                        m = m * Expr::symbol(v);
                    }
                }
                m
            })
            .sum()
    })
}

/// Polynomial, sometimes multiplied by `sin` or `exp` of a coordinate.
pub fn coeff(vars: &'static [&'static str]) -> impl Strategy<Value = Expr> {
    (poly(vars, 3), 0usize..6, 0..vars.len()).prop_map(move |(p, k, v)| {
        let x = Expr::symbol(vars[v]);
        match k {
            0 => p * x.sin(),
            1 => p * x.exp(),
            _ => p,
        }
    })
}

fn assemble(chart: &Arc<Chart>, degree: usize, coeffs: Vec<Expr>) -> DiffForm {
    let tuples = increasing_tuples(chart.dim(), degree);
    DiffForm::from_terms(chart, degree, tuples.into_iter().zip(coeffs)).unwrap()
}

fn count(n: usize, p: usize) -> usize {
    increasing_tuples(n, p).len()
}

pub fn form_of(vars: &'static [&'static str], degree: usize) -> impl Strategy<Value = DiffForm> {
    let chart = Chart::of(vars);
    prop::collection::vec(coeff(vars), count(vars.len(), degree)).prop_map(move |c| assemble(&chart, degree, c))
}

pub fn poly_form_of(vars: &'static [&'static str], degree: usize) -> impl Strategy<Value = DiffForm> {
    let chart = Chart::of(vars);
    prop::collection::vec(poly(vars, 3), count(vars.len(), degree)).prop_map(move |c| assemble(&chart, degree, c))
}

pub const XYZ: &[&str] = &["x", "y", "z"];
pub const XYZW: &[&str] = &["x", "y", "z", "w"];
pub const UV: &[&str] = &["u", "v"];

pub fn any_form(vars: &'static [&'static str]) -> impl Strategy<Value = DiffForm> {
    (0..=vars.len()).prop_flat_map(move |p| form_of(vars, p))
}
