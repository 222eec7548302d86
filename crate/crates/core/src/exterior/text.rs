//! Text and JSON representations of forms.
//!
//! Text: `coeff * d[x] ^ d[y] + …`, read back with the expression grammar
//! where `d[x]` is a basis 1-form and `^`/`*` between forms of positive
//! degree is the wedge product.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::DiffForm;
use crate::error::{Error, Result};
use crate::symexpr::{integer_exponent, parse_node, BinOp, Chart, Expr, ExprError, Func, Node};

/// Name resolution for form expressions.
pub trait FormEnv {
    /// A previously defined form.
    fn form(&self, _name: &str) -> Option<DiffForm> {
        None
    }

    /// Whether an identifier that is neither a form nor a coordinate may be
    /// used as a constant parameter.
    fn admits_symbol(&self, _name: &str) -> bool {
        true
    }

    /// Operator calls such as `d(omega)`; `None` falls through to the
    /// elementary functions.
    fn call(&self, _name: &str, _args: &[Node], _chart: &Arc<Chart>) -> Option<Result<DiffForm>> {
        None
    }
}

/// Resolves coordinates and admits every other identifier as a parameter.
pub struct NoEnv;

impl FormEnv for NoEnv {}

impl DiffForm {
    /// Parses form text over `chart`; identifiers outside the chart are
    /// constant parameters.
    pub fn parse(chart: &Arc<Chart>, text: &str) -> Result<DiffForm> {
        DiffForm::parse_with(chart, text, &NoEnv)
    }

    pub fn parse_with(chart: &Arc<Chart>, text: &str, env: &dyn FormEnv) -> Result<DiffForm> {
        let node = parse_node(text)?;
        DiffForm::from_node(chart, &node, env)
    }

    /// Interprets a syntax tree as a form.
    pub fn from_node(chart: &Arc<Chart>, node: &Node, env: &dyn FormEnv) -> Result<DiffForm> {
        match node {
            Node::Num(q) => Ok(DiffForm::scalar(chart, Expr::rational(q.clone()))),
            Node::Ident(name, at) => {
                if let Some(f) = env.form(name) {
                    return f.with_chart(chart);
                }
                if chart.index_of(name).is_some() || (Func::from_name(name).is_none() && env.admits_symbol(name)) {
                    return Ok(DiffForm::scalar(chart, Expr::symbol(name)));
                }
                Err(ExprError::Undeclared { name: name.clone(), offset: *at }.into())
            }
            Node::Diff(var, _) => DiffForm::dx(chart, var),
            Node::Neg(inner) => Ok(DiffForm::from_node(chart, inner, env)?.neg()),
            Node::Bin(op, a, b) => {
                let x = DiffForm::from_node(chart, a, env)?;
                let y = DiffForm::from_node(chart, b, env)?;
                match op {
                    BinOp::Add => {
                        let (x, y) = promote(&x, &y)?;
                        x.add(&y)
                    }
                    BinOp::Sub => {
                        let (x, y) = promote(&x, &y)?;
                        x.sub(&y)
                    }
                    BinOp::Mul => match (x.as_scalar(), y.as_scalar()) {
                        (Some(s), _) => Ok(y.scale(&s)),
                        (_, Some(s)) => Ok(x.scale(&s)),
                        _ => x.wedge(&y),
                    },
                    BinOp::Div => {
                        let s = y.as_scalar().ok_or_else(|| {
                            Error::DegreeMismatch(format!("cannot divide by a {}-form", y.degree()))
                        })?;
                        let inv = s.recip()?;
                        Ok(x.scale(&inv))
                    }
                    BinOp::Pow => match (x.as_scalar(), y.as_scalar()) {
                        (Some(base), Some(exp)) => {
                            let n = integer_exponent(&exp).ok_or(ExprError::NonIntegerExponent)?;
                            Ok(DiffForm::scalar(chart, base.powi(n)?))
                        }
                        _ => x.wedge(&y),
                    },
                }
            }
            Node::Call(name, args, at) => {
                if let Some(r) = env.call(name, args, chart) {
                    return r;
                }
                let f = Func::from_name(name)
                    .ok_or_else(|| ExprError::UnknownFunction { name: name.clone(), offset: *at })?;
                if args.len() != 1 {
                    return Err(ExprError::Parse { message: format!("{name} takes one argument"), offset: *at }.into());
                }
                let arg = DiffForm::from_node(chart, &args[0], env)?;
                let s = arg.as_scalar().ok_or_else(|| {
                    Error::DegreeMismatch(format!("{name} applied to a {}-form", arg.degree()))
                })?;
                Ok(DiffForm::scalar(chart, Expr::apply(f, s)))
            }
        }
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            chart: self.chart.vars().iter().map(|v| v.to_string()).collect(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(idx, c)| TermJson { indices: idx.clone(), coefficient: c.to_string() })
                .collect(),
        }
    }

    pub fn from_json(json: &FormJson) -> Result<DiffForm> {
        let chart = Arc::new(Chart::new(&json.chart)?);
        let terms = json
            .terms
            .iter()
            .map(|t| Ok((t.indices.clone(), Expr::parse(&t.coefficient)?)))
            .collect::<Result<Vec<_>>>()?;
        DiffForm::from_terms(&chart, json.degree, terms)
    }

    /// Basis label such as `d[x] ^ d[y]`.
    pub fn basis_label(chart: &Chart, idx: &[usize]) -> String {
        idx.iter().map(|&i| format!("d[{}]", chart.var(i))).collect::<Vec<_>>().join(" ^ ")
    }
}

/// A canonical-zero 0-form stands for the zero form of any degree.
fn promote(x: &DiffForm, y: &DiffForm) -> Result<(DiffForm, DiffForm)> {
    if x.degree() == y.degree() {
        return Ok((x.clone(), y.clone()));
    }
    if x.degree() == 0 && x.is_canonical_zero() {
        return Ok((DiffForm::zero(y.chart(), y.degree()), y.clone()));
    }
    if y.degree() == 0 && y.is_canonical_zero() {
        return Ok((x.clone(), DiffForm::zero(x.chart(), x.degree())));
    }
    Err(Error::DegreeMismatch(format!("cannot add a {}-form and a {}-form", x.degree(), y.degree())))
}

/// JSON term map of a form. Indices are zero-based positions in `chart`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    pub chart: Vec<String>,
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub indices: Vec<usize>,
    pub coefficient: String,
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        if self.degree == 0 {
            return write!(f, "{}", self.component(&[]));
        }
        for (k, (idx, c)) in self.terms.iter().enumerate() {
            let basis = DiffForm::basis_label(&self.chart, idx);
            let single = c.numer().num_terms() == 1 && c.denom().is_constant();
            let negative = single && c.numer().lead().is_some_and(|(_, q)| num_traits::Signed::is_negative(q));
            let mag = if negative { -c } else { c.clone() };
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mag == Expr::one() {
                write!(f, "{basis}")?;
            } else if single {
                write!(f, "{mag} * {basis}")?;
            } else {
                write!(f, "({mag}) * {basis}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let c = Chart::of(&["t", "q", "p"]);
        for s in [
            "p*d[q] - (p^2/2)*d[t]",
            "(x + 1)/q * d[t] ^ d[p] - 3 * d[q] ^ d[p]",
            "sin(q) - t",
            "0",
            "-d[t]^d[q]^d[p]",
        ] {
            let f = DiffForm::parse(&c, s).unwrap();
            let back = DiffForm::parse(&c, &f.to_string()).unwrap();
            assert_eq!(back, f, "{s} -> {f}");
        }
    }

    #[test]
    fn printing_shape() {
        let c = Chart::of(&["x", "y"]);
        let f = DiffForm::parse(&c, "-y*d[x] + (x + 1)*d[y]").unwrap();
        assert_eq!(f.to_string(), "-y * d[x] + (x + 1) * d[y]");
        let g = DiffForm::parse(&c, "d[y]^d[x]").unwrap();
        assert_eq!(g.to_string(), "-d[x] ^ d[y]");
    }

    #[test]
    fn json_round_trip() {
        let c = Chart::of(&["x", "y", "z"]);
        let f = DiffForm::parse(&c, "x*d[y]^d[z] - y^2/3*d[x]^d[y]").unwrap();
        let js = serde_json::to_string(&f.to_json()).unwrap();
        let back: FormJson = serde_json::from_str(&js).unwrap();
        assert_eq!(DiffForm::from_json(&back).unwrap(), f);
        assert!(js.contains("\"indices\":[0,1]"));
    }

    #[test]
    fn parse_errors() {
        let c = Chart::of(&["x", "y"]);
        assert!(DiffForm::parse(&c, "d[z]").is_err());
        assert!(DiffForm::parse(&c, "d[x] + x").is_err());
        assert!(DiffForm::parse(&c, "x / d[y]").is_err());
        assert!(DiffForm::parse(&c, "sin(d[x])").is_err());
    }
}
