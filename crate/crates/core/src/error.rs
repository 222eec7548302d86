use thiserror::Error;

use crate::symexpr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("chart mismatch: {0} vs {1}")]
    ChartMismatch(String, String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("index {index} out of range for a chart of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("form is not closed")]
    NotClosed,
    #[error("homotopy antiderivative needs polynomial coefficients; got {0}")]
    NonPolynomial(String),
    #[error("degree-0 form has no antiderivative")]
    DegreeZero,
    #[error("metric is not symmetric")]
    AsymmetricMetric,
    #[error("metric is degenerate (det g = 0)")]
    DegenerateMetric,
    #[error("sqrt|det g| is not a rational expression: det g = {0}")]
    IrrationalVolume(String),
    #[error("connection has torsion; the first Bianchi identity is checked for symmetric connections only")]
    TorsionPresent,
    #[error("pseudostructure: {0}")]
    Pseudostructure(String),
    #[error("scan: {0}")]
    Scan(String),
    #[error("legendre transform: {0}")]
    Legendre(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
