//! Symbolic engine for exterior and evolutionary skew-symmetric differential
//! forms.
//!
//! * [`symexpr`]: canonical rational-function scalars, parsing, derivatives,
//!   evaluation and zero testing.
//! * [`exterior`]: forms over a chart, wedge product, exterior derivative,
//!   closedness and the radial homotopy antiderivative.
//! * [`manifold`]: connections (torsion allowed), the covariant derivative,
//!   the torsion commutator of a 1-form and curvature.
//! * [`duality`]: metrics, Hodge star, codifferential and Laplacians.
//! * [`relations`]: pseudostructures, pullback, relation classification,
//!   degenerate-locus scans and sequential integration.
//! * [`catalog`]: runnable named identities and mechanics demonstrations.

pub mod catalog;
pub mod duality;
pub mod error;
pub mod exterior;
pub mod linalg;
pub mod manifold;
pub mod relations;
pub mod symexpr;

pub use error::{Error, Result};
pub use exterior::DiffForm;
pub use symexpr::{Chart, Expr, ExprError, ZeroCheck};
