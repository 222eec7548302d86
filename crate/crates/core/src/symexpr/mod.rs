//! Symbolic scalar kernel.
//!
//! Coefficients of forms are [`Expr`] values: reduced rational functions over
//! ℚ whose indeterminates are symbols or applications of `sin`, `cos`, `exp`
//! and `ln`. Purely rational expressions are decided exactly by their
//! canonical form. Expressions containing elementary functions fall back to a
//! seeded randomized zero test whose verdict is flagged as probabilistic.

mod compiled;
mod expr;
mod heugcd;
mod parse;
mod poly;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use compiled::Compiled;
pub use expr::Expr;
pub use parse::{node_to_expr, parse_node, BinOp, Node, Scope};
pub use poly::{gcd, Atom, Func, Monomial, Poly};

pub(crate) use parse::integer_exponent;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at column {}: {message}", offset + 1)]
    Parse { message: String, offset: usize },
    #[error("unknown function '{name}' at column {}", offset + 1)]
    UnknownFunction { name: String, offset: usize },
    #[error("'{name}' at column {} is not declared as a scalar (differentials are written d[x])", offset + 1)]
    Undeclared { name: String, offset: usize },
    #[error("exponent must be an integer constant")]
    NonIntegerExponent,
    #[error("exponent {0} is too large")]
    ExponentTooLarge(i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation hit a pole")]
    Pole,
    #[error("evaluation left the function domain")]
    Domain,
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("'{0}' is not a variable of the chart")]
    UndeclaredVariable(String),
    #[error("expression contains elementary functions; exact evaluation unavailable")]
    NotRational,
    #[error("zero test failed: every sample point hit a pole or domain error")]
    SamplingFailed,
    #[error("invalid chart: {0}")]
    InvalidChart(String),
}

impl Expr {
    /// Parses with every identifier accepted as a symbol.
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        Expr::parse_in(text, &Scope::Open)
    }

    /// Parses, rejecting identifiers outside `scope`.
    pub fn parse_in(text: &str, scope: &Scope<'_>) -> Result<Expr, ExprError> {
        node_to_expr(&parse_node(text)?, scope)
    }

    /// Evaluates at a rational point: exactly when the expression is
    /// rational, in floating point otherwise.
    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Result<Value, ExprError> {
        if self.is_rational() {
            self.eval_exact(point).map(Value::Exact)
        } else {
            use num_traits::ToPrimitive;
            let p: BTreeMap<String, f64> =
                point.iter().map(|(k, v)| (k.clone(), v.to_f64().unwrap_or(f64::NAN))).collect();
            self.eval_f64(&p).map(Value::Float)
        }
    }

    /// Zero test: exact on the canonical form, sampled when elementary
    /// functions are present.
    pub fn zero_check(&self) -> Result<ZeroCheck, ExprError> {
        if self.is_canonical_zero() {
            return Ok(ZeroCheck { zero: true, probabilistic: false });
        }
        if self.is_rational() {
            return Ok(ZeroCheck { zero: false, probabilistic: false });
        }
        sample_zero(self, sampling_seed())
    }

    /// Convenience form of [`Expr::zero_check`]; a sampling failure counts as
    /// "not shown to be zero".
    pub fn is_zero(&self) -> bool {
        self.zero_check().map(|z| z.zero).unwrap_or(false)
    }
}

/// Result of [`Expr::eval`].
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        match self {
            Value::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Value::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Value::Float(x) => write!(f, "{x:?}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ZeroCheck {
    pub zero: bool,
    pub probabilistic: bool,
}

impl ZeroCheck {
    pub const EXACT_ZERO: ZeroCheck = ZeroCheck { zero: true, probabilistic: false };

    /// Conjunction of two checks.
    pub fn and(self, other: ZeroCheck) -> ZeroCheck {
        ZeroCheck { zero: self.zero && other.zero, probabilistic: self.probabilistic || other.probabilistic }
    }
}

pub const ZERO_TEST_SAMPLES: usize = 32;
pub const ZERO_TEST_TOLERANCE: f64 = 1e-9;
const ZERO_TEST_MAX_ATTEMPTS: usize = ZERO_TEST_SAMPLES * 8;

static SAMPLING_SEED: AtomicU64 = AtomicU64::new(0);

/// Sets the process-wide seed used by probabilistic zero tests.
pub fn set_sampling_seed(seed: u64) {
    SAMPLING_SEED.store(seed, Ordering::Relaxed);
}

pub fn sampling_seed() -> u64 {
    SAMPLING_SEED.load(Ordering::Relaxed)
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Rational coordinate in [-10, 10] with denominator 100.
pub(crate) fn sample_coordinate(rng: &mut impl Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-1000i64..=1000)), BigInt::from(100))
}

fn sample_zero(e: &Expr, seed: u64) -> Result<ZeroCheck, ExprError> {
    use num_traits::ToPrimitive;
    // the stream depends on the expression, not on call order
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&e.to_string()));
    let symbols: Vec<Arc<str>> = e.free_symbols().into_iter().collect();
    let mut good = 0;
    for _ in 0..ZERO_TEST_MAX_ATTEMPTS {
        let point: BTreeMap<&str, f64> = symbols
            .iter()
            .map(|s| (s.as_ref(), sample_coordinate(&mut rng).to_f64().unwrap_or(0.0)))
            .collect();
        match e.eval_parts_f64(&|s| point.get(s).copied()) {
            Ok((num, den, scale)) => {
                if den == 0.0 || !num.is_finite() || !den.is_finite() {
                    continue;
                }
                let value = num / den;
                let tol = ZERO_TEST_TOLERANCE * (scale / den.abs()).max(1.0);
                if value.abs() >= tol {
                    return Ok(ZeroCheck { zero: false, probabilistic: true });
                }
                good += 1;
                if good == ZERO_TEST_SAMPLES {
                    break;
                }
            }
            Err(ExprError::Pole | ExprError::Domain) => continue,
            Err(other) => return Err(other),
        }
    }
    if good == 0 {
        return Err(ExprError::SamplingFailed);
    }
    Ok(ZeroCheck { zero: true, probabilistic: true })
}

/// Ordered list of distinct coordinate symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    vars: Vec<Arc<str>>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Chart, ExprError> {
        let mut seen = BTreeSet::new();
        let mut vars = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let valid = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || n == "d" || Func::from_name(n).is_some() {
                return Err(ExprError::InvalidChart(format!("'{n}' cannot be a coordinate name")));
            }
            if !seen.insert(n.to_string()) {
                return Err(ExprError::InvalidChart(format!("duplicate coordinate '{n}'")));
            }
            vars.push(Arc::from(n));
        }
        Ok(Chart { vars })
    }

    /// Convenience constructor for fixed names; panics on invalid input.
    pub fn of(names: &[&str]) -> Arc<Chart> {
        Arc::new(Chart::new(names).expect("valid chart"))
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[Arc<str>] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &str {
        &self.vars[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.as_ref() == name)
    }

    pub fn symbol(&self, i: usize) -> Expr {
        Expr::symbol(&self.vars[i])
    }

    /// Partial derivative with respect to a coordinate of this chart.
    pub fn partial(&self, e: &Expr, var: &str) -> Result<Expr, ExprError> {
        if self.index_of(var).is_none() {
            return Err(ExprError::UndeclaredVariable(var.to_string()));
        }
        Ok(e.diff(var))
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.vars.iter().map(|v| v.as_ref()).collect();
        write!(f, "({})", names.join(", "))
    }
}
