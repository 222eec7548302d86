//! Line-oriented declaration language.
//!
//! ```text
//! # comment
//! chart t q p
//! param c k
//! form omega = p*d[q] - (p^2/2)*d[t]
//! metric g = diag(1, -1, -1)            | euclidean | minkowski | rows(a, b; b, c)
//! connection G: q,t,q = k; p,q,q = 1    | = levi_civita(g) | = zero
//! pseudo traj(u): t = u, q = c*u, p = c
//! relation R: 0 => omega
//!
//! show d(omega)
//! check closed omega                    | exact | unclosed | zero | A == B
//! check torsionfree G                   | bianchi G
//! check dualclosed omega in g [on traj [induced]]
//! classify R [on traj] [expect CLOSED_RHS]      (or an inline  psi => omega)
//! chain R [on traj]
//! scan poisson q^2 + p^2, q*p pairs q:p  | jacobian f, g, h | determinant a, b, c, d
//! commutator omega [with G]
//! legendre qdot^2/2 - k*q^2/2 for qdot -> p
//! canonical q:p -> p, -q
//! green -y^3, x^3 [grid 256]
//! catalog poincare-invariant            | catalog all
//! ```
//!
//! Form expressions use the scalar grammar plus `d[x]`, wedge `^`, earlier
//! form names and the operators `d`, `evo_d(a, G)`, `star(a, g)`,
//! `delta(a, g)`, `lap(a, g)`, `hodge_lap(a, g)`, `pull(a, S)` and
//! `homotopy(a)`. An expression lives on the chart of the forms it names,
//! else on the most recent `chart`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use skewform_core::duality::Metric;
use skewform_core::exterior::FormEnv;
use skewform_core::linalg::SquareMatrix;
use skewform_core::manifold::Connection;
use skewform_core::relations::{pullback, Classification, DualOrder, Pseudostructure, Relation, ScanKind};
use skewform_core::symexpr::{node_to_expr, parse_node, BinOp, Node, Scope};
use skewform_core::{Chart, DiffForm, Error, Expr, ExprError};

/// Parse or resolution error with a one-based position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormExpr {
    pub node: Node,
    pub value: DiffForm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RelationRef {
    Named(String),
    Inline(FormExpr, FormExpr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConnectionDef {
    Zero,
    LeviCivita(String),
    /// `([σ, α, β], Γ^σ_{αβ})` by coordinate name.
    Entries(Vec<([String; 3], Node)>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricDef {
    Euclidean,
    Minkowski,
    Diag(Vec<Node>),
    Rows(Vec<Vec<Node>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Closed(FormExpr),
    Unclosed(FormExpr),
    Exact(FormExpr),
    Zero(FormExpr),
    Equal(FormExpr, FormExpr),
    TorsionFree(String),
    Bianchi(String),
    DualClosed { form: FormExpr, metric: String, on: Option<(String, DualOrder)> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Show(FormExpr),
    Check(Check),
    Classify { relation: RelationRef, on: Option<String>, expect: Option<Classification> },
    Chain { relation: RelationRef, on: Option<String> },
    Scan { kind: ScanKind, exprs: Vec<Node>, values: Vec<Expr>, chart: Arc<Chart> },
    Commutator { form: FormExpr, connection: Option<String> },
    Legendre { lagrangian: Node, value: Expr, pairs: Vec<(String, String)> },
    Canonical { chart: Arc<Chart>, pairs: Vec<(String, String)>, maps: Vec<(Node, Node)>, values: Vec<(Expr, Expr)> },
    Green { p: Node, q: Node, values: (Expr, Expr), grid: usize },
    Catalog(Option<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Chart(Vec<String>),
    Param(Vec<String>),
    Form { name: String, expr: FormExpr },
    Metric { name: String, def: MetricDef },
    Connection { name: String, def: ConnectionDef },
    Pseudo { name: String, params: Vec<String>, map: Vec<(String, Node)> },
    Relation { name: String, psi: FormExpr, omega: FormExpr },
    Command(Command),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub line: usize,
    pub kind: StmtKind,
}

/// A resolved session: declarations are evaluated and every command refers
/// to objects declared before it.
#[derive(Clone, Debug, Default)]
pub struct Session {
    pub statements: Vec<Statement>,
    pub forms: BTreeMap<String, DiffForm>,
    pub metrics: BTreeMap<String, Metric>,
    pub connections: BTreeMap<String, Connection>,
    pub pseudos: BTreeMap<String, Pseudostructure>,
    pub relations: BTreeMap<String, Relation>,
}

impl Session {
    pub fn commands(&self) -> impl Iterator<Item = (&Statement, &Command)> {
        self.statements.iter().filter_map(|s| match &s.kind {
            StmtKind::Command(c) => Some((s, c)),
            _ => None,
        })
    }

    pub fn relation(&self, r: &RelationRef) -> Relation {
        match r {
            RelationRef::Named(n) => self.relations[n].clone(),
            RelationRef::Inline(psi, omega) => {
                Relation::new(psi.value.clone(), omega.value.clone()).expect("checked at parse time")
            }
        }
    }
}

/// Two sessions are equivalent when they print identically and resolve to
/// the same objects.
impl PartialEq for Session {
    fn eq(&self, other: &Session) -> bool {
        self.to_string() == other.to_string()
            && self.forms == other.forms
            && self.metrics == other.metrics
            && self.connections == other.connections
            && self.pseudos == other.pseudos
            && self.relations == other.relations
    }
}

pub fn parse_session(text: &str) -> Result<Session, Diagnostic> {
    let mut p = SessionParser::default();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        p.line = i + 1;
        let kind = p.statement(content)?;
        p.session.statements.push(Statement { line: i + 1, kind });
    }
    Ok(p.session)
}

#[derive(Default)]
struct SessionParser {
    session: Session,
    chart: Option<Arc<Chart>>,
    params: BTreeSet<String>,
    line: usize,
}

/// A slice of the current line with its byte offset.
#[derive(Clone, Copy)]
struct Span<'a> {
    text: &'a str,
    at: usize,
}

impl<'a> Span<'a> {
    fn trim(self) -> Span<'a> {
        let start = self.text.len() - self.text.trim_start().len();
        Span { text: self.text.trim(), at: self.at + start }
    }

    fn slice(self, from: usize, to: usize) -> Span<'a> {
        Span { text: &self.text[from..to], at: self.at + from }.trim()
    }

    fn tail(self, from: usize) -> Span<'a> {
        self.slice(from, self.text.len())
    }

    /// Leading word and the rest.
    fn word(self) -> (Span<'a>, Span<'a>) {
        let s = self.trim();
        let end = s.text.find(|c: char| c.is_whitespace()).unwrap_or(s.text.len());
        (s.slice(0, end), s.tail(end))
    }

    /// Splits at `sep` outside parentheses and brackets.
    fn split(self, sep: char) -> Vec<Span<'a>> {
        let mut out = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, ch) in self.text.char_indices() {
            match ch {
                '(' | '[' => depth += 1,
                ')' | ']' => depth -= 1,
                c if c == sep && depth == 0 => {
                    out.push(self.slice(start, i));
                    start = i + ch.len_utf8();
                }
                _ => {}
            }
        }
        out.push(self.tail(start));
        out
    }

    /// Position of `pat` outside parentheses, as a standalone word when
    /// `pat` is alphabetic.
    fn find(self, pat: &str) -> Option<usize> {
        let bytes = self.text.as_bytes();
        let word = pat.chars().all(|c| c.is_alphanumeric() || c == '_');
        let mut depth = 0i32;
        for (i, ch) in self.text.char_indices() {
            match ch {
                '(' | '[' => depth += 1,
                ')' | ']' => depth -= 1,
                _ => {}
            }
            if depth == 0 && self.text[i..].starts_with(pat) {
                if word {
                    let before = i == 0 || !is_ident_byte(bytes[i - 1]);
                    let after = bytes.get(i + pat.len()).is_none_or(|b| !is_ident_byte(*b));
                    if !(before && after) {
                        continue;
                    }
                }
                return Some(i);
            }
        }
        None
    }

    /// Splits off a trailing `keyword rest` clause.
    fn clause(self, keyword: &str) -> (Span<'a>, Option<Span<'a>>) {
        match self.find(keyword) {
            Some(i) => (self.slice(0, i), Some(self.tail(i + keyword.len()))),
            None => (self, None),
        }
    }
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: &[&str] = &["on", "expect", "in", "with", "for", "pairs", "grid", "induced", "d"];

impl SessionParser {
    fn err(&self, at: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic { line: self.line, column: at + 1, message: message.into() }
    }

    fn expr_err(&self, span: Span<'_>, e: ExprError) -> Diagnostic {
        match e {
            ExprError::Parse { message, offset } => self.err(span.at + offset, message),
            ExprError::UnknownFunction { name, offset } => {
                self.err(span.at + offset, format!("unknown function or operator '{name}'"))
            }
            ExprError::Undeclared { name, offset } => {
                self.err(span.at + offset, format!("'{name}' is not declared (differentials are written d[x])"))
            }
            other => self.err(span.at, other.to_string()),
        }
    }

    fn core_err(&self, span: Span<'_>, e: Error) -> Diagnostic {
        match e {
            Error::Expr(x) => self.expr_err(span, x),
            other => self.err(span.at, other.to_string()),
        }
    }

    fn chart(&self, at: usize) -> Result<Arc<Chart>, Diagnostic> {
        self.chart.clone().ok_or_else(|| self.err(at, "no chart declared yet"))
    }

    fn name(&self, span: Span<'_>) -> Result<String, Diagnostic> {
        if !is_name(span.text) || RESERVED.contains(&span.text) {
            return Err(self.err(span.at, format!("'{}' is not a valid name", span.text)));
        }
        Ok(span.text.to_string())
    }

    fn new_name(&self, span: Span<'_>, taken: bool, kind: &str) -> Result<String, Diagnostic> {
        let name = self.name(span)?;
        if taken {
            return Err(self.err(span.at, format!("{kind} '{name}' is already declared")));
        }
        Ok(name)
    }

    fn lookup<'s, T>(&self, map: &'s BTreeMap<String, T>, span: Span<'_>, kind: &str) -> Result<&'s T, Diagnostic> {
        map.get(span.text).ok_or_else(|| self.err(span.at, format!("undefined {kind} '{}'", span.text)))
    }

    fn node(&self, span: Span<'_>) -> Result<Node, Diagnostic> {
        if span.text.is_empty() {
            return Err(self.err(span.at, "expected an expression"));
        }
        parse_node(span.text).map_err(|e| self.expr_err(span, e))
    }

    /// Scalar over the given extra symbols plus declared parameters.
    fn scalar(&self, span: Span<'_>, symbols: &[String]) -> Result<(Node, Expr), Diagnostic> {
        let node = self.node(span)?;
        let mut scope: BTreeSet<String> = self.params.clone();
        scope.extend(symbols.iter().cloned());
        let e = node_to_expr(&node, &Scope::Declared(&scope)).map_err(|e| self.expr_err(span, e))?;
        Ok((node, e))
    }

    fn chart_symbols(&self, at: usize) -> Result<Vec<String>, Diagnostic> {
        Ok(self.chart(at)?.vars().iter().map(|v| v.to_string()).collect())
    }

    fn form(&self, span: Span<'_>) -> Result<FormExpr, Diagnostic> {
        let node = self.node(span)?;
        let value = self.eval_form(&node).map_err(|e| self.core_err(span, e))?;
        Ok(FormExpr { node, value })
    }

    fn eval_form(&self, node: &Node) -> Result<DiffForm, Error> {
        let chart = match self.infer_chart(node)? {
            Some(c) => c,
            None => self.chart.clone().ok_or_else(|| Error::Invalid("no chart declared yet".into()))?,
        };
        DiffForm::from_node(&chart, node, self)
    }

    fn infer_chart(&self, node: &Node) -> Result<Option<Arc<Chart>>, Error> {
        let merge = |a: Option<Arc<Chart>>, b: Option<Arc<Chart>>| match (a, b) {
            (Some(x), Some(y)) if *x != *y => {
                Err(Error::ChartMismatch(x.to_string(), y.to_string()))
            }
            (Some(x), _) | (None, Some(x)) => Ok(Some(x)),
            (None, None) => Ok(None),
        };
        match node {
            Node::Num(_) => Ok(None),
            Node::Ident(name, _) => Ok(self.session.forms.get(name).map(|f| f.chart().clone())),
            Node::Diff(var, _) => {
                if self.chart.as_ref().is_some_and(|c| c.index_of(var).is_some()) {
                    return Ok(None);
                }
                Ok(self.session.pseudos.values().map(|s| s.params()).find(|c| c.index_of(var).is_some()).cloned())
            }
            Node::Neg(a) => self.infer_chart(a),
            Node::Bin(_, a, b) => merge(self.infer_chart(a)?, self.infer_chart(b)?),
            Node::Call(name, args, _) => match (name.as_str(), args.as_slice()) {
                ("pull", [_, Node::Ident(s, _)]) => Ok(self.session.pseudos.get(s).map(|s| s.params().clone())),
                (_, [first, ..]) => self.infer_chart(first),
                _ => Ok(None),
            },
        }
    }

    fn object_arg<'s, T>(&self, map: &'s BTreeMap<String, T>, arg: &Node, kind: &str) -> Result<&'s T, Error> {
        match arg {
            Node::Ident(name, _) => map.get(name).ok_or_else(|| Error::Invalid(format!("undefined {kind} '{name}'"))),
            _ => Err(Error::Invalid(format!("expected a {kind} name"))),
        }
    }

    fn operator(&self, name: &str, args: &[Node]) -> Option<Result<DiffForm, Error>> {
        let arity = match name {
            "d" | "homotopy" => 1,
            "evo_d" | "star" | "delta" | "lap" | "hodge_lap" | "pull" => 2,
            _ => return None,
        };
        Some((|| {
            if args.len() != arity {
                return Err(Error::Invalid(format!("{name} takes {arity} argument(s)")));
            }
            let a = self.eval_form(&args[0])?;
            match name {
                "d" => Ok(a.ext_d()),
                "homotopy" => a.homotopy_antiderivative(None),
                "evo_d" => self.object_arg(&self.session.connections, &args[1], "connection")?.evo_d(&a),
                "pull" => pullback(&a, self.object_arg(&self.session.pseudos, &args[1], "pseudostructure")?),
                _ => {
                    let g = self.object_arg(&self.session.metrics, &args[1], "metric")?;
                    match name {
                        "star" => g.hodge_star(&a),
                        "delta" => g.codifferential(&a),
                        "lap" => g.laplacian(&a),
                        _ => g.hodge_laplacian(&a),
                    }
                }
            }
        })())
    }

    fn statement(&mut self, content: &str) -> Result<StmtKind, Diagnostic> {
        let line = Span { text: content, at: 0 };
        let (kw, rest) = line.word();
        match kw.text {
            "chart" => self.decl_chart(rest),
            "param" => self.decl_param(rest),
            "form" => self.decl_form(rest),
            "metric" => self.decl_metric(rest),
            "connection" => self.decl_connection(rest),
            "pseudo" => self.decl_pseudo(rest),
            "relation" => self.decl_relation(rest),
            "show" => Ok(StmtKind::Command(Command::Show(self.form(rest)?))),
            "check" => Ok(StmtKind::Command(Command::Check(self.check(rest)?))),
            "classify" => self.cmd_classify(rest),
            "chain" => self.cmd_chain(rest),
            "scan" => self.cmd_scan(rest),
            "commutator" => self.cmd_commutator(rest),
            "legendre" => self.cmd_legendre(rest),
            "canonical" => self.cmd_canonical(rest),
            "green" => self.cmd_green(rest),
            "catalog" => self.cmd_catalog(rest),
            other => Err(self.err(kw.at, format!("unknown statement '{other}'"))),
        }
    }

    fn names(&self, span: Span<'_>) -> Result<Vec<String>, Diagnostic> {
        let mut out = Vec::new();
        for part in span.split(',') {
            let mut rest = part;
            while !rest.text.is_empty() {
                let (w, r) = rest.word();
                out.push(self.name(w)?);
                rest = r;
            }
        }
        Ok(out)
    }

    fn decl_chart(&mut self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let vars = self.names(rest)?;
        if vars.is_empty() {
            return Err(self.err(rest.at, "chart needs at least one coordinate"));
        }
        if let Some(v) = vars.iter().find(|v| self.params.contains(*v) || self.session.forms.contains_key(*v)) {
            return Err(self.err(rest.at, format!("'{v}' is already declared")));
        }
        let chart = Chart::new(&vars).map_err(|e| self.err(rest.at, e.to_string()))?;
        self.chart = Some(Arc::new(chart));
        Ok(StmtKind::Chart(vars))
    }

    fn decl_param(&mut self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let names = self.names(rest)?;
        for n in &names {
            let clash = self.chart.as_ref().is_some_and(|c| c.index_of(n).is_some()) || self.session.forms.contains_key(n);
            if clash || !self.params.insert(n.clone()) {
                return Err(self.err(rest.at, format!("'{n}' is already declared")));
            }
        }
        Ok(StmtKind::Param(names))
    }

    fn decl_form(&mut self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let eq = rest.find("=").ok_or_else(|| self.err(rest.at, "expected 'form NAME = EXPR'"))?;
        let name_span = rest.slice(0, eq);
        let taken = self.session.forms.contains_key(name_span.text)
            || self.params.contains(name_span.text)
            || self.chart.as_ref().is_some_and(|c| c.index_of(name_span.text).is_some());
        let name = self.new_name(name_span, taken, "form")?;
        let expr = self.form(rest.tail(eq + 1))?;
        self.session.forms.insert(name.clone(), expr.value.clone());
        Ok(StmtKind::Form { name, expr })
    }

    fn decl_metric(&mut self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let eq = rest.find("=").ok_or_else(|| self.err(rest.at, "expected 'metric NAME = ...'"))?;
        let name_span = rest.slice(0, eq);
        let name = self.new_name(name_span, self.session.metrics.contains_key(name_span.text), "metric")?;
        let body = rest.tail(eq + 1);
        let chart = self.chart(body.at)?;
        let symbols = self.chart_symbols(body.at)?;
        let (def, value) = match body.text {
            "euclidean" => (MetricDef::Euclidean, Ok(Metric::euclidean(&chart))),
            "minkowski" => (MetricDef::Minkowski, Ok(Metric::minkowski(&chart))),
            _ => {
                let (head, args) = self.call_args(body)?;
                match head {
                    "diag" => {
                        let mut nodes = Vec::new();
                        let mut vals = Vec::new();
                        for a in args.split(',') {
                            let (n, v) = self.scalar(a, &symbols)?;
                            nodes.push(n);
                            vals.push(v);
                        }
                        if vals.len() != chart.dim() {
                            return Err(self.err(body.at, format!("diag needs {} entries", chart.dim())));
                        }
                        (MetricDef::Diag(nodes), Metric::diagonal(&chart, vals))
                    }
                    "rows" => {
                        let mut nodes = Vec::new();
                        let mut vals = Vec::new();
                        for row in args.split(';') {
                            let mut nr = Vec::new();
                            let mut vr = Vec::new();
                            for a in row.split(',') {
                                let (n, v) = self.scalar(a, &symbols)?;
                                nr.push(n);
                                vr.push(v);
                            }
                            if vr.len() != chart.dim() {
                                return Err(self.err(row.at, format!("each row needs {} entries", chart.dim())));
                            }
                            nodes.push(nr);
                            vals.push(vr);
                        }
                        let m = SquareMatrix::from_rows(vals).map_err(|e| self.err(body.at, e.to_string()))?;
                        (MetricDef::Rows(nodes), Metric::from_matrix(&chart, m))
                    }
                    _ => return Err(self.err(body.at, "expected euclidean, minkowski, diag(...) or rows(...)")),
                }
            }
        };
        let value = value.map_err(|e| self.core_err(body, e))?;
        self.session.metrics.insert(name.clone(), value);
        Ok(StmtKind::Metric { name, def })
    }

    /// `head(args)`.
    fn call_args<'a>(&self, span: Span<'a>) -> Result<(&'a str, Span<'a>), Diagnostic> {
        let open = span.text.find('(').ok_or_else(|| self.err(span.at, "expected '(' "))?;
        if !span.text.ends_with(')') {
            return Err(self.err(span.at + span.text.len(), "expected ')' at end"));
        }
        Ok((span.text[..open].trim(), span.slice(open + 1, span.text.len() - 1)))
    }

    fn decl_connection(&mut self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let chart = self.chart(rest.at)?;
        let (def, name, value) = if let Some(colon) = rest.find(":") {
            let name_span = rest.slice(0, colon);
            let name = self.new_name(name_span, self.session.connections.contains_key(name_span.text), "connection")?;
            let symbols = self.chart_symbols(rest.at)?;
            let mut entries = Vec::new();
            let mut values = Vec::new();
            for item in rest.tail(colon + 1).split(';') {
                let eq = item.find("=").ok_or_else(|| self.err(item.at, "expected 'upper,lower,lower = EXPR'"))?;
                let idx_span = item.slice(0, eq);
                let idx = idx_span.split(',');
                if idx.len() != 3 {
                    return Err(self.err(idx_span.at, "expected three coordinate names"));
                }
                let mut names: [String; 3] = Default::default();
                let mut pos = [0usize; 3];
                for (k, s) in idx.iter().enumerate() {
                    pos[k] = chart.index_of(s.text).ok_or_else(|| self.err(s.at, format!("'{}' is not a coordinate", s.text)))?;
                    names[k] = s.text.to_string();
                }
                let (node, e) = self.scalar(item.tail(eq + 1), &symbols)?;
                entries.push((names, node));
                values.push(((pos[0], pos[1], pos[2]), e));
            }
            let value = Connection::from_entries(&chart, values).map_err(|e| self.core_err(rest, e))?;
            (ConnectionDef::Entries(entries), name, value)
        } else {
            let eq = rest.find("=").ok_or_else(|| self.err(rest.at, "expected 'connection NAME: ...' or 'connection NAME = ...'"))?;
            let name_span = rest.slice(0, eq);
            let name = self.new_name(name_span, self.session.connections.contains_key(name_span.text), "connection")?;
            let body = rest.tail(eq + 1);
            if body.text == "zero" {
                (ConnectionDef::Zero, name, Connection::zero(&chart))
            } else {
                let (head, arg) = self.call_args(body)?;
                if head != "levi_civita" {
                    return Err(self.err(body.at, "expected zero, levi_civita(METRIC) or an entry list"));
                }
                let g = self.lookup(&self.session.metrics, arg, "metric")?;
                if **g.chart() != *chart {
                    return Err(self.err(arg.at, format!("metric '{}' lives on another chart", arg.text)));
                }
                (ConnectionDef::LeviCivita(arg.text.to_string()), name, Connection::levi_civita(g))
            }
        };
        self.session.connections.insert(name.clone(), value);
        Ok(StmtKind::Connection { name, def })
    }

    fn decl_pseudo(&mut self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let ambient = self.chart(rest.at)?;
        let colon = rest.find(":").ok_or_else(|| self.err(rest.at, "expected 'pseudo NAME(params): x = ..., ...'"))?;
        let head = rest.slice(0, colon);
        let (name_text, params_span) = self.call_args(head)?;
        let name_span = Span { text: name_text, at: head.at };
        let name = self.new_name(name_span, self.session.pseudos.contains_key(name_text), "pseudostructure")?;
        let params = self.names(params_span)?;
        if params.is_empty() {
            return Err(self.err(params_span.at, "a pseudostructure needs at least one parameter"));
        }
        let param_chart = Arc::new(Chart::new(&params).map_err(|e| self.err(params_span.at, e.to_string()))?);
        let mut assigned: BTreeMap<String, (Node, Expr)> = BTreeMap::new();
        for item in rest.tail(colon + 1).split(',') {
            let eq = item.find("=").ok_or_else(|| self.err(item.at, "expected 'coordinate = EXPR'"))?;
            let var = item.slice(0, eq);
            if ambient.index_of(var.text).is_none() {
                return Err(self.err(var.at, format!("'{}' is not a coordinate of {ambient}", var.text)));
            }
            if assigned.contains_key(var.text) {
                return Err(self.err(var.at, format!("'{}' assigned twice", var.text)));
            }
            let value = self.scalar(item.tail(eq + 1), &params)?;
            assigned.insert(var.text.to_string(), value);
        }
        let mut map = Vec::new();
        let mut exprs = Vec::new();
        for v in ambient.vars() {
            let (node, e) = assigned
                .remove(v.as_ref())
                .ok_or_else(|| self.err(rest.at, format!("coordinate '{v}' is not assigned")))?;
            map.push((v.to_string(), node));
            exprs.push(e);
        }
        let value = Pseudostructure::new(&ambient, &param_chart, exprs).map_err(|e| self.core_err(rest, e))?;
        self.session.pseudos.insert(name.clone(), value);
        Ok(StmtKind::Pseudo { name, params, map })
    }

    fn relation_pair(&self, span: Span<'_>) -> Result<(FormExpr, FormExpr), Diagnostic> {
        let arrow = span.find("=>").ok_or_else(|| self.err(span.at, "expected 'PSI => OMEGA'"))?;
        let omega = self.form(span.tail(arrow + 2))?;
        let mut psi = self.form(span.slice(0, arrow))?;
        // a literal 0 on the left stands for the zero form of the right degree
        if psi.value.degree() == 0 && psi.value.is_canonical_zero() && omega.value.degree() > 0 {
            psi.value = DiffForm::zero(omega.value.chart(), omega.value.degree() - 1);
        }
        Relation::new(psi.value.clone(), omega.value.clone()).map_err(|e| self.core_err(span, e))?;
        Ok((psi, omega))
    }

    fn decl_relation(&mut self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let colon = rest.find(":").ok_or_else(|| self.err(rest.at, "expected 'relation NAME: PSI => OMEGA'"))?;
        let name_span = rest.slice(0, colon);
        let name = self.new_name(name_span, self.session.relations.contains_key(name_span.text), "relation")?;
        let (psi, omega) = self.relation_pair(rest.tail(colon + 1))?;
        let r = Relation::new(psi.value.clone(), omega.value.clone()).expect("validated");
        self.session.relations.insert(name.clone(), r);
        Ok(StmtKind::Relation { name, psi, omega })
    }

    fn relation_ref(&self, span: Span<'_>) -> Result<RelationRef, Diagnostic> {
        if span.find("=>").is_some() {
            let (psi, omega) = self.relation_pair(span)?;
            return Ok(RelationRef::Inline(psi, omega));
        }
        self.lookup(&self.session.relations, span, "relation")?;
        Ok(RelationRef::Named(span.text.to_string()))
    }

    fn pseudo_ref(&self, span: Span<'_>, relation: &RelationRef) -> Result<String, Diagnostic> {
        let s = self.lookup(&self.session.pseudos, span, "pseudostructure")?;
        let r = match relation {
            RelationRef::Named(n) => self.session.relations[n].omega().chart().clone(),
            RelationRef::Inline(_, omega) => omega.value.chart().clone(),
        };
        if **s.ambient() != *r {
            return Err(self.err(span.at, format!("pseudostructure '{}' is not on chart {r}", span.text)));
        }
        Ok(span.text.to_string())
    }

    fn check(&self, rest: Span<'_>) -> Result<Check, Diagnostic> {
        let (kw, body) = rest.word();
        match kw.text {
            "closed" => Ok(Check::Closed(self.form(body)?)),
            "unclosed" => Ok(Check::Unclosed(self.form(body)?)),
            "exact" => Ok(Check::Exact(self.form(body)?)),
            "zero" => Ok(Check::Zero(self.form(body)?)),
            "torsionfree" | "bianchi" => {
                self.lookup(&self.session.connections, body, "connection")?;
                let name = body.text.to_string();
                Ok(if kw.text == "bianchi" { Check::Bianchi(name) } else { Check::TorsionFree(name) })
            }
            "dualclosed" => {
                let (form_span, tail) = body.clause("in");
                let tail = tail.ok_or_else(|| self.err(body.at, "expected 'dualclosed FORM in METRIC'"))?;
                let (metric_span, on) = tail.clause("on");
                let form = self.form(form_span)?;
                let g = self.lookup(&self.session.metrics, metric_span, "metric")?;
                if **g.chart() != **form.value.chart() {
                    return Err(self.err(metric_span.at, "metric and form live on different charts"));
                }
                let on = match on {
                    None => None,
                    Some(on) => {
                        let (s, order) = on.clause("induced");
                        let r = RelationRef::Inline(FormExpr { node: form.node.clone(), value: DiffForm::zero(form.value.chart(), 0) }, form.clone());
                        let name = self.pseudo_ref(s, &r)?;
                        let order = if order.is_some() { DualOrder::InducedMetric } else { DualOrder::AmbientThenPullback };
                        Some((name, order))
                    }
                };
                Ok(Check::DualClosed { form, metric: metric_span.text.to_string(), on })
            }
            _ => match rest.find("==") {
                Some(i) => {
                    let a = self.form(rest.slice(0, i))?;
                    let b = self.form(rest.tail(i + 2))?;
                    if a.value.degree() != b.value.degree() || **a.value.chart() != **b.value.chart() {
                        return Err(self.err(rest.at, "compared forms differ in degree or chart"));
                    }
                    Ok(Check::Equal(a, b))
                }
                None => Err(self.err(kw.at, "expected closed, unclosed, exact, zero, torsionfree, bianchi, dualclosed or A == B")),
            },
        }
    }

    fn cmd_classify(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let (head, expect) = rest.clause("expect");
        let expect = match expect {
            None => None,
            Some(e) => Some(e.text.parse::<Classification>().map_err(|_| {
                self.err(e.at, format!("'{}' is not IDENTICAL, CLOSED_RHS or NONIDENTICAL", e.text))
            })?),
        };
        let (rel, on) = head.clause("on");
        let relation = self.relation_ref(rel)?;
        let on = on.map(|s| self.pseudo_ref(s, &relation)).transpose()?;
        Ok(StmtKind::Command(Command::Classify { relation, on, expect }))
    }

    fn cmd_chain(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let (rel, on) = rest.clause("on");
        let relation = self.relation_ref(rel)?;
        let on = on.map(|s| self.pseudo_ref(s, &relation)).transpose()?;
        Ok(StmtKind::Command(Command::Chain { relation, on }))
    }

    fn cmd_scan(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let chart = self.chart(rest.at)?;
        let symbols = self.chart_symbols(rest.at)?;
        let (kw, body) = rest.word();
        let (list, kind) = match kw.text {
            "jacobian" => (body, ScanKind::Jacobian),
            "determinant" => (body, ScanKind::Determinant),
            "poisson" => {
                let (list, pairs) = body.clause("pairs");
                let pairs = pairs.ok_or_else(|| self.err(body.at, "poisson scan needs 'pairs q:p, ...'"))?;
                (list, ScanKind::Poisson { pairs: self.pairs(pairs, &chart)? })
            }
            _ => return Err(self.err(kw.at, "expected jacobian, determinant or poisson")),
        };
        let mut exprs = Vec::new();
        let mut values = Vec::new();
        for item in list.split(',') {
            let (n, v) = self.scalar(item, &symbols)?;
            exprs.push(n);
            values.push(v);
        }
        let count_ok = match &kind {
            ScanKind::Jacobian => values.len() == chart.dim(),
            ScanKind::Determinant => {
                let k = (values.len() as f64).sqrt().round() as usize;
                k > 0 && k * k == values.len()
            }
            ScanKind::Poisson { .. } => values.len() == 2,
        };
        if !count_ok {
            return Err(self.err(list.at, format!("wrong number of expressions ({}) for a {} scan", values.len(), kind.name())));
        }
        Ok(StmtKind::Command(Command::Scan { kind, exprs, values, chart }))
    }

    fn pairs(&self, span: Span<'_>, chart: &Chart) -> Result<Vec<(String, String)>, Diagnostic> {
        span.split(',')
            .into_iter()
            .map(|item| {
                let colon = item.find(":").ok_or_else(|| self.err(item.at, "expected 'q:p'"))?;
                let (q, p) = (item.slice(0, colon), item.tail(colon + 1));
                for v in [q, p] {
                    if chart.index_of(v.text).is_none() {
                        return Err(self.err(v.at, format!("'{}' is not a coordinate of {chart}", v.text)));
                    }
                }
                Ok((q.text.to_string(), p.text.to_string()))
            })
            .collect()
    }

    fn cmd_commutator(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let (f, with) = rest.clause("with");
        let form = self.form(f)?;
        if form.value.degree() != 1 {
            return Err(self.err(f.at, "commutator is defined for 1-forms"));
        }
        let connection = match with {
            None => None,
            Some(g) => {
                let c = self.lookup(&self.session.connections, g, "connection")?;
                if **c.chart() != **form.value.chart() {
                    return Err(self.err(g.at, "connection lives on another chart"));
                }
                Some(g.text.to_string())
            }
        };
        Ok(StmtKind::Command(Command::Commutator { form, connection }))
    }

    fn cmd_legendre(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let (l, pairs) = rest.clause("for");
        let pairs_span = pairs.ok_or_else(|| self.err(rest.at, "expected 'legendre L for qdot -> p'"))?;
        let mut pairs = Vec::new();
        for item in pairs_span.split(',') {
            let arrow = item.find("->").ok_or_else(|| self.err(item.at, "expected 'velocity -> momentum'"))?;
            let v = self.name(item.slice(0, arrow))?;
            let p = self.name(item.tail(arrow + 2))?;
            pairs.push((v, p));
        }
        let mut symbols = self.chart.as_ref().map(|c| c.vars().iter().map(|v| v.to_string()).collect()).unwrap_or_else(Vec::new);
        symbols.extend(pairs.iter().map(|(v, _)| v.clone()));
        let (lagrangian, value) = self.scalar(l, &symbols)?;
        Ok(StmtKind::Command(Command::Legendre { lagrangian, value, pairs }))
    }

    fn cmd_canonical(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let chart = self.chart(rest.at)?;
        let symbols = self.chart_symbols(rest.at)?;
        let mut pairs = Vec::new();
        let mut maps = Vec::new();
        let mut values = Vec::new();
        for item in rest.split(';') {
            let arrow = item.find("->").ok_or_else(|| self.err(item.at, "expected 'q:p -> Q, P'"))?;
            pairs.extend(self.pairs(item.slice(0, arrow), &chart)?);
            let rhs = item.tail(arrow + 2).split(',');
            if rhs.len() != 2 {
                return Err(self.err(item.at, "expected two expressions Q, P"));
            }
            let (nq, q) = self.scalar(rhs[0], &symbols)?;
            let (np, p) = self.scalar(rhs[1], &symbols)?;
            maps.push((nq, np));
            values.push((q, p));
        }
        if pairs.len() != maps.len() {
            return Err(self.err(rest.at, "each clause maps exactly one pair"));
        }
        Ok(StmtKind::Command(Command::Canonical { chart, pairs, maps, values }))
    }

    fn cmd_green(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        let (body, grid) = rest.clause("grid");
        let grid = match grid {
            None => 64,
            Some(g) => g.text.parse::<usize>().ok().filter(|n| *n > 0 && n % 2 == 0).ok_or_else(|| {
                self.err(g.at, "grid must be a positive even integer")
            })?,
        };
        let parts = body.split(',');
        if parts.len() != 2 {
            return Err(self.err(body.at, "expected 'green P, Q'"));
        }
        let xy = ["x".to_string(), "y".to_string()];
        let (p, pv) = self.scalar(parts[0], &xy)?;
        let (q, qv) = self.scalar(parts[1], &xy)?;
        for (v, span) in [(&pv, parts[0]), (&qv, parts[1])] {
            if v.free_symbols().iter().any(|s| !xy.iter().any(|x| x.as_str() == s.as_ref())) {
                return Err(self.err(span.at, "green integrands may depend on x and y only"));
            }
        }
        Ok(StmtKind::Command(Command::Green { p, q, values: (pv, qv), grid }))
    }

    fn cmd_catalog(&self, rest: Span<'_>) -> Result<StmtKind, Diagnostic> {
        match rest.text {
            "all" => Ok(StmtKind::Command(Command::Catalog(None))),
            name if skewform_core::catalog::entry_names().any(|n| n == name) => {
                Ok(StmtKind::Command(Command::Catalog(Some(name.to_string()))))
            }
            other => Err(self.err(rest.at, format!("unknown catalog entry '{other}'"))),
        }
    }
}

impl FormEnv for SessionParser {
    fn form(&self, name: &str) -> Option<DiffForm> {
        self.session.forms.get(name).cloned()
    }

    fn admits_symbol(&self, name: &str) -> bool {
        self.params.contains(name)
    }

    fn call(&self, name: &str, args: &[Node], _chart: &Arc<Chart>) -> Option<Result<DiffForm, Error>> {
        self.operator(name, args)
    }
}

/// Evaluates a form expression on `chart` with no other declarations;
/// identifiers outside the chart are parameters, `d` and `homotopy` apply.
pub fn parse_form(chart: &Arc<Chart>, text: &str) -> Result<DiffForm, Diagnostic> {
    let mut p = SessionParser { chart: Some(chart.clone()), line: 1, ..Default::default() };
    let node = p.node(Span { text, at: 0 })?;
    let mut names = BTreeSet::new();
    collect_idents(&node, &mut names);
    p.params = names.into_iter().filter(|n| chart.index_of(n).is_none()).collect();
    Ok(p.form(Span { text, at: 0 }.trim())?.value)
}

fn collect_idents(node: &Node, out: &mut BTreeSet<String>) {
    match node {
        Node::Ident(n, _) => {
            out.insert(n.clone());
        }
        Node::Neg(a) => collect_idents(a, out),
        Node::Bin(_, a, b) => {
            collect_idents(a, out);
            collect_idents(b, out);
        }
        Node::Call(_, args, _) => args.iter().for_each(|a| collect_idents(a, out)),
        Node::Num(_) | Node::Diff(..) => {}
    }
}

// ---- printing ----

fn prec(node: &Node) -> u8 {
    match node {
        Node::Num(q) if !q.is_integer() => 2,
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

/// Minimal-parenthesis rendering that parses back to an equal tree.
pub fn print_node(node: &Node) -> String {
    fn wrap(n: &Node, min: u8) -> String {
        let s = print_node(n);
        if prec(n) < min {
            format!("({s})")
        } else {
            s
        }
    }
    match node {
        Node::Num(q) => q.to_string(),
        Node::Ident(name, _) => name.clone(),
        Node::Diff(v, _) => format!("d[{v}]"),
        Node::Neg(a) => format!("-{}", wrap(a, 3)),
        Node::Bin(op, a, b) => match op {
            BinOp::Add => format!("{} + {}", wrap(a, 1), wrap(b, 2)),
            BinOp::Sub => format!("{} - {}", wrap(a, 1), wrap(b, 2)),
            BinOp::Mul => format!("{}*{}", wrap(a, 2), wrap(b, 3)),
            BinOp::Div => format!("{}/{}", wrap(a, 2), wrap(b, 3)),
            // the exponent of a unary minus needs no parentheses
            BinOp::Pow => format!("{}^{}", wrap(a, 5), wrap(b, 3)),
        },
        Node::Call(name, args, _) => {
            format!("{name}({})", args.iter().map(print_node).collect::<Vec<_>>().join(", "))
        }
    }
}

fn join_nodes(nodes: &[Node]) -> String {
    nodes.iter().map(print_node).collect::<Vec<_>>().join(", ")
}

fn print_pairs(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(q, p)| format!("{q}:{p}")).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for RelationRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationRef::Named(n) => f.write_str(n),
            RelationRef::Inline(psi, omega) => write!(f, "{} => {}", print_node(&psi.node), print_node(&omega.node)),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Show(e) => write!(f, "show {}", print_node(&e.node)),
            Command::Check(c) => match c {
                Check::Closed(e) => write!(f, "check closed {}", print_node(&e.node)),
                Check::Unclosed(e) => write!(f, "check unclosed {}", print_node(&e.node)),
                Check::Exact(e) => write!(f, "check exact {}", print_node(&e.node)),
                Check::Zero(e) => write!(f, "check zero {}", print_node(&e.node)),
                Check::Equal(a, b) => write!(f, "check {} == {}", print_node(&a.node), print_node(&b.node)),
                Check::TorsionFree(g) => write!(f, "check torsionfree {g}"),
                Check::Bianchi(g) => write!(f, "check bianchi {g}"),
                Check::DualClosed { form, metric, on } => {
                    write!(f, "check dualclosed {} in {metric}", print_node(&form.node))?;
                    match on {
                        Some((s, DualOrder::InducedMetric)) => write!(f, " on {s} induced"),
                        Some((s, DualOrder::AmbientThenPullback)) => write!(f, " on {s}"),
                        None => Ok(()),
                    }
                }
            },
            Command::Classify { relation, on, expect } => {
                write!(f, "classify {relation}")?;
                if let Some(s) = on {
                    write!(f, " on {s}")?;
                }
                if let Some(v) = expect {
                    write!(f, " expect {v}")?;
                }
                Ok(())
            }
            Command::Chain { relation, on } => {
                write!(f, "chain {relation}")?;
                if let Some(s) = on {
                    write!(f, " on {s}")?;
                }
                Ok(())
            }
            Command::Scan { kind, exprs, .. } => {
                write!(f, "scan {} {}", kind.name(), join_nodes(exprs))?;
                if let ScanKind::Poisson { pairs } = kind {
                    write!(f, " pairs {}", print_pairs(pairs))?;
                }
                Ok(())
            }
            Command::Commutator { form, connection } => {
                write!(f, "commutator {}", print_node(&form.node))?;
                if let Some(g) = connection {
                    write!(f, " with {g}")?;
                }
                Ok(())
            }
            Command::Legendre { lagrangian, pairs, .. } => {
                let p: Vec<String> = pairs.iter().map(|(v, p)| format!("{v} -> {p}")).collect();
                write!(f, "legendre {} for {}", print_node(lagrangian), p.join(", "))
            }
            Command::Canonical { pairs, maps, .. } => {
                let clauses: Vec<String> = pairs
                    .iter()
                    .zip(maps)
                    .map(|((q, p), (nq, np))| format!("{q}:{p} -> {}, {}", print_node(nq), print_node(np)))
                    .collect();
                write!(f, "canonical {}", clauses.join("; "))
            }
            Command::Green { p, q, grid, .. } => write!(f, "green {}, {} grid {grid}", print_node(p), print_node(q)),
            Command::Catalog(None) => write!(f, "catalog all"),
            Command::Catalog(Some(name)) => write!(f, "catalog {name}"),
        }
    }
}

impl fmt::Display for StmtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StmtKind::Chart(vars) => write!(f, "chart {}", vars.join(" ")),
            StmtKind::Param(names) => write!(f, "param {}", names.join(" ")),
            StmtKind::Form { name, expr } => write!(f, "form {name} = {}", print_node(&expr.node)),
            StmtKind::Metric { name, def } => match def {
                MetricDef::Euclidean => write!(f, "metric {name} = euclidean"),
                MetricDef::Minkowski => write!(f, "metric {name} = minkowski"),
                MetricDef::Diag(d) => write!(f, "metric {name} = diag({})", join_nodes(d)),
                MetricDef::Rows(rows) => {
                    let r: Vec<String> = rows.iter().map(|r| join_nodes(r)).collect();
                    write!(f, "metric {name} = rows({})", r.join("; "))
                }
            },
            StmtKind::Connection { name, def } => match def {
                ConnectionDef::Zero => write!(f, "connection {name} = zero"),
                ConnectionDef::LeviCivita(g) => write!(f, "connection {name} = levi_civita({g})"),
                ConnectionDef::Entries(entries) => {
                    let items: Vec<String> =
                        entries.iter().map(|(i, e)| format!("{},{},{} = {}", i[0], i[1], i[2], print_node(e))).collect();
                    write!(f, "connection {name}: {}", items.join("; "))
                }
            },
            StmtKind::Pseudo { name, params, map } => {
                let items: Vec<String> = map.iter().map(|(v, e)| format!("{v} = {}", print_node(e))).collect();
                write!(f, "pseudo {name}({}): {}", params.join(", "), items.join(", "))
            }
            StmtKind::Relation { name, psi, omega } => {
                write!(f, "relation {name}: {} => {}", print_node(&psi.node), print_node(&omega.node))
            }
            StmtKind::Command(c) => c.fmt(f),
        }
    }
}

/// One statement per line, in the canonical spelling.
impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{}", s.kind)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_demo() {
        let s = parse_session("chart t q p\nform omega = p*d[q] - (p^2/2)*d[t]\nclassify 0 => omega").unwrap();
        assert_eq!(s.commands().count(), 1);
        assert!(matches!(s.commands().next().unwrap().1, Command::Classify { .. }));
    }

    #[test]
    fn undefined_reference() {
        let err = parse_session("chart x y\nform a = x*d[y]\n\nshow d(b)").unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("'b'"), "{err}");
        assert_eq!(err.column, 8);
    }

    #[test]
    fn two_parameter_pseudostructure() {
        let s = parse_session("chart t q p\npseudo traj(u, c): t = u, q = c*u, p = c").unwrap();
        assert_eq!(s.pseudos["traj"].params().dim(), 2);
        let err = parse_session("chart t q p\npseudo flat(u, c): t = 1, q = 2, p = 3").unwrap_err();
        assert!(err.message.contains("rank"), "{err}");
    }

    #[test]
    fn differentials_must_be_bracketed() {
        let err = parse_session("chart E V p\nform w = (dE + p*dV)/T").unwrap_err();
        assert_eq!(err.column, 11);
        assert!(err.message.contains("dE"));
    }

    #[test]
    fn node_printing_round_trips() {
        for s in ["-x^2", "(-x)^2", "x^-2", "a - (b - c)", "a/(b*c)", "2^3^2", "-(a + b)*c", "3/2*x", "d(a ^ b)"] {
            let n = parse_node(s).unwrap();
            let printed = print_node(&n);
            assert_eq!(print_node(&parse_node(&printed).unwrap()), printed, "{s}");
            let again = parse_node(&printed).unwrap();
            let scope = Scope::Open;
            if let (Ok(a), Ok(b)) = (node_to_expr(&n, &scope), node_to_expr(&again, &scope)) {
                assert_eq!(a, b, "{s} -> {printed}");
            }
        }
    }
}
