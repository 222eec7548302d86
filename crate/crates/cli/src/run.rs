//! Executes a parsed session and collects text and JSON output.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use skewform_core::catalog::{self, legendre_transform, EntryReport};
use skewform_core::relations::{
    classify, classify_on, degenerate_scan, dual_closure_on, integrate_chain, pullback, ChainStep,
};
use skewform_core::symexpr::set_sampling_seed;
use skewform_core::{DiffForm, Error};

use crate::dsl::{parse_session, Check, Command, Diagnostic, Session};

pub const REPORT_SCHEMA: &str = "skewform.report/1";
pub const CATALOG_SCHEMA: &str = "skewform.catalog/1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    /// Seed for probabilistic zero tests and locus scans.
    pub seed: u64,
    /// Bound on the quadrature discrepancy accepted by `green`.
    pub tolerance: f64,
    /// Cap on the number of `chain` steps.
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: 0, tolerance: 1e-9, max_steps: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandResult {
    pub line: usize,
    pub command: String,
    pub ok: bool,
    pub kind: &'static str,
    pub data: Value,
    #[serde(skip)]
    pub text: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub seed: u64,
    pub ok: bool,
    pub results: Vec<CommandResult>,
}

impl Report {
    pub fn text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let status = if r.ok { "ok" } else { "FAILED" };
            out.push_str(&format!("line {}: {} [{status}]\n", r.line, r.command));
            for t in &r.text {
                out.push_str(&format!("    {t}\n"));
            }
        }
        out.push_str(if self.ok { "all checks passed\n" } else { "some checks failed\n" });
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.ok {
            0
        } else {
            1
        }
    }
}

/// Parses and runs `text`. The seed is fixed before parsing since
/// declarations may already sample.
pub fn check_text(text: &str, opts: &Options) -> Result<Report, Diagnostic> {
    set_sampling_seed(opts.seed);
    let session = parse_session(text)?;
    Ok(run_session(&session, opts))
}

pub fn run_session(session: &Session, opts: &Options) -> Report {
    set_sampling_seed(opts.seed);
    let results: Vec<CommandResult> = session
        .commands()
        .map(|(stmt, cmd)| {
            let mut r = match execute(session, cmd, opts) {
                Ok(r) => r,
                Err(e) => Outcome {
                    ok: false,
                    kind: kind_of(cmd),
                    data: json!({ "error": e.to_string() }),
                    text: vec![format!("error: {e}")],
                },
            };
            if r.text.is_empty() {
                r.text.push(r.data.to_string());
            }
            CommandResult { line: stmt.line, command: cmd.to_string(), ok: r.ok, kind: r.kind, data: r.data, text: r.text }
        })
        .collect();
    Report { schema: REPORT_SCHEMA, seed: opts.seed, ok: results.iter().all(|r| r.ok), results }
}

struct Outcome {
    ok: bool,
    kind: &'static str,
    data: Value,
    text: Vec<String>,
}

fn kind_of(cmd: &Command) -> &'static str {
    match cmd {
        Command::Show(_) => "show",
        Command::Check(_) => "check",
        Command::Classify { .. } => "classify",
        Command::Chain { .. } => "chain",
        Command::Scan { .. } => "scan",
        Command::Commutator { .. } => "commutator",
        Command::Legendre { .. } => "legendre",
        Command::Canonical { .. } => "canonical",
        Command::Green { .. } => "green",
        Command::Catalog(_) => "catalog",
    }
}

fn form_json(f: &DiffForm) -> Value {
    json!({ "form": f.to_string(), "degree": f.degree(), "chart": f.chart().to_string() })
}

fn step_text(s: &ChainStep) -> String {
    format!(
        "degree {}: theta = {} (d theta = omega: {}), remainder = {} (closed: {})",
        s.degree(),
        s.theta,
        s.theta_verified,
        s.remainder,
        s.remainder_closed
    )
}

/// Runs catalog entries in parallel, keeping the listed order.
pub fn run_catalog(names: &[&str], seed: u64) -> Result<Vec<EntryReport>, Error> {
    set_sampling_seed(seed);
    names.par_iter().map(|n| catalog::run_entry(n)).collect()
}

pub fn catalog_text(reports: &[EntryReport]) -> Vec<String> {
    let mut out = Vec::new();
    for r in reports {
        out.push(format!("{}: {}", r.name, if r.passed { "pass" } else { "FAIL" }));
        for c in &r.checks {
            let mark = if c.passed { "ok" } else { "FAIL" };
            out.push(format!("  [{mark}] {}: expected {}, got {}", c.label, c.expected, c.actual));
        }
    }
    out
}

fn execute(session: &Session, cmd: &Command, opts: &Options) -> Result<Outcome, Error> {
    let kind = kind_of(cmd);
    let done = |ok: bool, data: Value, text: Vec<String>| Ok(Outcome { ok, kind, data, text });
    match cmd {
        Command::Show(e) => done(true, form_json(&e.value), vec![e.value.to_string()]),
        Command::Check(check) => match check {
            Check::Closed(e) | Check::Unclosed(e) => {
                let d = e.value.ext_d();
                let z = d.zero_check()?;
                let want = matches!(check, Check::Closed(_));
                let text = vec![format!("d = {d}"), format!("closed: {}", z.zero)];
                done(z.zero == want, json!({ "closed": z.zero, "probabilistic": z.probabilistic, "d": d.to_string() }), text)
            }
            Check::Exact(e) => {
                let z = e.value.closure_check()?;
                if !z.zero {
                    return done(false, json!({ "exact": false, "closed": false }), vec!["not closed".into()]);
                }
                let primitive = e.value.homotopy_antiderivative(None)?;
                let verified = primitive.ext_d().equality_check(&e.value)?.zero;
                let text = vec![format!("primitive: {primitive}"), format!("verified: {verified}")];
                done(verified, json!({ "exact": verified, "closed": true, "primitive": primitive.to_string() }), text)
            }
            Check::Zero(e) => {
                let z = e.value.zero_check()?;
                done(z.zero, json!({ "zero": z.zero, "probabilistic": z.probabilistic }), vec![format!("zero: {}", z.zero)])
            }
            Check::Equal(a, b) => {
                let z = a.value.equality_check(&b.value)?;
                let diff = a.value.sub(&b.value)?;
                let text = vec![format!("difference: {diff}")];
                done(z.zero, json!({ "equal": z.zero, "probabilistic": z.probabilistic, "difference": diff.to_string() }), text)
            }
            Check::TorsionFree(g) => {
                let c = &session.connections[g];
                let z = c.torsion_free_check();
                let nonzero: Vec<String> = c
                    .torsion()
                    .entries()
                    .filter(|(idx, e)| idx[1] < idx[2] && !e.is_zero())
                    .map(|(idx, e)| format!("T^{}_{}{} = {e}", c.chart().var(idx[0]), c.chart().var(idx[1]), c.chart().var(idx[2])))
                    .collect();
                let mut text = vec![format!("torsion free: {}", z.zero)];
                text.extend(nonzero.iter().cloned());
                done(z.zero, json!({ "torsion_free": z.zero, "torsion": nonzero }), text)
            }
            Check::Bianchi(g) => match session.connections[g].bianchi_first_check() {
                Ok(z) => done(z.zero, json!({ "holds": z.zero, "probabilistic": z.probabilistic }), vec![format!("cyclic sum vanishes: {}", z.zero)]),
                Err(e @ Error::TorsionPresent) => done(false, json!({ "holds": false, "error": e.to_string() }), vec![e.to_string()]),
                Err(e) => Err(e),
            },
            Check::DualClosed { form, metric, on } => {
                let g = &session.metrics[metric];
                let z = match on {
                    None => g.dual_closure_check(&form.value)?,
                    Some((s, order)) => dual_closure_on(&form.value, g, &session.pseudos[s], *order)?,
                };
                done(z.zero, json!({ "dual_closed": z.zero, "probabilistic": z.probabilistic }), vec![format!("d*a = 0: {}", z.zero)])
            }
        },
        Command::Classify { relation, on, expect } => {
            let r = session.relation(relation);
            let v = match on {
                None => classify(&r)?,
                Some(s) => classify_on(&r, &session.pseudos[s])?,
            };
            let ok = expect.is_none_or(|e| e == v.classification);
            let mut text = vec![
                format!("classification: {}", v.classification),
                format!("residual omega - d psi = {}", v.residual),
                format!("d omega = {}", v.commutator),
            ];
            if let Some(e) = expect {
                text.push(format!("expected: {e}"));
            }
            done(ok, serde_json::to_value(v.to_json()).expect("serializable"), text)
        }
        Command::Chain { relation, on } => {
            let r = session.relation(relation);
            let s = on.as_ref().map(|s| &session.pseudos[s]);
            match integrate_chain(&r, s, opts.max_steps) {
                Ok(steps) => {
                    let ok = !steps.is_empty() && steps.iter().all(|s| s.theta_verified);
                    let text = steps.iter().map(step_text).collect();
                    let data: Vec<_> = steps.iter().map(ChainStep::to_json).collect();
                    done(ok, json!({ "steps": data }), text)
                }
                Err(Error::NotClosed) => {
                    let omega = match s {
                        Some(s) => pullback(r.omega(), s)?,
                        None => r.omega().clone(),
                    };
                    let d = omega.ext_d();
                    let text = vec![format!("right side is not closed: d omega = {d}")];
                    done(false, json!({ "steps": [], "error": "right side is not closed", "d_omega": d.to_string() }), text)
                }
                Err(e) => Err(e),
            }
        }
        Command::Scan { kind: scan, values, chart, .. } => {
            let report = degenerate_scan(values, scan, chart, opts.seed)?;
            let mut text = vec![
                format!("F = {}", report.function),
                format!("identically zero: {}", report.identically_zero),
                format!("{} points on F = 0 (max |F| = {:e})", report.points.len(), report.max_abs_value),
            ];
            for p in report.points.iter().take(3) {
                let coords: Vec<String> =
                    report.variables.iter().zip(p).map(|(v, x)| format!("{v}={x:.6}")).collect();
                text.push(coords.join(", "));
            }
            done(true, serde_json::to_value(&report).expect("serializable"), text)
        }
        Command::Commutator { form, connection } => {
            let k = match connection {
                None => form.value.commutator1()?,
                Some(g) => session.connections[g].evo_commutator(&form.value)?,
            };
            let chart = form.value.chart();
            let mut text = Vec::new();
            let mut entries = Vec::new();
            for a in 0..chart.dim() {
                for b in a + 1..chart.dim() {
                    let v = k.get(a, b);
                    text.push(format!("K[{},{}] = {v}", chart.var(a), chart.var(b)));
                    entries.push(json!({ "indices": [chart.var(a), chart.var(b)], "value": v.to_string() }));
                }
            }
            let zero = k.zero_check().zero;
            text.push(format!("vanishes: {zero}"));
            done(true, json!({ "entries": entries, "vanishes": zero }), text)
        }
        Command::Legendre { value, pairs, .. } => {
            let vel: Vec<&str> = pairs.iter().map(|(v, _)| v.as_str()).collect();
            let mom: Vec<&str> = pairs.iter().map(|(_, p)| p.as_str()).collect();
            let r = legendre_transform(value, &vel, &mom, opts.seed)?;
            let mut text = vec![format!("momenta: {}", join(&r.momenta)), format!("hessian determinant: {}", r.degeneracy)];
            match (&r.hamiltonian, &r.locus) {
                (Some(h), _) => text.push(format!("H = {h}")),
                (None, Some(locus)) => {
                    text.push(format!("velocities cannot be eliminated; {} sampled degenerate points", locus.points.len()))
                }
                _ => {}
            }
            done(true, serde_json::to_value(r.to_json()).expect("serializable"), text)
        }
        Command::Canonical { chart, pairs, values, .. } => {
            let r = catalog::canonical_check(chart, pairs, values)?;
            let mut text = vec![format!("p dq - P dQ = {}", r.sigma), format!("canonical: {}", r.is_canonical)];
            if let Some(w) = &r.generating_function {
                text.push(format!("W = {w}"));
            }
            done(r.is_canonical, serde_json::to_value(r.to_json()).expect("serializable"), text)
        }
        Command::Green { values, grid, .. } => {
            let r = catalog::green_check(&values.0, &values.1, *grid)?;
            let ok = r.abs_diff <= opts.tolerance;
            let text = vec![
                format!("circulation = {:.15}", r.circulation),
                format!("area integral = {:.15}", r.area_integral),
                format!("|difference| = {:e} (tolerance {:e})", r.abs_diff, opts.tolerance),
            ];
            done(ok, serde_json::to_value(r).expect("serializable"), text)
        }
        Command::Catalog(name) => {
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => catalog::entry_names().collect(),
            };
            let reports = run_catalog(&names, opts.seed)?;
            let ok = reports.iter().all(|r| r.passed);
            done(ok, json!({ "entries": reports }), catalog_text(&reports))
        }
    }
}

fn join(v: &[skewform_core::Expr]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}
