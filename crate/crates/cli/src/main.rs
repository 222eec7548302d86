use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use skewform_cli::dsl::parse_form;
use skewform_cli::run::{catalog_text, check_text, run_catalog, Options, CATALOG_SCHEMA};
use skewform_core::catalog::{entry_names, ENTRIES};
use skewform_core::symexpr::set_sampling_seed;
use skewform_core::{Chart, Expr};

#[derive(Parser)]
#[command(name = "skewform", version, about = "Exterior and evolutionary differential forms")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Global {
    /// Emit a JSON report on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized zero tests and locus scans.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Accepted quadrature discrepancy for `green`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Maximum number of steps for `chain`.
    #[arg(long, global = true, default_value_t = 8)]
    max_steps: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a session file.
    Check { file: PathBuf },
    /// List or run the built-in identities.
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Canonicalize an expression, or a form when --chart is given.
    Eval {
        expr: String,
        /// Coordinates, comma separated (e.g. x,y,z).
        #[arg(long)]
        chart: Option<String>,
        /// Point for numeric evaluation, e.g. x=1,y=0.5.
        #[arg(long)]
        at: Option<String>,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List,
    Run {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let opts = Options { seed: g.seed, tolerance: g.tolerance, max_steps: g.max_steps };
    let code = match &cli.command {
        Cmd::Check { file } => check(file, &opts, g.json),
        Cmd::Catalog { action } => catalog(action, g),
        Cmd::Eval { expr, chart, at } => eval(expr, chart.as_deref(), at.as_deref(), g),
    };
    ExitCode::from(code)
}

fn check(file: &PathBuf, opts: &Options, as_json: bool) -> u8 {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return 2;
        }
    };
    match check_text(&text, opts) {
        Ok(report) => {
            if as_json {
                emit(serde_json::to_string_pretty(&report).expect("serializable"));
            } else {
                emit(report.text().trim_end());
            }
            report.exit_code() as u8
        }
        Err(d) => {
            if as_json {
                let out = json!({ "schema": skewform_cli::run::REPORT_SCHEMA, "seed": opts.seed, "ok": false,
                    "error": { "line": d.line, "column": d.column, "message": d.message } });
                emit(serde_json::to_string_pretty(&out).expect("serializable"));
            }
            eprintln!("{}:{d}", file.display());
            2
        }
    }
}

fn catalog(action: &CatalogCmd, g: &Global) -> u8 {
    let names: Vec<&str> = match action {
        CatalogCmd::List => {
            if g.json {
                let list: Vec<_> = ENTRIES.iter().map(|e| json!({ "name": e.name, "description": e.description })).collect();
                emit(serde_json::to_string_pretty(&list).expect("serializable"));
            } else {
                for e in ENTRIES {
                    emit(format!("{:<22} {}", e.name, e.description));
                }
            }
            return 0;
        }
        CatalogCmd::Run { all: true, .. } => entry_names().collect(),
        CatalogCmd::Run { name: Some(n), .. } => vec![n.as_str()],
        CatalogCmd::Run { .. } => {
            eprintln!("give an entry name or --all");
            return 2;
        }
    };
    match run_catalog(&names, g.seed) {
        Ok(reports) => {
            let ok = reports.iter().all(|r| r.passed);
            if g.json {
                let out = json!({ "schema": CATALOG_SCHEMA, "seed": g.seed, "ok": ok, "entries": reports });
                emit(serde_json::to_string_pretty(&out).expect("serializable"));
            } else {
                for line in catalog_text(&reports) {
                    emit(line);
                }
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}

fn eval(text: &str, chart: Option<&str>, at: Option<&str>, g: &Global) -> u8 {
    set_sampling_seed(g.seed);
    let point = match at.map(parse_point).transpose() {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("--at: {msg}");
            return 2;
        }
    };
    if let Some(vars) = chart {
        let names: Vec<&str> = vars.split(',').map(str::trim).collect();
        let chart = match Chart::new(&names) {
            Ok(c) => Arc::new(c),
            Err(e) => {
                eprintln!("--chart: {e}");
                return 2;
            }
        };
        return match parse_form(&chart, text) {
            Ok(f) => {
                if g.json {
                    emit(json!({ "form": f.to_string(), "degree": f.degree(), "chart": chart.to_string() }));
                } else {
                    emit(f);
                }
                0
            }
            Err(e) => {
                eprintln!("{e}");
                2
            }
        };
    }
    let e = match Expr::parse(text) {
        Ok(e) => e,
        Err(err) => {
            eprintln!("{err}");
            return 2;
        }
    };
    let value = match &point {
        Some(p) => match e.eval_f64(p) {
            Ok(v) => Some(v),
            Err(err) => {
                eprintln!("{err}");
                return 2;
            }
        },
        None => None,
    };
    if g.json {
        emit(json!({ "expr": e.to_string(), "value": value }));
    } else {
        emit(e);
        if let Some(v) = value {
            emit(format!("= {v}"));
        }
    }
    0
}

fn parse_point(s: &str) -> Result<BTreeMap<String, f64>, String> {
    s.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("expected name=value, got '{kv}'"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(s: impl Display) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}
