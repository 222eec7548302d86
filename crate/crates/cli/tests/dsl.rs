use std::process::Command;

use proptest::prelude::*;
use skewform_cli::dsl::print_node;
use skewform_cli::parse_session;
use skewform_core::symexpr::parse_node;
use skewform_core::Expr;

const DEMO: &str = include_str!("data/demo.sf");

#[test]
fn demo_round_trips_through_printer() {
    let s = parse_session(DEMO).unwrap();
    let printed = s.to_string();
    let again = parse_session(&printed).unwrap();
    assert_eq!(s, again);
    assert_eq!(printed, again.to_string());
}

fn arith() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..20).prop_map(|n| n.to_string()),
        (1u32..9, 2u32..9).prop_map(|(a, b)| format!("{a}/{b}")),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(String::from),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*"]))
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            (inner.clone(), 1u32..6).prop_map(|(a, b)| format!("x + ({a}) / ({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.prop_map(|a| format!("sin({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn printed_nodes_reparse_to_same_value(src in arith()) {
        let node = parse_node(&src).unwrap();
        let printed = print_node(&node);
        let node2 = parse_node(&printed).unwrap();
        prop_assert_eq!(&print_node(&node2), &printed);
        prop_assert_eq!(Expr::parse(&src).unwrap(), Expr::parse(&printed).unwrap());
    }
}

#[test]
fn diagnostics_carry_positions() {
    let cases = [
        ("chart x y\nform a = x*d[z]\n", 2),
        ("chart x y\nform a = x*d[x\n", 2),
        ("chart x\n\nshow d(b)\n", 3),
        ("frobnicate\n", 1),
        ("chart x y\nform a = d[x]\nclassify R expect IDENTICAL\n", 3),
    ];
    for (text, line) in cases {
        let d = parse_session(text).unwrap_err();
        assert_eq!(d.line, line, "{text:?}: {d}");
        assert!(d.column >= 1);
        assert!(d.to_string().starts_with(&format!("line {line}, column ")));
    }
}

fn run(args: &[&str], stdin_file: Option<(&str, &str)>) -> i32 {
    let dir = std::env::temp_dir().join(format!("skewform-dsl-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    if let Some((name, body)) = stdin_file {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        args.push(path.display().to_string());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_skewform")).args(&args).output().unwrap();
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["check"], Some(("fail.sf", "chart x y\ncheck closed x*d[y] - y*d[x] + d(x*y)\n"))), 1);
    assert_eq!(run(&["check"], Some(("pass.sf", "chart x y\ncheck closed d(x*y)\n"))), 0);
    assert_eq!(run(&["check"], Some(("bad.sf", "chart x y\ncheck closed d[\n"))), 2);
    assert_eq!(run(&["check", "/nonexistent/file.sf"], None), 2);
    assert_eq!(run(&["catalog", "run", "no-such-entry"], None), 2);
    assert_eq!(run(&["catalog", "run", "cauchy-riemann"], None), 0);
}
