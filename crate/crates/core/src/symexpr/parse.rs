//! Tokenizer and recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;              (right associative)
//! primary = number | ident | ident "(" expr { "," expr } ")"
//!         | "d" "[" ident "]" | "(" expr ")" ;
//! number  = digit { digit } [ "." digit { digit } ] ;
//! ident   = (letter | "_") { letter | digit | "_" } ;
//! ```
//!
//! `d[x]` denotes a coordinate differential. The scalar evaluator rejects it;
//! the form evaluator gives it meaning. `^` is integer power on scalars and
//! the wedge product on forms.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::poly::Func;
use super::{Expr, ExprError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed syntax tree. Positions are zero-based byte offsets into the input.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(BigRational),
    Ident(String, usize),
    Diff(String, usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(String, Vec<Node>, usize),
}

/// Which bare identifiers a scalar parse accepts.
#[derive(Clone, Copy, Debug)]
pub enum Scope<'a> {
    /// Any identifier is a symbol.
    Open,
    /// Only the listed identifiers are symbols.
    Declared(&'a BTreeSet<String>),
}

impl Scope<'_> {
    pub fn admits(&self, name: &str) -> bool {
        match self {
            Scope::Open => true,
            Scope::Declared(set) => set.contains(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac = &text[fs..i];
            }
            let digits = format!("{int_part}{frac}");
            let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().expect("digits") };
            let d = num_traits::pow(BigInt::from(10), frac.len());
            out.push((Tok::Num(BigRational::new(n, d)), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if "+-*/^()[],".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ExprError::Parse { message: format!("unexpected character '{c}'"), offset: i });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn error(&self, message: String) -> ExprError {
        ExprError::Parse { message, offset: self.offset() }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Node::Num(q))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "d" && self.eat('[') {
                    let var_at = self.offset();
                    let var = match self.peek().cloned() {
                        Some(Tok::Ident(v)) => v,
                        _ => return Err(self.error("expected a variable inside d[...]".into())),
                    };
                    self.pos += 1;
                    self.expect(']')?;
                    return Ok(Node::Diff(var, var_at));
                }
                if self.eat('(') {
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    return Ok(Node::Call(name, args, at));
                }
                Ok(Node::Ident(name, at))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym(c)) => Err(self.error(format!("unexpected '{c}'"))),
            None => Err(self.error("unexpected end of input".into())),
        }
    }
}

/// Parses text into a syntax tree without interpreting identifiers.
pub fn parse_node(text: &str) -> Result<Node, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let node = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input".into()));
    }
    Ok(node)
}

/// Interprets a syntax tree as a scalar.
pub fn node_to_expr(node: &Node, scope: &Scope<'_>) -> Result<Expr, ExprError> {
    match node {
        Node::Num(q) => Ok(Expr::rational(q.clone())),
        Node::Ident(name, at) => {
            if Func::from_name(name).is_some() {
                return Err(ExprError::Parse {
                    message: format!("function '{name}' used without arguments"),
                    offset: *at,
                });
            }
            if !scope.admits(name) {
                return Err(ExprError::Undeclared { name: name.clone(), offset: *at });
            }
            Ok(Expr::symbol(name))
        }
        Node::Diff(var, at) => Err(ExprError::Parse {
            message: format!("differential d[{var}] is not a scalar"),
            offset: *at,
        }),
        Node::Neg(inner) => Ok(-node_to_expr(inner, scope)?),
        Node::Bin(op, a, b) => {
            let x = node_to_expr(a, scope)?;
            match op {
                BinOp::Pow => {
                    let e = node_to_expr(b, scope)?;
                    let n = integer_exponent(&e).ok_or(ExprError::NonIntegerExponent)?;
                    x.powi(n)
                }
                _ => {
                    let y = node_to_expr(b, scope)?;
                    match op {
                        BinOp::Add => Ok(&x + &y),
                        BinOp::Sub => Ok(&x - &y),
                        BinOp::Mul => Ok(&x * &y),
                        BinOp::Div => x.checked_div(&y),
                        BinOp::Pow => unreachable!(),
                    }
                }
            }
        }
        Node::Call(name, args, at) => {
            let f = Func::from_name(name)
                .ok_or_else(|| ExprError::UnknownFunction { name: name.clone(), offset: *at })?;
            if args.len() != 1 {
                return Err(ExprError::Parse {
                    message: format!("{name} takes exactly one argument"),
                    offset: *at,
                });
            }
            Ok(Expr::apply(f, node_to_expr(&args[0], scope)?))
        }
    }
}

pub(crate) fn integer_exponent(e: &Expr) -> Option<i64> {
    e.as_integer().and_then(|n| n.to_i64())
}
