//! The where-block expression language: syntax, lowering from parsed
//! TFCommons trees, and evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::derive::TFCOMMONS_SOURCE;
use crate::grammar::parse_grammar;
use crate::parser::{ChildItem, Node, NodeId, ParseError, Parser, Slot};

pub const BUILTINS: [&str; 5] = ["concat", "equals", "deepEquals", "capitalize", "startsWith"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    StringLit(String),
    Var(String),
    /// `recv.method(args)`; a global call `f(a, b)` has receiver `a`. A
    /// global call without arguments has no receiver.
    Call { receiver: Option<Box<Expr>>, method: String, args: Vec<Expr> },
    Binary { op: BinOp, l: Box<Expr>, r: Box<Expr> },
    Not(Box<Expr>),
    Paren(Box<Expr>),
}

impl Expr {
    /// Schema variables referenced, in order of first occurrence.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::StringLit(_) => {}
            Expr::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Expr::Call { receiver, args, .. } => {
                if let Some(r) = receiver {
                    r.collect_vars(out);
                }
                args.iter().for_each(|a| a.collect_vars(out));
            }
            Expr::Binary { l, r, .. } => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Not(e) | Expr::Paren(e) => e.collect_vars(out),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn unquote(lit: &str) -> String {
    let inner = lit.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(lit);
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::StringLit(s) => f.write_str(&quote(s)),
            Expr::Var(v) => f.write_str(v),
            Expr::Call { receiver, method, args } => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                match receiver {
                    Some(r) if matches!(**r, Expr::Binary { .. } | Expr::Not(_)) => write!(f, "({r}).{method}({})", args.join(", ")),
                    Some(r) => write!(f, "{r}.{method}({})", args.join(", ")),
                    None => write!(f, "{method}()"),
                }
            }
            Expr::Binary { op, l, r } => write!(f, "{l} {} {r}", op.symbol()),
            Expr::Not(e) => write!(f, "!{e}"),
            Expr::Paren(e) => write!(f, "({e})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("type mismatch in `{context}`: expected {expected}, found {found}")]
    TypeMismatch { context: String, expected: &'static str, found: &'static str },
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("`{method}` takes {expected} argument(s), got {found}")]
    Arity { method: String, expected: usize, found: usize },
    #[error("variable `{0}` is already bound")]
    AlreadyBound(String),
    #[error("node {0} is not part of the model")]
    DanglingNode(NodeId),
    #[error("malformed expression tree at `{0}`")]
    Malformed(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExprValue {
    Str(String),
    Bool(bool),
    Node(NodeId),
}

impl ExprValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            ExprValue::Str(_) => "string",
            ExprValue::Bool(_) => "boolean",
            ExprValue::Node(_) => "node",
        }
    }
}

impl fmt::Display for ExprValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprValue::Str(s) => f.write_str(&quote(s)),
            ExprValue::Bool(b) => write!(f, "{b}"),
            ExprValue::Node(id) => write!(f, "{id}"),
        }
    }
}

/// Schema variable environment.
pub type Env = BTreeMap<String, ExprValue>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WhereBlock {
    pub assignments: Vec<(String, Expr)>,
    pub constraint: Option<Expr>,
}

fn expect_str<'v>(v: &'v ExprValue, context: &str) -> Result<&'v str, ExprError> {
    match v {
        ExprValue::Str(s) => Ok(s),
        other => Err(ExprError::TypeMismatch { context: context.into(), expected: "string", found: other.type_name() }),
    }
}

fn expect_bool(v: &ExprValue, context: &str) -> Result<bool, ExprError> {
    match v {
        ExprValue::Bool(b) => Ok(*b),
        other => Err(ExprError::TypeMismatch { context: context.into(), expected: "boolean", found: other.type_name() }),
    }
}

fn expect_node<'m>(v: &ExprValue, context: &str, model: &'m Node) -> Result<&'m Node, ExprError> {
    match v {
        ExprValue::Node(id) => model.find(*id).ok_or(ExprError::DanglingNode(*id)),
        other => Err(ExprError::TypeMismatch { context: context.into(), expected: "node", found: other.type_name() }),
    }
}

fn same_value(a: &ExprValue, b: &ExprValue, context: &str) -> Result<bool, ExprError> {
    match (a, b) {
        (ExprValue::Str(x), ExprValue::Str(y)) => Ok(x == y),
        (ExprValue::Bool(x), ExprValue::Bool(y)) => Ok(x == y),
        (ExprValue::Node(x), ExprValue::Node(y)) => Ok(x == y),
        _ => Err(ExprError::TypeMismatch { context: context.into(), expected: a.type_name(), found: b.type_name() }),
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Evaluates `e`; node references are resolved in `model`.
pub fn eval_expr(e: &Expr, env: &Env, model: &Node) -> Result<ExprValue, ExprError> {
    match e {
        Expr::StringLit(s) => Ok(ExprValue::Str(s.clone())),
        Expr::Var(v) => env.get(v).cloned().ok_or_else(|| ExprError::Unbound(v.clone())),
        Expr::Paren(inner) => eval_expr(inner, env, model),
        Expr::Not(inner) => Ok(ExprValue::Bool(!expect_bool(&eval_expr(inner, env, model)?, "!")?)),
        Expr::Binary { op, l, r } => {
            let a = eval_expr(l, env, model)?;
            let b = eval_expr(r, env, model)?;
            let ctx = op.symbol();
            Ok(ExprValue::Bool(match op {
                BinOp::Eq => same_value(&a, &b, ctx)?,
                BinOp::Ne => !same_value(&a, &b, ctx)?,
                BinOp::And => expect_bool(&a, ctx)? & expect_bool(&b, ctx)?,
                BinOp::Or => expect_bool(&a, ctx)? | expect_bool(&b, ctx)?,
            }))
        }
        Expr::Call { receiver, method, args } => {
            if !BUILTINS.contains(&method.as_str()) {
                return Err(ExprError::UnknownMethod(method.clone()));
            }
            let expected = if method == "capitalize" { 0 } else { 1 };
            let Some(receiver) = receiver else {
                return Err(ExprError::Arity { method: method.clone(), expected: expected + 1, found: 0 });
            };
            if args.len() != expected {
                return Err(ExprError::Arity { method: method.clone(), expected, found: args.len() });
            }
            let recv = eval_expr(receiver, env, model)?;
            let args = args.iter().map(|a| eval_expr(a, env, model)).collect::<Result<Vec<_>, _>>()?;
            let m = method.as_str();
            Ok(match m {
                "concat" => ExprValue::Str(format!("{}{}", expect_str(&recv, m)?, expect_str(&args[0], m)?)),
                "capitalize" => ExprValue::Str(capitalize(expect_str(&recv, m)?)),
                "startsWith" => ExprValue::Bool(expect_str(&recv, m)?.starts_with(expect_str(&args[0], m)?)),
                "equals" => ExprValue::Bool(same_value(&recv, &args[0], m)?),
                _ => {
                    let a = expect_node(&recv, m, model)?;
                    let b = expect_node(&args[0], m, model)?;
                    ExprValue::Bool(a.deep_equals(b))
                }
            })
        }
    }
}

/// Runs assignments in order, then the constraint. `env` is not modified;
/// the extended environment is returned.
pub fn run_where(w: &WhereBlock, env: &Env, model: &Node) -> Result<(Env, bool), ExprError> {
    let mut out = env.clone();
    for (var, e) in &w.assignments {
        if out.contains_key(var) {
            return Err(ExprError::AlreadyBound(var.clone()));
        }
        let v = eval_expr(e, &out, model)?;
        out.insert(var.clone(), v);
    }
    let ok = match &w.constraint {
        Some(c) => expect_bool(&eval_expr(c, &out, model)?, "where constraint")?,
        None => true,
    };
    Ok((out, ok))
}

/// Maps production names of the tree to their TFCommons names.
pub type TfNameMap = BTreeMap<String, String>;

struct Lowerer<'a> {
    names: &'a TfNameMap,
}

impl Lowerer<'_> {
    fn kind<'n>(&'n self, n: &'n Node) -> &'n str {
        self.names.get(&n.ty).map(String::as_str).unwrap_or(&n.ty)
    }

    fn nodes<'n>(&self, n: &'n Node) -> Vec<&'n Node> {
        n.child_nodes().map(|(_, c)| c).collect()
    }

    fn token<'n>(&self, n: &'n Node, slot: &str) -> Option<&'n str> {
        n.children.iter().find_map(|c| match (&c.slot, &c.item) {
            (Slot::Named(s), ChildItem::Token(t)) if s == slot => Some(t.text.as_str()),
            _ => None,
        })
    }

    fn malformed(&self, n: &Node) -> ExprError {
        ExprError::Malformed(self.kind(n).to_string())
    }

    fn expr(&self, n: &Node) -> Result<Expr, ExprError> {
        match self.kind(n) {
            "BooleanExpression" => self.expr(self.nodes(n).first().ok_or_else(|| self.malformed(n))?),
            "Expression" => self.fold(n, BinOp::Or),
            "Conjunction" => self.fold(n, BinOp::And),
            "Comparison" => {
                let parts = self.nodes(n);
                match parts.as_slice() {
                    [u] => self.expr(u),
                    [l, op, r] => {
                        let op = if op.alt == 0 { BinOp::Eq } else { BinOp::Ne };
                        Ok(Expr::Binary { op, l: Box::new(self.expr(l)?), r: Box::new(self.expr(r)?) })
                    }
                    _ => Err(self.malformed(n)),
                }
            }
            "Unary" => {
                let inner = self.expr(self.nodes(n).first().ok_or_else(|| self.malformed(n))?)?;
                Ok(if n.alt == 0 { Expr::Not(Box::new(inner)) } else { inner })
            }
            "Postfix" => {
                let parts = self.nodes(n);
                let (first, rest) = parts.split_first().ok_or_else(|| self.malformed(n))?;
                let mut e = self.expr(first)?;
                for suffix in rest {
                    let method = self.token(suffix, "method").ok_or_else(|| self.malformed(suffix))?.to_string();
                    let args = self.args(suffix)?;
                    e = Expr::Call { receiver: Some(Box::new(e)), method, args };
                }
                Ok(e)
            }
            "Primary" => match n.alt {
                0 => Ok(Expr::StringLit(unquote(self.token(n, "StringLiteral").ok_or_else(|| self.malformed(n))?))),
                1 => Ok(Expr::Var(self.token(n, "SchemaVar").ok_or_else(|| self.malformed(n))?.to_string())),
                2 => Ok(Expr::Paren(Box::new(self.expr(self.nodes(n).first().ok_or_else(|| self.malformed(n))?)?))),
                _ => {
                    let method = self.token(n, "function").ok_or_else(|| self.malformed(n))?.to_string();
                    let mut args = self.args(n)?.into_iter();
                    let receiver = args.next().map(Box::new);
                    Ok(Expr::Call { receiver, method, args: args.collect() })
                }
            },
            _ => Err(self.malformed(n)),
        }
    }

    fn fold(&self, n: &Node, op: BinOp) -> Result<Expr, ExprError> {
        let mut parts = self.nodes(n).into_iter();
        let mut e = self.expr(parts.next().ok_or_else(|| self.malformed(n))?)?;
        for p in parts {
            e = Expr::Binary { op, l: Box::new(e), r: Box::new(self.expr(p)?) };
        }
        Ok(e)
    }

    fn args(&self, n: &Node) -> Result<Vec<Expr>, ExprError> {
        match n.child_nodes().find(|(_, c)| self.kind(c) == "Arguments") {
            Some((_, a)) => self.nodes(a).into_iter().map(|e| self.expr(e)).collect(),
            None => Ok(Vec::new()),
        }
    }

    fn where_block(&self, n: &Node) -> Result<WhereBlock, ExprError> {
        let mut w = WhereBlock::default();
        for c in &n.children {
            let (Slot::Named(slot), ChildItem::Node(child)) = (&c.slot, &c.item) else { continue };
            if self.kind(child) == "Assignment" {
                let var = self.token(child, "SchemaVar").ok_or_else(|| self.malformed(child))?.to_string();
                let value = self.nodes(child).first().copied().ok_or_else(|| self.malformed(child))?;
                w.assignments.push((var, self.expr(value)?));
            } else if slot == "constraint" {
                w.constraint = Some(self.expr(child)?);
            }
        }
        Ok(w)
    }
}

/// Lowers an expression subtree (any of the TFCommons expression
/// productions).
pub fn lower_expr(node: &Node, names: &TfNameMap) -> Result<Expr, ExprError> {
    Lowerer { names }.expr(node)
}

/// Lowers a `Where` subtree.
pub fn lower_where(node: &Node, names: &TfNameMap) -> Result<WhereBlock, ExprError> {
    Lowerer { names }.where_block(node)
}

fn tfcommons_parser() -> &'static Parser {
    static P: OnceLock<Parser> = OnceLock::new();
    P.get_or_init(|| Parser::new(&parse_grammar(TFCOMMONS_SOURCE).expect("TFCommons grammar")).expect("TFCommons parser"))
}

/// Parses a standalone expression in the where-block syntax.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let tree = tfcommons_parser().parse(Some("Expression"), text)?;
    lower_expr(&tree.root, &TfNameMap::new())
}

/// Parses a standalone `where { ... }` block.
pub fn parse_where(text: &str) -> Result<WhereBlock, ExprError> {
    let tree = tfcommons_parser().parse(Some("Where"), text)?;
    lower_where(&tree.root, &TfNameMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_model() -> Node {
        Node {
            id: NodeId(0),
            ty: "M".into(),
            alt: 0,
            children: vec![],
            keyword_flags: Default::default(),
            span: Default::default(),
        }
    }

    fn eval(src: &str, env: &Env) -> Result<ExprValue, ExprError> {
        eval_expr(&parse_expr(src).unwrap(), env, &empty_model())
    }

    fn s(v: &str) -> ExprValue {
        ExprValue::Str(v.into())
    }

    #[test]
    fn concatenation_and_capitalize() {
        let env = Env::from([("$attrname".to_string(), s("address"))]);
        assert_eq!(eval(r#"("get").concat("address")"#, &env).unwrap(), s("getaddress"));
        assert_eq!(eval(r#"capitalize("address")"#, &env).unwrap(), s("Address"));
        assert_eq!(eval(r#"("get").concat(capitalize($attrname))"#, &env).unwrap(), s("getAddress"));
        assert_eq!(eval(r#""a\"b".startsWith("a\"")"#, &env).unwrap(), ExprValue::Bool(true));
    }

    #[test]
    fn errors_are_typed() {
        let env = Env::from([("$b".to_string(), ExprValue::Bool(true))]);
        assert!(matches!(eval("$b.concat(\"x\")", &env), Err(ExprError::TypeMismatch { .. })));
        assert!(matches!(eval("$nope", &env), Err(ExprError::Unbound(_))));
        assert!(matches!(eval("$b.frobnicate()", &env), Err(ExprError::UnknownMethod(_))));
        assert!(matches!(eval("\"a\" == $b", &env), Err(ExprError::TypeMismatch { .. })));
    }

    #[test]
    fn boolean_operators() {
        let env = Env::new();
        assert_eq!(eval(r#""a" == "a" && !("a" != "a") || "x" == "y""#, &env).unwrap(), ExprValue::Bool(true));
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for src in [r#"("get").concat(capitalize($x))"#, r#"!($a == $b) && $c.deepEquals($d) || "q\\" != $e"#] {
            let e = parse_expr(src).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{src}");
        }
    }

    #[test]
    fn where_runs_in_order_without_touching_input() {
        let w = parse_where(r#"where { $g = ("get").concat($n); $h = $g.concat("!"); $h.startsWith("getx") }"#).unwrap();
        let env = Env::from([("$n".to_string(), s("x"))]);
        let (out, ok) = run_where(&w, &env, &empty_model()).unwrap();
        assert!(ok);
        assert_eq!(out["$h"], s("getx!"));
        assert_eq!(env.len(), 1);
        let (same, ok) = run_where(&WhereBlock::default(), &env, &empty_model()).unwrap();
        assert!(ok && same == env);
        let clash = parse_where(r#"where { $n = "y"; }"#).unwrap();
        assert!(matches!(run_where(&clash, &env, &empty_model()), Err(ExprError::AlreadyBound(_))));
    }
}
