use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::expr::WhereBlock;
use crate::parser::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PatId(pub usize);

impl std::fmt::Display for PatId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NameConstraint {
    Literal(String),
    Var(String),
    /// `$_`: any name, nothing bound.
    Wildcard,
}

impl NameConstraint {
    pub fn from_token(text: &str) -> NameConstraint {
        match text {
            "$_" => NameConstraint::Wildcard,
            v if v.starts_with('$') => NameConstraint::Var(v.to_string()),
            lit => NameConstraint::Literal(lit.to_string()),
        }
    }

    pub fn text(&self) -> &str {
        match self {
            NameConstraint::Literal(s) | NameConstraint::Var(s) => s,
            NameConstraint::Wildcard => "$_",
        }
    }

    pub fn var(&self) -> Option<&str> {
        match self {
            NameConstraint::Var(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeywordConstraint {
    Required,
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Form {
    Concrete,
    Blackbox(String),
    Whitebox(String),
    /// `T $_;`: an arbitrary element, not bound.
    Anonymous,
}

impl Form {
    pub fn var(&self) -> Option<&str> {
        match self {
            Form::Blackbox(v) | Form::Whitebox(v) => Some(v),
            _ => None,
        }
    }

    pub fn has_syntax(&self) -> bool {
        matches!(self, Form::Concrete | Form::Whitebox(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Graph {
    Lhs,
    Nac(usize),
}

/// Source-order entries of a pattern node or of the rule's top level; only
/// used to print the rule again.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Item {
    Node(PatId),
    Nac(usize),
    Edit(usize),
    Name(usize),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternNode {
    pub id: PatId,
    /// Nonterminal of the modeling language (possibly an interface).
    pub ty: String,
    pub form: Form,
    pub graph: Graph,
    pub parent: Option<PatId>,
    /// Slot of the parent's production holding this node.
    pub slot: Option<String>,
    pub names: Vec<(String, NameConstraint)>,
    pub keywords: BTreeMap<String, KeywordConstraint>,
    pub children: Vec<PatId>,
    /// Alternative of the pattern production used in the rule text.
    pub syntax_alt: usize,
    pub items: Vec<(String, Item)>,
    pub span: Span,
}

impl PatternNode {
    pub fn var(&self) -> Option<&str> {
        self.form.var()
    }

    /// Number of local constraints, used to order the search.
    pub fn constraint_count(&self) -> usize {
        self.names.iter().filter(|(_, c)| !matches!(c, NameConstraint::Wildcard)).count()
            + self.keywords.len()
            + self.children.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Template {
    /// A deep copy of the element bound to `var`.
    Copy { ty: String, var: String },
    Node {
        ty: String,
        var: Option<String>,
        names: Vec<(String, NameConstraint)>,
        keywords: BTreeSet<String>,
        children: Vec<(String, Template)>,
        /// Top-level alternative of the modeling-language production, when
        /// written in its concrete form.
        alt: Option<usize>,
    },
}

impl Template {
    pub fn ty(&self) -> &str {
        match self {
            Template::Copy { ty, .. } | Template::Node { ty, .. } => ty,
        }
    }

    /// Every variable the template reads, including `$_`.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Template::Copy { var, .. } => out.push(var),
            Template::Node { var, names, children, .. } => {
                if let Some(v) = var {
                    out.push(v);
                }
                for (_, n) in names {
                    match n {
                        NameConstraint::Var(v) => out.push(v),
                        NameConstraint::Wildcard => out.push("$_"),
                        NameConstraint::Literal(_) => {}
                    }
                }
                for (_, c) in children {
                    c.collect_vars(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edit {
    /// `[[ lhs :- rhs ]]` on elements: lhs absent creates, rhs absent
    /// deletes.
    Replace { parent: Option<PatId>, slot: Option<String>, lhs: Option<PatId>, rhs: Option<Template>, span: Span },
    KeywordAdd { anchor: PatId, keyword: String, span: Span },
    KeywordRemove { anchor: PatId, keyword: String, span: Span },
    NameReplace { anchor: PatId, slot: String, index: usize, from: NameConstraint, to: NameConstraint, span: Span },
}

impl Edit {
    pub fn span(&self) -> Span {
        match self {
            Edit::Replace { span, .. }
            | Edit::KeywordAdd { span, .. }
            | Edit::KeywordRemove { span, .. }
            | Edit::NameReplace { span, .. } => *span,
        }
    }

    fn clear_span(&mut self) {
        match self {
            Edit::Replace { span, .. }
            | Edit::KeywordAdd { span, .. }
            | Edit::KeywordRemove { span, .. }
            | Edit::NameReplace { span, .. } => *span = Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nac {
    /// Pattern node and slot the negative element sits in; `None` at the
    /// top level.
    pub anchor: Option<(PatId, String)>,
    pub root: PatId,
    pub span: Span,
}

/// Misplaced constructs found during lowering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaultKind {
    NegInRhs,
    NestedNeg,
    ModInNeg,
    /// Not covered by the six conditions, e.g. `[[ :- ]]`.
    Structural(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub kind: FaultKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleIR {
    pub nodes: Vec<PatternNode>,
    pub lhs: Vec<PatId>,
    pub nacs: Vec<Nac>,
    pub edits: Vec<Edit>,
    pub where_block: Option<WhereBlock>,
    pub where_span: Span,
    pub top: Vec<Item>,
    pub faults: Vec<Fault>,
}

impl RuleIR {
    pub fn node(&self, id: PatId) -> &PatternNode {
        &self.nodes[id.0]
    }

    pub fn lhs_nodes(&self) -> impl Iterator<Item = &PatternNode> {
        self.nodes.iter().filter(|n| n.graph == Graph::Lhs)
    }

    pub fn nac_nodes(&self, nac: usize) -> impl Iterator<Item = &PatternNode> {
        self.nodes.iter().filter(move |n| n.graph == Graph::Nac(nac))
    }

    /// Templates of all replace edits.
    pub fn templates(&self) -> impl Iterator<Item = &Template> {
        self.edits.iter().filter_map(|e| match e {
            Edit::Replace { rhs: Some(t), .. } => Some(t),
            _ => None,
        })
    }

    /// Element variables bound by the positive pattern.
    pub fn lhs_element_vars(&self) -> BTreeSet<&str> {
        self.lhs_nodes().filter_map(|n| n.var()).collect()
    }

    /// Name variables of the positive pattern.
    pub fn lhs_name_vars(&self) -> BTreeSet<&str> {
        self.lhs_nodes().flat_map(|n| n.names.iter().filter_map(|(_, c)| c.var())).collect()
    }

    pub fn assigned_vars(&self) -> Vec<&str> {
        self.where_block.iter().flat_map(|w| w.assignments.iter().map(|(v, _)| v.as_str())).collect()
    }

    pub fn is_pure_pattern(&self) -> bool {
        self.edits.is_empty()
    }

    /// A copy with all source positions cleared, for structural comparison.
    pub fn without_spans(&self) -> RuleIR {
        let mut ir = self.clone();
        for n in &mut ir.nodes {
            n.span = Span::default();
        }
        for e in &mut ir.edits {
            e.clear_span();
        }
        for n in &mut ir.nacs {
            n.span = Span::default();
        }
        for f in &mut ir.faults {
            f.span = Span::default();
        }
        ir.where_span = Span::default();
        ir
    }
}
