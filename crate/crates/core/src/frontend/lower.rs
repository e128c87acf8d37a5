//! Lowering of a parsed rule (start `TFRule`) into the rule IR.

use std::collections::{BTreeMap, HashMap};

use super::ir::*;
use crate::derive::{DerivedGrammar, RuleId};
use crate::expr::{lower_where, TfNameMap};
use crate::parser::{ChildItem, Node, Slot, Span, SyntaxTree};

/// Role of a node of a rule tree, recovered from provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind<'a> {
    Pattern { ty: &'a str, interface: bool },
    Rep(&'a str),
    Neg(&'a str),
    KwPattern(&'a str),
    KwRep(&'a str),
    KwNeg(&'a str),
    Identifier,
    Ident,
    Where,
    Other,
}

pub(crate) struct Roles<'d> {
    dg: &'d DerivedGrammar,
    by_name: HashMap<&'d str, (RuleId, &'d str)>,
    pub(crate) tf_rev: TfNameMap,
    ident_slot: String,
}

impl<'d> Roles<'d> {
    pub(crate) fn new(dg: &'d DerivedGrammar) -> Roles<'d> {
        Roles {
            dg,
            by_name: dg.provenance.iter().map(|(n, p)| (n.as_str(), (p.rule, p.source.as_str()))).collect(),
            tf_rev: dg.tf_names.iter().map(|(o, n)| (n.clone(), o.clone())).collect(),
            ident_slot: dg.tf("Ident").to_string(),
        }
    }

    pub(crate) fn kind(&self, ty: &str) -> Kind<'d> {
        match self.by_name.get(ty) {
            Some((RuleId::R4a, s)) => Kind::Pattern { ty: s, interface: false },
            Some((RuleId::R4b, s)) => Kind::Pattern { ty: s, interface: true },
            Some((RuleId::R2a, s)) => Kind::Rep(s),
            Some((RuleId::R3a, s)) => Kind::Neg(s),
            Some((RuleId::R4c, s)) => Kind::KwPattern(s),
            Some((RuleId::R2b, s)) => Kind::KwRep(s),
            Some((RuleId::R3b, s)) => Kind::KwNeg(s),
            Some((RuleId::TfCommons, "TfIdentifier")) => Kind::Identifier,
            Some((RuleId::TfCommons, "Ident")) => Kind::Ident,
            Some((RuleId::TfCommons, "Where")) => Kind::Where,
            _ => Kind::Other,
        }
    }

    /// Number of alternatives of a modeling-language production; pattern
    /// alternatives beyond these are the schema-variable forms.
    pub(crate) fn concrete_alts(&self, ty: &str) -> usize {
        self.dg.source_grammar.production(ty).and_then(|p| p.body.as_ref()).map(|b| b.alternatives().len()).unwrap_or(0)
    }

    /// Modeling-language slot for a slot of a pattern production.
    pub(crate) fn model_slot(&self, tl_slot: &str) -> String {
        if tl_slot == self.dg.tf("TfIdentifier") {
            "Name".to_string()
        } else {
            tl_slot.to_string()
        }
    }
}

#[derive(Clone)]
struct Ctx {
    graph: Graph,
    parent: Option<PatId>,
    slot: Option<String>,
}

struct Lowering<'d> {
    roles: Roles<'d>,
    ir: RuleIR,
}

fn named_children(n: &Node) -> impl Iterator<Item = (usize, &str, &ChildItem)> {
    n.children.iter().enumerate().filter_map(|(i, c)| match &c.slot {
        Slot::Named(s) => Some((i, s.as_str(), &c.item)),
        _ => None,
    })
}

fn child_in<'n>(n: &'n Node, slot: &str) -> Option<&'n Node> {
    n.child_nodes().find(|(s, _)| *s == slot).map(|(_, c)| c)
}

fn first_node(n: &Node) -> Option<&Node> {
    n.child_nodes().next().map(|(_, c)| c)
}

/// Schema variable written after the type in `T $v;` and `T $v [[ ... ]]`.
fn form_var(n: &Node) -> String {
    n.children.get(1).and_then(|c| c.token()).map(|t| t.text.clone()).unwrap_or_else(|| "$_".into())
}

impl<'d> Lowering<'d> {
    fn fault(&mut self, kind: FaultKind, span: Span) {
        self.ir.faults.push(Fault { kind, span });
    }

    fn ident(&self, n: &Node) -> NameConstraint {
        let tok = n.tokens().into_iter().next().map(|t| t.text.as_str()).unwrap_or("$_");
        NameConstraint::from_token(tok)
    }

    fn element(&mut self, n: &Node, cx: &Ctx) -> Option<Item> {
        match self.roles.kind(&n.ty) {
            Kind::Pattern { ty, interface } => Some(Item::Node(self.pattern(n, ty, interface, cx))),
            Kind::Rep(_) => self.rep(n, cx),
            Kind::Neg(_) => self.neg(n, cx),
            _ => {
                self.fault(FaultKind::Structural(format!("unexpected `{}`", n.ty)), n.span);
                None
            }
        }
    }

    fn form(&self, n: &Node, ty: &str, interface: bool) -> Form {
        let k = if interface { 0 } else { self.roles.concrete_alts(ty) };
        if n.alt < k {
            return Form::Concrete;
        }
        match form_var(n).as_str() {
            "$_" if n.alt == k => Form::Anonymous,
            v if n.alt == k => Form::Blackbox(v.to_string()),
            v => Form::Whitebox(v.to_string()),
        }
    }

    fn pattern(&mut self, n: &Node, ty: &str, interface: bool, cx: &Ctx) -> PatId {
        let form = self.form(n, ty, interface);
        let id = PatId(self.ir.nodes.len());
        self.ir.nodes.push(PatternNode {
            id,
            ty: ty.to_string(),
            form: form.clone(),
            graph: cx.graph,
            parent: cx.parent,
            slot: cx.slot.clone(),
            names: Vec::new(),
            keywords: BTreeMap::new(),
            children: Vec::new(),
            syntax_alt: n.alt,
            items: Vec::new(),
            span: n.span,
        });
        if let Some(p) = cx.parent {
            self.ir.nodes[p.0].children.push(id);
        }
        if !form.has_syntax() {
            return id;
        }
        let skip_var = matches!(form, Form::Whitebox(_));
        for (i, slot, item) in named_children(n) {
            if skip_var && i == 1 {
                continue;
            }
            match item {
                ChildItem::Token(t) => {
                    let idx = self.ir.nodes[id.0].names.len();
                    self.ir.nodes[id.0].names.push((slot.to_string(), NameConstraint::from_token(&t.text)));
                    self.ir.nodes[id.0].items.push((slot.to_string(), Item::Name(idx)));
                }
                ChildItem::Node(c) => self.pattern_child(id, slot, c, cx.graph),
            }
        }
        id
    }

    fn pattern_child(&mut self, id: PatId, slot: &str, c: &Node, graph: Graph) {
        let in_nac = matches!(graph, Graph::Nac(_));
        match self.roles.kind(&c.ty) {
            Kind::Identifier => {
                let mslot = self.roles.model_slot(slot);
                let from = child_in(c, &self.roles.ident_slot).map(|i| self.ident(i)).unwrap_or(NameConstraint::Wildcard);
                let index = self.ir.nodes[id.0].names.iter().filter(|(s, _)| *s == mslot).count();
                if c.alt == 1 {
                    let to = child_in(c, "rhs").map(|i| self.ident(i)).unwrap_or(NameConstraint::Wildcard);
                    if in_nac {
                        self.fault(FaultKind::ModInNeg, c.span);
                    } else {
                        self.ir.edits.push(Edit::NameReplace { anchor: id, slot: mslot.clone(), index, from: from.clone(), to, span: c.span });
                    }
                }
                let node = &mut self.ir.nodes[id.0];
                let idx = node.names.len();
                node.names.push((mslot.clone(), from));
                node.items.push((mslot, Item::Name(idx)));
            }
            Kind::KwPattern(k) => self.keyword(id, slot, k, KeywordConstraint::Required),
            Kind::KwNeg(k) => {
                if in_nac {
                    self.fault(FaultKind::NestedNeg, c.span);
                }
                match first_node(c).map(|i| self.roles.kind(&i.ty)) {
                    Some(Kind::KwPattern(_)) => self.keyword(id, slot, k, KeywordConstraint::Forbidden),
                    Some(Kind::KwNeg(_)) => self.fault(FaultKind::NestedNeg, c.span),
                    Some(Kind::KwRep(_)) => self.fault(FaultKind::ModInNeg, c.span),
                    _ => self.fault(FaultKind::Structural("malformed negated keyword".into()), c.span),
                }
            }
            Kind::KwRep(k) => {
                if in_nac {
                    self.fault(FaultKind::ModInNeg, c.span);
                    return;
                }
                let inner = first_node(c).map(|i| self.roles.kind(&i.ty));
                if !matches!(inner, Some(Kind::KwPattern(_))) {
                    self.fault(FaultKind::Structural("keyword modification must name the keyword itself".into()), c.span);
                    return;
                }
                if c.alt == 0 {
                    self.keyword(id, slot, k, KeywordConstraint::Required);
                    self.ir.edits.push(Edit::KeywordRemove { anchor: id, keyword: k.to_string(), span: c.span });
                } else {
                    self.ir.nodes[id.0].items.push((slot.to_string(), Item::Keyword(k.to_string())));
                    self.ir.edits.push(Edit::KeywordAdd { anchor: id, keyword: k.to_string(), span: c.span });
                }
            }
            _ => {
                let cx = Ctx { graph, parent: Some(id), slot: Some(slot.to_string()) };
                if let Some(item) = self.element(c, &cx) {
                    self.ir.nodes[id.0].items.push((slot.to_string(), item));
                }
            }
        }
    }

    fn keyword(&mut self, id: PatId, slot: &str, k: &str, c: KeywordConstraint) {
        let node = &mut self.ir.nodes[id.0];
        node.keywords.insert(k.to_string(), c);
        node.items.push((slot.to_string(), Item::Keyword(k.to_string())));
    }

    fn rep(&mut self, n: &Node, cx: &Ctx) -> Option<Item> {
        let lhs = child_in(n, "lhs");
        let rhs = child_in(n, "rhs");
        if lhs.is_none() && rhs.is_none() {
            self.fault(FaultKind::Structural("modification with neither side".into()), n.span);
        }
        let lhs_id = lhs.and_then(|l| match self.roles.kind(&l.ty) {
            Kind::Pattern { ty, interface } => Some(self.pattern(l, ty, interface, cx)),
            Kind::Neg(_) => {
                self.fault(FaultKind::Structural("negative element on the left of a modification".into()), l.span);
                None
            }
            _ => {
                self.fault(FaultKind::Structural("nested modification".into()), l.span);
                None
            }
        });
        if matches!(cx.graph, Graph::Nac(_)) {
            self.fault(FaultKind::ModInNeg, n.span);
            return lhs_id.map(Item::Node);
        }
        let template = rhs.and_then(|r| self.template(r));
        self.ir.edits.push(Edit::Replace { parent: cx.parent, slot: cx.slot.clone(), lhs: lhs_id, rhs: template, span: n.span });
        Some(Item::Edit(self.ir.edits.len() - 1))
    }

    fn neg(&mut self, n: &Node, cx: &Ctx) -> Option<Item> {
        let inner = first_node(n)?;
        if matches!(cx.graph, Graph::Nac(_)) {
            self.fault(FaultKind::NestedNeg, n.span);
            return self.element(inner, cx);
        }
        let index = self.ir.nacs.len();
        let inner_cx = Ctx { graph: Graph::Nac(index), parent: None, slot: cx.slot.clone() };
        let root = match self.element(inner, &inner_cx)? {
            Item::Node(root) => root,
            _ => return None,
        };
        let anchor = cx.parent.zip(cx.slot.clone());
        self.ir.nacs.push(Nac { anchor, root, span: n.span });
        Some(Item::Nac(index))
    }

    fn template(&mut self, n: &Node) -> Option<Template> {
        match self.roles.kind(&n.ty) {
            Kind::Pattern { ty, interface } => {
                let form = self.form(n, ty, interface);
                match form {
                    Form::Blackbox(var) => return Some(Template::Copy { ty: ty.to_string(), var }),
                    Form::Anonymous => return Some(Template::Copy { ty: ty.to_string(), var: "$_".into() }),
                    _ => {}
                }
                let var = form.var().map(str::to_string);
                let alt = matches!(form, Form::Concrete).then_some(n.alt);
                let mut names = Vec::new();
                let mut keywords = std::collections::BTreeSet::new();
                let mut children = Vec::new();
                let skip_var = var.is_some();
                for (i, slot, item) in named_children(n) {
                    if skip_var && i == 1 {
                        continue;
                    }
                    let c = match item {
                        ChildItem::Token(t) => {
                            names.push((slot.to_string(), NameConstraint::from_token(&t.text)));
                            continue;
                        }
                        ChildItem::Node(c) => c,
                    };
                    match self.roles.kind(&c.ty) {
                        Kind::Identifier => {
                            if c.alt == 1 {
                                self.fault(FaultKind::Structural("name replacement inside a created element".into()), c.span);
                            }
                            let side = if c.alt == 1 { "rhs" } else { self.roles.ident_slot.as_str() };
                            let name = child_in(c, side).map(|i| self.ident(i)).unwrap_or(NameConstraint::Wildcard);
                            names.push((self.roles.model_slot(slot), name));
                        }
                        Kind::KwPattern(k) => {
                            keywords.insert(k.to_string());
                        }
                        Kind::KwNeg(_) | Kind::Neg(_) => self.fault(FaultKind::NegInRhs, c.span),
                        Kind::KwRep(_) | Kind::Rep(_) => {
                            self.fault(FaultKind::Structural("modification inside a created element".into()), c.span)
                        }
                        _ => {
                            if let Some(t) = self.template(c) {
                                children.push((slot.to_string(), t));
                            }
                        }
                    }
                }
                Some(Template::Node { ty: ty.to_string(), var, names, keywords, children, alt })
            }
            Kind::Neg(_) => {
                self.fault(FaultKind::NegInRhs, n.span);
                None
            }
            _ => {
                self.fault(FaultKind::Structural("modification on the right of a modification".into()), n.span);
                None
            }
        }
    }
}

/// Lowers a rule tree parsed with start `TFRule` against `dg`.
pub fn lower_to_ir(tree: &SyntaxTree, dg: &DerivedGrammar) -> RuleIR {
    let mut l = Lowering { roles: Roles::new(dg), ir: RuleIR::default() };
    let top = Ctx { graph: Graph::Lhs, parent: None, slot: None };
    for (_, c) in tree.root.child_nodes() {
        if l.roles.kind(&c.ty) == Kind::Where {
            match lower_where(c, &l.roles.tf_rev) {
                Ok(w) => {
                    l.ir.where_block = Some(w);
                    l.ir.where_span = c.span;
                }
                Err(e) => l.fault(FaultKind::Structural(e.to_string()), c.span),
            }
            continue;
        }
        if let Some(item) = l.element(c, &top) {
            if let Item::Node(id) = item {
                l.ir.lhs.push(id);
            }
            l.ir.top.push(item);
        }
    }
    l.ir
}
