use std::collections::BTreeSet;

use serde::Serialize;

use super::fixed_alt;
use crate::frontend::{Graph, KeywordConstraint, Language, NameConstraint, PatId, RuleIR};

/// A primitive matching step. Enumerate and Extend bind a pattern node;
/// checks only read bound nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Step {
    EnumerateByType { node: PatId, ty: String, alt: Option<usize> },
    ExtendChild { node: PatId, parent: PatId, slot: String, ty: String, alt: Option<usize> },
    /// The `index`-th name in `slot`; a variable seen here first is bound.
    CheckName { node: PatId, slot: String, index: usize, constraint: NameConstraint },
    CheckKeyword { node: PatId, keyword: String, required: bool },
    CheckNameVarEquality { node: PatId, slot: String, index: usize, var: String },
    CheckInjective { node: PatId },
}

impl Step {
    /// Pattern node bound by this step, if any.
    pub fn binds(&self) -> Option<PatId> {
        match self {
            Step::EnumerateByType { node, .. } | Step::ExtendChild { node, .. } => Some(*node),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchPlan {
    pub positive: Vec<Step>,
    /// One sub-plan per negative application condition, run on top of a
    /// positive binding.
    pub nacs: Vec<Vec<Step>>,
}

impl SearchPlan {
    /// Pattern nodes of the positive plan in binding order.
    pub fn bind_order(&self) -> Vec<PatId> {
        self.positive.iter().filter_map(Step::binds).collect()
    }
}

struct Compiler<'a> {
    ir: &'a RuleIR,
    lang: &'a Language,
    seen: BTreeSet<String>,
    steps: Vec<Step>,
}

impl Compiler<'_> {
    fn emit(&mut self, id: PatId, first: Step) {
        let n = self.ir.node(id);
        self.steps.push(first);
        self.steps.push(Step::CheckInjective { node: id });
        if !n.form.has_syntax() {
            return;
        }
        for (kw, c) in &n.keywords {
            self.steps.push(Step::CheckKeyword { node: id, keyword: kw.clone(), required: *c == KeywordConstraint::Required });
        }
        for (i, (slot, c)) in n.names.iter().enumerate() {
            let index = n.names[..i].iter().filter(|(s, _)| s == slot).count();
            let step = match c {
                NameConstraint::Var(v) if !self.seen.insert(v.clone()) => {
                    Step::CheckNameVarEquality { node: id, slot: slot.clone(), index, var: v.clone() }
                }
                _ => Step::CheckName { node: id, slot: slot.clone(), index, constraint: c.clone() },
            };
            self.steps.push(step);
        }
        for &child in &n.children {
            let c = self.ir.node(child);
            let slot = c.slot.clone().unwrap_or_default();
            let step = Step::ExtendChild { node: child, parent: id, slot, ty: c.ty.clone(), alt: fixed_alt(self.lang, c) };
            self.emit(child, step);
        }
    }

    fn enumerate(&self, id: PatId) -> Step {
        let n = self.ir.node(id);
        Step::EnumerateByType { node: id, ty: n.ty.clone(), alt: fixed_alt(self.lang, n) }
    }
}

/// Orders the positive pattern most-constrained-first (ties by declaration
/// order); children are reached from their bound parents.
pub fn compile_search_plan(ir: &RuleIR, lang: &Language) -> SearchPlan {
    let mut c = Compiler { ir, lang, seen: BTreeSet::new(), steps: Vec::new() };
    let mut roots: Vec<_> = ir.lhs_nodes().filter(|n| n.parent.is_none()).collect();
    roots.sort_by_key(|n| (std::cmp::Reverse(n.constraint_count()), n.id));
    for r in roots {
        let step = c.enumerate(r.id);
        c.emit(r.id, step);
    }
    let positive = std::mem::take(&mut c.steps);
    let after_positive = c.seen.clone();
    let mut nacs = Vec::new();
    for (i, nac) in ir.nacs.iter().enumerate() {
        debug_assert_eq!(ir.node(nac.root).graph, Graph::Nac(i));
        c.seen = after_positive.clone();
        let root = ir.node(nac.root);
        let first = match &nac.anchor {
            Some((parent, slot)) => Step::ExtendChild {
                node: nac.root,
                parent: *parent,
                slot: slot.clone(),
                ty: root.ty.clone(),
                alt: fixed_alt(lang, root),
            },
            None => c.enumerate(nac.root),
        };
        c.emit(nac.root, first);
        nacs.push(std::mem::take(&mut c.steps));
    }
    SearchPlan { positive, nacs }
}
