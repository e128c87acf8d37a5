use super::{Binding, Match, MatchError, ModelIndex, SearchPlan, Step};
use crate::expr::{run_where, ExprValue};
use crate::frontend::{Language, NameConstraint, RuleIR};
use crate::grammar::GrammarFacts;
use crate::parser::{Node, SyntaxTree};

struct Search<'m, 'a> {
    index: &'a ModelIndex<'m>,
    facts: &'a GrammarFacts,
    bound: Vec<Option<&'m Node>>,
    names: Vec<(String, String)>,
}

fn name_at<'m>(n: &'m Node, slot: &str, index: usize) -> Option<&'m str> {
    n.children
        .iter()
        .filter_map(|c| match (&c.slot, &c.item) {
            (crate::parser::Slot::Named(s), crate::parser::ChildItem::Token(t)) if s == slot => Some(t.text.as_str()),
            _ => None,
        })
        .nth(index)
}

impl<'m> Search<'m, '_> {
    fn name_var(&self, var: &str) -> Option<&str> {
        self.names.iter().rev().find(|(v, _)| v == var).map(|(_, s)| s.as_str())
    }

    fn fits(&self, n: &Node, ty: &str, alt: Option<usize>) -> bool {
        self.facts.conforms(&n.ty, ty) && alt.is_none_or(|a| a == n.alt)
    }

    /// Runs `steps[i..]`; `done` is called on every complete binding and
    /// returns true to stop the search.
    fn run(&mut self, steps: &[Step], i: usize, done: &mut dyn FnMut(&Self) -> Result<bool, MatchError>) -> Result<bool, MatchError> {
        let Some(step) = steps.get(i) else { return done(self) };
        match step {
            Step::EnumerateByType { node, ty, alt } => {
                let index = self.index;
                let candidates: Vec<&'m Node> = index.order.iter().copied().filter(|m| self.fits(m, ty, *alt)).collect();
                for m in candidates {
                    self.bound[node.0] = Some(m);
                    if self.run(steps, i + 1, done)? {
                        self.bound[node.0] = None;
                        return Ok(true);
                    }
                }
                self.bound[node.0] = None;
                Ok(false)
            }
            Step::ExtendChild { node, parent, slot, ty, alt } => {
                let Some(p) = self.bound[parent.0] else { return Ok(false) };
                for (s, m) in p.child_nodes() {
                    if s != slot || !self.fits(m, ty, *alt) {
                        continue;
                    }
                    self.bound[node.0] = Some(m);
                    if self.run(steps, i + 1, done)? {
                        self.bound[node.0] = None;
                        return Ok(true);
                    }
                }
                self.bound[node.0] = None;
                Ok(false)
            }
            Step::CheckInjective { node } => {
                let me = self.bound[node.0].map(|n| n.id);
                let clash = self.bound.iter().enumerate().any(|(j, b)| j != node.0 && b.map(|n| n.id) == me);
                if clash {
                    Ok(false)
                } else {
                    self.run(steps, i + 1, done)
                }
            }
            Step::CheckKeyword { node, keyword, required } => {
                let n = self.bound[node.0].expect("bound before check");
                if n.keyword(keyword) == *required {
                    self.run(steps, i + 1, done)
                } else {
                    Ok(false)
                }
            }
            Step::CheckName { node, slot, index, constraint } => {
                let n = self.bound[node.0].expect("bound before check");
                let Some(text) = name_at(n, slot, *index) else { return Ok(false) };
                match constraint {
                    NameConstraint::Literal(l) if l != text => Ok(false),
                    NameConstraint::Var(v) => {
                        self.names.push((v.clone(), text.to_string()));
                        let r = self.run(steps, i + 1, done);
                        self.names.pop();
                        r
                    }
                    _ => self.run(steps, i + 1, done),
                }
            }
            Step::CheckNameVarEquality { node, slot, index, var } => {
                let n = self.bound[node.0].expect("bound before check");
                if name_at(n, slot, *index).is_some() && name_at(n, slot, *index) == self.name_var(var) {
                    self.run(steps, i + 1, done)
                } else {
                    Ok(false)
                }
            }
        }
    }
}

/// All matches of the rule's positive pattern that no NAC blocks and the
/// where block accepts, ordered by the document positions of the bound nodes
/// in plan order. The model is not modified.
pub fn find_matches(plan: &SearchPlan, model: &SyntaxTree, ir: &RuleIR, lang: &Language) -> Result<Vec<Match>, MatchError> {
    let index = ModelIndex::new(&model.root);
    let mut search = Search { index: &index, facts: lang.models.facts(), bound: vec![None; ir.nodes.len()], names: Vec::new() };
    let order = plan.bind_order();
    let mut found: Vec<(Vec<usize>, Match)> = Vec::new();
    let mut accept = |s: &Search<'_, '_>| -> Result<bool, MatchError> {
        for nac in &plan.nacs {
            let mut inner = Search { index: s.index, facts: s.facts, bound: s.bound.clone(), names: s.names.clone() };
            if inner.run(nac, 0, &mut |_| Ok(true))? {
                return Ok(false);
            }
        }
        let mut binding = Binding::default();
        for &p in &order {
            let n = s.bound[p.0].expect("positive plan binds every node");
            binding.nodes.insert(p, n.id);
            if let Some(v) = ir.node(p).var() {
                binding.env.insert(v.to_string(), ExprValue::Node(n.id));
            }
        }
        for (v, text) in &s.names {
            binding.env.insert(v.clone(), ExprValue::Str(text.clone()));
        }
        if let Some(w) = &ir.where_block {
            let (env, ok) = run_where(w, &binding.env, &model.root)?;
            if !ok {
                return Ok(false);
            }
            binding.env = env;
        }
        let key = order.iter().map(|p| index.pos[&binding.nodes[p]]).collect();
        found.push((key, Match { binding }));
        Ok(false)
    };
    search.run(&plan.positive, 0, &mut accept)?;
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(found.into_iter().map(|(_, m)| m).collect())
}
