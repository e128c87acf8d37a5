//! Exhaustive matcher used as a test oracle for the search-plan matcher.
//! It enumerates every injective, type-respecting assignment and checks all
//! constraints on the complete assignment.

use std::collections::{BTreeMap, BTreeSet};

use super::{fixed_alt, Binding, Match, MatchError, ModelIndex};
use crate::expr::{run_where, ExprValue};
use crate::frontend::{Graph, KeywordConstraint, Language, NameConstraint, PatId, RuleIR};
use crate::parser::{NodeId, SyntaxTree};

pub const DEFAULT_BUDGET: usize = 200;

struct Oracle<'m, 'a> {
    ir: &'a RuleIR,
    lang: &'a Language,
    index: ModelIndex<'m>,
}

impl Oracle<'_, '_> {
    fn candidates(&self, p: PatId, exclude: &BTreeSet<NodeId>) -> Vec<NodeId> {
        let ty = &self.ir.node(p).ty;
        let facts = self.lang.models.facts();
        self.index.order.iter().filter(|n| facts.conforms(&n.ty, ty) && !exclude.contains(&n.id)).map(|n| n.id).collect()
    }

    /// Calls `f` on every injective assignment of `nodes`, in lexicographic
    /// candidate order.
    fn assignments(&self, nodes: &[PatId], exclude: &BTreeSet<NodeId>, f: &mut dyn FnMut(&BTreeMap<PatId, NodeId>) -> bool) {
        let cands: Vec<Vec<NodeId>> = nodes.iter().map(|&p| self.candidates(p, exclude)).collect();
        let mut current = BTreeMap::new();
        let mut used = BTreeSet::new();
        fn go(
            k: usize,
            nodes: &[PatId],
            cands: &[Vec<NodeId>],
            current: &mut BTreeMap<PatId, NodeId>,
            used: &mut BTreeSet<NodeId>,
            f: &mut dyn FnMut(&BTreeMap<PatId, NodeId>) -> bool,
        ) -> bool {
            if k == nodes.len() {
                return f(current);
            }
            for &c in &cands[k] {
                if used.insert(c) {
                    current.insert(nodes[k], c);
                    let stop = go(k + 1, nodes, cands, current, used, f);
                    current.remove(&nodes[k]);
                    used.remove(&c);
                    if stop {
                        return true;
                    }
                }
            }
            false
        }
        go(0, nodes, &cands, &mut current, &mut used, f);
    }

    /// Checks local constraints of `nodes` under `a`, extending `names`.
    fn holds(&self, nodes: &[PatId], a: &BTreeMap<PatId, NodeId>, names: &mut BTreeMap<String, String>) -> bool {
        for &p in nodes {
            let pn = self.ir.node(p);
            let m = self.index.node(a[&p]);
            if let Some(q) = pn.parent {
                match self.index.parent.get(&m.id) {
                    Some((parent, slot)) if *parent == a[&q] && Some(*slot) == pn.slot.as_deref() => {}
                    _ => return false,
                }
            }
            if fixed_alt(self.lang, pn).is_some_and(|alt| alt != m.alt) {
                return false;
            }
            if !pn.form.has_syntax() {
                continue;
            }
            for (kw, c) in &pn.keywords {
                if m.keyword(kw) != (*c == KeywordConstraint::Required) {
                    return false;
                }
            }
            let mut seen_per_slot: BTreeMap<&str, usize> = BTreeMap::new();
            for (slot, c) in &pn.names {
                let k = seen_per_slot.entry(slot).or_default();
                let text = m.slot_tokens(slot).nth(*k).map(|t| t.text.clone());
                *k += 1;
                let Some(text) = text else { return false };
                match c {
                    NameConstraint::Literal(l) if *l != text => return false,
                    NameConstraint::Var(v) => match names.get(v) {
                        Some(prev) if *prev != text => return false,
                        Some(_) => {}
                        None => {
                            names.insert(v.clone(), text);
                        }
                    },
                    _ => {}
                }
            }
        }
        true
    }

    fn nac_blocks(&self, nac: usize, positive: &BTreeMap<PatId, NodeId>, names: &BTreeMap<String, String>) -> bool {
        let nodes: Vec<PatId> = self.ir.nodes.iter().filter(|n| n.graph == Graph::Nac(nac)).map(|n| n.id).collect();
        let exclude: BTreeSet<NodeId> = positive.values().copied().collect();
        let anchor = &self.ir.nacs[nac].anchor;
        let root = self.ir.nacs[nac].root;
        let mut blocked = false;
        self.assignments(&nodes, &exclude, &mut |a| {
            if let Some((p, slot)) = anchor {
                match self.index.parent.get(&a[&root]) {
                    Some((parent, s)) if *parent == positive[p] && s == slot => {}
                    _ => return false,
                }
            }
            let mut names = names.clone();
            blocked = self.holds(&nodes, a, &mut names);
            blocked
        });
        blocked
    }
}

/// Matches by exhaustive enumeration; refuses models above `budget` nodes.
pub fn brute_force_matches(ir: &RuleIR, model: &SyntaxTree, lang: &Language, budget: usize) -> Result<Vec<Match>, MatchError> {
    let index = ModelIndex::new(&model.root);
    if index.order.len() > budget {
        return Err(MatchError::BudgetExceeded { nodes: index.order.len(), budget });
    }
    let o = Oracle { ir, lang, index };
    let nodes: Vec<PatId> = ir.lhs_nodes().map(|n| n.id).collect();
    let mut out = Vec::new();
    let mut error = None;
    o.assignments(&nodes, &BTreeSet::new(), &mut |a| {
        let mut names = BTreeMap::new();
        if !o.holds(&nodes, a, &mut names) {
            return false;
        }
        if (0..ir.nacs.len()).any(|i| o.nac_blocks(i, a, &names)) {
            return false;
        }
        let mut env: BTreeMap<String, ExprValue> =
            names.into_iter().map(|(v, s)| (v, ExprValue::Str(s))).collect();
        for (p, id) in a {
            if let Some(v) = ir.node(*p).var() {
                env.insert(v.to_string(), ExprValue::Node(*id));
            }
        }
        if let Some(w) = &ir.where_block {
            match run_where(w, &env, &model.root) {
                Ok((e, true)) => env = e,
                Ok((_, false)) => return false,
                Err(e) => {
                    error = Some(e);
                    return true;
                }
            }
        }
        out.push(Match { binding: Binding { nodes: a.clone(), env } });
        false
    });
    match error {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}
