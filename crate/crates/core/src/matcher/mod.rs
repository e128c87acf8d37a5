//! Matching rule patterns against models and applying their edits.

mod apply;
mod brute;
mod plan;
mod search;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::expr::{Env, ExprError};
use crate::frontend::{Language, PatId, PatternNode};
use crate::parser::{Node, NodeId};

pub use apply::{apply, apply_match, ApplyError, Mode};
pub use brute::{brute_force_matches, DEFAULT_BUDGET};
pub use plan::{compile_search_plan, SearchPlan, Step};
pub use search::find_matches;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("where block: {0}")]
    Where(#[from] ExprError),
    #[error("model has {nodes} nodes, more than the budget of {budget}")]
    BudgetExceeded { nodes: usize, budget: usize },
}

/// Pattern nodes mapped to model nodes, plus the variable environment
/// (element and name variables, then assignments).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Binding {
    pub nodes: BTreeMap<PatId, NodeId>,
    pub env: Env,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pub binding: Binding,
}

/// Preorder position and parent slot of every model node.
pub(crate) struct ModelIndex<'m> {
    pub order: Vec<&'m Node>,
    pub pos: HashMap<NodeId, usize>,
    pub parent: HashMap<NodeId, (NodeId, &'m str)>,
}

impl<'m> ModelIndex<'m> {
    pub fn new(root: &'m Node) -> ModelIndex<'m> {
        let mut order = Vec::new();
        root.walk(&mut |n| order.push(n));
        let pos = order.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut parent = HashMap::new();
        for n in &order {
            for (slot, c) in n.child_nodes() {
                parent.insert(c.id, (n.id, slot));
            }
        }
        ModelIndex { order, pos, parent }
    }

    pub fn node(&self, id: NodeId) -> &'m Node {
        self.order[self.pos[&id]]
    }
}

/// Whether the concrete form of `p` fixes the top-level alternative of its
/// production, which is the case when the production has several.
pub(crate) fn fixed_alt(lang: &Language, p: &PatternNode) -> Option<usize> {
    if p.form != crate::frontend::Form::Concrete {
        return None;
    }
    let alts = lang.derived.source_grammar.production(&p.ty)?.body.as_ref()?.alternatives().len();
    (alts > 1).then_some(p.syntax_alt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;
    use crate::parser::SyntaxTree;
    use std::sync::OnceLock;

    fn cd() -> &'static Language {
        static L: OnceLock<Language> = OnceLock::new();
        L.get_or_init(|| Language::new(&parse_grammar(include_str!("../../corpus/cd.mc-grammar")).unwrap()).unwrap())
    }

    const V0: &str = include_str!("../../corpus/models/profile_v0.cd");
    const PULL_UP: &str = include_str!("../../corpus/rules/pull_up.cdtr");
    const GENERALIZED: &str = include_str!("../../corpus/rules/generalized_pattern.cdtr");
    const ENCAPSULATE: &str = include_str!("../../corpus/rules/encapsulate.cdtr");

    fn model(text: &str) -> SyntaxTree {
        cd().parse_model(text).unwrap()
    }

    fn matches(rule: &str, text: &str) -> Vec<Match> {
        let l = cd();
        let ir = l.parse_rule(rule).unwrap().ir;
        let plan = compile_search_plan(&ir, l);
        let m = model(text);
        let fast = find_matches(&plan, &m, &ir, l).unwrap();
        let mut a = fast.clone();
        let mut b = brute_force_matches(&ir, &m, l, DEFAULT_BUDGET).unwrap();
        a.sort();
        b.sort();
        assert_eq!(a, b, "oracle disagrees");
        fast
    }

    fn class_names(m: &Match, model_text: &str) -> Vec<String> {
        let t = model(model_text);
        m.binding
            .nodes
            .values()
            .map(|id| t.find(*id).unwrap())
            .filter(|n| n.ty == "Class")
            .map(|n| n.slot_tokens("Name").next().unwrap().text.clone())
            .collect()
    }

    #[test]
    fn plan_binds_every_node_once() {
        let l = cd();
        let ir = l.parse_rule(GENERALIZED).unwrap().ir;
        let plan = compile_search_plan(&ir, l);
        let mut order = plan.bind_order();
        assert_eq!(order.len(), ir.nodes.len());
        // The two constrained subclasses come before the bare parent.
        assert_eq!(ir.node(order[0]).names.len(), 2);
        assert_eq!(ir.node(*order.last().unwrap()).names.len(), 1);
        assert!(plan.positive.iter().any(|s| matches!(s, Step::CheckNameVarEquality { var, .. } if var == "$parent")));
        order.sort();
        order.dedup();
        assert_eq!(order.len(), ir.nodes.len());

        let single = l.parse_rule("class $C;").unwrap().ir;
        let plan = compile_search_plan(&single, l);
        assert_eq!(plan.positive.iter().filter(|s| s.binds().is_some()).count(), 1);
        assert!(matches!(plan.positive[0], Step::EnumerateByType { .. }));

        let pull = compile_search_plan(&l.parse_rule(PULL_UP).unwrap().ir, l);
        assert_eq!(pull.positive, compile_search_plan(&l.parse_rule(&PULL_UP.replace("not [[ class $_ extends $parent; ]]", "")).unwrap().ir, l).positive);
        assert_eq!(pull.nacs.len(), 1);
    }

    #[test]
    fn generalized_pattern_matches_both_roles() {
        let ms = matches(GENERALIZED, V0);
        assert_eq!(ms.len(), 2);
        let mut roles: Vec<_> = ms.iter().map(|m| class_names(m, V0)).collect();
        roles.sort();
        assert_eq!(roles[0].len(), 3);
        assert_ne!(roles[0], roles[1]);
    }

    #[test]
    fn nac_blocks_third_subclass() {
        assert_eq!(matches(PULL_UP, V0).len(), 2);
        let with_bot = V0.replacen("class Person", "class Bot extends Profile;\n  class Person", 1);
        assert_eq!(matches(PULL_UP, &with_bot).len(), 0);
        assert_eq!(matches(&PULL_UP.replace("not [[ class $_ extends $parent; ]]", ""), &with_bot).len(), 2);
    }

    #[test]
    fn pattern_only_matches_once() {
        assert_eq!(matches(include_str!("../../corpus/rules/pattern_only.cdtr"), V0).len(), 1);
        assert_eq!(matches("", V0).len(), 1);
    }

    #[test]
    fn pull_up_yields_pulled_up_model() {
        let l = cd();
        let ir = l.parse_rule(PULL_UP).unwrap().ir;
        let (out, n) = apply(l, &ir, &model(V0), Mode::Once, 10).unwrap();
        assert_eq!(n, 1);
        let expected = model(include_str!("../../corpus/models/profile_pulled_up.cd"));
        assert_eq!(out.root.token_texts(), expected.root.token_texts());
        let reparsed = l.parse_model(&crate::parser::unparse(&out.root)).unwrap();
        assert!(reparsed.root.deep_equals(&out.root));
        let (_, n) = apply(l, &ir, &expected, Mode::Once, 10).unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn encapsulate_exhaustively() {
        let l = cd();
        let ir = l.parse_rule(ENCAPSULATE).unwrap().ir;
        let (out, n) = apply(l, &ir, &model(V0), Mode::Exhaustive, 100).unwrap();
        assert_eq!(n, 5);
        let group = |t: &SyntaxTree| {
            t.root.child_nodes().map(|(_, c)| c).find(|c| c.slot_tokens("Name").next().unwrap().text == "Group").unwrap().token_texts()
        };
        let expected = model(include_str!("../../corpus/models/profile_encapsulated_group_excerpt.cd"));
        assert_eq!(group(&out), group(&expected));
    }

    #[test]
    fn identity_and_guard() {
        let l = cd();
        let ir = l.parse_rule("class Person;").unwrap().ir;
        let (out, n) = apply(l, &ir, &model(V0), Mode::Once, 10).unwrap();
        assert_eq!(n, 1);
        assert!(out.root.deep_equals(&model(V0).root));
        let (_, n) = apply(l, &l.parse_rule("class Nobody;").unwrap().ir, &model(V0), Mode::Once, 10).unwrap();
        assert_eq!(n, 0);
        let grow = l.parse_rule("class $_; [[ :- class X; ]]").unwrap().ir;
        assert_eq!(apply(l, &grow, &model(V0), Mode::Exhaustive, 7), Err(ApplyError::MaxIterations(7)));
    }
}
