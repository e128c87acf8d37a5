use std::collections::{BTreeMap, BTreeSet};

use super::{is_builtin, Grammar, Rhs};

/// Derived properties of a flattened grammar.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrammarFacts {
    /// Nonterminals deriving the empty token sequence.
    pub nullable: BTreeSet<String>,
    /// Optional keyword text → productions containing it.
    pub optional_keywords: BTreeMap<String, BTreeSet<String>>,
    /// Optional keywords in order of first occurrence.
    pub keyword_order: Vec<String>,
    /// Interface → standard productions implementing it, directly or through
    /// interface extension.
    pub implementors: BTreeMap<String, BTreeSet<String>>,
    /// Interface → every interface it extends, transitively.
    pub super_interfaces: BTreeMap<String, BTreeSet<String>>,
}

impl GrammarFacts {
    pub fn is_nullable(&self, name: &str) -> bool {
        self.nullable.contains(name)
    }

    /// Whether a node of production `ty` may stand where `expected` is
    /// referenced.
    pub fn conforms(&self, ty: &str, expected: &str) -> bool {
        ty == expected || self.implementors.get(expected).is_some_and(|s| s.contains(ty))
    }
}

/// Computes nullability, optional keywords and the implementation relation.
pub fn analyze(g: &Grammar) -> GrammarFacts {
    let mut facts = GrammarFacts::default();

    // Transitive interface hierarchy.
    for i in g.interface_productions() {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<&str> = i.supertypes.iter().map(String::as_str).collect();
        while let Some(s) = todo.pop() {
            if seen.insert(s.to_string()) {
                if let Some(p) = g.production(s) {
                    todo.extend(p.supertypes.iter().map(String::as_str));
                }
            }
        }
        facts.super_interfaces.insert(i.name.clone(), seen);
    }
    for i in g.interface_productions() {
        facts.implementors.entry(i.name.clone()).or_default();
    }
    for p in g.standard_productions() {
        for direct in &p.supertypes {
            let mut all = vec![direct.clone()];
            if let Some(sup) = facts.super_interfaces.get(direct) {
                all.extend(sup.iter().cloned());
            }
            for i in all {
                facts.implementors.entry(i).or_default().insert(p.name.clone());
            }
        }
    }

    for p in g.standard_productions() {
        if let Some(body) = &p.body {
            for kw in body.optional_keywords() {
                if !facts.optional_keywords.contains_key(kw) {
                    facts.keyword_order.push(kw.to_string());
                }
                facts.optional_keywords.entry(kw.to_string()).or_default().insert(p.name.clone());
            }
        }
    }

    // Least fixpoint.
    loop {
        let mut changed = false;
        for p in &g.productions {
            if facts.nullable.contains(&p.name) {
                continue;
            }
            let now = match &p.body {
                Some(body) => rhs_nullable(body, &facts.nullable),
                None => facts
                    .implementors
                    .get(&p.name)
                    .is_some_and(|imps| imps.iter().any(|i| facts.nullable.contains(i))),
            };
            if now {
                facts.nullable.insert(p.name.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    facts
}

fn rhs_nullable(rhs: &Rhs, nullable: &BTreeSet<String>) -> bool {
    match rhs {
        Rhs::Seq(items) => items.iter().all(|i| rhs_nullable(i, nullable)),
        Rhs::Alt(alts) => alts.iter().any(|a| rhs_nullable(a, nullable)),
        Rhs::Terminal(_) => false,
        Rhs::OptKeyword(_) => true,
        Rhs::NonTerm { target, card, .. } => {
            card.admits_empty() || (!is_builtin(target) && nullable.contains(target))
        }
        Rhs::Group(inner, card) => card.admits_empty() || rhs_nullable(inner, nullable),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    #[test]
    fn optional_only_is_nullable() {
        let g = parse_grammar(r#"grammar G { A = "a"?; B = "b"; C = A A; D = B*; }"#).unwrap();
        let f = analyze(&g);
        assert_eq!(f.nullable, ["A", "C", "D"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn interface_nullable_iff_some_implementor_is() {
        let g = parse_grammar(
            r#"grammar G { interface I; interface J extends I; A implements J = "a"?; B implements I = "b"; }"#,
        )
        .unwrap();
        let f = analyze(&g);
        assert!(f.is_nullable("I") && f.is_nullable("J"));
        assert_eq!(f.implementors["I"], ["A", "B"].iter().map(|s| s.to_string()).collect());
        assert!(f.conforms("A", "I"));
        assert!(!f.conforms("B", "J"));
    }
}
