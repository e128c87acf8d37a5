use std::collections::BTreeMap;

use super::{Grammar, GrammarError, Production, COMMON};

/// Grammars available as supergrammars, by name.
pub type GrammarRegistry = BTreeMap<String, Grammar>;

/// Merges the productions of all (transitive) supergrammars into `g`.
///
/// Supergrammar productions come first, in `extends` order; a production of
/// a subgrammar replaces a same-named inherited one in place. `Common` is
/// implicit and contributes only builtin lexicals, so it need not be
/// registered.
pub fn flatten_inheritance(g: &Grammar, registry: &GrammarRegistry) -> Result<Grammar, GrammarError> {
    let mut stack = Vec::new();
    let productions = collect(g, registry, &mut stack)?;
    Ok(Grammar { name: g.name.clone(), extends: Vec::new(), productions })
}

fn collect(
    g: &Grammar,
    registry: &GrammarRegistry,
    stack: &mut Vec<String>,
) -> Result<Vec<Production>, GrammarError> {
    if stack.contains(&g.name) {
        return Err(GrammarError::InheritanceCycle(g.name.clone()));
    }
    stack.push(g.name.clone());
    let mut merged: Vec<Production> = Vec::new();
    for sup in &g.extends {
        let inherited = match registry.get(sup) {
            Some(sg) => collect(sg, registry, stack)?,
            None if sup == COMMON => Vec::new(),
            None => return Err(GrammarError::UnresolvedSupergrammar(sup.clone())),
        };
        for p in inherited {
            merge(&mut merged, p);
        }
    }
    for p in &g.productions {
        merge(&mut merged, p.clone());
    }
    stack.pop();
    Ok(merged)
}

fn merge(into: &mut Vec<Production>, p: Production) {
    match into.iter_mut().find(|q| q.name == p.name) {
        Some(slot) => *slot = p,
        None => into.push(p),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::grammar::parse_grammar;

    fn registry(srcs: &[&str]) -> GrammarRegistry {
        srcs.iter()
            .map(|s| {
                let g = parse_grammar(s).unwrap();
                (g.name.clone(), g)
            })
            .collect()
    }

    #[test]
    fn empty_extends_is_identity() {
        let g = parse_grammar(r#"grammar G { A = "a"; interface I; }"#).unwrap();
        assert_eq!(flatten_inheritance(&g, &GrammarRegistry::new()).unwrap(), g);
    }

    #[test]
    fn common_is_implicit() {
        let g = parse_grammar(r#"grammar G extends Common { A = Name; }"#).unwrap();
        let flat = flatten_inheritance(&g, &GrammarRegistry::new()).unwrap();
        assert!(flat.extends.is_empty());
        flat.validate().unwrap();
    }

    #[test]
    fn diamond_productions_once() {
        let reg = registry(&[
            r#"grammar D { X = "x"; Y = "y"; }"#,
            r#"grammar B extends D { PB = X; }"#,
            r#"grammar C extends D { PC = Y; }"#,
        ]);
        let a = parse_grammar(r#"grammar A extends B, C { PA = PB PC; }"#).unwrap();
        let flat = flatten_inheritance(&a, &reg).unwrap();
        let names: Vec<_> = flat.productions.iter().map(|p| p.name.clone()).collect();
        // set-union oracle over the production names of the hierarchy
        let expected: BTreeSet<String> = ["X", "Y", "PB", "PC", "PA"].iter().map(|s| s.to_string()).collect();
        assert_eq!(names.len(), expected.len());
        assert_eq!(names.iter().cloned().collect::<BTreeSet<_>>(), expected);
        assert_eq!(&names[..2], &["X", "Y"]);
    }

    #[test]
    fn subgrammar_overrides() {
        let reg = registry(&[r#"grammar S { A = "a"; B = "b"; }"#]);
        let g = parse_grammar(r#"grammar G extends S { A = "z"; }"#).unwrap();
        let flat = flatten_inheritance(&g, &reg).unwrap();
        assert_eq!(flat.productions[0].to_string(), r#"A = "z";"#);
        assert_eq!(flat.productions.len(), 2);
    }

    #[test]
    fn idempotent() {
        let reg = registry(&[r#"grammar S { A = "a"; }"#]);
        let g = parse_grammar(r#"grammar G extends S { B = A; }"#).unwrap();
        let once = flatten_inheritance(&g, &reg).unwrap();
        assert_eq!(flatten_inheritance(&once, &reg).unwrap(), once);
    }

    #[test]
    fn errors() {
        let g = parse_grammar(r#"grammar G extends Missing { }"#).unwrap();
        assert_eq!(
            flatten_inheritance(&g, &GrammarRegistry::new()),
            Err(GrammarError::UnresolvedSupergrammar("Missing".into()))
        );
        let reg = registry(&[r#"grammar A extends B { }"#, r#"grammar B extends A { }"#]);
        assert!(matches!(
            flatten_inheritance(&reg["A"], &reg),
            Err(GrammarError::InheritanceCycle(_))
        ));
    }
}
