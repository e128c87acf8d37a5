//! The search-plan matcher against the brute-force oracle, and invariance of
//! match sets under reordering of model lists.

mod common;

use std::collections::BTreeSet;

use common::{cd, random_cd_model, shuffle_lists};
use dstl::corpus::{MODELS, RULES};
use dstl::matcher::{brute_force_matches, compile_search_plan, find_matches, Match, DEFAULT_BUDGET};
use dstl::parser::SyntaxTree;
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Corpus rules plus a few more exercising anchored NACs, keyword
/// constraints and name variables.
fn rules() -> Vec<String> {
    let mut out: Vec<String> = RULES.iter().map(|(_, t)| t.to_string()).collect();
    out.extend(
        [
            "class $c { not [[ Method $_; ]] Attribute $a; }",
            "abstract class $_ { public String $n; }",
            "class $_ extends $p { not [[ private $_ $_; ]] } class $p;",
            "class $x { Method $m [[ $t $n ( $pt $pn ) ; ]] }",
            "not [[ abstract class $_; ]] class $_ { $t $n; $t $n2; }",
            "class $_ { Attribute $a; Attribute $b; } where { $a.deepEquals($b) }",
        ]
        .map(str::to_string),
    );
    out
}

fn as_set(ms: Vec<Match>) -> BTreeSet<Match> {
    ms.into_iter().collect()
}

fn assert_equivalent(rule: &str, model: &SyntaxTree) -> usize {
    let l = cd();
    let ir = l.parse_rule(rule).unwrap().ir;
    let plan = compile_search_plan(&ir, l);
    let fast = find_matches(&plan, model, &ir, l).unwrap();
    let brute = brute_force_matches(&ir, model, l, DEFAULT_BUDGET).unwrap();
    let n = fast.len();
    assert_eq!(as_set(fast), as_set(brute), "rule `{rule}`");
    n
}

#[test]
fn corpus_pairs_agree_with_oracle() {
    let l = cd();
    for (_, m) in MODELS {
        let model = l.parse_model(m).unwrap();
        for r in rules() {
            assert_equivalent(&r, &model);
        }
    }
}

#[test]
fn random_models_agree_with_oracle() {
    let l = cd();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut total = 0;
    for _ in 0..100 {
        let text = random_cd_model(&mut rng, 60);
        let model = l.parse_model(&text).unwrap();
        assert!(model.root.node_count() <= 60);
        for r in rules() {
            total += assert_equivalent(&r, &model);
        }
    }
    assert!(total > 100, "{total}");
}

#[test]
fn match_sets_ignore_sibling_order() {
    let l = cd();
    let model = l.parse_model(MODELS[0].1).unwrap();
    let mut rng = StdRng::seed_from_u64(99);
    let prepared: Vec<_> = rules()
        .iter()
        .map(|r| {
            let ir = l.parse_rule(r).unwrap().ir;
            let plan = compile_search_plan(&ir, l);
            let base = as_set(find_matches(&plan, &model, &ir, l).unwrap());
            (ir, plan, base)
        })
        .collect();
    let mut changed = 0;
    for _ in 0..50 {
        let mut root = model.root.clone();
        shuffle_lists(&mut root, &mut rng);
        changed += usize::from(root != model.root);
        let permuted = SyntaxTree::new(root);
        assert!(l.models.recognize(None, &dstl::parser::unparse(&permuted.root)));
        for (ir, plan, base) in &prepared {
            assert_eq!(&as_set(find_matches(plan, &permuted, ir, l).unwrap()), base);
        }
    }
    assert!(changed > 40);
}

#[test]
fn matching_is_pure_and_deterministic() {
    let l = cd();
    let model = l.parse_model(MODELS[0].1).unwrap();
    let snapshot = model.clone();
    for r in rules() {
        let ir = l.parse_rule(&r).unwrap().ir;
        let plan = compile_search_plan(&ir, l);
        let a = find_matches(&plan, &model, &ir, l).unwrap();
        let b = find_matches(&plan, &model, &ir, l).unwrap();
        assert_eq!(a, b);
    }
    assert_eq!(model, snapshot);
}
