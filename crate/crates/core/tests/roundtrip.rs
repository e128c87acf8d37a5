//! parse∘unparse round trips for grammars, models and rules.

mod common;

use common::{random_grammar_source, render_terminals, Bnf};
use dstl::corpus::{CONDITION_FIXTURES, MODELS, RULES};
use dstl::derive::{derive_dstl, TFCOMMONS_SOURCE};
use dstl::grammar::parse_grammar;
use dstl::parser::{unparse, Parser};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn grammar_round_trip(src: &str) {
    let g = parse_grammar(src).unwrap();
    let printed = g.to_string();
    let again = parse_grammar(&printed).unwrap();
    assert_eq!(again, g, "{printed}");
    assert_eq!(again.to_string(), printed);
}

#[test]
fn fixture_grammars_round_trip() {
    grammar_round_trip(dstl::corpus::CD_GRAMMAR);
    grammar_round_trip(dstl::corpus::CDTRANS_EXPECTED);
    grammar_round_trip(TFCOMMONS_SOURCE);
    grammar_round_trip(&common::cd().derived.grammar.to_string());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_grammars_round_trip(seed in any::<u64>()) {
        let src = random_grammar_source(&mut StdRng::seed_from_u64(seed), 10);
        grammar_round_trip(&src);
        if let Ok(d) = derive_dstl(&parse_grammar(&src).unwrap()) {
            grammar_round_trip(&d.grammar.to_string());
        }
    }
}

fn text_round_trip(parser: &Parser, start: Option<&str>, text: &str) {
    let t = parser.parse(start, text).unwrap();
    let printed = unparse(&t.root);
    let again = parser.parse(start, &printed).unwrap();
    assert!(again.same_structure(&t), "{printed}");
    assert_eq!(unparse(&again.root), printed);
}

#[test]
fn fixture_models_and_rules_round_trip() {
    let l = common::cd();
    for (_, text) in MODELS {
        text_round_trip(&l.models, None, text);
    }
    for (_, text) in RULES.iter().chain(&CONDITION_FIXTURES) {
        text_round_trip(&l.rules, Some("TFRule"), text);
    }
}

#[test]
fn transformed_models_round_trip() {
    let l = common::cd();
    let model = l.parse_model(MODELS[0].1).unwrap();
    for (name, text) in RULES {
        let ir = l.parse_rule(text).unwrap().ir;
        let (out, _) = dstl::matcher::apply(l, &ir, &model, dstl::matcher::Mode::Exhaustive, 20)
            .or_else(|_| dstl::matcher::apply(l, &ir, &model, dstl::matcher::Mode::Once, 1))
            .unwrap();
        let printed = unparse(&out.root);
        let again = l.parse_model(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert!(again.root.deep_equals(&out.root), "{name}");
    }
}

#[test]
fn sampled_rules_render_to_equal_ir() {
    let l = common::cd();
    let bnf = Bnf::new(&l.derived.grammar);
    let mut rng = StdRng::seed_from_u64(5);
    let mut rendered = 0;
    for _ in 0..400 {
        let Some(toks) = bnf.sample(&mut rng, "TFRule") else { continue };
        let text = render_terminals(&toks);
        // Malformed constructs are dropped during lowering, so only
        // fault-free rules can be printed back.
        let Ok(rule) = l.parse_rule(&text) else { continue };
        if !rule.ir.faults.is_empty() {
            continue;
        }
        let out = l.render_rule(&rule.ir).unwrap_or_else(|e| panic!("`{text}`: {e}"));
        let again = l.parse_rule(&out).unwrap_or_else(|e| panic!("`{text}` printed as `{out}`: {e}"));
        assert_eq!(again.ir.without_spans(), rule.ir.without_spans(), "`{text}` printed as `{out}`");
        rendered += 1;
    }
    assert!(rendered > 50, "{rendered}");
}
