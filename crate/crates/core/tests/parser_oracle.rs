//! The Earley parser and the grammar analysis against an independent
//! fixpoint recognizer.

mod common;

use common::{random_grammar_source, render_terminals, terminal_of, Bnf};
use dstl::grammar::{analyze, parse_grammar};
use dstl::parser::{tokenize, Parser};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn mutate(rng: &mut StdRng, toks: &mut Vec<String>, alphabet: &[String]) {
    match rng.gen_range(0..3) {
        0 if !toks.is_empty() => {
            let i = rng.gen_range(0..toks.len());
            toks.remove(i);
        }
        1 => {
            let i = rng.gen_range(0..=toks.len());
            toks.insert(i, alphabet[rng.gen_range(0..alphabet.len())].clone());
        }
        _ if toks.len() > 1 => {
            let i = rng.gen_range(0..toks.len() - 1);
            toks.swap(i, i + 1);
        }
        _ => {}
    }
}

#[test]
fn earley_agrees_with_fixpoint_recognizer() {
    let mut rng = StdRng::seed_from_u64(7);
    let alphabet: Vec<String> = ["a", "b", "c", "+", ";", "opt", "neg", "<Name>"].iter().map(|s| s.to_string()).collect();
    let (mut checked, mut accepted) = (0, 0);
    for _ in 0..60 {
        let src = random_grammar_source(&mut rng, 6);
        let g = parse_grammar(&src).unwrap();
        let parser = Parser::new(&g).unwrap();
        let bnf = Bnf::new(&g);
        for p in g.standard_productions() {
            for _ in 0..8 {
                let mut toks = bnf.sample(&mut rng, &p.name).unwrap_or_default();
                if rng.gen_bool(0.5) {
                    mutate(&mut rng, &mut toks, &alphabet);
                }
                let text = render_terminals(&toks);
                // Recompute terminals through the real lexer, which decides
                // what is a keyword.
                let Ok(lexed) = tokenize(parser.lex_spec(), &text) else {
                    assert!(!parser.recognize(Some(&p.name), &text));
                    continue;
                };
                let lexed: Vec<String> = lexed.iter().map(terminal_of).collect();
                let expected = bnf.recognizes(&p.name, &lexed);
                accepted += usize::from(expected);
                assert_eq!(
                    parser.recognize(Some(&p.name), &text),
                    expected,
                    "grammar:\n{src}\nstart {} input `{text}`",
                    p.name
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 200);
    assert!(accepted * 4 > checked, "{accepted} of {checked} accepted");
}

#[test]
fn earley_agrees_on_fixture_languages() {
    let l = common::cd();
    let mut rng = StdRng::seed_from_u64(11);
    for (g, start) in [(&l.derived.source_grammar, "Definition"), (&l.derived.grammar, "TFRule")] {
        let parser = Parser::new(g).unwrap();
        let bnf = Bnf::new(g);
        let mut positives = 0;
        for _ in 0..150 {
            let Some(toks) = bnf.sample(&mut rng, start) else { continue };
            let text = render_terminals(&toks);
            let lexed: Vec<String> = tokenize(parser.lex_spec(), &text).unwrap().iter().map(terminal_of).collect();
            let expected = bnf.recognizes(start, &lexed);
            assert_eq!(parser.recognize(Some(start), &text), expected, "`{text}`");
            positives += usize::from(expected);
        }
        assert!(positives > 20);
    }
}

#[test]
fn nullable_matches_fixpoint() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..100 {
        let src = random_grammar_source(&mut rng, 8);
        let g = parse_grammar(&src).unwrap();
        let facts = analyze(&g);
        let table = Bnf::new(&g).table(&[]);
        for (i, p) in g.productions.iter().enumerate() {
            assert_eq!(facts.is_nullable(&p.name), table[i][0][0], "{src}\n{}", p.name);
        }
    }
}
