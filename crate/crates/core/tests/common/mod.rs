#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use dstl::frontend::Language;
use dstl::grammar::{parse_grammar, Cardinality, Grammar, Rhs};
use dstl::parser::{ChildItem, Node, Slot, Token, TokenKind};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn cd() -> &'static Language {
    static L: OnceLock<Language> = OnceLock::new();
    L.get_or_init(|| Language::new(&parse_grammar(dstl::corpus::CD_GRAMMAR).unwrap()).unwrap())
}

const TERMINALS: [&str; 5] = ["a", "b", "c", "+", ";"];
const KEYWORDS: [&str; 2] = ["opt", "neg"];

fn card(rng: &mut StdRng) -> &'static str {
    ["", "", "", "?", "*", "+"].choose(rng).unwrap()
}

fn element(rng: &mut StdRng, names: &[String], depth: usize, label: &mut usize) -> String {
    match rng.gen_range(0..10) {
        0..=2 => format!("\"{}\"", TERMINALS.choose(rng).unwrap()),
        3 => format!("[\"{}\"]?", KEYWORDS.choose(rng).unwrap()),
        4 if depth == 0 => format!("({}){}", alternatives(rng, names, depth + 1, label), ["?", "*", "+"].choose(rng).unwrap()),
        5 => {
            *label += 1;
            format!("l{}:Name{}", label, card(rng))
        }
        _ => format!("{}{}", names.choose(rng).unwrap(), card(rng)),
    }
}

fn alternatives(rng: &mut StdRng, names: &[String], depth: usize, label: &mut usize) -> String {
    let n = rng.gen_range(1..=if depth == 0 { 3 } else { 2 });
    (0..n)
        .map(|_| {
            let len = rng.gen_range(if depth == 0 { 0 } else { 1 }..=4);
            let items: Vec<String> = (0..len).map(|_| element(rng, names, depth, label)).collect();
            items.join(" ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Source of a random grammar with at most `max` productions, some of them
/// interfaces.
pub fn random_grammar_source(rng: &mut StdRng, max: usize) -> String {
    let total = rng.gen_range(1..=max);
    let interfaces = rng.gen_range(0..=total.min(3) / 2);
    let standard = total - interfaces;
    let ifc: Vec<String> = (0..interfaces).map(|i| format!("I{i}")).collect();
    let std_names: Vec<String> = (0..standard).map(|i| format!("P{i}")).collect();
    let refs: Vec<String> = std_names.iter().chain(&ifc).cloned().collect();
    let mut out = String::from("grammar R {\n");
    for i in &ifc {
        out.push_str(&format!("  interface {i};\n"));
    }
    let mut label = 0;
    for p in &std_names {
        let implements = if !ifc.is_empty() && rng.gen_bool(0.5) {
            format!(" implements {}", ifc.choose(rng).unwrap())
        } else {
            String::new()
        };
        let body = alternatives(rng, &refs, 0, &mut label);
        out.push_str(&format!("  {p}{implements} = {body};\n"));
    }
    out.push('}');
    out
}

/// A context-free grammar in plain BNF, built directly from the grammar
/// model, with a fixpoint recognizer over token spans.
pub struct Bnf {
    pub names: Vec<String>,
    pub index: BTreeMap<String, usize>,
    pub rules: Vec<(usize, Vec<Sym>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sym {
    T(String),
    N(usize),
}

pub fn terminal_of(t: &Token) -> String {
    match t.kind {
        TokenKind::Name => "<Name>".into(),
        TokenKind::SchemaVar => "<SchemaVar>".into(),
        TokenKind::StringLit => "<StringLiteral>".into(),
        _ => t.text.clone(),
    }
}

impl Bnf {
    fn fresh(&mut self, hint: &str) -> usize {
        self.names.push(format!("{hint}#{}", self.names.len()));
        self.names.len() - 1
    }

    fn nt(&mut self, name: &str) -> Sym {
        match name {
            "Name" | "SchemaVar" | "StringLiteral" => Sym::T(format!("<{name}>")),
            _ => Sym::N(self.index[name]),
        }
    }

    fn with_card(&mut self, s: Sym, c: Cardinality) -> Sym {
        match c {
            Cardinality::One => s,
            Cardinality::Optional => {
                let n = self.fresh("opt");
                self.rules.push((n, vec![s]));
                self.rules.push((n, vec![]));
                Sym::N(n)
            }
            Cardinality::Star => {
                let n = self.fresh("star");
                self.rules.push((n, vec![]));
                self.rules.push((n, vec![s, Sym::N(n)]));
                Sym::N(n)
            }
            Cardinality::Plus => {
                let star = self.with_card(s.clone(), Cardinality::Star);
                let n = self.fresh("plus");
                self.rules.push((n, vec![s, star]));
                Sym::N(n)
            }
        }
    }

    fn seq(&mut self, r: &Rhs) -> Vec<Vec<Sym>> {
        match r {
            Rhs::Alt(alts) => alts.iter().flat_map(|a| self.seq(a)).collect(),
            Rhs::Seq(items) => vec![items.iter().map(|i| self.sym(i)).collect()],
            other => vec![vec![self.sym(other)]],
        }
    }

    fn sym(&mut self, r: &Rhs) -> Sym {
        match r {
            Rhs::Terminal(t) => Sym::T(t.clone()),
            Rhs::OptKeyword(k) => self.with_card(Sym::T(k.clone()), Cardinality::Optional),
            Rhs::NonTerm { target, card, .. } => {
                let s = self.nt(target);
                self.with_card(s, *card)
            }
            Rhs::Group(inner, card) => {
                let g = self.fresh("group");
                for alt in self.seq(inner) {
                    self.rules.push((g, alt));
                }
                self.with_card(Sym::N(g), *card)
            }
            Rhs::Seq(_) | Rhs::Alt(_) => {
                let g = self.fresh("nested");
                for alt in self.seq(r) {
                    self.rules.push((g, alt));
                }
                Sym::N(g)
            }
        }
    }

    /// Builds the BNF of a flattened grammar; an interface derives each
    /// production that lists it as supertype.
    pub fn new(g: &Grammar) -> Bnf {
        let names: Vec<String> = g.productions.iter().map(|p| p.name.clone()).collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut b = Bnf { names, index, rules: Vec::new() };
        for p in &g.productions {
            let me = b.index[&p.name];
            for s in &p.supertypes {
                let sup = b.index[s];
                b.rules.push((sup, vec![Sym::N(me)]));
            }
            if let Some(body) = &p.body {
                for alt in b.seq(body) {
                    b.rules.push((me, alt));
                }
            }
        }
        b
    }

    /// `table[a][i][j]`: nonterminal `a` derives `toks[i..j]`.
    pub fn table(&self, toks: &[String]) -> Vec<Vec<Vec<bool>>> {
        let n = toks.len();
        let mut t = vec![vec![vec![false; n + 1]; n + 1]; self.names.len()];
        loop {
            let mut changed = false;
            for (a, rhs) in &self.rules {
                for i in 0..=n {
                    let mut reach = vec![false; n + 1];
                    reach[i] = true;
                    for s in rhs {
                        let mut next = vec![false; n + 1];
                        for p in (0..=n).filter(|&p| reach[p]) {
                            match s {
                                Sym::T(x) => {
                                    if p < n && toks[p] == *x {
                                        next[p + 1] = true;
                                    }
                                }
                                Sym::N(b) => {
                                    for j in p..=n {
                                        if t[*b][p][j] {
                                            next[j] = true;
                                        }
                                    }
                                }
                            }
                        }
                        reach = next;
                    }
                    for j in 0..=n {
                        if reach[j] && !t[*a][i][j] {
                            t[*a][i][j] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return t;
            }
        }
    }

    pub fn recognizes(&self, start: &str, toks: &[String]) -> bool {
        self.table(toks)[self.index[start]][0][toks.len()]
    }

    /// A random sentence of `start`, or `None` when the expansion grows too
    /// deep.
    pub fn sample(&self, rng: &mut StdRng, start: &str) -> Option<Vec<String>> {
        let mut out = Vec::new();
        self.expand(rng, Sym::N(self.index[start]), 0, &mut out).then_some(out)
    }

    fn expand(&self, rng: &mut StdRng, s: Sym, depth: usize, out: &mut Vec<String>) -> bool {
        match s {
            Sym::T(t) => {
                out.push(t);
                out.len() < 12
            }
            Sym::N(a) => {
                if depth > 12 {
                    return false;
                }
                let alts: Vec<&Vec<Sym>> = self.rules.iter().filter(|(x, _)| *x == a).map(|(_, r)| r).collect();
                let Some(rhs) = alts.choose(rng) else { return false };
                rhs.iter().all(|x| self.expand(rng, x.clone(), depth + 1, out))
            }
        }
    }
}

/// Concrete text for a terminal sequence.
pub fn render_terminals(toks: &[String]) -> String {
    toks.iter()
        .map(|t| match t.as_str() {
            "<Name>" => "x1".to_string(),
            "<SchemaVar>" => "$v".to_string(),
            "<StringLiteral>" => "\"s\"".to_string(),
            other => other.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Text of a random class diagram with at most `max_nodes` syntax-tree
/// nodes. Small name pools make shared names and equal attributes likely.
pub fn random_cd_model(rng: &mut StdRng, max_nodes: usize) -> String {
    const CLASSES: [&str; 5] = ["A", "B", "C", "D", "E"];
    const NAMES: [&str; 4] = ["x", "y", "id", "address"];
    const TYPES: [&str; 3] = ["String", "int", "void"];
    const VIS: [&str; 4] = ["", "public ", "private ", "public private "];
    let mut nodes = 1;
    let mut out = String::from("classdiagram M {\n");
    let n_classes = rng.gen_range(1..=5);
    for c in 0..n_classes {
        if nodes >= max_nodes {
            break;
        }
        nodes += 1;
        let abs = if rng.gen_bool(0.3) { "abstract " } else { "" };
        let ext = if c > 0 && rng.gen_bool(0.6) { format!(" extends {}", CLASSES[rng.gen_range(0..c)]) } else { String::new() };
        out.push_str(&format!("  {abs}class {}{ext}", CLASSES[c]));
        let members = rng.gen_range(0..=4);
        if members == 0 && rng.gen_bool(0.5) {
            out.push_str(";\n");
            continue;
        }
        out.push_str(" {\n");
        for _ in 0..members {
            let params = rng.gen_range(0..=2);
            let is_method = rng.gen_bool(0.3);
            let cost = 1 + if is_method { params } else { 0 };
            if nodes + cost > max_nodes {
                break;
            }
            nodes += cost;
            let vis = VIS.choose(rng).unwrap();
            let ty = TYPES.choose(rng).unwrap();
            let name = NAMES.choose(rng).unwrap();
            if is_method {
                let ps: Vec<String> =
                    (0..params).map(|i| format!("{} p{i}", TYPES.choose(rng).unwrap())).collect();
                out.push_str(&format!("    {vis}{ty} {name}({});\n", ps.join(", ")));
            } else {
                out.push_str(&format!("    {vis}{ty} {name};\n"));
            }
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// Shuffles, in place, the element children of every named slot, keeping
/// separators and node ids.
pub fn shuffle_lists(n: &mut Node, rng: &mut StdRng) {
    let mut by_slot: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, c) in n.children.iter().enumerate() {
        if let (Slot::Named(s), ChildItem::Node(_)) = (&c.slot, &c.item) {
            by_slot.entry(s.clone()).or_default().push(i);
        }
    }
    for positions in by_slot.values() {
        let mut items: Vec<_> = positions.iter().map(|&i| n.children[i].clone()).collect();
        items.shuffle(rng);
        for (&i, c) in positions.iter().zip(items) {
            n.children[i] = c;
        }
    }
    for c in n.child_nodes_mut() {
        shuffle_lists(c, rng);
    }
}
