//! Chart parser over a BNF lowering of the EBNF grammar.
//!
//! Groups, repetitions and optional keywords become helper nonterminals whose
//! children are spliced into the enclosing production node; interface
//! nonterminals become unit rules to every implementing production.

use std::collections::{HashMap, HashSet};

use super::tree::{Child, ChildItem, Node, NodeId, Slot, Span, Token, TokenKind};
use super::ParseError;
use crate::grammar::{is_builtin, slot_name, Cardinality, Grammar, GrammarFacts, Rhs};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum TermMatch {
    Literal(String),
    Class(TokenKind),
}

impl TermMatch {
    fn matches(&self, tok: &Token) -> bool {
        match self {
            TermMatch::Literal(t) => {
                matches!(tok.kind, TokenKind::Keyword | TokenKind::Symbol) && tok.text == *t
            }
            TermMatch::Class(k) => tok.kind == *k,
        }
    }

    fn describe(&self) -> String {
        match self {
            TermMatch::Literal(t) => format!("`{t}`"),
            TermMatch::Class(TokenKind::Name) => "name".into(),
            TermMatch::Class(TokenKind::SchemaVar) => "schema variable".into(),
            TermMatch::Class(TokenKind::StringLit) => "string literal".into(),
            TermMatch::Class(k) => format!("{k:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Sym {
    T(TermMatch),
    N(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Rule {
    lhs: usize,
    syms: Vec<Sym>,
    /// Slot assigned to whatever the symbol produces; `None` for helper
    /// occurrences, whose children carry their own slots.
    slots: Vec<Option<Slot>>,
    /// Top-level alternative index for production rules.
    alt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NtKind {
    Production,
    Interface,
    Helper,
}

#[derive(Debug, Clone)]
struct NtInfo {
    name: String,
    kind: NtKind,
    keywords: Vec<String>,
}

#[derive(Debug, Clone)]
pub(crate) struct Bnf {
    nts: Vec<NtInfo>,
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<usize>>,
    nullable: Vec<bool>,
    index: HashMap<String, usize>,
}

impl Bnf {
    pub(crate) fn compile(g: &Grammar, facts: &GrammarFacts) -> Result<Bnf, ParseError> {
        let mut b = Bnf { nts: Vec::new(), rules: Vec::new(), by_lhs: Vec::new(), nullable: Vec::new(), index: HashMap::new() };
        for p in &g.productions {
            let kind = if p.is_interface() { NtKind::Interface } else { NtKind::Production };
            let keywords = p.body.as_ref().map(|b| b.optional_keywords().iter().map(|s| s.to_string()).collect()).unwrap_or_default();
            let id = b.new_nt(&p.name, kind);
            b.nts[id].keywords = keywords;
            b.index.insert(p.name.clone(), id);
        }
        for p in &g.productions {
            let id = b.index[&p.name];
            match &p.body {
                Some(body) => {
                    for (alt, rhs) in body.alternatives().into_iter().enumerate() {
                        let (syms, slots) = b.compile_seq(&p.name, rhs)?;
                        b.add_rule(id, syms, slots, alt);
                    }
                }
                None => {
                    for imp in g.standard_productions() {
                        if facts.conforms(&imp.name, &p.name) && imp.name != p.name {
                            let target = b.index[&imp.name];
                            b.add_rule(id, vec![Sym::N(target)], vec![None], 0);
                        }
                    }
                }
            }
        }
        b.compute_nullable();
        Ok(b)
    }

    fn new_nt(&mut self, name: &str, kind: NtKind) -> usize {
        self.nts.push(NtInfo { name: name.to_string(), kind, keywords: Vec::new() });
        self.by_lhs.push(Vec::new());
        self.nts.len() - 1
    }

    fn add_rule(&mut self, lhs: usize, syms: Vec<Sym>, slots: Vec<Option<Slot>>, alt: usize) {
        self.by_lhs[lhs].push(self.rules.len());
        self.rules.push(Rule { lhs, syms, slots, alt });
    }

    fn helper(&mut self, owner: &str) -> usize {
        let name = format!("{owner}#{}", self.nts.len());
        self.new_nt(&name, NtKind::Helper)
    }

    fn compile_seq(&mut self, owner: &str, rhs: &Rhs) -> Result<(Vec<Sym>, Vec<Option<Slot>>), ParseError> {
        let items: &[Rhs] = match rhs {
            Rhs::Seq(items) => items,
            other => std::slice::from_ref(other),
        };
        let mut syms = Vec::new();
        let mut slots = Vec::new();
        for item in items {
            let (s, slot) = self.compile_element(owner, item)?;
            syms.push(s);
            slots.push(slot);
        }
        Ok((syms, slots))
    }

    fn compile_element(&mut self, owner: &str, rhs: &Rhs) -> Result<(Sym, Option<Slot>), ParseError> {
        match rhs {
            Rhs::Terminal(t) => Ok((Sym::T(TermMatch::Literal(t.clone())), Some(Slot::Plain))),
            Rhs::OptKeyword(k) => {
                let h = self.helper(owner);
                self.add_rule(h, vec![Sym::T(TermMatch::Literal(k.clone()))], vec![Some(Slot::Keyword(k.clone()))], 0);
                self.add_rule(h, vec![], vec![], 1);
                Ok((Sym::N(h), None))
            }
            Rhs::NonTerm { target, label, card } => {
                let base = if is_builtin(target) {
                    let kind = match target.as_str() {
                        "Name" => TokenKind::Name,
                        "SchemaVar" => TokenKind::SchemaVar,
                        _ => TokenKind::StringLit,
                    };
                    Sym::T(TermMatch::Class(kind))
                } else {
                    match self.index.get(target) {
                        Some(&id) => Sym::N(id),
                        None => {
                            return Err(ParseError::Grammar(crate::grammar::GrammarError::UnresolvedReference {
                                production: owner.to_string(),
                                target: target.clone(),
                            }))
                        }
                    }
                };
                let slot = Some(Slot::Named(slot_name(target, label.as_deref()).to_string()));
                Ok(self.wrap(owner, base, slot, *card))
            }
            Rhs::Group(inner, card) => {
                let g = self.helper(owner);
                for (alt, a) in inner.alternatives().into_iter().enumerate() {
                    let (syms, slots) = self.compile_seq(owner, a)?;
                    self.add_rule(g, syms, slots, alt);
                }
                Ok(self.wrap(owner, Sym::N(g), None, *card))
            }
            Rhs::Seq(_) | Rhs::Alt(_) => {
                let g = self.helper(owner);
                for (alt, a) in rhs.alternatives().into_iter().enumerate() {
                    let (syms, slots) = self.compile_seq(owner, a)?;
                    self.add_rule(g, syms, slots, alt);
                }
                Ok((Sym::N(g), None))
            }
        }
    }

    /// Applies a cardinality; preferred (greedy) alternatives come first.
    fn wrap(&mut self, owner: &str, base: Sym, slot: Option<Slot>, card: Cardinality) -> (Sym, Option<Slot>) {
        match card {
            Cardinality::One => (base, slot),
            Cardinality::Optional => {
                let h = self.helper(owner);
                self.add_rule(h, vec![base], vec![slot], 0);
                self.add_rule(h, vec![], vec![], 1);
                (Sym::N(h), None)
            }
            Cardinality::Star => {
                let h = self.helper(owner);
                self.add_rule(h, vec![base, Sym::N(h)], vec![slot, None], 0);
                self.add_rule(h, vec![], vec![], 1);
                (Sym::N(h), None)
            }
            Cardinality::Plus => {
                let star = self.helper(owner);
                self.add_rule(star, vec![base.clone(), Sym::N(star)], vec![slot.clone(), None], 0);
                self.add_rule(star, vec![], vec![], 1);
                let h = self.helper(owner);
                self.add_rule(h, vec![base, Sym::N(star)], vec![slot, None], 0);
                (Sym::N(h), None)
            }
        }
    }

    fn compute_nullable(&mut self) {
        self.nullable = vec![false; self.nts.len()];
        loop {
            let mut changed = false;
            for r in &self.rules {
                if !self.nullable[r.lhs]
                    && r.syms.iter().all(|s| matches!(s, Sym::N(n) if self.nullable[*n]))
                {
                    self.nullable[r.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub(crate) fn nt(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

type Item = (usize, usize, usize); // rule, dot, origin

pub(crate) struct Chart<'a> {
    bnf: &'a Bnf,
    text: &'a str,
    tokens: &'a [Token],
    sets: Vec<Vec<Item>>,
    members: Vec<HashSet<Item>>,
    /// Items per set waiting on a nonterminal.
    waiting: Vec<HashMap<usize, Vec<Item>>>,
    done: HashSet<(usize, usize, usize)>,
}

impl<'a> Chart<'a> {
    pub(crate) fn run(bnf: &'a Bnf, text: &'a str, tokens: &'a [Token], start: usize) -> Chart<'a> {
        let n = tokens.len();
        let mut c = Chart {
            bnf,
            text,
            tokens,
            sets: vec![Vec::new(); n + 1],
            members: vec![HashSet::new(); n + 1],
            waiting: vec![HashMap::new(); n + 1],
            done: HashSet::new(),
        };
        for &r in &bnf.by_lhs[start] {
            c.add(0, (r, 0, 0));
        }
        for k in 0..=n {
            let mut idx = 0;
            while idx < c.sets[k].len() {
                let (r, dot, origin) = c.sets[k][idx];
                idx += 1;
                let rule = &bnf.rules[r];
                if dot < rule.syms.len() {
                    match &rule.syms[dot] {
                        Sym::N(b) => {
                            for &r2 in &bnf.by_lhs[*b] {
                                c.add(k, (r2, 0, k));
                            }
                            if bnf.nullable[*b] {
                                c.add(k, (r, dot + 1, origin));
                            }
                        }
                        Sym::T(m) => {
                            if tokens.get(k).is_some_and(|t| m.matches(t)) {
                                c.add(k + 1, (r, dot + 1, origin));
                            }
                        }
                    }
                } else {
                    c.done.insert((rule.lhs, origin, k));
                    let parents = c.waiting[origin].get(&rule.lhs).cloned().unwrap_or_default();
                    for (pr, pd, po) in parents {
                        c.add(k, (pr, pd + 1, po));
                    }
                }
            }
        }
        c
    }

    fn add(&mut self, k: usize, item: Item) {
        if self.members[k].insert(item) {
            self.sets[k].push(item);
            let rule = &self.bnf.rules[item.0];
            if let Some(Sym::N(b)) = rule.syms.get(item.1) {
                self.waiting[k].entry(*b).or_default().push(item);
            }
        }
    }

    pub(crate) fn accepted(&self, start: usize) -> bool {
        self.done.contains(&(start, 0, self.tokens.len()))
    }

    /// Index of the last token set that holds any item.
    pub(crate) fn furthest(&self) -> usize {
        (0..self.sets.len()).rev().find(|&k| !self.sets[k].is_empty()).unwrap_or(0)
    }

    pub(crate) fn expected_at(&self, k: usize) -> Vec<String> {
        let mut out: Vec<String> = self.sets[k]
            .iter()
            .filter_map(|&(r, dot, _)| match self.bnf.rules[r].syms.get(dot) {
                Some(Sym::T(m)) => Some(m.describe()),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn derives(&self, sym: &Sym, b: usize, e: usize) -> bool {
        match sym {
            Sym::T(m) => e == b + 1 && b < self.tokens.len() && m.matches(&self.tokens[b]),
            Sym::N(n) => self.done.contains(&(*n, b, e)),
        }
    }

    /// Enumerates rule splits over `[i, j]` right to left; the last symbol is
    /// tried shortest first, so earlier symbols (and repetitions) are greedy.
    /// Returns `true` if `visit` asked to stop.
    fn for_each_split(&self, r: usize, i: usize, j: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let len = self.bnf.rules[r].syms.len();
        let mut bounds = vec![0usize; len + 1];
        bounds[len] = j;
        self.place(r, len, i, j, &mut bounds, visit)
    }

    fn place(&self, r: usize, k: usize, i: usize, end: usize, bounds: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if k == 0 {
            if end == i {
                bounds[0] = i;
                return visit(bounds);
            }
            return false;
        }
        let sym = &self.bnf.rules[r].syms[k - 1];
        for b in (i..=end).rev() {
            let prefix_ok = if k == 1 { b == i } else { self.members[b].contains(&(r, k - 1, i)) };
            if prefix_ok && self.derives(sym, b, end) {
                bounds[k - 1] = b;
                if self.place(r, k - 1, i, b, bounds, visit) {
                    return true;
                }
            }
        }
        false
    }

    pub(crate) fn build(&self, start: usize) -> Result<Vec<Child>, ParseError> {
        let mut path = HashSet::new();
        self.extract(start, 0, self.tokens.len(), &mut path).map_err(|f| match f {
            Fail::Ambiguous(e) => e,
            Fail::Cycle => ParseError::NoParse { line: 1, col: 1, found: "<cyclic derivation>".into(), expected: vec![] },
        })
    }

    fn extract(&self, nt: usize, i: usize, j: usize, path: &mut HashSet<(usize, usize, usize)>) -> Result<Vec<Child>, Fail> {
        if !path.insert((nt, i, j)) {
            return Err(Fail::Cycle);
        }
        let mut result = Err(Fail::Cycle);
        for &r in &self.bnf.by_lhs[nt] {
            if !self.members[j].contains(&(r, self.bnf.rules[r].syms.len(), i)) {
                continue;
            }
            match self.extract_rule(r, i, j, path) {
                Ok(kids) => {
                    result = Ok(kids);
                    break;
                }
                Err(Fail::Cycle) => continue,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        path.remove(&(nt, i, j));
        result
    }

    fn extract_rule(&self, r: usize, i: usize, j: usize, path: &mut HashSet<(usize, usize, usize)>) -> Result<Vec<Child>, Fail> {
        let rule = &self.bnf.rules[r];
        let info = &self.bnf.nts[rule.lhs];
        if info.kind == NtKind::Production {
            let mut count = 0;
            self.for_each_split(r, i, j, &mut |_| {
                count += 1;
                count >= 2
            });
            if count >= 2 {
                let (line, col) = self.position(i);
                return Err(Fail::Ambiguous(ParseError::Ambiguous { line, col, production: info.name.clone() }));
            }
        }
        let mut outcome: Result<Vec<Child>, Fail> = Err(Fail::Cycle);
        self.for_each_split(r, i, j, &mut |bounds| {
            match self.build_split(r, bounds, path) {
                Ok(kids) => {
                    outcome = Ok(kids);
                    true
                }
                Err(Fail::Cycle) => false,
                Err(e) => {
                    outcome = Err(e);
                    true
                }
            }
        });
        let kids = outcome?;
        if info.kind != NtKind::Production {
            return Ok(kids);
        }
        let mut keyword_flags: std::collections::BTreeMap<String, bool> =
            info.keywords.iter().map(|k| (k.clone(), false)).collect();
        for c in &kids {
            if let Slot::Keyword(k) = &c.slot {
                keyword_flags.insert(k.clone(), true);
            }
        }
        let node = Node {
            id: NodeId(0),
            ty: info.name.clone(),
            alt: rule.alt,
            children: kids,
            keyword_flags,
            span: self.span(i, j),
        };
        Ok(vec![Child { slot: Slot::Plain, item: ChildItem::Node(node) }])
    }

    fn build_split(&self, r: usize, bounds: &[usize], path: &mut HashSet<(usize, usize, usize)>) -> Result<Vec<Child>, Fail> {
        let rule = &self.bnf.rules[r];
        let mut kids = Vec::new();
        for (k, sym) in rule.syms.iter().enumerate() {
            let (b, e) = (bounds[k], bounds[k + 1]);
            let mut produced = match sym {
                Sym::T(_) => vec![Child { slot: Slot::Plain, item: ChildItem::Token(self.tokens[b].clone()) }],
                Sym::N(n) => self.extract(*n, b, e, path)?,
            };
            if let Some(slot) = &rule.slots[k] {
                for c in &mut produced {
                    c.slot = slot.clone();
                }
            }
            kids.extend(produced);
        }
        Ok(kids)
    }

    fn span(&self, i: usize, j: usize) -> Span {
        if i < j {
            Span::new(self.tokens[i].span.start, self.tokens[j - 1].span.end)
        } else {
            let at = self.tokens.get(i).map(|t| t.span.start).or_else(|| self.tokens.last().map(|t| t.span.end)).unwrap_or(0);
            Span::new(at, at)
        }
    }

    fn position(&self, i: usize) -> (usize, usize) {
        let offset = self.tokens.get(i).map(|t| t.span.start).unwrap_or(self.text.len());
        super::lexer::line_col(self.text, offset)
    }
}

enum Fail {
    Cycle,
    Ambiguous(ParseError),
}
