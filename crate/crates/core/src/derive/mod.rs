//! Derivation of a transformation language grammar from a modeling language
//! grammar.
//!
//! For a flattened grammar `L` the derived grammar `LTrans` contains, in
//! this order: `TFRule`; one interface per interface, standard production
//! and optional keyword of `L`; the `_Rep`, `_Neg` and `_Pattern` productions
//! of every production of `L`; those of every optional keyword; and finally
//! the embedded TFCommons productions.

mod keywords;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::grammar::{
    analyze, flatten_inheritance, parse_grammar, Cardinality, Grammar, GrammarError, GrammarFacts,
    GrammarRegistry, Production, Rhs,
};

pub use keywords::{keyword_names, KeywordName};

/// Source of the language-independent part of every derived grammar.
pub const TFCOMMONS_SOURCE: &str = include_str!("../../corpus/tfcommons.mc-grammar");

pub const TFRULE: &str = "TFRule";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeriveError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("keyword `{keyword}` cannot be named: `{name}` clashes even with the `Keyword` suffix")]
    KeywordClash { keyword: String, name: String },
    #[error("`{0}` is reserved in derived grammars")]
    ReservedName(String),
    #[error("empty TFRule alternative: every nonterminal of the grammar is nullable")]
    EmptyTfRule,
}

/// Which derivation rule produced a production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum RuleId {
    R1a,
    R1b,
    R1c,
    R2a,
    R2b,
    R3a,
    R3b,
    R4a,
    R4b,
    R4c,
    R5,
    TfCommons,
}

impl RuleId {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::R1a => "1a",
            RuleId::R1b => "1b",
            RuleId::R1c => "1c",
            RuleId::R2a => "2a",
            RuleId::R2b => "2b",
            RuleId::R3a => "3a",
            RuleId::R3b => "3b",
            RuleId::R4a => "4a",
            RuleId::R4b => "4b",
            RuleId::R4c => "4c",
            RuleId::R5 => "5",
            RuleId::TfCommons => "tfcommons",
        }
    }

    pub fn parse(s: &str) -> Option<RuleId> {
        ALL_RULES.iter().copied().find(|r| r.as_str() == s)
    }
}

const ALL_RULES: [RuleId; 12] = [
    RuleId::R1a,
    RuleId::R1b,
    RuleId::R1c,
    RuleId::R2a,
    RuleId::R2b,
    RuleId::R3a,
    RuleId::R3b,
    RuleId::R4a,
    RuleId::R4b,
    RuleId::R4c,
    RuleId::R5,
    RuleId::TfCommons,
];

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub rule: RuleId,
    /// Symbol of `L` (production name or keyword text); for TFCommons
    /// productions, their name in TFCommons.
    pub source: String,
}

/// A derived grammar plus bookkeeping needed to interpret rules written in
/// it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DerivedGrammar {
    pub grammar: Grammar,
    /// Production name → provenance, in production order.
    pub provenance: Vec<(String, Provenance)>,
    pub keywords: Vec<KeywordName>,
    /// TFCommons name → name used in the derived grammar.
    pub tf_names: BTreeMap<String, String>,
    /// The flattened modeling language grammar.
    pub source_grammar: Grammar,
}

impl DerivedGrammar {
    pub fn provenance_of(&self, name: &str) -> Option<&Provenance> {
        self.provenance.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    /// Name of a TFCommons production in this grammar.
    pub fn tf<'a>(&'a self, name: &'a str) -> &'a str {
        self.tf_names.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Keyword text for a derived keyword interface name.
    pub fn keyword_for(&self, derived: &str) -> Option<&str> {
        self.keywords.iter().find(|k| k.derived_name == derived).map(|k| k.keyword_text.as_str())
    }

    /// The sidecar provenance file: `name<TAB>rule<TAB>source` per line.
    pub fn provenance_tsv(&self) -> String {
        self.provenance.iter().map(|(n, p)| format!("{n}\t{}\t{}\n", p.rule, p.source)).collect()
    }

    /// Productions not copied from TFCommons.
    pub fn derived_count(&self) -> usize {
        self.provenance.iter().filter(|(_, p)| p.rule != RuleId::TfCommons).count()
    }
}

/// Shared state of one derivation.
struct Ctx<'g> {
    g: &'g Grammar,
    facts: &'g GrammarFacts,
    keywords: Vec<KeywordName>,
    tf: Grammar,
    tf_names: BTreeMap<String, String>,
}

impl<'g> Ctx<'g> {
    fn new(g: &'g Grammar, facts: &'g GrammarFacts) -> Result<Ctx<'g>, DeriveError> {
        if g.production(TFRULE).is_some() {
            return Err(DeriveError::ReservedName(TFRULE.into()));
        }
        let keywords = keyword_names(g, facts)?;
        let (tf, tf_names) = embedded_tfcommons(g, &keywords)?;
        Ok(Ctx { g, facts, keywords, tf, tf_names })
    }

    fn kw<'a>(&'a self, text: &'a str) -> &'a str {
        self.keywords.iter().find(|k| k.keyword_text == text).map(|k| k.derived_name.as_str()).unwrap_or(text)
    }

    fn tf<'a>(&'a self, name: &'a str) -> &'a str {
        self.tf_names.get(name).map(String::as_str).unwrap_or(name)
    }
}

/// TFCommons with its productions renamed (prefix `Tf`) wherever they would
/// collide with a name taken by the modeling language.
fn embedded_tfcommons(g: &Grammar, keywords: &[KeywordName]) -> Result<(Grammar, BTreeMap<String, String>), DeriveError> {
    let tf = parse_grammar(TFCOMMONS_SOURCE)?;
    let mut taken: BTreeSet<String> = g.productions.iter().map(|p| p.name.clone()).collect();
    for k in keywords {
        taken.insert(k.derived_name.clone());
    }
    for p in &g.productions {
        for suffix in ["_Rep", "_Neg", "_Pattern"] {
            taken.insert(format!("{}{suffix}", p.name));
        }
    }
    taken.insert(TFRULE.to_string());
    let mut names = BTreeMap::new();
    let originals: BTreeSet<&str> = tf.productions.iter().map(|p| p.name.as_str()).collect();
    for p in &tf.productions {
        let mut n = p.name.clone();
        while taken.contains(&n) || (n != p.name && originals.contains(n.as_str())) {
            n = format!("Tf{n}");
        }
        taken.insert(n.clone());
        names.insert(p.name.clone(), n);
    }
    let renamed = Grammar {
        name: tf.name.clone(),
        extends: Vec::new(),
        productions: tf
            .productions
            .iter()
            .map(|p| Production {
                name: names[&p.name].clone(),
                kind: p.kind,
                supertypes: p.supertypes.iter().map(|s| names.get(s).cloned().unwrap_or_else(|| s.clone())).collect(),
                body: p.body.as_ref().map(|b| rename_refs(b, &names)),
            })
            .collect(),
    };
    Ok((renamed, names))
}

fn rename_refs(rhs: &Rhs, names: &BTreeMap<String, String>) -> Rhs {
    match rhs {
        Rhs::Seq(items) => Rhs::Seq(items.iter().map(|i| rename_refs(i, names)).collect()),
        Rhs::Alt(items) => Rhs::Alt(items.iter().map(|i| rename_refs(i, names)).collect()),
        Rhs::Group(inner, card) => Rhs::Group(Box::new(rename_refs(inner, names)), *card),
        Rhs::NonTerm { target, label, card } => Rhs::NonTerm {
            target: names.get(target).cloned().unwrap_or_else(|| target.clone()),
            label: label.clone(),
            card: *card,
        },
        other => other.clone(),
    }
}

type Tagged = (Production, Provenance);

fn tag(p: Production, rule: RuleId, source: &str) -> Tagged {
    (p, Provenance { rule, source: source.to_string() })
}

fn interface_layer(cx: &Ctx) -> Vec<Tagged> {
    let mut out = Vec::new();
    for p in cx.g.interface_productions() {
        let ext: Vec<&str> = p.supertypes.iter().map(String::as_str).collect();
        out.push(tag(Production::interface(&p.name, &ext), RuleId::R1a, &p.name));
    }
    for p in cx.g.standard_productions() {
        let ext: Vec<&str> = p.supertypes.iter().map(String::as_str).collect();
        out.push(tag(Production::interface(&p.name, &ext), RuleId::R1b, &p.name));
    }
    for k in &cx.keywords {
        out.push(tag(Production::interface(&k.derived_name, &[]), RuleId::R1c, &k.keyword_text));
    }
    out
}

fn rep(name: &str) -> Production {
    Production::standard(
        &format!("{name}_Rep"),
        &[name],
        Rhs::Seq(vec![
            Rhs::terminal("[["),
            Rhs::nonterm_with(name, Some("lhs"), Cardinality::Optional),
            Rhs::terminal(":-"),
            Rhs::nonterm_with(name, Some("rhs"), Cardinality::Optional),
            Rhs::terminal("]]"),
        ]),
    )
}

fn keyword_rep(k: &str) -> Production {
    Production::standard(
        &format!("{k}_Rep"),
        &[k],
        Rhs::from_alternatives(vec![
            vec![Rhs::terminal("[["), Rhs::nonterm_with(k, Some("lhs"), Cardinality::One), Rhs::terminal(":-"), Rhs::terminal("]]")],
            vec![Rhs::terminal("[["), Rhs::terminal(":-"), Rhs::nonterm_with(k, Some("rhs"), Cardinality::One), Rhs::terminal("]]")],
        ]),
    )
}

fn neg(name: &str) -> Production {
    Production::standard(
        &format!("{name}_Neg"),
        &[name],
        Rhs::Seq(vec![Rhs::terminal("not"), Rhs::terminal("[["), Rhs::nonterm(name), Rhs::terminal("]]")]),
    )
}

/// The body of a production with optional keywords replaced by their
/// interfaces and names by `TfIdentifier`.
fn syntax_of(cx: &Ctx, rhs: &Rhs) -> Rhs {
    match rhs {
        Rhs::Seq(items) => Rhs::Seq(items.iter().map(|i| syntax_of(cx, i)).collect()),
        Rhs::Alt(items) => Rhs::Alt(items.iter().map(|i| syntax_of(cx, i)).collect()),
        Rhs::Group(inner, card) => Rhs::Group(Box::new(syntax_of(cx, inner)), *card),
        Rhs::OptKeyword(k) => Rhs::nonterm_with(cx.kw(k), None, Cardinality::Optional),
        Rhs::NonTerm { target, label, card } if target == "Name" => Rhs::NonTerm {
            target: cx.tf("TfIdentifier").to_string(),
            label: label.clone(),
            card: *card,
        },
        other => other.clone(),
    }
}

fn seq_items(rhs: Rhs) -> Vec<Rhs> {
    match rhs {
        Rhs::Seq(items) => items,
        alt @ Rhs::Alt(_) => vec![Rhs::Group(Box::new(alt), Cardinality::One)],
        other => vec![other],
    }
}

fn standard_pattern(cx: &Ctx, p: &Production) -> Production {
    let syntax = syntax_of(cx, p.body.as_ref().expect("standard production has a body"));
    let mut alts: Vec<Vec<Rhs>> = match &syntax {
        Rhs::Alt(a) => a.iter().cloned().map(seq_items).collect(),
        other => vec![seq_items(other.clone())],
    };
    alts.push(vec![Rhs::terminal(&p.name), Rhs::nonterm("SchemaVar"), Rhs::terminal(";")]);
    let mut white = vec![Rhs::terminal(&p.name), Rhs::nonterm("SchemaVar"), Rhs::terminal("[[")];
    white.extend(seq_items(syntax));
    white.push(Rhs::terminal("]]"));
    alts.push(white);
    Production::standard(&format!("{}_Pattern", p.name), &[&p.name], Rhs::from_alternatives(alts))
}

fn interface_pattern(name: &str) -> Production {
    Production::standard(
        &format!("{name}_Pattern"),
        &[name],
        Rhs::Seq(vec![Rhs::terminal(name), Rhs::nonterm("SchemaVar"), Rhs::terminal(";")]),
    )
}

fn keyword_pattern(k: &KeywordName) -> Production {
    Production::standard(&format!("{}_Pattern", k.derived_name), &[&k.derived_name], Rhs::Seq(vec![Rhs::terminal(&k.keyword_text)]))
}

fn tfrule(cx: &Ctx) -> Result<Production, DeriveError> {
    let alts: Vec<Vec<Rhs>> = cx
        .g
        .productions
        .iter()
        .filter(|p| !cx.facts.is_nullable(&p.name))
        .map(|p| vec![Rhs::nonterm(&p.name)])
        .collect();
    if alts.is_empty() {
        return Err(DeriveError::EmptyTfRule);
    }
    Ok(Production::standard(
        TFRULE,
        &[],
        Rhs::Seq(vec![
            Rhs::Group(Box::new(Rhs::from_alternatives(alts)), Cardinality::Star),
            Rhs::nonterm_with(cx.tf("Where"), None, Cardinality::Optional),
        ]),
    ))
}

/// Rules 1a to 1c: one interface per interface, standard production and
/// optional keyword.
pub fn derive_interface_layer(g: &Grammar, facts: &GrammarFacts) -> Result<Vec<Production>, DeriveError> {
    Ok(interface_layer(&Ctx::new(g, facts)?).into_iter().map(|(p, _)| p).collect())
}

/// Rules 2a/2b.
pub fn derive_replacements(g: &Grammar, facts: &GrammarFacts) -> Result<Vec<Production>, DeriveError> {
    let cx = Ctx::new(g, facts)?;
    let mut out: Vec<Production> = g.productions.iter().map(|p| rep(&p.name)).collect();
    out.extend(cx.keywords.iter().map(|k| keyword_rep(&k.derived_name)));
    Ok(out)
}

/// Rules 3a/3b.
pub fn derive_negations(g: &Grammar, facts: &GrammarFacts) -> Result<Vec<Production>, DeriveError> {
    let cx = Ctx::new(g, facts)?;
    let mut out: Vec<Production> = g.productions.iter().map(|p| neg(&p.name)).collect();
    out.extend(cx.keywords.iter().map(|k| neg(&k.derived_name)));
    Ok(out)
}

/// Rules 4a to 4c.
pub fn derive_patterns(g: &Grammar, facts: &GrammarFacts) -> Result<Vec<Production>, DeriveError> {
    let cx = Ctx::new(g, facts)?;
    let mut out: Vec<Production> = g
        .productions
        .iter()
        .map(|p| if p.is_interface() { interface_pattern(&p.name) } else { standard_pattern(&cx, p) })
        .collect();
    out.extend(cx.keywords.iter().map(keyword_pattern));
    Ok(out)
}

/// Rule 5.
pub fn derive_tfrule(g: &Grammar, facts: &GrammarFacts) -> Result<Production, DeriveError> {
    tfrule(&Ctx::new(g, facts)?)
}

/// Flattens `g` (supergrammars from `registry`) and derives its
/// transformation language.
pub fn derive_dstl_with(g: &Grammar, registry: &GrammarRegistry) -> Result<DerivedGrammar, DeriveError> {
    let flat = flatten_inheritance(g, registry)?;
    flat.validate()?;
    let facts = analyze(&flat);
    let cx = Ctx::new(&flat, &facts)?;

    let mut tagged = vec![tag(tfrule(&cx)?, RuleId::R5, TFRULE)];
    tagged.extend(interface_layer(&cx));
    for p in &flat.productions {
        tagged.push(tag(rep(&p.name), RuleId::R2a, &p.name));
        tagged.push(tag(neg(&p.name), RuleId::R3a, &p.name));
        let pat = if p.is_interface() {
            tag(interface_pattern(&p.name), RuleId::R4b, &p.name)
        } else {
            tag(standard_pattern(&cx, p), RuleId::R4a, &p.name)
        };
        tagged.push(pat);
    }
    for k in &cx.keywords {
        tagged.push(tag(keyword_rep(&k.derived_name), RuleId::R2b, &k.keyword_text));
        tagged.push(tag(neg(&k.derived_name), RuleId::R3b, &k.keyword_text));
        tagged.push(tag(keyword_pattern(k), RuleId::R4c, &k.keyword_text));
    }
    let originals: BTreeMap<&String, &String> = cx.tf_names.iter().map(|(o, n)| (n, o)).collect();
    for p in &cx.tf.productions {
        let source = originals.get(&p.name).map(|s| s.as_str()).unwrap_or(&p.name);
        tagged.push(tag(p.clone(), RuleId::TfCommons, source));
    }

    let grammar = Grammar {
        name: format!("{}Trans", flat.name),
        extends: Vec::new(),
        productions: tagged.iter().map(|(p, _)| p.clone()).collect(),
    };
    grammar.validate()?;
    Ok(DerivedGrammar {
        provenance: tagged.into_iter().map(|(p, prov)| (p.name, prov)).collect(),
        grammar,
        keywords: cx.keywords.clone(),
        tf_names: cx.tf_names.clone(),
        source_grammar: flat.clone(),
    })
}

/// Derives the transformation language of a grammar that extends at most
/// the implicit `Common`.
pub fn derive_dstl(g: &Grammar) -> Result<DerivedGrammar, DeriveError> {
    derive_dstl_with(g, &GrammarRegistry::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cd() -> Grammar {
        parse_grammar(include_str!("../../corpus/cd.mc-grammar")).unwrap()
    }

    fn body_of(g: &Grammar, name: &str) -> String {
        g.production(name).unwrap().to_string()
    }

    #[test]
    fn interface_layer_mirrors_relations() {
        let g = cd();
        let facts = analyze(&g);
        let layer = derive_interface_layer(&g, &facts).unwrap();
        let texts: Vec<String> = layer.iter().map(|p| p.to_string()).collect();
        assert!(texts.contains(&"interface Class extends CDElement;".to_string()));
        assert!(texts.contains(&"interface Abstract;".to_string()));
        assert!(texts.contains(&"interface CDElement;".to_string()));
        let one = parse_grammar(r#"grammar G { A = "a"; }"#).unwrap();
        let layer = derive_interface_layer(&one, &analyze(&one)).unwrap();
        assert_eq!(layer, vec![Production::interface("A", &[])]);
    }

    #[test]
    fn symbol_keyword_rep() {
        let g = parse_grammar(r#"grammar G { E = Name ["+"]? Name; }"#).unwrap();
        let reps = derive_replacements(&g, &analyze(&g)).unwrap();
        let plus = reps.iter().find(|p| p.name == "Plus_Rep").unwrap();
        assert_eq!(plus.to_string(), r#"Plus_Rep implements Plus = "[[" lhs:Plus ":-" "]]" | "[[" ":-" rhs:Plus "]]";"#);
    }

    #[test]
    fn single_production_negation() {
        let g = parse_grammar(r#"grammar G { A = "a"; }"#).unwrap();
        let negs = derive_negations(&g, &analyze(&g)).unwrap();
        assert_eq!(negs[0].to_string(), r#"A_Neg implements A = "not" "[[" A "]]";"#);
    }

    #[test]
    fn patterns_replace_names_and_keywords() {
        let d = derive_dstl(&cd()).unwrap();
        assert_eq!(
            body_of(&d.grammar, "Class_Pattern"),
            concat!(
                r#"Class_Pattern implements Class = Abstract? "class" TfIdentifier ("extends" superclass:TfIdentifier)? ("{" ClassMember* "}" | ";")"#,
                r#" | "Class" SchemaVar ";""#,
                r#" | "Class" SchemaVar "[[" Abstract? "class" TfIdentifier ("extends" superclass:TfIdentifier)? ("{" ClassMember* "}" | ";") "]]";"#
            )
        );
        assert_eq!(body_of(&d.grammar, "CDElement_Pattern"), r#"CDElement_Pattern implements CDElement = "CDElement" SchemaVar ";";"#);
    }

    #[test]
    fn alternative_bodies_are_spliced_and_grouped() {
        let g = parse_grammar(r#"grammar G { A = "x" | "y"; }"#).unwrap();
        let d = derive_dstl(&g).unwrap();
        assert_eq!(
            body_of(&d.grammar, "A_Pattern"),
            r#"A_Pattern implements A = "x" | "y" | "A" SchemaVar ";" | "A" SchemaVar "[[" ("x" | "y") "]]";"#
        );
    }

    #[test]
    fn tfrule_excludes_nullable() {
        let g = parse_grammar(r#"grammar G { A = "a"?; B = "b"; }"#).unwrap();
        let r = derive_tfrule(&g, &analyze(&g)).unwrap();
        assert_eq!(r.to_string(), "TFRule = (B)* Where?;");
        let e = parse_grammar("grammar E {}").unwrap();
        assert_eq!(derive_dstl(&e), Err(DeriveError::EmptyTfRule));
    }

    #[test]
    fn provenance_and_census() {
        let g = cd();
        let d = derive_dstl(&g).unwrap();
        assert_eq!(d.grammar.name, "CDTrans");
        let std = g.standard_productions().count();
        let ifc = g.interface_productions().count();
        assert_eq!(d.derived_count(), 4 * (std + ifc + 4) + 1);
        assert_eq!(d.provenance.len(), d.grammar.productions.len());
        assert_eq!(d.provenance_of("Abstract_Rep").unwrap().rule, RuleId::R2b);
        assert_eq!(d.provenance_of("Abstract_Rep").unwrap().source, "abstract");
        assert!(d.provenance_tsv().lines().all(|l| l.split('\t').count() == 3));
        assert_eq!(parse_grammar(&d.grammar.to_string()).unwrap(), d.grammar);
    }

    #[test]
    fn deterministic() {
        let a = derive_dstl(&cd()).unwrap();
        let b = derive_dstl(&cd()).unwrap();
        assert_eq!(a.grammar.to_string(), b.grammar.to_string());
        assert_eq!(a.provenance_tsv(), b.provenance_tsv());
    }

    #[test]
    fn self_application_renames_embedded_commons() {
        let tf = parse_grammar(TFCOMMONS_SOURCE).unwrap();
        let d = derive_dstl(&tf).unwrap();
        assert_eq!(d.tf("Where"), "TfWhere");
        assert_eq!(d.tf("TfIdentifier"), "TfTfIdentifier");
        d.grammar.validate().unwrap();
        assert_eq!(parse_grammar(&d.grammar.to_string()).unwrap(), d.grammar);
    }
}
