//! EBNF-like grammars: the shared representation for modeling languages and
//! the transformation languages derived from them.

mod analyze;
mod display;
mod flatten;
mod parse;

use std::collections::BTreeSet;

use thiserror::Error;

pub use analyze::{analyze, GrammarFacts};
pub use flatten::{flatten_inheritance, GrammarRegistry};
pub use parse::parse_grammar;

/// Lexical classes supplied by the implicit supergrammar `Common`.
pub const BUILTIN_LEXICALS: [&str; 3] = ["Name", "SchemaVar", "StringLiteral"];

/// Name of the implicit supergrammar.
pub const COMMON: &str = "Common";

pub fn is_builtin(name: &str) -> bool {
    BUILTIN_LEXICALS.contains(&name)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("duplicate production `{0}`")]
    DuplicateProduction(String),
    #[error("unresolved supergrammar `{0}`")]
    UnresolvedSupergrammar(String),
    #[error("inheritance cycle through `{0}`")]
    InheritanceCycle(String),
    #[error("production `{production}` references unknown nonterminal `{target}`")]
    UnresolvedReference { production: String, target: String },
    #[error("`{production}` lists `{target}` as interface, but it is not an interface production")]
    NotAnInterface { production: String, target: String },
    #[error("label `{label}` used twice in one sequence of `{production}`")]
    DuplicateLabel { production: String, label: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Cardinality {
    One,
    Optional,
    Star,
    Plus,
}

impl Cardinality {
    pub fn suffix(self) -> &'static str {
        match self {
            Cardinality::One => "",
            Cardinality::Optional => "?",
            Cardinality::Star => "*",
            Cardinality::Plus => "+",
        }
    }

    pub fn admits_empty(self) -> bool {
        matches!(self, Cardinality::Optional | Cardinality::Star)
    }
}

/// Right-hand side of a production.
///
/// The parser normalizes bodies: a body (or group content) with a single
/// alternative is a `Seq`, otherwise an `Alt` whose members are all `Seq`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Rhs {
    Seq(Vec<Rhs>),
    Alt(Vec<Rhs>),
    Terminal(String),
    /// `["kw"]?`, a keyword whose presence is recorded as a flag.
    OptKeyword(String),
    NonTerm {
        target: String,
        label: Option<String>,
        card: Cardinality,
    },
    Group(Box<Rhs>, Cardinality),
}

impl Rhs {
    pub fn nonterm(target: &str) -> Rhs {
        Rhs::NonTerm { target: target.to_string(), label: None, card: Cardinality::One }
    }

    pub fn nonterm_with(target: &str, label: Option<&str>, card: Cardinality) -> Rhs {
        Rhs::NonTerm { target: target.to_string(), label: label.map(str::to_string), card }
    }

    pub fn terminal(text: &str) -> Rhs {
        Rhs::Terminal(text.to_string())
    }

    /// Builds a normalized body from alternatives of element lists.
    pub fn from_alternatives(mut alts: Vec<Vec<Rhs>>) -> Rhs {
        if alts.len() == 1 {
            Rhs::Seq(alts.pop().unwrap())
        } else {
            Rhs::Alt(alts.into_iter().map(Rhs::Seq).collect())
        }
    }

    /// The top-level alternatives of a normalized body.
    pub fn alternatives(&self) -> Vec<&Rhs> {
        match self {
            Rhs::Alt(alts) => alts.iter().collect(),
            other => vec![other],
        }
    }

    /// Visits every element of the tree in source order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Rhs)) {
        f(self);
        match self {
            Rhs::Seq(items) | Rhs::Alt(items) => items.iter().for_each(|i| i.walk(f)),
            Rhs::Group(inner, _) => inner.walk(f),
            _ => {}
        }
    }

    pub fn referenced_nonterminals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |r| {
            if let Rhs::NonTerm { target, .. } = r {
                out.push(target.as_str());
            }
        });
        out
    }

    pub fn optional_keywords(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk(&mut |r| {
            if let Rhs::OptKeyword(k) = r {
                if !out.contains(&k.as_str()) {
                    out.push(k);
                }
            }
        });
        out
    }

    pub fn terminals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |r| match r {
            Rhs::Terminal(t) | Rhs::OptKeyword(t) => out.push(t.as_str()),
            _ => {}
        });
        out
    }
}

/// Slot under which the children produced by a nonterminal reference are
/// stored in syntax trees: the label, or the target name when unlabeled.
pub fn slot_name<'a>(target: &'a str, label: Option<&'a str>) -> &'a str {
    label.unwrap_or(target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ProductionKind {
    Standard,
    Interface,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Production {
    pub name: String,
    pub kind: ProductionKind,
    /// `implements` list for standard productions, `extends` list for
    /// interfaces.
    pub supertypes: Vec<String>,
    pub body: Option<Rhs>,
}

impl Production {
    pub fn standard(name: &str, implements: &[&str], body: Rhs) -> Production {
        Production {
            name: name.to_string(),
            kind: ProductionKind::Standard,
            supertypes: implements.iter().map(|s| s.to_string()).collect(),
            body: Some(body),
        }
    }

    pub fn interface(name: &str, extends: &[&str]) -> Production {
        Production {
            name: name.to_string(),
            kind: ProductionKind::Interface,
            supertypes: extends.iter().map(|s| s.to_string()).collect(),
            body: None,
        }
    }

    pub fn is_interface(&self) -> bool {
        self.kind == ProductionKind::Interface
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Grammar {
    pub name: String,
    pub extends: Vec<String>,
    pub productions: Vec<Production>,
}

impl Grammar {
    pub fn new(name: &str) -> Grammar {
        Grammar { name: name.to_string(), extends: Vec::new(), productions: Vec::new() }
    }

    pub fn production(&self, name: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.name == name)
    }

    pub fn standard_productions(&self) -> impl Iterator<Item = &Production> {
        self.productions.iter().filter(|p| !p.is_interface())
    }

    pub fn interface_productions(&self) -> impl Iterator<Item = &Production> {
        self.productions.iter().filter(|p| p.is_interface())
    }

    /// First standard production, the default start symbol for models.
    pub fn default_start(&self) -> Option<&str> {
        self.standard_productions().next().map(|p| p.name.as_str())
    }

    /// Checks the well-formedness invariants of a flattened grammar.
    pub fn validate(&self) -> Result<(), GrammarError> {
        let mut seen = BTreeSet::new();
        for p in &self.productions {
            if !seen.insert(p.name.as_str()) {
                return Err(GrammarError::DuplicateProduction(p.name.clone()));
            }
        }
        for p in &self.productions {
            for sup in &p.supertypes {
                match self.production(sup) {
                    Some(s) if s.is_interface() => {}
                    Some(_) => {
                        return Err(GrammarError::NotAnInterface {
                            production: p.name.clone(),
                            target: sup.clone(),
                        })
                    }
                    None => {
                        return Err(GrammarError::UnresolvedReference {
                            production: p.name.clone(),
                            target: sup.clone(),
                        })
                    }
                }
            }
            if let Some(body) = &p.body {
                for target in body.referenced_nonterminals() {
                    if !is_builtin(target) && self.production(target).is_none() {
                        return Err(GrammarError::UnresolvedReference {
                            production: p.name.clone(),
                            target: target.to_string(),
                        });
                    }
                }
                check_labels(&p.name, body)?;
            }
        }
        Ok(())
    }
}

fn check_labels(production: &str, rhs: &Rhs) -> Result<(), GrammarError> {
    match rhs {
        Rhs::Seq(items) => {
            let mut labels = BTreeSet::new();
            for item in items {
                if let Rhs::NonTerm { label: Some(l), .. } = item {
                    if !labels.insert(l.as_str()) {
                        return Err(GrammarError::DuplicateLabel {
                            production: production.to_string(),
                            label: l.clone(),
                        });
                    }
                }
                check_labels(production, item)?;
            }
            Ok(())
        }
        Rhs::Alt(items) => items.iter().try_for_each(|i| check_labels(production, i)),
        Rhs::Group(inner, _) => check_labels(production, inner),
        _ => Ok(()),
    }
}

/// Whether `text` lexes as an identifier (and is thus a keyword when used
/// as a terminal).
pub fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
