//! The bundled class-diagram language and its case-study fixtures. The
//! files live under `corpus/` and are embedded at build time.

use std::path::PathBuf;

use thiserror::Error;

use crate::frontend::{Language, LanguageError, Rule};
use crate::grammar::{parse_grammar, Grammar, GrammarError};
use crate::parser::{ParseError, SyntaxTree};

pub const CD_GRAMMAR: &str = include_str!("../corpus/cd.mc-grammar");
pub const CDTRANS_EXPECTED: &str = include_str!("../corpus/cdtrans_expected.mc-grammar");

pub const MODELS: [(&str, &str); 3] = [
    ("profile_v0", include_str!("../corpus/models/profile_v0.cd")),
    ("profile_pulled_up", include_str!("../corpus/models/profile_pulled_up.cd")),
    ("profile_encapsulated_group_excerpt", include_str!("../corpus/models/profile_encapsulated_group_excerpt.cd")),
];

pub const RULES: [(&str, &str); 4] = [
    ("pull_up", include_str!("../corpus/rules/pull_up.cdtr")),
    ("encapsulate", include_str!("../corpus/rules/encapsulate.cdtr")),
    ("pattern_only", include_str!("../corpus/rules/pattern_only.cdtr")),
    ("generalized_pattern", include_str!("../corpus/rules/generalized_pattern.cdtr")),
];

/// Rules that each violate exactly the named condition.
pub const CONDITION_FIXTURES: [(&str, &str); 6] = [
    ("CC1", include_str!("../corpus/conditions/cc1.cdtr")),
    ("CC2", include_str!("../corpus/conditions/cc2.cdtr")),
    ("CC3", include_str!("../corpus/conditions/cc3.cdtr")),
    ("CC4", include_str!("../corpus/conditions/cc4.cdtr")),
    ("CC5", include_str!("../corpus/conditions/cc5.cdtr")),
    ("CC6", include_str!("../corpus/conditions/cc6.cdtr")),
];

/// Directory holding the fixture files.
pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("grammar fixture: {0}")]
    Grammar(#[from] GrammarError),
    #[error("language: {0}")]
    Language(#[from] LanguageError),
    #[error("fixture `{name}`: {source}")]
    Fixture { name: String, source: ParseError },
    #[error("rule fixture `{0}` violates context conditions")]
    InvalidRule(String),
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub cd_grammar: Grammar,
    pub language: Language,
    pub models: Vec<(&'static str, SyntaxTree)>,
    pub rules: Vec<(&'static str, Rule)>,
    /// Productions the derived grammar must contain.
    pub expected_dstl_shapes: Grammar,
}

impl Corpus {
    pub fn model(&self, name: &str) -> Option<&SyntaxTree> {
        self.models.iter().find(|(n, _)| *n == name).map(|(_, t)| t)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|(n, _)| *n == name).map(|(_, r)| r)
    }
}

/// Loads and validates every fixture: models parse, rules parse and satisfy
/// the context conditions.
pub fn load_corpus() -> Result<Corpus, CorpusError> {
    let cd_grammar = parse_grammar(CD_GRAMMAR)?;
    let language = Language::new(&cd_grammar)?;
    let expected_dstl_shapes = parse_grammar(CDTRANS_EXPECTED)?;
    let mut models = Vec::new();
    for (name, text) in MODELS {
        models.push((name, language.parse_model(text).map_err(|source| CorpusError::Fixture { name: name.to_string(), source })?));
    }
    let mut rules = Vec::new();
    for (name, text) in RULES {
        let rule = language.parse_rule(text).map_err(|source| CorpusError::Fixture { name: name.to_string(), source })?;
        if !rule.is_valid() {
            return Err(CorpusError::InvalidRule(name.to_string()));
        }
        rules.push((name, rule));
    }
    Ok(Corpus { cd_grammar, language, models, rules, expected_dstl_shapes })
}
