//! Front end of rule processing: parsing rules with the derived language,
//! lowering them to an IR, checking context conditions, and printing.

mod conditions;
mod ir;
mod lower;
mod render;

use thiserror::Error;

use crate::derive::{derive_dstl_with, DeriveError, DerivedGrammar, TFRULE};
use crate::grammar::{Grammar, GrammarRegistry};
use crate::parser::{ParseError, Parser, SyntaxTree};

pub use conditions::{check_conditions, check_conditions_with, Condition, ExtraCheck, Violation};
pub use ir::*;
pub use lower::lower_to_ir;
pub use render::render_rule;

#[derive(Debug, Error)]
pub enum LanguageError {
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A modeling language together with its derived transformation language.
#[derive(Debug, Clone)]
pub struct Language {
    pub derived: DerivedGrammar,
    /// Parser for models (the flattened modeling language).
    pub models: Parser,
    /// Parser for rules.
    pub rules: Parser,
}

impl Language {
    pub fn new(g: &Grammar) -> Result<Language, LanguageError> {
        Self::with_registry(g, &GrammarRegistry::new())
    }

    pub fn with_registry(g: &Grammar, registry: &GrammarRegistry) -> Result<Language, LanguageError> {
        let derived = derive_dstl_with(g, registry)?;
        let models = Parser::new(&derived.source_grammar)?;
        let rules = Parser::new(&derived.grammar)?;
        Ok(Language { derived, models, rules })
    }

    pub fn parse_model(&self, text: &str) -> Result<SyntaxTree, ParseError> {
        self.models.parse(None, text)
    }

    pub fn parse_rule(&self, text: &str) -> Result<Rule, ParseError> {
        let tree = self.rules.parse(Some(TFRULE), text)?;
        let ir = lower_to_ir(&tree, &self.derived);
        let violations = check_conditions(&ir);
        Ok(Rule { tree, ir, violations })
    }

    pub fn render_rule(&self, ir: &RuleIR) -> Result<String, ParseError> {
        render_rule(ir, &self.derived, &self.rules)
    }
}

/// A parsed rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub tree: SyntaxTree,
    pub ir: RuleIR,
    pub violations: Vec<Violation>,
}

impl Rule {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}
