//! Derivation of domain-specific transformation languages from modeling
//! language grammars, and a transformation engine for rules written in them.

pub mod grammar;
pub mod derive;
pub mod expr;
pub mod parser;
pub mod frontend;
pub mod matcher;
pub mod corpus;
pub mod cli;
