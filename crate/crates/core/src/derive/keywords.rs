use std::collections::BTreeSet;

use super::DeriveError;
use crate::grammar::{is_builtin, is_identifier, Grammar, GrammarFacts};

/// Interface name chosen for an optional keyword.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct KeywordName {
    pub keyword_text: String,
    pub derived_name: String,
}

fn symbol_name(c: char) -> Option<&'static str> {
    match c {
        '+' => Some("Plus"),
        '-' => Some("Minus"),
        '*' => Some("Star"),
        '/' => Some("Slash"),
        _ => None,
    }
}

/// Base name of a keyword before clash resolution.
pub(super) fn base_name(keyword: &str) -> String {
    if is_identifier(keyword) {
        let mut chars = keyword.chars();
        let first = chars.next().map(|c| c.to_ascii_uppercase()).unwrap_or_default();
        return std::iter::once(first).chain(chars).collect();
    }
    let mut chars = keyword.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if let Some(n) = symbol_name(c) {
            return n.to_string();
        }
    }
    let hex: String = keyword.chars().map(|c| format!("{:x}", c as u32)).collect();
    format!("Sym{hex}")
}

/// Names for every optional keyword of `g`, in order of first occurrence.
/// A name already taken by a production (or an earlier keyword) gets the
/// suffix `Keyword`; if that is taken too, derivation fails.
pub fn keyword_names(g: &Grammar, facts: &GrammarFacts) -> Result<Vec<KeywordName>, DeriveError> {
    let mut taken: BTreeSet<String> = g.productions.iter().map(|p| p.name.clone()).collect();
    let mut out = Vec::new();
    for kw in &facts.keyword_order {
        let base = base_name(kw);
        let free = |n: &str, taken: &BTreeSet<String>| !taken.contains(n) && !is_builtin(n);
        let name = if free(&base, &taken) {
            base
        } else {
            let suffixed = format!("{base}Keyword");
            if !free(&suffixed, &taken) {
                return Err(DeriveError::KeywordClash { keyword: kw.clone(), name: suffixed });
            }
            suffixed
        };
        taken.insert(name.clone());
        out.push(KeywordName { keyword_text: kw.clone(), derived_name: name });
    }
    Ok(out)
}
