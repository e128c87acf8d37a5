use std::collections::BTreeSet;

use super::tree::{Span, Token, TokenKind};
use super::ParseError;
use crate::grammar::{is_identifier, Grammar};

/// Token vocabulary of a grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexSpec {
    /// Identifier-shaped terminals; reserved, never lexed as `Name`.
    pub keywords: BTreeSet<String>,
    /// Other terminals, longest first so that `[[` wins over `[`.
    pub symbols: Vec<String>,
}

impl LexSpec {
    pub fn contains_symbol(&self, s: &str) -> bool {
        self.symbols.iter().any(|x| x == s)
    }
}

/// Collects the literal vocabulary of `g`. Builtin classes (names, schema
/// variables, string literals) are always recognized.
pub fn build_lexer(g: &Grammar) -> LexSpec {
    let mut keywords = BTreeSet::new();
    let mut symbols = BTreeSet::new();
    for p in &g.productions {
        if let Some(body) = &p.body {
            for t in body.terminals() {
                if is_identifier(t) {
                    keywords.insert(t.to_string());
                } else {
                    symbols.insert(t.to_string());
                }
            }
        }
    }
    let mut symbols: Vec<String> = symbols.into_iter().collect();
    symbols.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    LexSpec { keywords, symbols }
}

pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|nl| before.len() - nl).unwrap_or(before.len() + 1);
    (line, col)
}

pub fn tokenize(spec: &LexSpec, text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let ident_start = |b: u8| b.is_ascii_alphabetic() || b == b'_';
    let ident_char = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if b == b'$' && i + 1 < bytes.len() && ident_start(bytes[i + 1]) {
            i += 2;
            while i < bytes.len() && ident_char(bytes[i]) {
                i += 1;
            }
            out.push(Token { kind: TokenKind::SchemaVar, text: text[start..i].to_string(), span: Span::new(start, i) });
            continue;
        }
        if ident_start(b) {
            while i < bytes.len() && ident_char(bytes[i]) {
                i += 1;
            }
            let word = &text[start..i];
            let kind = if spec.keywords.contains(word) { TokenKind::Keyword } else { TokenKind::Name };
            out.push(Token { kind, text: word.to_string(), span: Span::new(start, i) });
            continue;
        }
        if b == b'"' {
            i += 1;
            loop {
                match bytes.get(i) {
                    None | Some(b'\n') => {
                        let (line, col) = line_col(text, start);
                        return Err(ParseError::Lexical { line, col, message: "unterminated string literal".into() });
                    }
                    Some(b'\\') => i += 2,
                    Some(b'"') => {
                        i += 1;
                        break;
                    }
                    Some(_) => i += 1,
                }
            }
            out.push(Token { kind: TokenKind::StringLit, text: text[start..i].to_string(), span: Span::new(start, i) });
            continue;
        }
        if let Some(sym) = spec.symbols.iter().find(|s| text[i..].starts_with(s.as_str())) {
            i += sym.len();
            out.push(Token { kind: TokenKind::Symbol, text: sym.clone(), span: Span::new(start, i) });
            continue;
        }
        let (line, col) = line_col(text, start);
        let ch = text[start..].chars().next().unwrap_or('?');
        return Err(ParseError::Lexical { line, col, message: format!("unexpected character `{ch}`") });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    #[test]
    fn maximal_munch() {
        let g = parse_grammar(r#"grammar G { A = "[" "[[" ":" ":-" "]]" "]"; }"#).unwrap();
        let spec = build_lexer(&g);
        let toks = tokenize(&spec, "[[[ :-: ]]]").unwrap();
        let texts: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["[[", "[", ":-", ":", "]]", "]"]);
    }

    #[test]
    fn schema_vars_and_keywords() {
        let g = parse_grammar(r#"grammar G { A = "class" Name; }"#).unwrap();
        let spec = build_lexer(&g);
        let toks = tokenize(&spec, "class $_ $parent Foo // trailing\n\"a\\\"b\"").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [TokenKind::Keyword, TokenKind::SchemaVar, TokenKind::SchemaVar, TokenKind::Name, TokenKind::StringLit]
        );
        assert_eq!(toks[1].text, "$_");
    }

    #[test]
    fn empty_grammar_has_only_builtins() {
        let spec = build_lexer(&parse_grammar("grammar E {}").unwrap());
        assert!(spec.keywords.is_empty() && spec.symbols.is_empty());
        assert!(tokenize(&spec, "a $b \"c\"").is_ok());
        assert!(matches!(tokenize(&spec, "a;"), Err(ParseError::Lexical { line: 1, col: 2, .. })));
    }
}
