use std::collections::BTreeSet;

use super::{Cardinality, Grammar, GrammarError, Production, ProductionKind, Rhs};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, GrammarError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| GrammarError::Syntax { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Lexed {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if c == '"' {
            i += 1;
            col += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err(start_line, start_col, "unterminated string".into()))
                    }
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(e @ ('"' | '\\')) => s.push(*e),
                            _ => return Err(err(line, col, "invalid escape".into())),
                        }
                        i += 2;
                        col += 2;
                    }
                    Some(ch) => {
                        s.push(*ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            if s.is_empty() {
                return Err(err(start_line, start_col, "empty terminal".into()));
            }
            out.push(Lexed { tok: Tok::Str(s), line: start_line, col: start_col });
            continue;
        }
        if "{}()[]|=;:,?*+".contains(c) {
            i += 1;
            col += 1;
            out.push(Lexed { tok: Tok::Punct(c), line: start_line, col: start_col });
            continue;
        }
        return Err(err(line, col, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|l| &l.tok)
    }

    fn error(&self, message: impl Into<String>) -> GrammarError {
        let (line, col) = self.toks.get(self.pos).map(|l| (l.line, l.col)).unwrap_or(self.eof);
        GrammarError::Syntax { line, col, message: message.into() }
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), GrammarError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, GrammarError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, GrammarError> {
        let mut out = vec![self.ident()?];
        while self.eat_punct(',') {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn grammar(&mut self) -> Result<Grammar, GrammarError> {
        if !self.eat_word("grammar") {
            return Err(self.error("expected `grammar`"));
        }
        let name = self.ident()?;
        let extends = if self.eat_word("extends") { self.ident_list()? } else { Vec::new() };
        self.expect_punct('{')?;
        let mut productions: Vec<Production> = Vec::new();
        let mut names = BTreeSet::new();
        while !self.is_punct('}') {
            if self.peek().is_none() {
                return Err(self.error("expected `}`"));
            }
            let p = self.production()?;
            if !names.insert(p.name.clone()) {
                return Err(GrammarError::DuplicateProduction(p.name));
            }
            productions.push(p);
        }
        self.expect_punct('}')?;
        if self.peek().is_some() {
            return Err(self.error("trailing input after grammar"));
        }
        Ok(Grammar { name, extends, productions })
    }

    fn production(&mut self) -> Result<Production, GrammarError> {
        // `interface` is contextual: `interface = ...` would be a production
        // named interface.
        if self.is_word("interface") && matches!(self.peek_at(1), Some(Tok::Ident(_))) {
            self.pos += 1;
            let name = self.ident()?;
            let supertypes = if self.eat_word("extends") { self.ident_list()? } else { Vec::new() };
            self.expect_punct(';')?;
            return Ok(Production { name, kind: ProductionKind::Interface, supertypes, body: None });
        }
        let name = self.ident()?;
        let supertypes = if self.eat_word("implements") { self.ident_list()? } else { Vec::new() };
        self.expect_punct('=')?;
        let body = self.alternative()?;
        self.expect_punct(';')?;
        Ok(Production { name, kind: ProductionKind::Standard, supertypes, body: Some(body) })
    }

    fn alternative(&mut self) -> Result<Rhs, GrammarError> {
        let mut alts = vec![self.sequence()?];
        while self.eat_punct('|') {
            alts.push(self.sequence()?);
        }
        Ok(Rhs::from_alternatives(alts))
    }

    fn sequence(&mut self) -> Result<Vec<Rhs>, GrammarError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Punct('|' | ';' | ')' | '}')) | None => return Ok(items),
                _ => items.push(self.element()?),
            }
        }
    }

    fn cardinality(&mut self) -> Cardinality {
        if self.eat_punct('?') {
            Cardinality::Optional
        } else if self.eat_punct('*') {
            Cardinality::Star
        } else if self.eat_punct('+') {
            Cardinality::Plus
        } else {
            Cardinality::One
        }
    }

    fn element(&mut self) -> Result<Rhs, GrammarError> {
        match self.peek().cloned() {
            Some(Tok::Punct('[')) => {
                self.pos += 1;
                let kw = match self.peek() {
                    Some(Tok::Str(s)) => s.clone(),
                    _ => return Err(self.error("expected quoted keyword")),
                };
                self.pos += 1;
                self.expect_punct(']')?;
                self.expect_punct('?')?;
                Ok(Rhs::OptKeyword(kw))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                match self.cardinality() {
                    Cardinality::One => Ok(Rhs::Terminal(s)),
                    Cardinality::Optional => Ok(Rhs::OptKeyword(s)),
                    card => Ok(Rhs::Group(Box::new(Rhs::Seq(vec![Rhs::Terminal(s)])), card)),
                }
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let inner = self.alternative()?;
                self.expect_punct(')')?;
                let card = self.cardinality();
                Ok(Rhs::Group(Box::new(inner), card))
            }
            Some(Tok::Ident(first)) => {
                self.pos += 1;
                let (label, target) = if self.eat_punct(':') {
                    (Some(first), self.ident()?)
                } else {
                    (None, first)
                };
                let card = self.cardinality();
                Ok(Rhs::NonTerm { target, label, card })
            }
            _ => Err(self.error("expected grammar element")),
        }
    }
}

/// Parses a grammar in the `.mc-grammar` surface syntax.
///
/// Only syntax and duplicate production names are checked here; reference
/// resolution happens in [`Grammar::validate`] after flattening.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let toks = lex(text)?;
    let last_line = text.lines().count().max(1);
    let last_col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser { toks, pos: 0, eof: (last_line, last_col) };
    p.grammar()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_grammar() {
        let g = parse_grammar(r#"grammar G { A = "a"; }"#).unwrap();
        assert_eq!(g.productions.len(), 1);
        assert_eq!(g.productions[0].body, Some(Rhs::Seq(vec![Rhs::terminal("a")])));
    }

    #[test]
    fn optional_keyword_forms_agree() {
        let a = parse_grammar(r#"grammar G { A = ["k"]? "x"; }"#).unwrap();
        let b = parse_grammar(r#"grammar G { A = "k"? "x"; }"#).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_groups_and_cardinalities() {
        let g = parse_grammar(
            r#"grammar G extends Common {
                interface I extends J;
                interface J;
                A implements I, J = lhs:B? ("," B)* | C+;
                B = Name; C = "c";
            }"#,
        )
        .unwrap();
        assert_eq!(g.extends, vec!["Common"]);
        let a = g.production("A").unwrap();
        assert_eq!(a.supertypes, vec!["I", "J"]);
        let alts = a.body.as_ref().unwrap().alternatives();
        assert_eq!(alts.len(), 2);
        assert_eq!(
            alts[0],
            &Rhs::Seq(vec![
                Rhs::nonterm_with("B", Some("lhs"), Cardinality::Optional),
                Rhs::Group(
                    Box::new(Rhs::Seq(vec![Rhs::terminal(","), Rhs::nonterm("B")])),
                    Cardinality::Star
                ),
            ])
        );
        assert!(g.production("I").unwrap().is_interface());
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_grammar("grammar G {\n  A = \"a\"\n}").unwrap_err();
        assert_eq!(err, GrammarError::Syntax { line: 3, col: 1, message: "expected `;`".into() });
    }

    #[test]
    fn duplicate_production_rejected() {
        let err = parse_grammar(r#"grammar G { A = "a"; A = "b"; }"#).unwrap_err();
        assert_eq!(err, GrammarError::DuplicateProduction("A".into()));
    }

    #[test]
    fn comments_skipped() {
        let g = parse_grammar("grammar G { // 1a\n interface I; // note\n }").unwrap();
        assert_eq!(g.productions.len(), 1);
    }
}
