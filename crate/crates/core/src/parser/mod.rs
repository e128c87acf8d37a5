//! Runtime parsing of texts against any (flattened) grammar, plus the inverse
//! direction: rebuilding concrete children from node content and printing
//! trees back to text.

mod earley;
mod layout;
mod lexer;
mod tree;

use thiserror::Error;

use crate::grammar::{analyze, is_identifier, Grammar, GrammarError, GrammarFacts};
use earley::{Bnf, Chart};

pub use layout::{layout, Content, Piece};
pub use lexer::{build_lexer, line_col, tokenize, LexSpec};
pub use tree::{Child, ChildItem, Node, NodeId, Slot, Span, SyntaxTree, Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("unknown start production `{0}`")]
    UnknownStart(String),
    #[error("lexical error at {line}:{col}: {message}")]
    Lexical { line: usize, col: usize, message: String },
    #[error("syntax error at {line}:{col}: found {found}, expected one of: {}", expected.join(", "))]
    NoParse { line: usize, col: usize, found: String, expected: Vec<String> },
    #[error("ambiguous parse of `{production}` at {line}:{col}")]
    Ambiguous { line: usize, col: usize, production: String },
    #[error("content of a `{0}` node cannot be laid out by its production")]
    Layout(String),
}

/// A parser for one grammar. Construction compiles the grammar once.
#[derive(Debug, Clone)]
pub struct Parser {
    grammar: Grammar,
    facts: GrammarFacts,
    lex: LexSpec,
    bnf: Bnf,
}

impl Parser {
    pub fn new(grammar: &Grammar) -> Result<Parser, ParseError> {
        grammar.validate()?;
        let facts = analyze(grammar);
        let bnf = Bnf::compile(grammar, &facts)?;
        Ok(Parser { grammar: grammar.clone(), facts, lex: build_lexer(grammar), bnf })
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn facts(&self) -> &GrammarFacts {
        &self.facts
    }

    pub fn lex_spec(&self) -> &LexSpec {
        &self.lex
    }

    fn start_symbol(&self, start: Option<&str>) -> Result<usize, ParseError> {
        let name = match start {
            Some(s) => s,
            None => self.grammar.default_start().ok_or_else(|| ParseError::UnknownStart("<none>".into()))?,
        };
        self.bnf.nt(name).ok_or_else(|| ParseError::UnknownStart(name.to_string()))
    }

    /// Parses `text` starting at `start` (default: first standard production).
    pub fn parse(&self, start: Option<&str>, text: &str) -> Result<SyntaxTree, ParseError> {
        let s = self.start_symbol(start)?;
        let tokens = tokenize(&self.lex, text)?;
        let chart = Chart::run(&self.bnf, text, &tokens, s);
        if !chart.accepted(s) {
            let k = chart.furthest();
            let (found, offset) = match tokens.get(k) {
                Some(t) => (format!("`{}`", t.text), t.span.start),
                None => ("end of input".to_string(), text.len()),
            };
            let (line, col) = line_col(text, offset);
            return Err(ParseError::NoParse { line, col, found, expected: chart.expected_at(k) });
        }
        let kids = chart.build(s)?;
        let mut root = kids
            .into_iter()
            .find_map(|c| match c.item {
                ChildItem::Node(n) => Some(n),
                ChildItem::Token(_) => None,
            })
            .ok_or_else(|| ParseError::UnknownStart(self.bnf_name(start)))?;
        let mut next = 0;
        root.renumber(&mut next);
        Ok(SyntaxTree::new(root))
    }

    fn bnf_name(&self, start: Option<&str>) -> String {
        start.or(self.grammar.default_start()).unwrap_or("<none>").to_string()
    }

    /// Whether `text` is in the language of `start`; ambiguity is fine here.
    pub fn recognize(&self, start: Option<&str>, text: &str) -> bool {
        let (Ok(s), Ok(tokens)) = (self.start_symbol(start), tokenize(&self.lex, text)) else { return false };
        Chart::run(&self.bnf, text, &tokens, s).accepted(s)
    }

    /// Builds a node of production `ty` whose named slots and keyword flags
    /// are given by `content`; structural terminals are synthesized.
    pub fn build_node(
        &self,
        ty: &str,
        id: NodeId,
        content: &Content<ChildItem>,
        preferred_alt: Option<usize>,
    ) -> Result<Node, ParseError> {
        let prod = self.grammar.production(ty).ok_or_else(|| ParseError::UnknownStart(ty.to_string()))?;
        let body = prod.body.as_ref().ok_or_else(|| ParseError::Layout(ty.to_string()))?;
        let (pieces, alt) = layout(body, content, preferred_alt).ok_or_else(|| ParseError::Layout(ty.to_string()))?;
        let mut keyword_flags: std::collections::BTreeMap<String, bool> =
            body.optional_keywords().into_iter().map(|k| (k.to_string(), false)).collect();
        let children = pieces
            .into_iter()
            .map(|p| match p {
                Piece::Terminal(t) => Child { slot: Slot::Plain, item: ChildItem::Token(literal_token(&t)) },
                Piece::Keyword(k) => {
                    keyword_flags.insert(k.clone(), true);
                    Child { slot: Slot::Keyword(k.clone()), item: ChildItem::Token(Token::new(TokenKind::Keyword, k)) }
                }
                Piece::Slot(s, item) => Child { slot: Slot::Named(s), item },
            })
            .collect();
        Ok(Node { id, ty: ty.to_string(), alt, children, keyword_flags, span: Span::default() })
    }

    /// Re-synthesizes the concrete children of `node` from its named children
    /// and keyword flags, after they were edited.
    pub fn regenerate(&self, node: &mut Node) -> Result<(), ParseError> {
        let fresh = self.build_node(&node.ty, node.id, &content_of(node), Some(node.alt))?;
        node.alt = fresh.alt;
        node.children = fresh.children;
        node.keyword_flags = fresh.keyword_flags;
        Ok(())
    }
}

/// Named children and set keywords of `node`.
pub fn content_of(node: &Node) -> Content<ChildItem> {
    let mut c = Content::default();
    for (k, on) in &node.keyword_flags {
        if *on {
            c.keywords.insert(k.clone());
        }
    }
    for child in &node.children {
        match (&child.slot, &child.item) {
            (Slot::Named(s), item) => c.push(s, item.clone()),
            (Slot::Plain, ChildItem::Token(t)) => {
                c.terminal_hints.insert(t.text.clone());
            }
            _ => {}
        }
    }
    c
}

fn literal_token(t: &str) -> Token {
    let kind = if is_identifier(t) { TokenKind::Keyword } else { TokenKind::Symbol };
    Token::new(kind, t)
}

/// Prints a token sequence in a conventional block layout.
pub fn format_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    let mut depth = 0usize;
    let mut at_line_start = true;
    let mut prev: Option<&str> = None;
    // `;` inside `[[ ... ]]` does not end the line.
    let mut brackets = 0usize;
    for t in tokens {
        match t {
            "[[" => brackets += 1,
            "]]" => brackets = brackets.saturating_sub(1),
            _ => {}
        }
        if t == "}" {
            depth = depth.saturating_sub(1);
            if !at_line_start {
                out.push('\n');
                at_line_start = true;
            }
        }
        if at_line_start {
            out.push_str(&"  ".repeat(depth));
        } else {
            let glue = matches!(t, ";" | "," | ")" | ".")
                || matches!(prev, Some("(") | Some("."))
                || (t == "(" && prev.is_some_and(|p| is_identifier(p) || p.starts_with('$')));
            if !glue {
                out.push(' ');
            }
        }
        out.push_str(t);
        at_line_start = false;
        match t {
            "{" => {
                depth += 1;
                out.push('\n');
                at_line_start = true;
            }
            ";" if brackets > 0 => {}
            ";" | "}" => {
                out.push('\n');
                at_line_start = true;
            }
            _ => {}
        }
        prev = Some(t);
    }
    if !at_line_start {
        out.push('\n');
    }
    out
}

/// Text of a tree.
pub fn unparse(node: &Node) -> String {
    format_tokens(node.tokens().into_iter().map(|t| t.text.as_str()))
}
