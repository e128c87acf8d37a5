use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

/// Byte offsets into the parsed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TokenKind {
    Name,
    Keyword,
    Symbol,
    SchemaVar,
    StringLit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn new(kind: TokenKind, text: impl Into<String>) -> Token {
        Token { kind, text: text.into(), span: Span::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Where a child sits in its parent's production.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Slot {
    /// Structural terminal.
    Plain,
    /// Token of an optional keyword; mirrored in `keyword_flags`.
    Keyword(String),
    /// Labelled (or implicitly named) nonterminal occurrence.
    Named(String),
}

impl Slot {
    pub fn name(&self) -> Option<&str> {
        match self {
            Slot::Named(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ChildItem {
    Node(Node),
    Token(Token),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Child {
    pub slot: Slot,
    pub item: ChildItem,
}

impl Child {
    pub fn node(&self) -> Option<&Node> {
        match &self.item {
            ChildItem::Node(n) => Some(n),
            ChildItem::Token(_) => None,
        }
    }

    pub fn token(&self) -> Option<&Token> {
        match &self.item {
            ChildItem::Token(t) => Some(t),
            ChildItem::Node(_) => None,
        }
    }
}

/// A node of a concrete syntax tree: one instance of a standard production.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: NodeId,
    pub ty: String,
    /// Index of the top-level alternative of the production that matched.
    pub alt: usize,
    pub children: Vec<Child>,
    pub keyword_flags: BTreeMap<String, bool>,
    pub span: Span,
}

impl Node {
    pub fn child_nodes(&self) -> impl Iterator<Item = (&str, &Node)> {
        self.children.iter().filter_map(|c| match (&c.slot, &c.item) {
            (Slot::Named(s), ChildItem::Node(n)) => Some((s.as_str(), n)),
            _ => None,
        })
    }

    pub fn child_nodes_mut(&mut self) -> impl Iterator<Item = &mut Node> {
        self.children.iter_mut().filter_map(|c| match &mut c.item {
            ChildItem::Node(n) => Some(n),
            ChildItem::Token(_) => None,
        })
    }

    /// Tokens stored under a named slot (names, schema variables, literals).
    pub fn slot_tokens<'a>(&'a self, slot: &'a str) -> impl Iterator<Item = &'a Token> + 'a {
        self.children.iter().filter_map(move |c| match (&c.slot, &c.item) {
            (Slot::Named(s), ChildItem::Token(t)) if s == slot => Some(t),
            _ => None,
        })
    }

    pub fn keyword(&self, kw: &str) -> bool {
        self.keyword_flags.get(kw).copied().unwrap_or(false)
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        for (_, n) in self.child_nodes() {
            n.walk(f);
        }
    }

    pub fn find(&self, id: NodeId) -> Option<&Node> {
        if self.id == id {
            return Some(self);
        }
        self.child_nodes().find_map(|(_, n)| n.find(id))
    }

    pub fn find_mut(&mut self, id: NodeId) -> Option<&mut Node> {
        if self.id == id {
            return Some(self);
        }
        self.child_nodes_mut().find_map(|n| n.find_mut(id))
    }

    /// The node containing `id` as a direct child.
    pub fn parent_of_mut(&mut self, id: NodeId) -> Option<&mut Node> {
        if self.child_nodes().any(|(_, n)| n.id == id) {
            return Some(self);
        }
        self.child_nodes_mut().find_map(|n| n.parent_of_mut(id))
    }

    pub fn max_id(&self) -> u32 {
        let mut m = self.id.0;
        self.walk(&mut |n| m = m.max(n.id.0));
        m
    }

    pub fn node_count(&self) -> usize {
        let mut c = 0;
        self.walk(&mut |_| c += 1);
        c
    }

    /// Tokens of the subtree in order.
    pub fn tokens(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a Token>) {
        for c in &self.children {
            match &c.item {
                ChildItem::Token(t) => out.push(t),
                ChildItem::Node(n) => n.collect_tokens(out),
            }
        }
    }

    pub fn token_texts(&self) -> Vec<String> {
        self.tokens().into_iter().map(|t| t.text.clone()).collect()
    }

    /// Renumbers the subtree in preorder starting at `next`.
    pub fn renumber(&mut self, next: &mut u32) {
        self.id = NodeId(*next);
        *next += 1;
        for n in self.child_nodes_mut() {
            n.renumber(next);
        }
    }

    /// Structural equality ignoring node ids, spans and alternative indices.
    pub fn deep_equals(&self, other: &Node) -> bool {
        self.ty == other.ty
            && self.keyword_flags == other.keyword_flags
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| {
                a.slot == b.slot
                    && match (&a.item, &b.item) {
                        (ChildItem::Token(x), ChildItem::Token(y)) => x.kind == y.kind && x.text == y.text,
                        (ChildItem::Node(x), ChildItem::Node(y)) => x.deep_equals(y),
                        _ => false,
                    }
            })
    }

    /// Structural equality ignoring node ids and spans only.
    pub fn same_structure(&self, other: &Node) -> bool {
        self.alt == other.alt
            && self.ty == other.ty
            && self.keyword_flags == other.keyword_flags
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| {
                a.slot == b.slot
                    && match (&a.item, &b.item) {
                        (ChildItem::Token(x), ChildItem::Token(y)) => x.kind == y.kind && x.text == y.text,
                        (ChildItem::Node(x), ChildItem::Node(y)) => x.same_structure(y),
                        _ => false,
                    }
            })
    }

    /// Indented dump, one node per line: `type[alt] @start..end`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_into(0, &mut out);
        out
    }

    fn dump_into(&self, depth: usize, out: &mut String) {
        let _ = writeln!(
            out,
            "{:indent$}{}[{}] @{}..{}",
            "",
            self.ty,
            self.alt,
            self.span.start,
            self.span.end,
            indent = depth * 2
        );
        for (_, n) in self.child_nodes() {
            n.dump_into(depth + 1, out);
        }
    }
}

/// A parsed text: the root node plus the source it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxTree {
    pub root: Node,
}

impl SyntaxTree {
    pub fn new(root: Node) -> SyntaxTree {
        SyntaxTree { root }
    }

    pub fn find(&self, id: NodeId) -> Option<&Node> {
        self.root.find(id)
    }

    pub fn next_id(&self) -> u32 {
        self.root.max_id() + 1
    }

    pub fn same_structure(&self, other: &SyntaxTree) -> bool {
        self.root.same_structure(&other.root)
    }
}
