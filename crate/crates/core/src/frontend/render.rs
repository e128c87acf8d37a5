//! Printing a rule IR back to rule text.

use super::ir::*;
use super::lower::{Kind, Roles};
use crate::derive::DerivedGrammar;
use crate::grammar::{slot_name, Rhs};
use crate::parser::{format_tokens, tokenize, ChildItem, Content, Node, NodeId, ParseError, Parser, Token, TokenKind};

struct Renderer<'a> {
    dg: &'a DerivedGrammar,
    roles: Roles<'a>,
    parser: &'a Parser,
    ir: &'a RuleIR,
}

fn name_token(text: &str) -> ChildItem {
    let kind = if text.starts_with('$') {
        TokenKind::SchemaVar
    } else if text.starts_with('"') {
        TokenKind::StringLit
    } else {
        TokenKind::Name
    };
    ChildItem::Token(Token::new(kind, text))
}

impl<'a> Renderer<'a> {
    fn build(&self, ty: &str, content: &Content<ChildItem>, alt: Option<usize>) -> Result<Node, ParseError> {
        self.parser.build_node(ty, NodeId(0), content, alt)
    }

    /// Nonterminal referenced under `slot` in production `prod`.
    fn slot_target(&self, prod: &str, slot: &str) -> Option<String> {
        let body = self.dg.grammar.production(prod)?.body.as_ref()?;
        let mut found = None;
        body.walk(&mut |r| {
            if let Rhs::NonTerm { target, label, .. } = r {
                if found.is_none() && slot_name(target, label.as_deref()) == slot {
                    found = Some(target.clone());
                }
            }
        });
        found
    }

    fn pattern_name(ty: &str) -> String {
        format!("{ty}_Pattern")
    }

    fn keyword_name(&self, kw: &str) -> String {
        self.dg
            .keywords
            .iter()
            .find(|k| k.keyword_text == kw)
            .map(|k| k.derived_name.clone())
            .unwrap_or_else(|| kw.to_string())
    }

    /// Alternative index of the schema-variable forms of a pattern production.
    fn var_alt(&self, ty: &str) -> usize {
        let interface = matches!(self.roles.kind(&Self::pattern_name(ty)), Kind::Pattern { interface: true, .. });
        if interface {
            0
        } else {
            self.roles.concrete_alts(ty)
        }
    }

    fn ident(&self, c: &NameConstraint) -> Result<Node, ParseError> {
        let mut content = Content::default();
        let text = c.text();
        let slot = if text.starts_with('$') { "SchemaVar" } else { "Name" };
        content.push(slot, name_token(text));
        self.build(self.dg.tf("Ident"), &content, None)
    }

    fn identifier(&self, from: &NameConstraint, to: Option<&NameConstraint>) -> Result<Node, ParseError> {
        let mut content = Content::default();
        content.push(self.dg.tf("Ident"), ChildItem::Node(self.ident(from)?));
        if let Some(to) = to {
            content.push("rhs", ChildItem::Node(self.ident(to)?));
        }
        self.build(self.dg.tf("TfIdentifier"), &content, Some(usize::from(to.is_some())))
    }

    /// Pushes a name under its model slot, as identifier node or plain token.
    fn push_name(
        &self,
        prod: &str,
        content: &mut Content<ChildItem>,
        mslot: &str,
        from: &NameConstraint,
        to: Option<&NameConstraint>,
    ) -> Result<(), ParseError> {
        let tf_ident = self.dg.tf("TfIdentifier");
        let slot = if mslot == "Name" && self.slot_target(prod, tf_ident).is_some() { tf_ident } else { mslot };
        if self.slot_target(prod, slot).as_deref() == Some(tf_ident) {
            content.push(slot, ChildItem::Node(self.identifier(from, to)?));
        } else {
            content.push(slot, name_token(from.text()));
        }
        Ok(())
    }

    fn keyword_pattern(&self, kw: &str) -> Result<(String, Node), ParseError> {
        let name = self.keyword_name(kw);
        let node = self.build(&Self::pattern_name(&name), &Content::default(), None)?;
        Ok((name, node))
    }

    fn keyword_node(&self, anchor: PatId, kw: &str) -> Result<(String, Node), ParseError> {
        let node = self.ir.node(anchor);
        let (name, pat) = self.keyword_pattern(kw)?;
        let edit = self.ir.edits.iter().find_map(|e| match e {
            Edit::KeywordAdd { anchor: a, keyword, .. } if *a == anchor && keyword == kw => Some(1),
            Edit::KeywordRemove { anchor: a, keyword, .. } if *a == anchor && keyword == kw => Some(0),
            _ => None,
        });
        let mut content = Content::default();
        let out = match (edit, node.keywords.get(kw)) {
            (Some(alt), _) => {
                content.push(if alt == 0 { "lhs" } else { "rhs" }, ChildItem::Node(pat));
                self.build(&format!("{name}_Rep"), &content, Some(alt))?
            }
            (None, Some(KeywordConstraint::Forbidden)) => {
                content.push(&name, ChildItem::Node(pat));
                self.build(&format!("{name}_Neg"), &content, None)?
            }
            _ => pat,
        };
        Ok((name, out))
    }

    fn pattern(&self, id: PatId) -> Result<Node, ParseError> {
        let n = self.ir.node(id);
        let prod = Self::pattern_name(&n.ty);
        let mut content = Content::default();
        if let Some(var) = n.var() {
            content.push("SchemaVar", name_token(var));
        } else if n.form == Form::Anonymous {
            content.push("SchemaVar", name_token("$_"));
        }
        if n.form.has_syntax() {
            for (slot, item) in &n.items {
                match item {
                    Item::Name(i) => {
                        let (mslot, from) = &n.names[*i];
                        let index = n.names[..*i].iter().filter(|(s, _)| s == mslot).count();
                        let to = self.ir.edits.iter().find_map(|e| match e {
                            Edit::NameReplace { anchor, slot, index: j, to, .. }
                                if *anchor == id && slot == mslot && *j == index =>
                            {
                                Some(to)
                            }
                            _ => None,
                        });
                        self.push_name(&prod, &mut content, mslot, from, to)?;
                    }
                    Item::Keyword(k) => {
                        let (name, node) = self.keyword_node(id, k)?;
                        content.push(&name, ChildItem::Node(node));
                    }
                    other => {
                        let target = self.slot_target(&prod, slot).unwrap_or_else(|| slot.clone());
                        content.push(slot, ChildItem::Node(self.element(other, &target)?));
                    }
                }
            }
        }
        self.build(&prod, &content, Some(n.syntax_alt))
    }

    /// An element item placed where nonterminal `target` is expected.
    fn element(&self, item: &Item, target: &str) -> Result<Node, ParseError> {
        let mut content = Content::default();
        match item {
            Item::Node(id) => self.pattern(*id),
            Item::Nac(i) => {
                content.push(target, ChildItem::Node(self.pattern(self.ir.nacs[*i].root)?));
                self.build(&format!("{target}_Neg"), &content, None)
            }
            Item::Edit(i) => match &self.ir.edits[*i] {
                Edit::Replace { lhs, rhs, .. } => {
                    if let Some(l) = lhs {
                        content.push("lhs", ChildItem::Node(self.pattern(*l)?));
                    }
                    if let Some(r) = rhs {
                        content.push("rhs", ChildItem::Node(self.template(r)?));
                    }
                    self.build(&format!("{target}_Rep"), &content, None)
                }
                _ => Err(ParseError::Layout(target.to_string())),
            },
            Item::Name(_) | Item::Keyword(_) => Err(ParseError::Layout(target.to_string())),
        }
    }

    fn template(&self, t: &Template) -> Result<Node, ParseError> {
        let prod = Self::pattern_name(t.ty());
        let mut content = Content::default();
        match t {
            Template::Copy { ty, var } => {
                content.push("SchemaVar", name_token(var));
                self.build(&prod, &content, Some(self.var_alt(ty)))
            }
            Template::Node { ty, var, names, keywords, children, alt } => {
                if let Some(v) = var {
                    content.push("SchemaVar", name_token(v));
                }
                for (mslot, name) in names {
                    self.push_name(&prod, &mut content, mslot, name, None)?;
                }
                for kw in keywords {
                    let (name, node) = self.keyword_pattern(kw)?;
                    content.push(&name, ChildItem::Node(node));
                }
                for (slot, child) in children {
                    content.push(slot, ChildItem::Node(self.template(child)?));
                }
                let preferred = alt.or(var.as_ref().map(|_| self.var_alt(ty) + 1));
                self.build(&prod, &content, preferred)
            }
        }
    }
}

/// Rule text for `ir`, in the transformation language `dg` parsed by
/// `parser`.
pub fn render_rule(ir: &RuleIR, dg: &DerivedGrammar, parser: &Parser) -> Result<String, ParseError> {
    let r = Renderer { dg, roles: Roles::new(dg), parser, ir };
    let mut tokens: Vec<String> = Vec::new();
    for item in &ir.top {
        let target = match item {
            Item::Node(id) => ir.node(*id).ty.clone(),
            Item::Nac(i) => ir.node(ir.nacs[*i].root).ty.clone(),
            Item::Edit(i) => match &ir.edits[*i] {
                Edit::Replace { lhs: Some(l), .. } => ir.node(*l).ty.clone(),
                Edit::Replace { rhs: Some(t), .. } => t.ty().to_string(),
                _ => return Err(ParseError::Layout(crate::derive::TFRULE.into())),
            },
            _ => return Err(ParseError::Layout(crate::derive::TFRULE.into())),
        };
        let node = r.element(item, &target)?;
        tokens.extend(node.tokens().into_iter().map(|t| t.text.clone()));
    }
    if let Some(w) = &ir.where_block {
        let mut text = String::from("where {");
        for (v, e) in &w.assignments {
            text.push_str(&format!(" {v} = {e};"));
        }
        if let Some(c) = &w.constraint {
            text.push_str(&format!(" {c}"));
        }
        text.push_str(" }");
        tokens.extend(tokenize(parser.lex_spec(), &text)?.into_iter().map(|t| t.text));
    }
    Ok(format_tokens(tokens.iter().map(String::as_str)))
}
