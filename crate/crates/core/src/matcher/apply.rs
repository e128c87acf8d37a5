use std::collections::BTreeSet;

use thiserror::Error;

use super::{compile_search_plan, find_matches, Match, MatchError};
use crate::expr::ExprValue;
use crate::frontend::{Edit, Language, NameConstraint, PatId, RuleIR, Template};
use crate::grammar::{slot_name, Rhs};
use crate::parser::{Child, ChildItem, Content, Node, NodeId, ParseError, Slot, SyntaxTree, Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("variable `{0}` does not hold a {1}")]
    WrongKind(String, &'static str),
    #[error("no slot of `{parent}` accepts a `{ty}`")]
    NoSlot { parent: String, ty: String },
    #[error("node {0} is not in the model")]
    MissingNode(NodeId),
    #[error(transparent)]
    Layout(#[from] ParseError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("still applicable after {0} applications")]
    MaxIterations(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Serialize)]
pub enum Mode {
    #[default]
    Once,
    Exhaustive,
}

struct Editor<'a> {
    lang: &'a Language,
    original: &'a Node,
    m: &'a Match,
    next: u32,
}

impl Editor<'_> {
    fn bound(&self, p: PatId) -> Result<NodeId, ApplyError> {
        self.m.binding.nodes.get(&p).copied().ok_or_else(|| ApplyError::Unbound(p.to_string()))
    }

    fn name_text(&self, c: &NameConstraint) -> Result<String, ApplyError> {
        match c {
            NameConstraint::Literal(s) => Ok(s.clone()),
            NameConstraint::Var(v) => match self.m.binding.env.get(v) {
                Some(ExprValue::Str(s)) => Ok(s.clone()),
                Some(_) => Err(ApplyError::WrongKind(v.clone(), "string")),
                None => Err(ApplyError::Unbound(v.clone())),
            },
            NameConstraint::Wildcard => Err(ApplyError::Unbound("$_".into())),
        }
    }

    fn instantiate(&mut self, t: &Template) -> Result<Node, ApplyError> {
        match t {
            Template::Copy { var, .. } => {
                let id = match self.m.binding.env.get(var) {
                    Some(ExprValue::Node(id)) => *id,
                    Some(_) => return Err(ApplyError::WrongKind(var.clone(), "model element")),
                    None => return Err(ApplyError::Unbound(var.clone())),
                };
                let mut copy = self.original.find(id).ok_or(ApplyError::MissingNode(id))?.clone();
                copy.renumber(&mut self.next);
                Ok(copy)
            }
            Template::Node { ty, names, keywords, children, alt, .. } => {
                let id = NodeId(self.next);
                self.next += 1;
                let mut content = Content::default();
                for (slot, c) in names {
                    let text = self.name_text(c)?;
                    let kind = if text.starts_with('"') { TokenKind::StringLit } else { TokenKind::Name };
                    content.push(slot, ChildItem::Token(Token::new(kind, text)));
                }
                content.keywords = keywords.iter().cloned().collect::<BTreeSet<_>>();
                for (slot, c) in children {
                    content.push(slot, ChildItem::Node(self.instantiate(c)?));
                }
                Ok(self.lang.models.build_node(ty, id, &content, *alt)?)
            }
        }
    }

    /// Slot of `parent` that accepts elements of type `ty`.
    fn slot_for(&self, parent: &Node, ty: &str) -> Result<String, ApplyError> {
        let no_slot = || ApplyError::NoSlot { parent: parent.ty.clone(), ty: ty.to_string() };
        let body = self.lang.models.grammar().production(&parent.ty).and_then(|p| p.body.as_ref()).ok_or_else(no_slot)?;
        let facts = self.lang.models.facts();
        let mut found = None;
        body.walk(&mut |r| {
            if let Rhs::NonTerm { target, label, .. } = r {
                if found.is_none() && facts.conforms(ty, target) {
                    found = Some(slot_name(target, label.as_deref()).to_string());
                }
            }
        });
        found.ok_or_else(no_slot)
    }
}

fn remove(root: &mut Node, id: NodeId) -> Option<(NodeId, usize, Child)> {
    let parent = root.parent_of_mut(id)?;
    let at = parent.children.iter().position(|c| matches!(&c.item, ChildItem::Node(n) if n.id == id))?;
    Some((parent.id, at, parent.children.remove(at)))
}

/// Applies the edits of `ir` for match `m` to a copy of `model`.
///
/// Templates are instantiated against the unmodified model first; then
/// deletions, replacements and creations, keyword edits and name edits run
/// in that order. Edits anchored inside deleted elements are dropped.
pub fn apply_match(lang: &Language, ir: &RuleIR, model: &SyntaxTree, m: &Match) -> Result<SyntaxTree, ApplyError> {
    let mut ed = Editor { lang, original: &model.root, m, next: model.root.max_id() + 1 };
    let mut created = Vec::new();
    for e in &ir.edits {
        created.push(match e {
            Edit::Replace { rhs: Some(t), .. } => Some(ed.instantiate(t)?),
            _ => None,
        });
    }
    let mut root = model.root.clone();
    let mut dirty: BTreeSet<NodeId> = BTreeSet::new();

    for e in &ir.edits {
        if let Edit::Replace { lhs: Some(l), rhs: None, .. } = e {
            let id = ed.bound(*l)?;
            if let Some((parent, _, _)) = remove(&mut root, id) {
                dirty.insert(parent);
            }
        }
    }
    for (e, new) in ir.edits.iter().zip(created) {
        let (Edit::Replace { parent, slot, lhs, .. }, Some(new)) = (e, new) else { continue };
        match lhs {
            Some(l) => {
                let id = ed.bound(*l)?;
                let Some(p) = root.parent_of_mut(id) else { continue };
                if let Some(c) = p.children.iter_mut().find(|c| matches!(&c.item, ChildItem::Node(n) if n.id == id)) {
                    c.item = ChildItem::Node(new);
                }
            }
            None => {
                let target = match parent {
                    Some(p) => ed.bound(*p)?,
                    None => root.id,
                };
                let Some(p) = root.find_mut(target) else { continue };
                let slot = match slot {
                    Some(s) => s.clone(),
                    None => ed.slot_for(p, &new.ty)?,
                };
                p.children.push(Child { slot: Slot::Named(slot), item: ChildItem::Node(new) });
                dirty.insert(target);
            }
        }
    }
    for e in &ir.edits {
        match e {
            Edit::KeywordAdd { anchor, keyword, .. } | Edit::KeywordRemove { anchor, keyword, .. } => {
                let id = ed.bound(*anchor)?;
                if let Some(n) = root.find_mut(id) {
                    n.keyword_flags.insert(keyword.clone(), matches!(e, Edit::KeywordAdd { .. }));
                    dirty.insert(id);
                }
            }
            Edit::NameReplace { anchor, slot, index, to, .. } => {
                let id = ed.bound(*anchor)?;
                let text = ed.name_text(to)?;
                if let Some(n) = root.find_mut(id) {
                    let tok = n
                        .children
                        .iter_mut()
                        .filter_map(|c| match (&c.slot, &mut c.item) {
                            (Slot::Named(s), ChildItem::Token(t)) if s == slot => Some(t),
                            _ => None,
                        })
                        .nth(*index);
                    if let Some(t) = tok {
                        t.text = text;
                    }
                }
            }
            Edit::Replace { .. } => {}
        }
    }
    for id in dirty {
        if let Some(n) = root.find_mut(id) {
            lang.models.regenerate(n)?;
        }
    }
    Ok(SyntaxTree::new(root))
}

/// Applies the rule once or until no match is left. Exhaustive application
/// recomputes the matches after every step and fails when the rule is still
/// applicable after `max_iter` applications.
pub fn apply(lang: &Language, ir: &RuleIR, model: &SyntaxTree, mode: Mode, max_iter: usize) -> Result<(SyntaxTree, usize), ApplyError> {
    let plan = compile_search_plan(ir, lang);
    let mut tree = model.clone();
    let mut count = 0;
    loop {
        let matches = find_matches(&plan, &tree, ir, lang)?;
        let Some(first) = matches.first() else { break };
        if count == max_iter {
            return Err(ApplyError::MaxIterations(max_iter));
        }
        tree = apply_match(lang, ir, &tree, first)?;
        count += 1;
        if mode == Mode::Once {
            break;
        }
    }
    Ok((tree, count))
}
