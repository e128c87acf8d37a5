//! Lays out node content (keywords and per-slot items) along a production
//! body, choosing alternatives, optional parts and repetition counts so that
//! every item is placed in its original per-slot order.

use std::collections::{BTreeMap, BTreeSet};

use crate::grammar::{slot_name, Cardinality, Rhs};

#[derive(Debug, Clone)]
pub struct Content<T> {
    pub keywords: BTreeSet<String>,
    pub slots: BTreeMap<String, Vec<T>>,
    /// Structural terminals of a previous layout. Nested alternatives using
    /// only these are tried first, so regeneration keeps the original shape.
    pub terminal_hints: BTreeSet<String>,
}

impl<T> Default for Content<T> {
    fn default() -> Self {
        Content { keywords: BTreeSet::new(), slots: BTreeMap::new(), terminal_hints: BTreeSet::new() }
    }
}

impl<T> Content<T> {
    pub fn push(&mut self, slot: &str, item: T) {
        self.slots.entry(slot.to_string()).or_default().push(item);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece<T> {
    Terminal(String),
    Keyword(String),
    Slot(String, T),
}

enum Work<'a> {
    Elem(&'a Rhs),
    /// Zero or more further iterations of a group body.
    Repeat(&'a Rhs),
    /// Fails unless something was placed since `progress` was recorded.
    RequireProgress(usize),
}

struct Search<'c, T> {
    content: &'c Content<T>,
    consumed: BTreeMap<String, usize>,
    emitted: BTreeSet<String>,
    out: Vec<Piece<T>>,
    preferred_alt: Option<usize>,
    root: *const Rhs,
    /// Top-level alternative taken.
    alt: usize,
}

impl<'c, T: Clone> Search<'c, T> {
    fn progress(&self) -> usize {
        self.consumed.values().sum::<usize>() + self.emitted.len()
    }

    fn complete(&self) -> bool {
        self.content.keywords.iter().all(|k| self.emitted.contains(k))
            && self.content.slots.iter().all(|(s, v)| self.consumed.get(s).copied().unwrap_or(0) == v.len())
    }

    fn go<'a>(&mut self, stack: &mut Vec<Work<'a>>) -> bool {
        let Some(work) = stack.pop() else {
            return self.complete();
        };
        let ok = match &work {
            Work::RequireProgress(before) => self.progress() > *before && self.go(stack),
            Work::Elem(rhs) => self.elem(rhs, stack),
            Work::Repeat(inner) => self.repeat(inner, stack),
        };
        if !ok {
            stack.push(work);
        }
        ok
    }

    fn attempt<'a>(&mut self, stack: &mut Vec<Work<'a>>, pushed: Vec<Work<'a>>) -> bool {
        let n = pushed.len();
        stack.extend(pushed);
        if self.go(stack) {
            return true;
        }
        stack.truncate(stack.len() - n);
        false
    }

    fn elem<'a>(&mut self, rhs: &'a Rhs, stack: &mut Vec<Work<'a>>) -> bool {
        match rhs {
            Rhs::Terminal(t) => {
                self.out.push(Piece::Terminal(t.clone()));
                if self.go(stack) {
                    return true;
                }
                self.out.pop();
                false
            }
            Rhs::OptKeyword(k) => {
                if self.content.keywords.contains(k) && !self.emitted.contains(k) {
                    self.emitted.insert(k.clone());
                    self.out.push(Piece::Keyword(k.clone()));
                    if self.go(stack) {
                        return true;
                    }
                    self.out.pop();
                    self.emitted.remove(k);
                }
                self.go(stack)
            }
            Rhs::NonTerm { target, label, card } => {
                let slot = slot_name(target, label.as_deref());
                let items = self.content.slots.get(slot).map(Vec::as_slice).unwrap_or(&[]);
                let used = self.consumed.get(slot).copied().unwrap_or(0);
                let avail = items.len() - used;
                let counts: Vec<usize> = match card {
                    Cardinality::One => vec![1],
                    Cardinality::Optional => vec![1, 0],
                    Cardinality::Star => (0..=avail).rev().collect(),
                    Cardinality::Plus => (1..=avail.max(1)).rev().collect(),
                };
                for c in counts.into_iter().filter(|&c| c <= avail) {
                    for item in &items[used..used + c] {
                        self.out.push(Piece::Slot(slot.to_string(), item.clone()));
                    }
                    self.consumed.insert(slot.to_string(), used + c);
                    if self.go(stack) {
                        return true;
                    }
                    self.consumed.insert(slot.to_string(), used);
                    self.out.truncate(self.out.len() - c);
                }
                false
            }
            Rhs::Seq(items) => self.attempt(stack, items.iter().rev().map(Work::Elem).collect()),
            Rhs::Alt(alts) => {
                let mut order: Vec<usize> = (0..alts.len()).collect();
                let top = std::ptr::eq(rhs, self.root);
                if !top {
                    // Hinted alternatives first, then the ones with less syntax.
                    let hints = &self.content.terminal_hints;
                    order.sort_by_key(|&i| {
                        let ts = alts[i].terminals();
                        (hints.is_empty() || !ts.iter().all(|t| hints.contains(*t)), ts.len())
                    });
                }
                if let (true, Some(p)) = (top, self.preferred_alt) {
                    if p < alts.len() {
                        order.retain(|&i| i != p);
                        order.insert(0, p);
                    }
                }
                for i in order {
                    if top {
                        self.alt = i;
                    }
                    if self.attempt(stack, vec![Work::Elem(&alts[i])]) {
                        return true;
                    }
                }
                false
            }
            Rhs::Group(inner, card) => match card {
                Cardinality::One => self.attempt(stack, vec![Work::Elem(inner)]),
                Cardinality::Optional => {
                    let p = self.progress();
                    self.attempt(stack, vec![Work::RequireProgress(p), Work::Elem(inner)]) || self.go(stack)
                }
                Cardinality::Star => self.repeat(inner, stack),
                Cardinality::Plus => self.attempt(stack, vec![Work::Repeat(inner), Work::Elem(inner)]),
            },
        }
    }

    fn repeat<'a>(&mut self, inner: &'a Rhs, stack: &mut Vec<Work<'a>>) -> bool {
        let p = self.progress();
        self.attempt(stack, vec![Work::Repeat(inner), Work::RequireProgress(p), Work::Elem(inner)]) || self.go(stack)
    }
}

/// Places `content` along `body`. Returns the pieces in order together with
/// the top-level alternative used, or `None` if the content does not fit.
pub fn layout<T: Clone>(body: &Rhs, content: &Content<T>, preferred_alt: Option<usize>) -> Option<(Vec<Piece<T>>, usize)> {
    let mut search = Search {
        content,
        consumed: BTreeMap::new(),
        emitted: BTreeSet::new(),
        out: Vec::new(),
        preferred_alt,
        root: body as *const Rhs,
        alt: 0,
    };
    let mut stack = vec![Work::Elem(body)];
    if search.go(&mut stack) {
        Some((search.out, search.alt))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    fn body(src: &str, name: &str) -> Rhs {
        parse_grammar(src).unwrap().production(name).unwrap().body.clone().unwrap()
    }

    fn texts(pieces: &[Piece<&str>]) -> Vec<String> {
        pieces
            .iter()
            .map(|p| match p {
                Piece::Terminal(t) | Piece::Keyword(t) => t.to_string(),
                Piece::Slot(_, x) => x.to_string(),
            })
            .collect()
    }

    const CLASS: &str = r#"grammar G { C = ["abstract"]? "class" Name ("extends" superclass:Name)? ("{" M* "}" | ";"); M = "m"; }"#;

    #[test]
    fn optional_parts_follow_content() {
        let b = body(CLASS, "C");
        let mut c = Content::default();
        c.push("Name", "Foo");
        let (p, _) = layout(&b, &c, None).unwrap();
        assert_eq!(texts(&p), ["class", "Foo", ";"]);
        c.push("superclass", "Bar");
        c.push("M", "m1");
        c.push("M", "m2");
        c.keywords.insert("abstract".into());
        let (p, _) = layout(&b, &c, None).unwrap();
        assert_eq!(texts(&p), ["abstract", "class", "Foo", "extends", "Bar", "{", "m1", "m2", "}"]);
    }

    #[test]
    fn separated_list() {
        let b = body(r#"grammar G { P = "(" (X ("," X)*)? ")"; X = "x"; }"#, "P");
        let mut c = Content::default();
        for x in ["a", "b", "c"] {
            c.push("X", x);
        }
        let (p, _) = layout(&b, &c, None).unwrap();
        assert_eq!(texts(&p), ["(", "a", ",", "b", ",", "c", ")"]);
        let (p, _) = layout(&b, &Content::<&str>::default(), None).unwrap();
        assert_eq!(texts(&p), ["(", ")"]);
    }

    #[test]
    fn unplaceable_content_fails() {
        let b = body(CLASS, "C");
        let mut c = Content::default();
        c.push("Name", "A");
        c.push("Name", "B");
        assert!(layout(&b, &c, None).is_none());
    }

    #[test]
    fn preferred_alternative() {
        let b = body(r#"grammar G { A = "x" N? | "y" N?; N = "n"; }"#, "A");
        let c = Content::<&str>::default();
        assert_eq!(layout(&b, &c, None).unwrap().1, 0);
        assert_eq!(layout(&b, &c, Some(1)).unwrap().1, 1);
    }

    #[test]
    fn nested_alternative_hints() {
        let b = body(CLASS, "C");
        let mut c = Content::default();
        c.push("Name", "Foo");
        c.terminal_hints = ["class", ";"].iter().map(|s| s.to_string()).collect();
        assert_eq!(texts(&layout(&b, &c, None).unwrap().0), ["class", "Foo", ";"]);
        c.push("M", "m");
        assert_eq!(texts(&layout(&b, &c, None).unwrap().0), ["class", "Foo", "{", "m", "}"]);
    }
}
