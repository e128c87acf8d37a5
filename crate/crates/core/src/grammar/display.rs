use std::fmt;

use super::{Grammar, Production, ProductionKind, Rhs};

fn quote(text: &str) -> String {
    let mut s = String::with_capacity(text.len() + 2);
    s.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Seq(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                Ok(())
            }
            Rhs::Alt(alts) => {
                for (i, alt) in alts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{alt}")?;
                }
                Ok(())
            }
            Rhs::Terminal(t) => f.write_str(&quote(t)),
            Rhs::OptKeyword(k) => write!(f, "[{}]?", quote(k)),
            Rhs::NonTerm { target, label, card } => {
                if let Some(l) = label {
                    write!(f, "{l}:")?;
                }
                write!(f, "{target}{}", card.suffix())
            }
            Rhs::Group(inner, card) => write!(f, "({inner}){}", card.suffix()),
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ProductionKind::Interface => {
                write!(f, "interface {}", self.name)?;
                if !self.supertypes.is_empty() {
                    write!(f, " extends {}", self.supertypes.join(", "))?;
                }
                f.write_str(";")
            }
            ProductionKind::Standard => {
                f.write_str(&self.name)?;
                if !self.supertypes.is_empty() {
                    write!(f, " implements {}", self.supertypes.join(", "))?;
                }
                match &self.body {
                    Some(body) => write!(f, " = {body};"),
                    None => f.write_str(" = ;"),
                }
            }
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "grammar {}", self.name)?;
        if !self.extends.is_empty() {
            write!(f, " extends {}", self.extends.join(", "))?;
        }
        writeln!(f, " {{")?;
        for p in &self.productions {
            writeln!(f, "  {p}")?;
        }
        writeln!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use crate::grammar::parse_grammar;

    #[test]
    fn escapes_round_trip() {
        let src = r#"grammar G { A = "\"" "\\" B*; B = ("x" | "y")+; }"#;
        let g = parse_grammar(src).unwrap();
        assert_eq!(parse_grammar(&g.to_string()).unwrap(), g);
    }
}
