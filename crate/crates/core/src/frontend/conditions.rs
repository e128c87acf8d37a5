//! Context conditions on rules.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::ir::*;
use crate::parser::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Condition {
    CC1,
    CC2,
    CC3,
    CC4,
    CC5,
    CC6,
    /// Malformed rules the six conditions do not name, e.g. `[[ :- ]]`.
    #[serde(rename = "STRUCT")]
    Struct,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::CC1 => "CC1",
            Condition::CC2 => "CC2",
            Condition::CC3 => "CC3",
            Condition::CC4 => "CC4",
            Condition::CC5 => "CC5",
            Condition::CC6 => "CC6",
            Condition::Struct => "STRUCT",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub message: String,
    #[serde(skip)]
    pub span: Span,
}

/// Language-specific checks run after the generic ones.
pub type ExtraCheck = dyn Fn(&RuleIR) -> Vec<Violation>;

fn v(condition: Condition, message: String, span: Span) -> Violation {
    Violation { condition, message, span }
}

/// All violated conditions of `ir`, in source order per condition.
pub fn check_conditions(ir: &RuleIR) -> Vec<Violation> {
    check_conditions_with(ir, &[])
}

pub fn check_conditions_with(ir: &RuleIR, extra: &[&ExtraCheck]) -> Vec<Violation> {
    let mut out = Vec::new();
    cc1(ir, &mut out);
    cc2(ir, &mut out);
    cc3(ir, &mut out);
    for f in &ir.faults {
        let (c, msg) = match &f.kind {
            FaultKind::NegInRhs => (Condition::CC4, "negative element on the right-hand side of a modification".to_string()),
            FaultKind::NestedNeg => (Condition::CC5, "negative element nested in a negative element".to_string()),
            FaultKind::ModInNeg => (Condition::CC6, "modification inside a negative element".to_string()),
            FaultKind::Structural(m) => (Condition::Struct, m.clone()),
        };
        out.push(v(c, msg, f.span));
    }
    for check in extra {
        out.extend(check(ir));
    }
    out.sort_by_key(|x| x.condition);
    out
}

/// Element variables and assignment targets are bound at most once.
fn cc1(ir: &RuleIR, out: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    for n in &ir.nodes {
        if let Some(var) = n.var() {
            if !seen.insert(var) {
                out.push(v(Condition::CC1, format!("variable `{var}` is bound more than once"), n.span));
            }
        }
    }
    for target in ir.assigned_vars() {
        if !seen.insert(target) {
            out.push(v(Condition::CC1, format!("variable `{target}` is bound more than once"), ir.where_span));
        }
    }
}

fn bound_for_templates(ir: &RuleIR) -> BTreeSet<&str> {
    let mut b = ir.lhs_element_vars();
    b.extend(ir.lhs_name_vars());
    b.extend(ir.assigned_vars());
    b
}

/// Variables on a right-hand side are bound by the positive pattern or an
/// assignment.
fn cc2(ir: &RuleIR, out: &mut Vec<Violation>) {
    let bound = bound_for_templates(ir);
    let mut reported = BTreeSet::new();
    for e in &ir.edits {
        let used: Vec<&str> = match e {
            Edit::Replace { rhs: Some(t), .. } => t.vars(),
            Edit::NameReplace { to, .. } => vec![to.text()].into_iter().filter(|t| t.starts_with('$')).collect(),
            _ => continue,
        };
        for var in used {
            if var == "$_" {
                out.push(v(Condition::CC2, "`$_` on the right-hand side of a modification".into(), e.span()));
            } else if !bound.contains(var) && reported.insert(var) {
                out.push(v(Condition::CC2, format!("variable `{var}` is not bound on the left-hand side"), e.span()));
            }
        }
    }
}

/// Variables of the where block come from the positive pattern; assigned
/// variables are fresh and only feed right-hand sides.
fn cc3(ir: &RuleIR, out: &mut Vec<Violation>) {
    let Some(w) = &ir.where_block else { return };
    let span = ir.where_span;
    let mut lhs = ir.lhs_element_vars();
    lhs.extend(ir.lhs_name_vars());
    let name_vars = ir.lhs_name_vars();
    let mut rhs_vars: BTreeSet<&str> = ir.templates().flat_map(|t| t.vars()).collect();
    for e in &ir.edits {
        if let Edit::NameReplace { to: NameConstraint::Var(t), .. } = e {
            rhs_vars.insert(t);
        }
    }
    let mut available = lhs.clone();
    for (target, value) in &w.assignments {
        for var in value.vars() {
            if !available.contains(var) {
                out.push(v(Condition::CC3, format!("variable `{var}` in assignment to `{target}` is not bound"), span));
            }
        }
        if name_vars.contains(target.as_str()) {
            out.push(v(Condition::CC3, format!("assigned variable `{target}` is already bound on the left-hand side"), span));
        }
        if !rhs_vars.contains(target.as_str()) {
            out.push(v(Condition::CC3, format!("assigned variable `{target}` is not used on a right-hand side"), span));
        }
        available.insert(target);
    }
    if let Some(c) = &w.constraint {
        let mut reported = BTreeSet::new();
        for var in c.vars() {
            if !lhs.contains(var) && reported.insert(var) {
                out.push(v(Condition::CC3, format!("variable `{var}` in the constraint is not bound on the left-hand side"), span));
            }
        }
    }
}
