use std::collections::{HashMap, HashSet};
use std::fmt;

use super::ast::*;
use crate::graph::UID_KEY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    ClauseOrder,
    UnboundVariable,
    VariableKind,
    Aggregation,
    ReservedProperty,
    WritePattern,
    HopBounds,
    DuplicateColumn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Node,
    Rel,
}

struct Checker {
    bound: HashMap<String, VarKind>,
    out: Vec<Diagnostic>,
}

impl Checker {
    fn report(&mut self, kind: DiagnosticKind, message: impl Into<String>) {
        self.out.push(Diagnostic {
            kind,
            message: message.into(),
        });
    }

    fn bind(&mut self, var: &str, kind: VarKind) {
        match self.bound.get(var) {
            Some(k) if *k != kind => self.report(
                DiagnosticKind::VariableKind,
                format!("`{var}` is used both as a node and as a relationship"),
            ),
            Some(_) => {}
            None => {
                self.bound.insert(var.to_string(), kind);
            }
        }
    }

    fn check_expr(&mut self, e: &Expr, in_return: bool) {
        for v in e.variables() {
            if !self.bound.contains_key(v) {
                self.report(DiagnosticKind::UnboundVariable, format!("variable `{v}` is not bound"));
            }
        }
        if !in_return && e.contains_aggregate() {
            self.report(DiagnosticKind::Aggregation, "count(...) is only allowed in RETURN");
        }
        if nested_aggregate(e, false) {
            self.report(DiagnosticKind::Aggregation, "count(...) cannot be nested");
        }
    }

    fn check_lengths(&mut self, p: &PathPattern) {
        for r in p.rels() {
            match r.length {
                Length::Exact(0) => self.report(DiagnosticKind::HopBounds, "`*0` is empty; use `*0..0` for a zero-length match"),
                Length::Range { min, max: Some(max) } if min > max => {
                    self.report(DiagnosticKind::HopBounds, format!("hop range `*{min}..{max}` is empty"))
                }
                _ => {}
            }
        }
    }

    fn check_match(&mut self, patterns: &[PathPattern]) {
        let mut rel_vars = HashSet::new();
        for p in patterns {
            self.check_lengths(p);
            for n in p.nodes() {
                if let Some(v) = &n.var {
                    self.bind(v, VarKind::Node);
                }
            }
            for r in p.rels() {
                let Some(v) = &r.var else { continue };
                if r.length != Length::One {
                    self.report(
                        DiagnosticKind::VariableKind,
                        format!("variable-length relationship `{v}` cannot be bound to a variable"),
                    );
                }
                if !rel_vars.insert(v.clone()) {
                    self.report(
                        DiagnosticKind::VariableKind,
                        format!("relationship variable `{v}` appears twice in one MATCH"),
                    );
                }
                self.bind(v, VarKind::Rel);
            }
        }
    }

    fn check_write(&mut self, clause: &str, patterns: &[PathPattern]) {
        let before: HashSet<String> = self.bound.keys().cloned().collect();
        let mut introduced: HashSet<String> = HashSet::new();
        for p in patterns {
            for n in p.nodes() {
                if n.properties.iter().any(|(k, _)| k == UID_KEY) {
                    self.report(
                        DiagnosticKind::ReservedProperty,
                        format!("{clause} cannot set the reserved property `{UID_KEY}`"),
                    );
                }
                match &n.var {
                    Some(v) if before.contains(v) || introduced.contains(v) => {
                        if n.label.is_some() || !n.properties.is_empty() {
                            self.report(
                                DiagnosticKind::WritePattern,
                                format!("{clause} cannot redeclare the label or properties of bound variable `{v}`"),
                            );
                        }
                        self.bind(v, VarKind::Node);
                    }
                    var => {
                        if n.label.is_none() {
                            self.report(DiagnosticKind::WritePattern, format!("{clause} needs a label for every new node"));
                        }
                        if let Some(v) = var {
                            introduced.insert(v.clone());
                            self.bind(v, VarKind::Node);
                        }
                    }
                }
            }
            for r in p.rels() {
                if r.types.len() != 1 {
                    self.report(DiagnosticKind::WritePattern, format!("{clause} needs exactly one relationship type"));
                }
                if r.direction == RelDirection::Either {
                    self.report(DiagnosticKind::WritePattern, format!("{clause} needs directed relationships"));
                }
                if r.length != Length::One {
                    self.report(DiagnosticKind::WritePattern, format!("{clause} cannot use variable-length relationships"));
                }
                if let Some(v) = &r.var {
                    if before.contains(v) || !introduced.insert(v.clone()) {
                        self.report(
                            DiagnosticKind::WritePattern,
                            format!("{clause} cannot reuse relationship variable `{v}`"),
                        );
                    }
                    self.bind(v, VarKind::Rel);
                }
            }
        }
    }
}

fn nested_aggregate(e: &Expr, inside: bool) -> bool {
    match e {
        Expr::Count(arg) => inside || arg.as_deref().is_some_and(|a| nested_aggregate(a, true)),
        Expr::Literal(_) | Expr::Null | Expr::Var(_) | Expr::Property(..) => false,
        Expr::Not(a) => nested_aggregate(a, inside),
        Expr::Equals(a, b) | Expr::Compare(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
            nested_aggregate(a, inside) || nested_aggregate(b, inside)
        }
    }
}

/// Checks clause order, variable binding, aggregation placement and write
/// pattern shape. All problems are reported, not just the first.
pub fn validate(query: &Query) -> Result<(), Vec<Diagnostic>> {
    let mut c = Checker {
        bound: HashMap::new(),
        out: Vec::new(),
    };
    let n = query.clauses.len();
    let mut returns = 0;
    for (i, clause) in query.clauses.iter().enumerate() {
        match clause {
            Clause::Match { patterns, .. } => c.check_match(patterns),
            Clause::Where(e) => {
                if !matches!(i.checked_sub(1).map(|j| &query.clauses[j]), Some(Clause::Match { .. })) {
                    c.report(DiagnosticKind::ClauseOrder, "WHERE must directly follow MATCH or OPTIONAL MATCH");
                }
                c.check_expr(e, false);
            }
            Clause::Create(ps) => c.check_write("CREATE", ps),
            Clause::Merge(p) => c.check_write("MERGE", std::slice::from_ref(p)),
            Clause::Return(r) => {
                returns += 1;
                if i + 1 != n {
                    c.report(DiagnosticKind::ClauseOrder, "RETURN must be the last clause");
                }
                let mut columns = HashSet::new();
                for item in &r.items {
                    c.check_expr(&item.expr, true);
                    let col = item.column();
                    if !columns.insert(col.clone()) {
                        c.report(DiagnosticKind::DuplicateColumn, format!("column `{col}` appears twice"));
                    }
                }
            }
        }
    }
    if returns == 0 {
        c.report(DiagnosticKind::ClauseOrder, "query must end with RETURN");
    }
    if c.out.is_empty() {
        Ok(())
    } else {
        Err(c.out)
    }
}
