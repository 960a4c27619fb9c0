//! Query evaluation over a [`PropertyGraph`].
//!
//! Clauses run as a pipeline over binding rows, starting from one empty row.
//! Row order is deterministic: matches are enumerated depth first with
//! candidates in ascending node and relationship id order.

mod eval;
mod matcher;
mod value;

use std::collections::HashMap;

use thiserror::Error;

use crate::cypher::{self, BatchPlan, Clause, CypherError, Diagnostic, Expr, NodePattern, PathPattern, Query, RelDirection, ReturnClause};
use crate::graph::{GraphError, NodeId, PropertyGraph, Properties};
use eval::{eval, truth, Env};
use matcher::{compile, Matcher, Row, Scope};

pub use eval::eval_expression;
pub use value::{Binding, ResultTable, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("count(...) is only allowed in RETURN")]
    MisplacedAggregate,
    #[error("cannot attach a relationship to `{0}`, which is null")]
    NullEndpoint(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Parse(#[from] CypherError),
    #[error("invalid query: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join(ds: &[Diagnostic]) -> String {
    ds.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

struct RowEnv<'a> {
    scope: &'a Scope,
    row: &'a Row,
}

impl Env for RowEnv<'_> {
    fn var(&self, name: &str) -> Result<Value, EngineError> {
        self.scope
            .get(name)
            .and_then(|s| self.row[s].clone())
            .ok_or_else(|| EngineError::Unbound(name.to_string()))
    }

    fn count(&self, _: Option<&Expr>, _: &PropertyGraph) -> Result<i64, EngineError> {
        Err(EngineError::MisplacedAggregate)
    }
}

struct GroupEnv<'a> {
    scope: &'a Scope,
    rows: Vec<&'a Row>,
}

impl Env for GroupEnv<'_> {
    fn var(&self, name: &str) -> Result<Value, EngineError> {
        match self.rows.first() {
            Some(row) => RowEnv { scope: self.scope, row }.var(name),
            None => Err(EngineError::Unbound(name.to_string())),
        }
    }

    fn count(&self, arg: Option<&Expr>, graph: &PropertyGraph) -> Result<i64, EngineError> {
        let Some(arg) = arg else {
            return Ok(self.rows.len() as i64);
        };
        let mut n = 0;
        for row in &self.rows {
            if !eval(arg, &RowEnv { scope: self.scope, row }, graph)?.is_null() {
                n += 1;
            }
        }
        Ok(n)
    }
}

fn holds(pred: &Expr, scope: &Scope, row: &Row, graph: &PropertyGraph) -> Result<bool, EngineError> {
    let v = eval(pred, &RowEnv { scope, row }, graph)?;
    Ok(truth(&v, "WHERE")? == Some(true))
}

fn match_rows(
    graph: &PropertyGraph,
    scope: &Scope,
    patterns: &[PathPattern],
    pred: Option<&Expr>,
    input: &mut Row,
) -> Result<Vec<Row>, EngineError> {
    let paths: Vec<_> = patterns.iter().map(|p| compile(p, scope)).collect();
    let m = Matcher { graph, paths: &paths };
    let mut out = Vec::new();
    m.run(input, &mut |row| {
        if pred.map_or(Ok(true), |p| holds(p, scope, row, graph))? {
            out.push(row.clone());
        }
        Ok(())
    })?;
    Ok(out)
}

/// Unbound slots introduced by a pattern, for null-filling OPTIONAL MATCH.
fn new_slots(patterns: &[PathPattern], scope: &Scope, row: &Row) -> Vec<usize> {
    let mut out = Vec::new();
    for p in patterns {
        let names = p.nodes().filter_map(|n| n.var.as_deref()).chain(p.rels().filter_map(|r| r.var.as_deref()));
        for v in names {
            if let Some(s) = scope.get(v) {
                if row[s].is_none() && !out.contains(&s) {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn materialize(
    n: &NodePattern,
    scope: &Scope,
    row: &mut Row,
    graph: &mut PropertyGraph,
) -> Result<NodeId, EngineError> {
    let slot = n.var.as_deref().and_then(|v| scope.get(v));
    match slot.and_then(|s| row[s].clone()) {
        Some(Value::Node(id)) => Ok(id),
        Some(_) => Err(EngineError::NullEndpoint(n.var.clone().unwrap_or_default())),
        None => {
            let properties: Properties = n.properties.iter().cloned().collect();
            let id = graph.add_node(n.label.clone().unwrap_or_default(), properties)?;
            if let Some(s) = slot {
                row[s] = Some(Value::Node(id));
            }
            Ok(id)
        }
    }
}

fn create_path(p: &PathPattern, scope: &Scope, row: &mut Row, graph: &mut PropertyGraph) -> Result<(), EngineError> {
    let mut prev = materialize(&p.start, scope, row, graph)?;
    for (r, n) in &p.steps {
        let next = materialize(n, scope, row, graph)?;
        let ty = r.types.first().cloned().unwrap_or_default();
        let (s, e) = match r.direction {
            RelDirection::Left => (next, prev),
            _ => (prev, next),
        };
        let id = graph.add_relationship(ty, s, e, Properties::new())?;
        if let Some(slot) = r.var.as_deref().and_then(|v| scope.get(v)) {
            row[slot] = Some(Value::Rel(id));
        }
        prev = next;
    }
    Ok(())
}

fn project(ret: &ReturnClause, scope: &Scope, rows: &[Row], graph: &PropertyGraph) -> Result<ResultTable, EngineError> {
    let columns = ret.items.iter().map(|i| i.column()).collect();
    let mut out = Vec::new();
    if !ret.items.iter().any(|i| i.expr.contains_aggregate()) {
        for row in rows {
            let env = RowEnv { scope, row };
            out.push(ret.items.iter().map(|i| eval(&i.expr, &env, graph)).collect::<Result<Vec<_>, _>>()?);
        }
    } else {
        let mut keys: Vec<Expr> = Vec::new();
        for item in &ret.items {
            if item.expr.contains_aggregate() {
                for v in item.expr.free_variables() {
                    let k = Expr::Var(v.to_string());
                    if !keys.contains(&k) {
                        keys.push(k);
                    }
                }
            } else if !keys.contains(&item.expr) {
                keys.push(item.expr.clone());
            }
        }
        let mut groups: Vec<Vec<&Row>> = Vec::new();
        let mut index: HashMap<Vec<Value>, usize> = HashMap::new();
        for row in rows {
            let env = RowEnv { scope, row };
            let key = keys.iter().map(|k| eval(k, &env, graph)).collect::<Result<Vec<_>, _>>()?;
            let g = *index.entry(key).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(row);
        }
        if groups.is_empty() && keys.is_empty() {
            groups.push(Vec::new());
        }
        for rows in groups {
            let env = GroupEnv { scope, rows };
            out.push(ret.items.iter().map(|i| eval(&i.expr, &env, graph)).collect::<Result<Vec<_>, _>>()?);
        }
    }
    let table = ResultTable { columns, rows: out };
    Ok(if ret.distinct { table.distinct() } else { table })
}

/// Runs a validated query, applying any writes to `graph`.
pub fn execute(query: &Query, graph: &mut PropertyGraph) -> Result<ResultTable, EngineError> {
    let mut scope = Scope::default();
    for c in &query.clauses {
        match c {
            Clause::Match { patterns, .. } | Clause::Create(patterns) => patterns.iter().for_each(|p| scope.declare_path(p)),
            Clause::Merge(p) => scope.declare_path(p),
            Clause::Where(_) | Clause::Return(_) => {}
        }
    }
    let mut rows: Vec<Row> = vec![vec![None; scope.len()]];
    let mut i = 0;
    while i < query.clauses.len() {
        match &query.clauses[i] {
            Clause::Match { patterns, optional } => {
                let pred = match query.clauses.get(i + 1) {
                    Some(Clause::Where(e)) => {
                        i += 1;
                        Some(e)
                    }
                    _ => None,
                };
                let mut next = Vec::new();
                for mut row in rows {
                    let found = match_rows(graph, &scope, patterns, pred, &mut row)?;
                    if found.is_empty() && *optional {
                        for s in new_slots(patterns, &scope, &row) {
                            row[s] = Some(Value::Null);
                        }
                        next.push(row);
                    } else {
                        next.extend(found);
                    }
                }
                rows = next;
            }
            Clause::Where(e) => {
                let mut kept = Vec::new();
                for row in rows {
                    if holds(e, &scope, &row, graph)? {
                        kept.push(row);
                    }
                }
                rows = kept;
            }
            Clause::Create(patterns) => {
                for row in &mut rows {
                    for p in patterns {
                        create_path(p, &scope, row, graph)?;
                    }
                }
            }
            Clause::Merge(p) => {
                let mut next = Vec::new();
                for mut row in rows {
                    let found = match_rows(graph, &scope, std::slice::from_ref(p), None, &mut row)?;
                    if found.is_empty() {
                        create_path(p, &scope, &mut row, graph)?;
                        next.push(row);
                    } else {
                        next.extend(found);
                    }
                }
                rows = next;
            }
            Clause::Return(ret) => return project(ret, &scope, &rows, graph),
        }
        i += 1;
    }
    Ok(ResultTable::default())
}

/// Parses, validates and executes query text.
pub fn run(text: &str, graph: &mut PropertyGraph) -> Result<ResultTable, EngineError> {
    let q = cypher::parse(text)?;
    cypher::validate(&q).map_err(EngineError::Invalid)?;
    execute(&q, graph)
}

/// Runs each per-element query of a batch and bag-unions the rows. Columns
/// come from the prototype, so an empty batch still has a header.
pub fn execute_batch(plan: &BatchPlan, graph: &mut PropertyGraph) -> Result<ResultTable, EngineError> {
    let proto = cypher::parse(&plan.prototype)?;
    cypher::validate(&proto).map_err(EngineError::Invalid)?;
    let columns = match proto.clauses.last() {
        Some(Clause::Return(r)) => r.items.iter().map(|i| i.column()).collect(),
        _ => Vec::new(),
    };
    let mut table = ResultTable { columns, rows: Vec::new() };
    for text in &plan.queries {
        table.rows.extend(run(text, graph)?.rows);
    }
    Ok(table)
}

/// Matches `patterns` extending `seed`. With `optional`, an empty match
/// yields the seed with the pattern's new variables set to null.
pub fn match_pattern(
    graph: &PropertyGraph,
    patterns: &[PathPattern],
    seed: &Binding,
    optional: bool,
) -> Result<Vec<Binding>, EngineError> {
    let mut scope = Scope::default();
    for k in seed.keys() {
        scope.slot(k);
    }
    patterns.iter().for_each(|p| scope.declare_path(p));
    let mut row: Row = vec![None; scope.len()];
    for (k, v) in seed {
        row[scope.slot(k)] = Some(v.clone());
    }
    let mut found = match_rows(graph, &scope, patterns, None, &mut row)?;
    if found.is_empty() && optional {
        for s in new_slots(patterns, &scope, &row) {
            row[s] = Some(Value::Null);
        }
        found.push(row);
    }
    Ok(found
        .into_iter()
        .map(|r| {
            scope
                .names
                .iter()
                .zip(r)
                .filter_map(|(n, v)| Some((n.clone(), v?)))
                .collect()
        })
        .collect())
}

/// A static finding about a query that is legal but likely wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lint {
    pub message: String,
}

/// Warns when a query creates nodes but returns none of them: nothing then
/// refers to the new objects, so a garbage collector would reclaim them.
pub fn lint(query: &Query) -> Vec<Lint> {
    let mut bound: Vec<&str> = Vec::new();
    let mut created: Vec<&str> = Vec::new();
    let mut anonymous = false;
    let mut returned: Vec<&str> = Vec::new();
    for c in &query.clauses {
        match c {
            Clause::Match { patterns, .. } => {
                for p in patterns {
                    bound.extend(p.nodes().filter_map(|n| n.var.as_deref()));
                }
            }
            Clause::Create(_) | Clause::Merge(_) => {
                let ps = match c {
                    Clause::Merge(p) => std::slice::from_ref(p),
                    Clause::Create(ps) => ps.as_slice(),
                    _ => unreachable!(),
                };
                for n in ps.iter().flat_map(|p| p.nodes()) {
                    match n.var.as_deref() {
                        Some(v) if bound.contains(&v) || created.contains(&v) => {}
                        Some(v) => created.push(v),
                        None => anonymous = true,
                    }
                }
            }
            Clause::Return(r) => {
                for item in &r.items {
                    returned.extend(item.expr.variables());
                }
            }
            Clause::Where(_) => {}
        }
    }
    if created.is_empty() && !anonymous {
        return Vec::new();
    }
    if created.iter().any(|v| returned.contains(v)) {
        return Vec::new();
    }
    vec![Lint {
        message: "query creates nodes but returns none of them; they are unreachable and would be garbage collected"
            .into(),
    }]
}
