use std::cmp::Ordering;

use super::{Binding, EngineError, Value};
use crate::cypher::{CmpOp, Expr};
use crate::graph::{PropertyGraph, PropertyValue, UID_KEY};

/// Variable lookup and `count` resolution for [`eval`].
pub(crate) trait Env {
    fn var(&self, name: &str) -> Result<Value, EngineError>;
    fn count(&self, arg: Option<&Expr>, graph: &PropertyGraph) -> Result<i64, EngineError>;
}

impl Env for Binding {
    fn var(&self, name: &str) -> Result<Value, EngineError> {
        self.get(name).cloned().ok_or_else(|| EngineError::Unbound(name.to_string()))
    }

    fn count(&self, _: Option<&Expr>, _: &PropertyGraph) -> Result<i64, EngineError> {
        Err(EngineError::MisplacedAggregate)
    }
}

/// Evaluates an expression against one binding. `count` is rejected here;
/// aggregates only exist in a projection.
pub fn eval_expression(expr: &Expr, binding: &Binding, graph: &PropertyGraph) -> Result<Value, EngineError> {
    eval(expr, binding, graph)
}

pub(crate) fn eval(expr: &Expr, env: &dyn Env, graph: &PropertyGraph) -> Result<Value, EngineError> {
    Ok(match expr {
        Expr::Literal(v) => Value::Prop(v.clone()),
        Expr::Null => Value::Null,
        Expr::Var(v) => env.var(v)?,
        Expr::Property(v, key) => match env.var(v)? {
            Value::Null => Value::Null,
            Value::Node(n) => graph
                .node(n)
                .and_then(|n| n.properties.get(key))
                .map_or(Value::Null, |p| Value::Prop(p.clone())),
            Value::Rel(r) => graph
                .rel(r)
                .and_then(|r| r.properties.get(key))
                .map_or(Value::Null, |p| Value::Prop(p.clone())),
            other => {
                return Err(EngineError::TypeMismatch(format!(
                    "property access `{v}.{key}` on a {}",
                    other.kind()
                )))
            }
        },
        Expr::Count(arg) => Value::from(env.count(arg.as_deref(), graph)?),
        Expr::Equals(a, b) => {
            let (a, b) = (eval(a, env, graph)?, eval(b, env, graph)?);
            match (&a, &b) {
                (Value::Null, _) | (_, Value::Null) => Value::Null,
                _ => Value::from(deep_equals(&a, &b, graph)),
            }
        }
        Expr::Compare(op, a, b) => compare(*op, &eval(a, env, graph)?, &eval(b, env, graph)?)?,
        Expr::Not(a) => match truth(&eval(a, env, graph)?, "NOT")? {
            Some(b) => Value::from(!b),
            None => Value::Null,
        },
        Expr::And(a, b) => {
            let (a, b) = (truth(&eval(a, env, graph)?, "AND")?, truth(&eval(b, env, graph)?, "AND")?);
            match (a, b) {
                (Some(false), _) | (_, Some(false)) => Value::from(false),
                (Some(true), Some(true)) => Value::from(true),
                _ => Value::Null,
            }
        }
        Expr::Or(a, b) => {
            let (a, b) = (truth(&eval(a, env, graph)?, "OR")?, truth(&eval(b, env, graph)?, "OR")?);
            match (a, b) {
                (Some(true), _) | (_, Some(true)) => Value::from(true),
                (Some(false), Some(false)) => Value::from(false),
                _ => Value::Null,
            }
        }
    })
}

/// Boolean view of a value; `None` stands for unknown.
pub(crate) fn truth(v: &Value, context: &str) -> Result<Option<bool>, EngineError> {
    match v {
        Value::Null => Ok(None),
        Value::Prop(PropertyValue::Bool(b)) => Ok(Some(*b)),
        other => Err(EngineError::TypeMismatch(format!(
            "{context} expects a boolean, got a {}",
            other.kind()
        ))),
    }
}

/// Value-based equality: two nodes are equal when they are the same node, or
/// share label and every property other than `$uid`.
fn deep_equals(a: &Value, b: &Value, graph: &PropertyGraph) -> bool {
    match (a, b) {
        (Value::Node(x), Value::Node(y)) => {
            if x == y {
                return true;
            }
            let (Some(x), Some(y)) = (graph.node(*x), graph.node(*y)) else {
                return false;
            };
            let visible = |n: &crate::graph::Node| {
                n.properties
                    .iter()
                    .filter(|(k, _)| k.as_str() != UID_KEY)
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect::<Vec<_>>()
            };
            x.label == y.label && visible(x) == visible(y)
        }
        _ => a == b,
    }
}

fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<Value, EngineError> {
    if a.is_null() || b.is_null() {
        return Ok(Value::Null);
    }
    if matches!(op, CmpOp::Eq | CmpOp::Ne) {
        let eq = a == b;
        return Ok(Value::from(if op == CmpOp::Eq { eq } else { !eq }));
    }
    let ord = match (a, b) {
        (Value::Prop(x), Value::Prop(y)) if x.kind() == y.kind() => match (x, y) {
            (PropertyValue::Int(x), PropertyValue::Int(y)) => x.cmp(y),
            (PropertyValue::Str(x), PropertyValue::Str(y)) => x.cmp(y),
            (PropertyValue::Bool(x), PropertyValue::Bool(y)) => x.cmp(y),
            (PropertyValue::Float(x), PropertyValue::Float(y)) => match x.partial_cmp(y) {
                Some(o) => o,
                None => return Ok(Value::Null),
            },
            _ => return Err(mismatch(op, a, b)),
        },
        _ => return Err(mismatch(op, a, b)),
    };
    let holds = match op {
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
        CmpOp::Eq | CmpOp::Ne => unreachable!("handled above"),
    };
    Ok(Value::from(holds))
}

fn mismatch(op: CmpOp, a: &Value, b: &Value) -> EngineError {
    EngineError::TypeMismatch(format!(
        "cannot order a {} against a {} with `{}`",
        a.kind(),
        b.kind(),
        op.symbol()
    ))
}
