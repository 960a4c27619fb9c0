//! Graph semantics of commands and expressions.

use std::collections::HashMap;

use super::{parse_program, ClassTable, Command, Expr, HeapError, Operand, Type};
use crate::graph::{
    props, NodeId, Properties, PropertyGraph, PropertyValue, CLASS_LABEL, INSTANCEOF, LOCAL_LABEL,
};

/// Relationships and folded primitive properties produced by a constructor
/// call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldInit {
    /// `(field, start, end)`; every relationship has an empty property map.
    pub relationships: Vec<(String, NodeId, NodeId)>,
    pub properties: Properties,
}

/// Node the variable `x` is bound to: the end of the relationship labeled `x`
/// leaving a `Local` binder.
pub fn binding_of(graph: &PropertyGraph, var: &str) -> Option<NodeId> {
    graph
        .nodes_with_label(LOCAL_LABEL)
        .iter()
        .rev()
        .flat_map(|b| graph.outgoing(*b).iter().rev())
        .filter_map(|r| graph.rel(*r))
        .find(|r| r.label == var)
        .map(|r| r.end)
}

fn bound(graph: &PropertyGraph, var: &str) -> Result<NodeId, HeapError> {
    binding_of(graph, var).ok_or_else(|| HeapError::UnboundVariable(var.to_string()))
}

/// Field relationships for `instance`, a fresh object of `class` constructed
/// with `args`. The first `k` arguments initialise the superclass (recursively),
/// the rest the class's own fields. Argument variables resolve through their
/// binding relationships; `null` references produce no relationship and
/// primitive arguments become properties.
pub fn mk_fields(
    graph: &PropertyGraph,
    instance: NodeId,
    class: &str,
    args: &[Operand],
    ct: &ClassTable,
) -> Result<FieldInit, HeapError> {
    let resolved = args
        .iter()
        .map(|a| match a {
            Operand::Var(v) => bound(graph, v).map(Resolved::Node),
            Operand::Null => Ok(Resolved::Null),
            Operand::Literal(v) => Ok(Resolved::Prim(v.clone())),
            Operand::New { class, .. } => Err(HeapError::TypeMismatch(format!(
                "nested `new {class}(...)` must be allocated before computing fields"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut init = FieldInit::default();
    fields_rec(instance, class, &resolved, ct, &mut init)?;
    Ok(init)
}

#[derive(Debug, Clone)]
enum Resolved {
    Node(NodeId),
    Null,
    Prim(PropertyValue),
}

fn fields_rec(
    instance: NodeId,
    class: &str,
    args: &[Resolved],
    ct: &ClassTable,
    out: &mut FieldInit,
) -> Result<(), HeapError> {
    let decl = ct
        .get(class)
        .ok_or_else(|| HeapError::UnknownClass(class.to_string()))?;
    let k = decl.constructor.super_args;
    let expected = decl.constructor.params.len();
    if args.len() != expected {
        return Err(HeapError::ArityMismatch {
            class: class.to_string(),
            expected,
            got: args.len(),
        });
    }
    if let Some(sup) = &decl.superclass {
        fields_rec(instance, sup, &args[..k], ct, out)?;
    }
    for (field, arg) in decl.fields.iter().zip(&args[k..]) {
        match (&field.ty, arg) {
            (Type::Class(_), Resolved::Node(target)) => {
                out.relationships.push((field.name.clone(), instance, *target))
            }
            (Type::Class(_), Resolved::Null) => {}
            (Type::Prim(kind), Resolved::Prim(v)) if kind.accepts(v) => {
                let v = match (kind, v) {
                    (super::PrimKind::Float, PropertyValue::Int(i)) => PropertyValue::Float(*i as f64),
                    _ => v.clone(),
                };
                out.properties.insert(field.name.clone(), v);
            }
            (ty, arg) => {
                return Err(HeapError::TypeMismatch(format!(
                    "field `{class}.{}` of type {ty:?} cannot take {arg:?}",
                    field.name
                )))
            }
        }
    }
    Ok(())
}

/// Interpreter over a fixed class table.
///
/// Variables introduced inside method bodies are renamed per invocation
/// (`x#<frame>`) so repeated or recursive calls never share a binder name.
pub struct Machine<'ct> {
    classes: &'ct ClassTable,
    next_frame: usize,
}

impl<'ct> Machine<'ct> {
    /// Creates a machine whose frame counter continues past any renamed
    /// binders already present in `graph`.
    pub fn new(classes: &'ct ClassTable, graph: &PropertyGraph) -> Self {
        let next_frame = graph
            .nodes_with_label(LOCAL_LABEL)
            .iter()
            .flat_map(|b| graph.outgoing(*b))
            .filter_map(|r| graph.rel(*r))
            .filter_map(|r| r.label.as_str().rsplit_once('#').and_then(|(_, n)| n.parse::<usize>().ok()))
            .max()
            .map_or(0, |m| m + 1);
        Machine { classes, next_frame }
    }

    pub fn eval(&mut self, graph: &mut PropertyGraph, expr: &Expr) -> Result<(), HeapError> {
        let mut cur = expr;
        while let Expr::Seq(cmd, rest) = cur {
            self.step(graph, cmd)?;
            cur = rest;
        }
        Ok(())
    }

    pub fn step(&mut self, graph: &mut PropertyGraph, cmd: &Command) -> Result<(), HeapError> {
        match cmd {
            Command::FieldAssign {
                target,
                field,
                value,
            } => {
                let nx = bound(graph, target)?;
                let class = graph.node(nx).expect("bound node exists").label.to_string();
                let decl = self.classes.field(&class, field)?;
                if !decl.ty.is_reference() {
                    return Err(HeapError::TypeMismatch(format!(
                        "`{class}.{field}` is primitive; only references can be assigned"
                    )));
                }
                match value {
                    Some(y) => {
                        let ny = bound(graph, y)?;
                        graph.set_field_edge(field, nx, ny)?;
                    }
                    None => {
                        graph.clear_field(field, nx)?;
                    }
                }
                Ok(())
            }
            Command::Invoke {
                target,
                method,
                args,
            } => {
                let nx = bound(graph, target)?;
                let class = graph.node(nx).expect("bound node exists").label.to_string();
                let m = self.classes.mbody(method, &class)?;
                if m.params.len() != args.len() {
                    return Err(HeapError::ArityMismatch {
                        class: format!("{class}.{method}"),
                        expected: m.params.len(),
                        got: args.len(),
                    });
                }
                let frame = self.next_frame;
                self.next_frame += 1;
                let mut rename: HashMap<String, String> = m
                    .params
                    .iter()
                    .map(|p| p.name.clone())
                    .zip(args.iter().cloned())
                    .collect();
                rename.insert("this".into(), target.clone());
                for c in m.body.commands() {
                    if let Command::New { var, .. } = c {
                        rename.insert(var.clone(), format!("{var}#{frame}"));
                    }
                }
                let body = substitute(&m.body, &rename);
                self.eval(graph, &body)
            }
            Command::New { var, class, args } => {
                let instance = self.allocate(graph, class, args)?;
                let binder = graph.add_node(LOCAL_LABEL, Properties::new())?;
                graph.add_relationship(var.as_str(), binder, instance, Properties::new())?;
                Ok(())
            }
        }
    }

    /// Allocates an instance (and any nested allocations among its
    /// arguments) without a binder.
    fn allocate(&mut self, graph: &mut PropertyGraph, class: &str, args: &[Operand]) -> Result<NodeId, HeapError> {
        if !self.classes.contains(class) {
            return Err(HeapError::UnknownClass(class.to_string()));
        }
        let mut flat = Vec::with_capacity(args.len());
        let mut nested = Vec::new();
        for a in args {
            match a {
                Operand::New { class, args } => {
                    let n = self.allocate(graph, class, args)?;
                    nested.push(n);
                    flat.push(None);
                }
                other => flat.push(Some(other.clone())),
            }
        }
        let instance = graph.add_node(class, Properties::new())?;
        let resolved = {
            let mut nested = nested.into_iter();
            flat.into_iter()
                .map(|a| match a {
                    Some(Operand::Var(v)) => bound(graph, &v).map(Resolved::Node),
                    Some(Operand::Null) => Ok(Resolved::Null),
                    Some(Operand::Literal(v)) => Ok(Resolved::Prim(v)),
                    Some(Operand::New { .. }) => unreachable!("nested allocations resolved above"),
                    None => Ok(Resolved::Node(nested.next().expect("one node per nested allocation"))),
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        let mut init = FieldInit::default();
        fields_rec(instance, class, &resolved, self.classes, &mut init)?;
        for (k, v) in init.properties {
            graph.set_property(instance, k, v)?;
        }
        for (field, start, end) in init.relationships {
            graph.add_relationship(field, start, end, Properties::new())?;
        }
        let meta = class_node(graph, class)?;
        graph.add_relationship(INSTANCEOF, instance, meta, Properties::new())?;
        Ok(instance)
    }
}

/// The class-metadata node for `class`, created on first use.
fn class_node(graph: &mut PropertyGraph, class: &str) -> Result<NodeId, HeapError> {
    let existing = graph.nodes_with_label(CLASS_LABEL).iter().copied().find(|n| {
        graph.node(*n).and_then(|n| n.properties.get("name")).and_then(PropertyValue::as_str) == Some(class)
    });
    match existing {
        Some(n) => Ok(n),
        None => Ok(graph.add_node(CLASS_LABEL, props([("name", class)]))?),
    }
}

fn substitute(expr: &Expr, rename: &HashMap<String, String>) -> Expr {
    let r = |v: &String| rename.get(v).cloned().unwrap_or_else(|| v.clone());
    fn operand(o: &Operand, rename: &HashMap<String, String>) -> Operand {
        match o {
            Operand::Var(v) => Operand::Var(rename.get(v).cloned().unwrap_or_else(|| v.clone())),
            Operand::New { class, args } => Operand::New {
                class: class.clone(),
                args: args.iter().map(|a| operand(a, rename)).collect(),
            },
            other => other.clone(),
        }
    }
    match expr {
        Expr::Return(x) => Expr::Return(r(x)),
        Expr::Seq(c, rest) => {
            let c = match c {
                Command::New { var, class, args } => Command::New {
                    var: r(var),
                    class: class.clone(),
                    args: args.iter().map(|a| operand(a, rename)).collect(),
                },
                Command::FieldAssign {
                    target,
                    field,
                    value,
                } => Command::FieldAssign {
                    target: r(target),
                    field: field.clone(),
                    value: value.as_ref().map(r),
                },
                Command::Invoke {
                    target,
                    method,
                    args,
                } => Command::Invoke {
                    target: r(target),
                    method: method.clone(),
                    args: args.iter().map(r).collect(),
                },
            };
            Expr::Seq(c, Box::new(substitute(rest, rename)))
        }
    }
}

/// Applies one command to `graph`.
pub fn step_command(graph: &mut PropertyGraph, cmd: &Command, ct: &ClassTable) -> Result<(), HeapError> {
    Machine::new(ct, graph).step(graph, cmd)
}

/// Evaluates `c1; ...; return x` against `graph`. `return` leaves the graph
/// unchanged.
pub fn eval_expr(graph: &mut PropertyGraph, expr: &Expr, ct: &ClassTable) -> Result<(), HeapError> {
    Machine::new(ct, graph).eval(graph, expr)
}

/// Parses `text` and runs its top-level commands from an empty graph up to
/// the `/* POINT */` marker, or to the end when there is none.
pub fn run_to_point(text: &str) -> Result<PropertyGraph, HeapError> {
    let program = parse_program(text)?;
    let stop = program.point.unwrap_or(program.commands.len());
    let mut graph = PropertyGraph::new();
    let mut machine = Machine::new(&program.classes, &graph);
    for cmd in &program.commands[..stop] {
        machine.step(&mut graph, cmd)?;
    }
    Ok(graph)
}
