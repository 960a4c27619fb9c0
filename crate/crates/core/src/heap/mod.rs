//! A Featherweight Java subset whose interpreter state is a [`PropertyGraph`].
//!
//! Programs are class declarations followed by a top-level command sequence.
//! Commands are allocation, field assignment and method invocation; bodies are
//! in assignment normal form and end with `return x;`. Evaluating a command
//! rewrites the graph:
//!
//! * `x.f = y` replaces the `f` relationship of `x`'s object with one pointing
//!   at `y`'s object.
//! * `x.m(a..)` substitutes arguments and `this` into the method body and
//!   evaluates it.
//! * `x = new C(a..)` adds a `Local` binder for `x`, an instance node labeled
//!   `C`, the binding relationship named `x`, one relationship per non-null
//!   reference field and an `instanceof` edge to `C`'s class-metadata node.
//!
//! Two extensions keep the binary-tree examples expressible: primitive
//! constructor arguments (literals) become node properties, and constructor
//! arguments may be nested `new` expressions, which allocate an object without
//! a binder.

mod eval;
mod parse;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{GraphError, PropertyValue};

pub use eval::{eval_expr, mk_fields, run_to_point, step_command, FieldInit, Machine};
pub use parse::parse_program;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeapError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("invalid class `{class}`: {reason}")]
    InvalidClass { class: String, reason: String },
    #[error("no method `{method}` on `{class}` or its superclasses")]
    NoSuchMethod { class: String, method: String },
    #[error("no field `{field}` on `{class}`")]
    NoSuchField { class: String, field: String },
    #[error("`{class}` expects {expected} constructor arguments, got {got}")]
    ArityMismatch {
        class: String,
        expected: usize,
        got: usize,
    },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("variable `{0}` is already defined")]
    Redefined(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimKind {
    Int,
    Float,
    Bool,
    Str,
}

impl PrimKind {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "int" | "long" | "short" | "byte" => Some(PrimKind::Int),
            "double" | "float" => Some(PrimKind::Float),
            "boolean" => Some(PrimKind::Bool),
            "String" => Some(PrimKind::Str),
            _ => None,
        }
    }

    fn accepts(self, value: &PropertyValue) -> bool {
        matches!(
            (self, value),
            (PrimKind::Int, PropertyValue::Int(_))
                | (PrimKind::Float, PropertyValue::Float(_))
                | (PrimKind::Float, PropertyValue::Int(_))
                | (PrimKind::Bool, PropertyValue::Bool(_))
                | (PrimKind::Str, PropertyValue::Str(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Class(String),
    Prim(PrimKind),
}

impl Type {
    pub fn is_reference(&self) -> bool {
        matches!(self, Type::Class(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: Type,
}

/// `C(params) { super(first k params); this.f = p; ... }`
#[derive(Debug, Clone, PartialEq)]
pub struct Constructor {
    pub params: Vec<Param>,
    /// Number of leading parameters forwarded to the superclass constructor.
    pub super_args: usize,
    /// `(field, parameter)` pairs, one per own field in declaration order.
    pub assignments: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: Type,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub superclass: Option<String>,
    pub fields: Vec<FieldDecl>,
    pub constructor: Constructor,
    pub methods: Vec<MethodDecl>,
}

/// Constructor argument.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Var(String),
    Null,
    Literal(PropertyValue),
    New { class: String, args: Vec<Operand> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// `x = new C(args)`
    New {
        var: String,
        class: String,
        args: Vec<Operand>,
    },
    /// `x.f = y` (or `x.f = null`)
    FieldAssign {
        target: String,
        field: String,
        value: Option<String>,
    },
    /// `x.m(args)`
    Invoke {
        target: String,
        method: String,
        args: Vec<String>,
    },
}

/// `c; e` or `return x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Seq(Command, Box<Expr>),
    Return(String),
}

impl Expr {
    /// Builds `c1; c2; ...; return result`.
    pub fn from_commands(commands: Vec<Command>, result: impl Into<String>) -> Expr {
        commands
            .into_iter()
            .rev()
            .fold(Expr::Return(result.into()), |rest, c| Expr::Seq(c, Box::new(rest)))
    }

    pub fn commands(&self) -> Vec<&Command> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Expr::Seq(c, rest) = cur {
            out.push(c);
            cur = rest;
        }
        out
    }
}

/// Fixed class table, closed under superclass references.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassTable {
    classes: BTreeMap<String, ClassDecl>,
    order: Vec<String>,
}

impl ClassTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a class. Closure and acyclicity are checked by [`ClassTable::validate`].
    pub fn insert(&mut self, class: ClassDecl) -> Result<(), HeapError> {
        if self.classes.contains_key(&class.name) {
            return Err(HeapError::InvalidClass {
                class: class.name.clone(),
                reason: "declared twice".into(),
            });
        }
        self.order.push(class.name.clone());
        self.classes.insert(class.name.clone(), class);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    /// Classes in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = &ClassDecl> + '_ {
        self.order.iter().map(|n| &self.classes[n])
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    fn class(&self, name: &str) -> Result<&ClassDecl, HeapError> {
        self.classes
            .get(name)
            .ok_or_else(|| HeapError::UnknownClass(name.to_string()))
    }

    /// Superclass chain starting at `name` itself.
    fn chain(&self, name: &str) -> Result<Vec<&ClassDecl>, HeapError> {
        let mut out = Vec::new();
        let mut cur = Some(name.to_string());
        while let Some(n) = cur {
            let c = self.class(&n)?;
            if out.iter().any(|seen: &&ClassDecl| seen.name == c.name) {
                return Err(HeapError::InvalidClass {
                    class: name.to_string(),
                    reason: "cyclic superclass chain".into(),
                });
            }
            out.push(c);
            cur = c.superclass.clone();
        }
        Ok(out)
    }

    /// All fields of `class`, superclass fields first.
    pub fn fields_of(&self, class: &str) -> Result<Vec<&FieldDecl>, HeapError> {
        let chain = self.chain(class)?;
        Ok(chain.iter().rev().flat_map(|c| c.fields.iter()).collect())
    }

    /// Field names of `class`, superclass fields first.
    pub fn field_names(&self, class: &str) -> Result<Vec<String>, HeapError> {
        Ok(self.fields_of(class)?.into_iter().map(|f| f.name.clone()).collect())
    }

    pub fn field(&self, class: &str, field: &str) -> Result<&FieldDecl, HeapError> {
        self.fields_of(class)?
            .into_iter()
            .find(|f| f.name == field)
            .ok_or_else(|| HeapError::NoSuchField {
                class: class.to_string(),
                field: field.to_string(),
            })
    }

    /// Nearest declaration of `method` along the superclass chain.
    pub fn mbody(&self, method: &str, class: &str) -> Result<&MethodDecl, HeapError> {
        self.chain(class)?
            .into_iter()
            .find_map(|c| c.methods.iter().find(|m| m.name == method))
            .ok_or_else(|| HeapError::NoSuchMethod {
                class: class.to_string(),
                method: method.to_string(),
            })
    }

    /// Total constructor arity (inherited plus own fields).
    pub fn arity(&self, class: &str) -> Result<usize, HeapError> {
        Ok(self.class(class)?.constructor.params.len())
    }

    /// Checks closure, acyclicity, and that every constructor forwards its
    /// first `k` parameters to the superclass and assigns the rest to its own
    /// fields in declaration order.
    pub fn validate(&self) -> Result<(), HeapError> {
        for class in self.iter() {
            self.chain(&class.name)?;
            let check_type = |ty: &Type| match ty {
                Type::Class(n) if !self.contains(n) => Err(HeapError::UnknownType(n.clone())),
                _ => Ok(()),
            };
            for f in &class.fields {
                check_type(&f.ty)?;
            }
            for m in &class.methods {
                check_type(&m.return_type)?;
                for p in &m.params {
                    check_type(&p.ty)?;
                }
            }
            let k = &class.constructor;
            for p in &k.params {
                check_type(&p.ty)?;
            }
            let invalid = |reason: String| HeapError::InvalidClass {
                class: class.name.clone(),
                reason,
            };
            let expected_super = match &class.superclass {
                Some(s) => self.arity(s)?,
                None => 0,
            };
            if k.super_args != expected_super {
                return Err(invalid(format!(
                    "super(...) passes {} arguments, superclass constructor takes {expected_super}",
                    k.super_args
                )));
            }
            if k.params.len() != k.super_args + class.fields.len() {
                return Err(invalid(format!(
                    "constructor takes {} parameters, expected {}",
                    k.params.len(),
                    k.super_args + class.fields.len()
                )));
            }
            if k.assignments.len() != class.fields.len() {
                return Err(invalid("constructor must assign every own field once".into()));
            }
            for (i, ((field, param), decl)) in k.assignments.iter().zip(&class.fields).enumerate() {
                if field != &decl.name {
                    return Err(invalid(format!(
                        "own fields must be assigned in declaration order; expected `{}`, found `{field}`",
                        decl.name
                    )));
                }
                let p = &k.params[k.super_args + i];
                if param != &p.name {
                    return Err(invalid(format!(
                        "`this.{field}` must be assigned from parameter `{}`",
                        p.name
                    )));
                }
                if p.ty != decl.ty {
                    return Err(invalid(format!("parameter `{}` and field `{field}` differ in type", p.name)));
                }
            }
            if let Some(s) = &class.superclass {
                let inherited = self.fields_of(s)?;
                for (p, f) in k.params.iter().zip(inherited) {
                    if p.ty != f.ty {
                        return Err(invalid(format!(
                            "parameter `{}` forwarded to `{}` has the wrong type",
                            p.name, f.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A parsed program: the class table, the top-level commands and the index of
/// the command preceded by a `/* POINT */` marker, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub classes: ClassTable,
    pub commands: Vec<Command>,
    /// Variable named by a trailing top-level `return`, if present.
    pub result: Option<String>,
    /// The marker sits immediately before `commands[point]`; `point ==
    /// commands.len()` marks the end.
    pub point: Option<usize>,
}

impl Program {
    /// The top-level body as an expression. Programs without a trailing
    /// `return` end in `Return("")`, which evaluates like any return.
    pub fn main(&self) -> Expr {
        Expr::from_commands(self.commands.clone(), self.result.clone().unwrap_or_default())
    }
}
