//! Query syntax tree and its canonical text form.

use std::fmt;

use crate::graph::PropertyValue;

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Clause {
    Create(Vec<PathPattern>),
    Merge(PathPattern),
    Match { patterns: Vec<PathPattern>, optional: bool },
    Where(Expr),
    Return(ReturnClause),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnClause {
    pub distinct: bool,
    pub items: Vec<ReturnItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnItem {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl ReturnItem {
    /// Column name: the alias, or the canonical text of the expression.
    pub fn column(&self) -> String {
        self.alias.clone().unwrap_or_else(|| self.expr.to_string())
    }
}

/// A node followed by zero or more `(relationship, node)` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPattern {
    pub start: NodePattern,
    pub steps: Vec<(RelPattern, NodePattern)>,
}

impl PathPattern {
    pub fn nodes(&self) -> impl Iterator<Item = &NodePattern> + '_ {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, n)| n))
    }

    pub fn rels(&self) -> impl Iterator<Item = &RelPattern> + '_ {
        self.steps.iter().map(|(r, _)| r)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodePattern {
    pub var: Option<String>,
    pub label: Option<String>,
    pub properties: Vec<(String, PropertyValue)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelDirection {
    /// `-[]->`
    Right,
    /// `<-[]-`
    Left,
    /// `-[]-`
    Either,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Length {
    One,
    /// `*n`
    Exact(u32),
    /// `*lo..hi`, `*lo..`, `*..hi`
    Range { min: u32, max: Option<u32> },
    /// bare `*`, one or more hops
    Unbounded,
}

impl Length {
    pub fn bounds(self) -> (u32, Option<u32>) {
        match self {
            Length::One => (1, Some(1)),
            Length::Exact(n) => (n, Some(n)),
            Length::Range { min, max } => (min, max),
            Length::Unbounded => (1, None),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelPattern {
    pub var: Option<String>,
    /// Alternatives; empty matches any type.
    pub types: Vec<String>,
    pub direction: RelDirection,
    pub length: Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(PropertyValue),
    Null,
    Var(String),
    Property(String, String),
    /// `count(*)` when `None`.
    Count(Option<Box<Expr>>),
    Equals(Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn contains_aggregate(&self) -> bool {
        match self {
            Expr::Count(_) => true,
            Expr::Literal(_) | Expr::Null | Expr::Var(_) | Expr::Property(..) => false,
            Expr::Not(e) => e.contains_aggregate(),
            Expr::Equals(a, b) | Expr::Compare(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.contains_aggregate() || b.contains_aggregate()
            }
        }
    }

    /// Variables referenced, in order of first appearance.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out, true);
        out
    }

    /// Variables referenced outside any `count(...)`.
    pub fn free_variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out, false);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>, inside_count: bool) {
        let mut push = |v: &'a str| {
            if !out.contains(&v) {
                out.push(v);
            }
        };
        match self {
            Expr::Var(v) | Expr::Property(v, _) => push(v),
            Expr::Literal(_) | Expr::Null => {}
            Expr::Count(e) => {
                if inside_count {
                    if let Some(e) = e {
                        e.collect_vars(out, true);
                    }
                }
            }
            Expr::Not(e) => e.collect_vars(out, inside_count),
            Expr::Equals(a, b) | Expr::Compare(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_vars(out, inside_count);
                b.collect_vars(out, inside_count);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Compare(..) => 4,
            _ => 5,
        }
    }
}

/// Writes `name` bare when it is a plain identifier, backticked otherwise.
pub fn write_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_identifier(name) {
        f.write_str(name)
    } else {
        write!(f, "`{}`", name.replace('`', "``"))
    }
}

pub fn is_plain_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !super::lexer::is_keyword(name)
}

fn write_literal(f: &mut fmt::Formatter<'_>, v: &PropertyValue) -> fmt::Result {
    match v {
        PropertyValue::Str(s) => {
            f.write_str("'")?;
            for c in s.chars() {
                match c {
                    '\'' => f.write_str("\\'")?,
                    '\\' => f.write_str("\\\\")?,
                    '\n' => f.write_str("\\n")?,
                    '\t' => f.write_str("\\t")?,
                    '\r' => f.write_str("\\r")?,
                    c => write!(f, "{c}")?,
                }
            }
            f.write_str("'")
        }
        PropertyValue::List(items) => {
            f.write_str("[")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_literal(f, item)?;
            }
            f.write_str("]")
        }
        other => write!(f, "{other}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Literal(v) => write_literal(f, v),
            Expr::Null => f.write_str("null"),
            Expr::Var(v) => write_name(f, v),
            Expr::Property(v, p) => {
                write_name(f, v)?;
                f.write_str(".")?;
                write_name(f, p)
            }
            Expr::Count(None) => f.write_str("count(*)"),
            Expr::Count(Some(e)) => write!(f, "count({e})"),
            Expr::Equals(a, b) => write!(f, "equals({a}, {b})"),
            Expr::Compare(op, a, b) => {
                child(f, a, 5)?;
                write!(f, " {} ", op.symbol())?;
                child(f, b, 5)
            }
            Expr::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" AND ")?;
                child(f, b, 3)
            }
            Expr::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" OR ")?;
                child(f, b, 2)
            }
            Expr::Not(e) => {
                f.write_str("NOT ")?;
                child(f, e, 3)
            }
        }
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        if let Some(v) = &self.var {
            write_name(f, v)?;
        }
        if let Some(l) = &self.label {
            f.write_str(":")?;
            write_name(f, l)?;
        }
        if !self.properties.is_empty() {
            if self.var.is_some() || self.label.is_some() {
                f.write_str(" ")?;
            }
            f.write_str("{")?;
            for (i, (k, v)) in self.properties.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_name(f, k)?;
                f.write_str(": ")?;
                write_literal(f, v)?;
            }
            f.write_str("}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for RelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.direction == RelDirection::Left { "<-" } else { "-" })?;
        let bare = self.var.is_none() && self.types.is_empty() && self.length == Length::One;
        if !bare {
            f.write_str("[")?;
            if let Some(v) = &self.var {
                write_name(f, v)?;
            }
            for (i, t) in self.types.iter().enumerate() {
                f.write_str(if i == 0 { ":" } else { "|" })?;
                write_name(f, t)?;
            }
            match self.length {
                Length::One => {}
                Length::Unbounded => f.write_str("*")?,
                Length::Exact(n) => write!(f, "*{n}")?,
                Length::Range { min, max } => {
                    write!(f, "*{min}..")?;
                    if let Some(max) = max {
                        write!(f, "{max}")?;
                    }
                }
            }
            f.write_str("]")?;
        }
        f.write_str(if self.direction == RelDirection::Right { "->" } else { "-" })
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for (r, n) in &self.steps {
            write!(f, "{r}{n}")?;
        }
        Ok(())
    }
}

fn write_patterns(f: &mut fmt::Formatter<'_>, patterns: &[PathPattern]) -> fmt::Result {
    for (i, p) in patterns.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{p}")?;
    }
    Ok(())
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Create(ps) => {
                f.write_str("CREATE ")?;
                write_patterns(f, ps)
            }
            Clause::Merge(p) => write!(f, "MERGE {p}"),
            Clause::Match { patterns, optional } => {
                f.write_str(if *optional { "OPTIONAL MATCH " } else { "MATCH " })?;
                write_patterns(f, patterns)
            }
            Clause::Where(e) => write!(f, "WHERE {e}"),
            Clause::Return(r) => {
                f.write_str(if r.distinct { "RETURN DISTINCT " } else { "RETURN " })?;
                for (i, item) in r.items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", item.expr)?;
                    if let Some(a) = &item.alias {
                        f.write_str(" AS ")?;
                        write_name(f, a)?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
