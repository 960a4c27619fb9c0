//! Concrete syntax for the object language.
//!
//! ```text
//! class C extends D {
//!     T f; ...
//!     C(T x, ...) { super(x1, ..., xk); this.f = y; ... }
//!     T m(T x, ...) { c; ... return x; }
//! }
//! T x = new C(a, ...);      // a: variable | null | literal | new C(...)
//! x.f = y;                  // y: variable | null
//! x.m(a, ...);
//! /* POINT */
//! return x;
//! ```
//!
//! Identifiers may contain `$` so nested class names such as
//! `BinaryTree$Node` can be written directly.

use std::collections::HashSet;

use super::{
    ClassDecl, ClassTable, Command, Constructor, Expr, FieldDecl, HeapError, MethodDecl, Operand,
    Param, PrimKind, Program, Type,
};
use crate::graph::PropertyValue;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Sym(char),
    Point,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, HeapError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| HeapError::Syntax {
        line,
        column,
        message,
    };
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            bump!();
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            let start = i;
            loop {
                if i + 1 >= chars.len() {
                    return Err(err(l0, c0, "unterminated comment".into()));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    break;
                }
                bump!();
            }
            let body: String = chars[start..i].iter().collect();
            bump!();
            bump!();
            if body.trim() == "POINT" {
                out.push(Spanned {
                    tok: Tok::Point,
                    line: l0,
                    column: c0,
                });
            }
        } else if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                bump!();
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                column: c0,
            });
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            bump!();
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let mut is_float = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_float = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| err(l0, c0, format!("bad number `{text}`")))?)
            } else {
                Tok::Int(text.parse().map_err(|_| err(l0, c0, format!("bad number `{text}`")))?)
            };
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            });
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(l0, c0, "unterminated string".into())),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let esc = *chars.get(i).ok_or_else(|| err(l0, c0, "unterminated string".into()))?;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Spanned {
                tok: Tok::Str(s),
                line: l0,
                column: c0,
            });
        } else if "{}();,.=".contains(c) {
            bump!();
            out.push(Spanned {
                tok: Tok::Sym(c),
                line: l0,
                column: c0,
            });
        } else {
            return Err(err(l0, c0, format!("unexpected character `{c}`")));
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

/// Raw parse output before name resolution.
struct RawClass {
    decl: ClassDecl,
    super_arg_names: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn error(&self, message: impl Into<String>) -> HeapError {
        let (line, column) = self.here();
        HeapError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), HeapError> {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`, found {}", describe(self.peek()))))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, HeapError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), HeapError> {
        if self.is_keyword(kw) {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`, found {}", describe(self.peek()))))
        }
    }

    fn ty(&mut self) -> Result<Type, HeapError> {
        let name = self.ident()?;
        Ok(match PrimKind::from_name(&name) {
            Some(p) => Type::Prim(p),
            None => Type::Class(name),
        })
    }

    fn params(&mut self) -> Result<Vec<Param>, HeapError> {
        self.expect_sym('(')?;
        let mut out = Vec::new();
        if !self.eat_sym(')') {
            loop {
                let ty = self.ty()?;
                let name = self.ident()?;
                out.push(Param { name, ty });
                if self.eat_sym(')') {
                    break;
                }
                self.expect_sym(',')?;
            }
        }
        Ok(out)
    }

    fn class(&mut self) -> Result<RawClass, HeapError> {
        let (line, column) = self.here();
        self.expect_keyword("class")?;
        let name = self.ident()?;
        let superclass = if self.is_keyword("extends") {
            self.next();
            let s = self.ident()?;
            (s != "Object").then_some(s)
        } else {
            None
        };
        self.expect_sym('{')?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        let mut constructor = None;
        while !self.eat_sym('}') {
            if matches!(self.peek(), Tok::Ident(s) if *s == name) && *self.peek_at(1) == Tok::Sym('(') {
                if constructor.is_some() {
                    return Err(self.error(format!("second constructor for `{name}`")));
                }
                self.next();
                constructor = Some(self.constructor()?);
                continue;
            }
            let ty = self.ty()?;
            let member = self.ident()?;
            if self.eat_sym(';') {
                fields.push(FieldDecl { name: member, ty });
            } else if *self.peek() == Tok::Sym('(') {
                let params = self.params()?;
                self.expect_sym('{')?;
                let (commands, ret) = self.body(true)?;
                self.expect_sym('}')?;
                let ret = ret.ok_or_else(|| self.error("method body must end with `return x;`"))?;
                methods.push(MethodDecl {
                    name: member,
                    params,
                    return_type: ty,
                    body: Expr::from_commands(commands, ret),
                });
            } else {
                return Err(self.error(format!("expected `;` or `(`, found {}", describe(self.peek()))));
            }
        }
        let (constructor, super_arg_names) = match constructor {
            Some(k) => k,
            None if fields.is_empty() && superclass.is_none() => (
                Constructor {
                    params: vec![],
                    super_args: 0,
                    assignments: vec![],
                },
                vec![],
            ),
            None => {
                return Err(HeapError::Syntax {
                    line,
                    column,
                    message: format!("class `{name}` needs a constructor"),
                })
            }
        };
        Ok(RawClass {
            decl: ClassDecl {
                name,
                superclass,
                fields,
                constructor,
                methods,
            },
            super_arg_names,
        })
    }

    fn constructor(&mut self) -> Result<(Constructor, Vec<String>), HeapError> {
        let params = self.params()?;
        self.expect_sym('{')?;
        let mut super_names = Vec::new();
        if self.is_keyword("super") {
            self.next();
            self.expect_sym('(')?;
            if !self.eat_sym(')') {
                loop {
                    super_names.push(self.ident()?);
                    if self.eat_sym(')') {
                        break;
                    }
                    self.expect_sym(',')?;
                }
            }
            self.expect_sym(';')?;
        }
        let mut assignments = Vec::new();
        while !self.eat_sym('}') {
            self.expect_keyword("this")?;
            self.expect_sym('.')?;
            let field = self.ident()?;
            self.expect_sym('=')?;
            let param = self.ident()?;
            self.expect_sym(';')?;
            assignments.push((field, param));
        }
        Ok((
            Constructor {
                params,
                super_args: super_names.len(),
                assignments,
            },
            super_names,
        ))
    }

    fn operand(&mut self) -> Result<Operand, HeapError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "null" => {
                self.next();
                Ok(Operand::Null)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.next();
                Ok(Operand::Literal(PropertyValue::Bool(s == "true")))
            }
            Tok::Ident(s) if s == "new" => {
                self.next();
                let class = self.ident()?;
                let args = self.args()?;
                Ok(Operand::New { class, args })
            }
            Tok::Ident(s) => {
                self.next();
                Ok(Operand::Var(s))
            }
            Tok::Int(v) => {
                self.next();
                Ok(Operand::Literal(PropertyValue::Int(v)))
            }
            Tok::Float(v) => {
                self.next();
                Ok(Operand::Literal(PropertyValue::Float(v)))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Operand::Literal(PropertyValue::Str(s)))
            }
            other => Err(self.error(format!("expected argument, found {}", describe(&other)))),
        }
    }

    fn args(&mut self) -> Result<Vec<Operand>, HeapError> {
        self.expect_sym('(')?;
        let mut out = Vec::new();
        if !self.eat_sym(')') {
            loop {
                out.push(self.operand()?);
                if self.eat_sym(')') {
                    break;
                }
                self.expect_sym(',')?;
            }
        }
        Ok(out)
    }

    /// Commands up to an optional `return x;`.
    fn body(&mut self, in_method: bool) -> Result<(Vec<Command>, Option<String>), HeapError> {
        let (commands, ret, _) = self.body_with_point(in_method)?;
        Ok((commands, ret))
    }

    fn body_with_point(
        &mut self,
        in_method: bool,
    ) -> Result<(Vec<Command>, Option<String>, Option<usize>), HeapError> {
        let mut commands = Vec::new();
        let mut point = None;
        loop {
            match self.peek().clone() {
                Tok::Point => {
                    if in_method {
                        return Err(self.error("`/* POINT */` is only allowed at top level"));
                    }
                    if point.is_some() {
                        return Err(self.error("`/* POINT */` may appear at most once"));
                    }
                    point = Some(commands.len());
                    self.next();
                }
                Tok::Ident(s) if s == "return" => {
                    self.next();
                    let x = self.ident()?;
                    self.expect_sym(';')?;
                    while *self.peek() == Tok::Point && !in_method {
                        if point.is_some() {
                            return Err(self.error("`/* POINT */` may appear at most once"));
                        }
                        point = Some(commands.len());
                        self.next();
                    }
                    return Ok((commands, Some(x), point));
                }
                Tok::Sym('}') | Tok::Eof => return Ok((commands, None, point)),
                Tok::Ident(_) => commands.push(self.command()?),
                other => return Err(self.error(format!("expected command, found {}", describe(&other)))),
            }
        }
    }

    fn command(&mut self) -> Result<Command, HeapError> {
        // `T x = new ...`, `x = new ...`, `x.f = y`, `x.m(...)`
        let first = self.ident()?;
        let var = match self.peek().clone() {
            Tok::Ident(_) => self.ident()?,
            Tok::Sym('=') => first.clone(),
            Tok::Sym('.') => {
                self.next();
                let member = self.ident()?;
                let cmd = if self.eat_sym('=') {
                    let value = match self.ident()?.as_str() {
                        "null" => None,
                        v => Some(v.to_string()),
                    };
                    Command::FieldAssign {
                        target: first,
                        field: member,
                        value,
                    }
                } else {
                    let args = self
                        .args()?
                        .into_iter()
                        .map(|a| match a {
                            Operand::Var(v) => Ok(v),
                            _ => Err(self.error("method arguments must be variables")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Command::Invoke {
                        target: first,
                        method: member,
                        args,
                    }
                };
                self.expect_sym(';')?;
                return Ok(cmd);
            }
            other => return Err(self.error(format!("expected command, found {}", describe(&other)))),
        };
        self.expect_sym('=')?;
        self.expect_keyword("new")?;
        let class = self.ident()?;
        let args = self.args()?;
        self.expect_sym(';')?;
        Ok(Command::New { var, class, args })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Float(v) => format!("`{v}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Point => "`/* POINT */`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a program and checks class-table closure, constructor shape,
/// variable scoping (no redefinition, no use before definition) and
/// constructor arity at allocation sites.
pub fn parse_program(text: &str) -> Result<Program, HeapError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut raw = Vec::new();
    while p.is_keyword("class") {
        raw.push(p.class()?);
    }
    let (commands, result, point) = p.body_with_point(false)?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after program end", describe(p.peek()))));
    }

    let mut classes = ClassTable::new();
    for rc in &raw {
        let k = &rc.decl.constructor;
        let forwarded: Vec<&str> = k.params.iter().take(rc.super_arg_names.len()).map(|p| p.name.as_str()).collect();
        if forwarded != rc.super_arg_names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(HeapError::InvalidClass {
                class: rc.decl.name.clone(),
                reason: format!(
                    "super(...) must forward the first {} constructor parameters in order",
                    rc.super_arg_names.len()
                ),
            });
        }
        classes.insert(rc.decl.clone())?;
    }
    classes.validate()?;

    for class in classes.iter() {
        for m in &class.methods {
            let mut scope: HashSet<String> = m.params.iter().map(|p| p.name.clone()).collect();
            scope.insert("this".into());
            check_scope(&classes, &m.body.commands().into_iter().cloned().collect::<Vec<_>>(), &mut scope)?;
            if let Expr::Return(x) = last(&m.body) {
                if !scope.contains(x) {
                    return Err(HeapError::UnboundVariable(x.clone()));
                }
            }
        }
    }
    let mut scope = HashSet::new();
    check_scope(&classes, &commands, &mut scope)?;
    if let Some(x) = &result {
        if !scope.contains(x) {
            return Err(HeapError::UnboundVariable(x.clone()));
        }
    }
    Ok(Program {
        classes,
        commands,
        result,
        point,
    })
}

fn last(e: &Expr) -> &Expr {
    match e {
        Expr::Seq(_, rest) => last(rest),
        r => r,
    }
}

fn check_scope(ct: &ClassTable, commands: &[Command], scope: &mut HashSet<String>) -> Result<(), HeapError> {
    let bound = |scope: &HashSet<String>, v: &str| {
        if scope.contains(v) {
            Ok(())
        } else {
            Err(HeapError::UnboundVariable(v.to_string()))
        }
    };
    fn check_alloc(ct: &ClassTable, class: &str, args: &[Operand], scope: &HashSet<String>) -> Result<(), HeapError> {
        if !ct.contains(class) {
            return Err(HeapError::UnknownType(class.to_string()));
        }
        let expected = ct.arity(class)?;
        if expected != args.len() {
            return Err(HeapError::ArityMismatch {
                class: class.to_string(),
                expected,
                got: args.len(),
            });
        }
        for a in args {
            match a {
                Operand::Var(v) if !scope.contains(v) => return Err(HeapError::UnboundVariable(v.clone())),
                Operand::New { class, args } => check_alloc(ct, class, args, scope)?,
                _ => {}
            }
        }
        Ok(())
    }
    for c in commands {
        match c {
            Command::New { var, class, args } => {
                check_alloc(ct, class, args, scope)?;
                if var == "this" || !scope.insert(var.clone()) {
                    return Err(HeapError::Redefined(var.clone()));
                }
            }
            Command::FieldAssign { target, value, .. } => {
                bound(scope, target)?;
                if let Some(v) = value {
                    bound(scope, v)?;
                }
            }
            Command::Invoke { target, args, .. } => {
                bound(scope, target)?;
                for a in args {
                    bound(scope, a)?;
                }
            }
        }
    }
    Ok(())
}
