use super::ast::*;
use super::lexer::{is_keyword, tokenize, Spanned, Tok};
use super::CypherError;
use crate::graph::PropertyValue;

/// Parses query text into a [`Query`]. Constructs outside the supported subset
/// fail with [`CypherError::Unsupported`].
pub fn parse(text: &str) -> Result<Query, CypherError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { text, tokens, pos: 0 };
    p.query()
}

struct Parser<'t> {
    text: &'t str,
    tokens: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, CypherError>;

const CLAUSE_STARTS: &[&str] = &["MATCH", "OPTIONAL MATCH", "WHERE", "CREATE", "MERGE", "RETURN"];
const UNSUPPORTED_CLAUSES: &[&str] = &[
    "DELETE", "DETACH", "SET", "REMOVE", "WITH", "UNWIND", "ORDER", "LIMIT", "SKIP", "UNION", "CALL",
    "FOREACH", "LOAD",
];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> CypherError {
        let found = self.peek();
        if let Tok::Sigil(c @ ('$' | '@')) = found {
            return CypherError::syntax(
                self.text,
                self.offset(),
                format!("unexpanded positional marker `{c}`"),
                Vec::new(),
            );
        }
        if let Tok::Sigil(c) = found {
            return self.unsupported(format!("operator `{c}`"));
        }
        CypherError::syntax(
            self.text,
            self.offset(),
            format!("unexpected {found}"),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn unsupported(&self, feature: impl Into<String>) -> CypherError {
        CypherError::unsupported(self.text, self.offset(), feature.into())
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&[&tok.to_string()]))
        }
    }

    /// Identifier that is not a keyword, or any backtick-quoted name.
    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(w) if !is_keyword(&w) => {
                self.bump();
                Ok(w)
            }
            Tok::Quoted(w) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.error(&[what])),
        }
    }

    /// Property keys and labels may be keywords.
    fn any_name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(w) | Tok::Quoted(w) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn query(&mut self) -> PResult<Query> {
        let mut clauses = Vec::new();
        loop {
            if matches!(self.peek(), Tok::Eof) {
                break;
            }
            if self.eat(&Tok::Semicolon) {
                if !matches!(self.peek(), Tok::Eof) {
                    return Err(self.unsupported("multiple statements"));
                }
                break;
            }
            clauses.push(self.clause()?);
        }
        if clauses.is_empty() {
            return Err(self.error(CLAUSE_STARTS));
        }
        Ok(Query { clauses })
    }

    fn clause(&mut self) -> PResult<Clause> {
        if self.eat_kw("MATCH") {
            return Ok(Clause::Match {
                patterns: self.patterns()?,
                optional: false,
            });
        }
        if self.is_kw("OPTIONAL") {
            self.bump();
            if !self.eat_kw("MATCH") {
                return Err(self.error(&["MATCH"]));
            }
            return Ok(Clause::Match {
                patterns: self.patterns()?,
                optional: true,
            });
        }
        if self.eat_kw("WHERE") {
            return Ok(Clause::Where(self.expr()?));
        }
        if self.eat_kw("CREATE") {
            return Ok(Clause::Create(self.patterns()?));
        }
        if self.eat_kw("MERGE") {
            let p = self.pattern()?;
            if self.is_kw("ON") {
                return Err(self.unsupported("ON CREATE / ON MATCH"));
            }
            return Ok(Clause::Merge(p));
        }
        if self.eat_kw("RETURN") {
            return self.return_clause();
        }
        if let Tok::Ident(w) = self.peek() {
            if let Some(kw) = UNSUPPORTED_CLAUSES.iter().find(|k| k.eq_ignore_ascii_case(w)) {
                return Err(self.unsupported(format!("{kw} clause")));
            }
        }
        Err(self.error(CLAUSE_STARTS))
    }

    fn return_clause(&mut self) -> PResult<Clause> {
        let distinct = self.eat_kw("DISTINCT");
        if matches!(self.peek(), Tok::Star) {
            return Err(self.unsupported("RETURN *"));
        }
        let mut items = Vec::new();
        loop {
            let expr = self.expr()?;
            let alias = if self.eat_kw("AS") {
                Some(self.name("alias")?)
            } else {
                None
            };
            items.push(ReturnItem { expr, alias });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(Clause::Return(ReturnClause { distinct, items }))
    }

    fn patterns(&mut self) -> PResult<Vec<PathPattern>> {
        let mut out = vec![self.pattern()?];
        while self.eat(&Tok::Comma) {
            out.push(self.pattern()?);
        }
        Ok(out)
    }

    fn pattern(&mut self) -> PResult<PathPattern> {
        if matches!(self.peek(), Tok::Ident(_) | Tok::Quoted(_)) && matches!(self.peek_at(1), Tok::Eq) {
            return Err(self.unsupported("named paths"));
        }
        let start = self.node()?;
        let mut steps = Vec::new();
        while matches!(self.peek(), Tok::Dash | Tok::Lt) {
            let rel = self.rel()?;
            let node = self.node()?;
            steps.push((rel, node));
        }
        Ok(PathPattern { start, steps })
    }

    fn node(&mut self) -> PResult<NodePattern> {
        self.expect(Tok::LParen)?;
        let mut n = NodePattern::default();
        if matches!(self.peek(), Tok::Ident(_) | Tok::Quoted(_)) {
            n.var = Some(self.name("variable")?);
        }
        if self.eat(&Tok::Colon) {
            n.label = Some(self.any_name("label")?);
            if matches!(self.peek(), Tok::Colon) {
                return Err(self.unsupported("multiple labels"));
            }
        }
        if matches!(self.peek(), Tok::LBrace) {
            n.properties = self.prop_map()?;
        }
        if !matches!(self.peek(), Tok::RParen) {
            let mut expected = vec!["`)`"];
            if n.label.is_none() {
                expected.push("`:`");
            }
            if n.properties.is_empty() {
                expected.push("`{`");
            }
            return Err(self.error(&expected));
        }
        self.bump();
        Ok(n)
    }

    fn prop_map(&mut self) -> PResult<Vec<(String, PropertyValue)>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let key = self.any_name("property key")?;
            self.expect(Tok::Colon)?;
            let value = self.literal()?;
            out.push((key, value));
            if self.eat(&Tok::RBrace) {
                break;
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.error(&["`,`", "`}`"]));
            }
        }
        Ok(out)
    }

    fn literal(&mut self) -> PResult<PropertyValue> {
        let negative = self.eat(&Tok::Dash);
        let v = match self.peek().clone() {
            Tok::Int(v) => PropertyValue::Int(if negative { -v } else { v }),
            Tok::Float(v) => PropertyValue::Float(if negative { -v } else { v }),
            Tok::Str(s) if !negative => PropertyValue::Str(s),
            Tok::Ident(w) if !negative && w.eq_ignore_ascii_case("true") => PropertyValue::Bool(true),
            Tok::Ident(w) if !negative && w.eq_ignore_ascii_case("false") => PropertyValue::Bool(false),
            Tok::LBracket if !negative => return self.list_literal(),
            _ => return Err(self.error(&["literal"])),
        };
        self.bump();
        Ok(v)
    }

    fn list_literal(&mut self) -> PResult<PropertyValue> {
        let at = self.offset();
        self.expect(Tok::LBracket)?;
        let mut items = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                if matches!(self.peek(), Tok::LBracket) {
                    return Err(self.unsupported("nested lists"));
                }
                items.push(self.literal()?);
                if self.eat(&Tok::RBracket) {
                    break;
                }
                if !self.eat(&Tok::Comma) {
                    return Err(self.error(&["`,`", "`]`"]));
                }
            }
        }
        PropertyValue::list(items).map_err(|e| CypherError::syntax(self.text, at, e.to_string(), Vec::new()))
    }

    fn rel(&mut self) -> PResult<RelPattern> {
        let left = self.eat(&Tok::Lt);
        self.expect(Tok::Dash)?;
        let mut r = RelPattern {
            var: None,
            types: Vec::new(),
            direction: RelDirection::Either,
            length: Length::One,
        };
        if self.eat(&Tok::LBracket) {
            if matches!(self.peek(), Tok::Ident(_) | Tok::Quoted(_)) {
                r.var = Some(self.name("variable")?);
            }
            if self.eat(&Tok::Colon) {
                r.types.push(self.any_name("relationship type")?);
                while self.eat(&Tok::Pipe) {
                    self.eat(&Tok::Colon);
                    r.types.push(self.any_name("relationship type")?);
                }
            }
            if self.eat(&Tok::Star) {
                r.length = self.length()?;
            }
            if matches!(self.peek(), Tok::LBrace) {
                return Err(self.unsupported("relationship property maps"));
            }
            self.expect(Tok::RBracket)?;
        }
        self.expect(Tok::Dash)?;
        let right = self.eat(&Tok::Gt);
        r.direction = match (left, right) {
            (true, false) => RelDirection::Left,
            (false, true) => RelDirection::Right,
            (false, false) => RelDirection::Either,
            (true, true) => return Err(self.unsupported("bidirectional arrows `<-->`")),
        };
        Ok(r)
    }

    fn bound(&mut self) -> PResult<u32> {
        match self.peek().clone() {
            Tok::Int(v) if (0..=u32::MAX as i64).contains(&v) => {
                self.bump();
                Ok(v as u32)
            }
            _ => Err(self.error(&["hop count"])),
        }
    }

    fn length(&mut self) -> PResult<Length> {
        if self.eat(&Tok::DotDot) {
            let max = self.bound()?;
            return Ok(Length::Range { min: 1, max: Some(max) });
        }
        if !matches!(self.peek(), Tok::Int(_)) {
            return Ok(Length::Unbounded);
        }
        let min = self.bound()?;
        if !self.eat(&Tok::DotDot) {
            return Ok(Length::Exact(min));
        }
        let max = if matches!(self.peek(), Tok::Int(_)) {
            Some(self.bound()?)
        } else {
            None
        };
        Ok(Length::Range { min, max })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        loop {
            if self.eat_kw("OR") {
                let rhs = self.and_expr()?;
                lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
            } else if self.is_kw("XOR") {
                return Err(self.unsupported("XOR"));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat_kw("AND") {
            let rhs = self.not_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_kw("NOT") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.atom()?;
        self.reject_postfix()?;
        let Some(op) = self.cmp_op() else {
            return Ok(lhs);
        };
        self.bump();
        let rhs = self.atom()?;
        self.reject_postfix()?;
        if self.cmp_op().is_some() {
            return Err(self.unsupported("chained comparisons"));
        }
        Ok(Expr::Compare(op, Box::new(lhs), Box::new(rhs)))
    }

    fn reject_postfix(&self) -> PResult<()> {
        for kw in ["IS", "IN", "STARTS", "ENDS", "CONTAINS"] {
            if self.is_kw(kw) {
                return Err(self.unsupported(format!("{kw} operator")));
            }
        }
        match self.peek() {
            Tok::Dash | Tok::Star | Tok::Sigil('+' | '/' | '%' | '^') => Err(self.unsupported("arithmetic")),
            Tok::LBracket => Err(self.unsupported("subscripts")),
            _ => Ok(()),
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Float(_) | Tok::Str(_) | Tok::Dash => Ok(Expr::Literal(self.literal()?)),
            Tok::LBracket => Err(self.unsupported("list expressions")),
            Tok::LParen => {
                let named = matches!(self.peek_at(1), Tok::Ident(_) | Tok::Quoted(_));
                let arrow_after = |k: usize| {
                    matches!(self.peek_at(k), Tok::Dash)
                        || (matches!(self.peek_at(k), Tok::Lt) && matches!(self.peek_at(k + 1), Tok::Dash))
                };
                if matches!(self.peek_at(1), Tok::RParen | Tok::Colon)
                    || (named && matches!(self.peek_at(2), Tok::Colon | Tok::LBrace))
                    || (named && matches!(self.peek_at(2), Tok::RParen) && arrow_after(3))
                {
                    return Err(self.unsupported("pattern expressions"));
                }
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(w) if w.eq_ignore_ascii_case("true") || w.eq_ignore_ascii_case("false") => {
                Ok(Expr::Literal(self.literal()?))
            }
            Tok::Ident(w) if w.eq_ignore_ascii_case("null") => {
                self.bump();
                Ok(Expr::Null)
            }
            Tok::Ident(w) if w.eq_ignore_ascii_case("CASE") => Err(self.unsupported("CASE expressions")),
            Tok::Ident(w) if matches!(self.peek_at(1), Tok::LParen) && !is_keyword(&w) => self.call(&w),
            Tok::Ident(_) | Tok::Quoted(_) => {
                let var = self.name("expression")?;
                if self.eat(&Tok::Dot) {
                    let key = self.any_name("property key")?;
                    Ok(Expr::Property(var, key))
                } else {
                    Ok(Expr::Var(var))
                }
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    fn call(&mut self, name: &str) -> PResult<Expr> {
        if name.eq_ignore_ascii_case("count") {
            self.bump();
            self.bump();
            if self.is_kw("DISTINCT") {
                return Err(self.unsupported("count(DISTINCT ...)"));
            }
            let arg = if self.eat(&Tok::Star) {
                None
            } else {
                Some(Box::new(self.expr()?))
            };
            self.expect(Tok::RParen)?;
            return Ok(Expr::Count(arg));
        }
        if name.eq_ignore_ascii_case("equals") {
            self.bump();
            self.bump();
            let a = self.expr()?;
            self.expect(Tok::Comma)?;
            let b = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::Equals(Box::new(a), Box::new(b)));
        }
        Err(self.unsupported(format!("function `{name}`")))
    }
}
