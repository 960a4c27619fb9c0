//! openCypher subset: positional expansion, parsing, validation and printing.
//!
//! Supported: `CREATE`, `MERGE`, `MATCH`, `OPTIONAL MATCH`, `WHERE`,
//! `RETURN [DISTINCT]` with `AS` aliases; node patterns with one label and a
//! literal property map; relationship patterns with type alternation,
//! direction and hop bounds; `count`, `equals`, comparisons and
//! `AND`/`OR`/`NOT`. Anything else is rejected as unsupported.

mod ast;
mod lexer;
mod parser;
mod positional;
mod validate;

use thiserror::Error;

pub use ast::{
    is_plain_identifier, Clause, CmpOp, Expr, Length, NodePattern, PathPattern, Query, RelDirection, RelPattern,
    ReturnClause, ReturnItem,
};
pub use parser::parse;
pub use positional::{expand_positional, Arg, BatchPlan, ExpandError, Expansion};
pub use validate::{validate, Diagnostic, DiagnosticKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CypherError {
    #[error("syntax error at line {line}, column {column}: {message}{}", expected_list(.expected))]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("unsupported at line {line}, column {column}: {feature} is outside the supported query subset")]
    Unsupported {
        offset: usize,
        line: usize,
        column: usize,
        feature: String,
    },
}

fn expected_list(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(" or "))
    }
}

/// 1-based line and column (in characters) of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl CypherError {
    pub(crate) fn syntax(text: &str, offset: usize, message: String, expected: Vec<String>) -> Self {
        let (line, column) = position(text, offset);
        CypherError::Syntax {
            offset,
            line,
            column,
            message,
            expected,
        }
    }

    pub(crate) fn unsupported(text: &str, offset: usize, feature: String) -> Self {
        let (line, column) = position(text, offset);
        CypherError::Unsupported {
            offset,
            line,
            column,
            feature,
        }
    }
}
