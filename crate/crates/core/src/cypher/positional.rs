//! `$k`, `@k` and `[]k` marker expansion.

use std::fmt::Write as _;

use thiserror::Error;

/// Argument supplied for a positional marker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    /// For `$k`: an object's unique id.
    Uid(i64),
    /// For `@k`: a fully qualified class name.
    ClassName(String),
    /// For `[]k`: run once per uid and union the results.
    Uids(Vec<i64>),
}

impl Arg {
    fn kind(&self) -> &'static str {
        match self {
            Arg::Uid(_) => "a uid",
            Arg::ClassName(_) => "a class name",
            Arg::Uids(_) => "a uid collection",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("`{marker}` at byte {offset}: positional indexes start at 1")]
    ZeroIndex { marker: String, offset: usize },
    #[error("`{marker}` at byte {offset}: argument {index} requested but {available} given")]
    OutOfRange {
        marker: String,
        offset: usize,
        index: usize,
        available: usize,
    },
    #[error("`{marker}` at byte {offset} needs {expected}, but argument {index} is {found}")]
    KindMismatch {
        marker: String,
        offset: usize,
        index: usize,
        expected: &'static str,
        found: &'static str,
    },
}

/// Per-element queries for `[]k` markers; their results are bag-unioned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    /// One query per combination of collection elements. Several `[]`
    /// markers range over the cartesian product, first marker slowest.
    pub queries: Vec<String>,
    /// The query with every `[]` marker bound to uid 0; it fixes the result
    /// columns when the collection is empty.
    pub prototype: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    /// Text with `$`/`@` markers replaced. `[]` markers are left in place
    /// when `batch` is present.
    pub text: String,
    pub batch: Option<BatchPlan>,
}

enum Piece {
    Text(String),
    Batch(usize),
}

fn uid_text(uid: i64) -> String {
    format!("`$uid`: {uid}")
}

/// Replaces positional markers with argument text. Markers inside backtick
/// names, string literals and comments are left alone.
pub fn expand_positional(fmt: &str, args: &[Arg]) -> Result<Expansion, ExpandError> {
    let bytes = fmt.as_bytes();
    let mut pieces: Vec<Piece> = vec![Piece::Text(String::new())];
    let mut batch_args: Vec<usize> = Vec::new();
    let mut i = 0;
    let mut copy_from = 0;
    let push_text = |pieces: &mut Vec<Piece>, s: &str| match pieces.last_mut() {
        Some(Piece::Text(t)) => t.push_str(s),
        _ => pieces.push(Piece::Text(s.to_string())),
    };
    while i < bytes.len() {
        let c = bytes[i];
        let skip_to = match c {
            b'`' => fmt[i + 1..].find('`').map(|j| i + j + 2),
            b'\'' | b'"' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != c {
                    j += if bytes[j] == b'\\' { 2 } else { 1 };
                }
                Some(j + 1)
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => Some(fmt[i..].find('\n').map_or(bytes.len(), |j| i + j)),
            b'/' if bytes.get(i + 1) == Some(&b'*') => Some(fmt[i + 2..].find("*/").map_or(bytes.len(), |j| i + j + 4)),
            _ => None,
        };
        if let Some(end) = skip_to {
            i = end.min(bytes.len());
            continue;
        }
        let prefix = match c {
            b'$' | b'@' => 1,
            b'[' if bytes.get(i + 1) == Some(&b']') => 2,
            _ => {
                i += 1;
                continue;
            }
        };
        let digits_end = (i + prefix..bytes.len()).find(|&j| !bytes[j].is_ascii_digit()).unwrap_or(bytes.len());
        if digits_end == i + prefix {
            i += prefix;
            continue;
        }
        let marker = fmt[i..digits_end].to_string();
        let index: usize = fmt[i + prefix..digits_end].parse().unwrap_or(usize::MAX);
        if index == 0 {
            return Err(ExpandError::ZeroIndex { marker, offset: i });
        }
        let arg = args.get(index - 1).ok_or_else(|| ExpandError::OutOfRange {
            marker: marker.clone(),
            offset: i,
            index,
            available: args.len(),
        })?;
        let mismatch = |expected| ExpandError::KindMismatch {
            marker: marker.clone(),
            offset: i,
            index,
            expected,
            found: arg.kind(),
        };
        push_text(&mut pieces, &fmt[copy_from..i]);
        match (prefix, c, arg) {
            (1, b'$', Arg::Uid(uid)) => push_text(&mut pieces, &uid_text(*uid)),
            (1, b'$', _) => return Err(mismatch("a uid")),
            (1, _, Arg::ClassName(name)) => push_text(&mut pieces, &format!("`{}`", name.replace('`', "``"))),
            (1, _, _) => return Err(mismatch("a class name")),
            (_, _, Arg::Uids(_)) => {
                if !batch_args.contains(&(index - 1)) {
                    batch_args.push(index - 1);
                }
                pieces.push(Piece::Batch(index - 1));
            }
            _ => return Err(mismatch("a uid collection")),
        }
        i = digits_end;
        copy_from = i;
    }
    push_text(&mut pieces, &fmt[copy_from..]);

    let render = |choice: &dyn Fn(usize) -> Option<i64>| {
        let mut out = String::new();
        for p in &pieces {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Batch(a) => match choice(*a) {
                    Some(uid) => out.push_str(&uid_text(uid)),
                    None => {
                        let _ = write!(out, "[]{}", a + 1);
                    }
                },
            }
        }
        out
    };
    let text = render(&|_| None);
    if batch_args.is_empty() {
        return Ok(Expansion { text, batch: None });
    }
    let lists: Vec<&Vec<i64>> = batch_args
        .iter()
        .map(|a| match &args[*a] {
            Arg::Uids(v) => v,
            _ => unreachable!("batch markers only accept collections"),
        })
        .collect();
    let mut queries = Vec::new();
    let total: usize = lists.iter().map(|l| l.len()).product();
    for mut n in 0..total {
        let mut pick = vec![0usize; lists.len()];
        for k in (0..lists.len()).rev() {
            pick[k] = n % lists[k].len();
            n /= lists[k].len();
        }
        queries.push(render(&|a| {
            let k = batch_args.iter().position(|b| *b == a)?;
            Some(lists[k][pick[k]])
        }));
    }
    let prototype = render(&|_| Some(0));
    Ok(Expansion {
        text,
        batch: Some(BatchPlan { queries, prototype }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uid_marker() {
        let e = expand_positional("MATCH (n {$1})-[*]-(m) RETURN m", &[Arg::Uid(42)]).unwrap();
        assert_eq!(e.text, "MATCH (n {`$uid`: 42})-[*]-(m) RETURN m");
        assert!(e.batch.is_none());
    }

    #[test]
    fn class_marker() {
        let e = expand_positional("CREATE (a:@1 {value:1})", &[Arg::ClassName("BinaryTree$Node".into())]).unwrap();
        assert_eq!(e.text, "CREATE (a:`BinaryTree$Node` {value:1})");
    }

    #[test]
    fn batch_marker() {
        let e = expand_positional("MATCH (n {[]1})-[*]->(m) RETURN m", &[Arg::Uids(vec![1, 2])]).unwrap();
        let plan = e.batch.unwrap();
        assert_eq!(
            plan.queries,
            [
                "MATCH (n {`$uid`: 1})-[*]->(m) RETURN m",
                "MATCH (n {`$uid`: 2})-[*]->(m) RETURN m"
            ]
        );
        assert_eq!(e.text, "MATCH (n {[]1})-[*]->(m) RETURN m");
    }

    #[test]
    fn quoted_markers_untouched() {
        let text = "MATCH (n:`a$1` {s: '@1 $1'}) RETURN n // $1";
        assert_eq!(expand_positional(text, &[]).unwrap().text, text);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            expand_positional("MATCH (n {$2})", &[Arg::Uid(1)]),
            Err(ExpandError::OutOfRange { index: 2, available: 1, .. })
        ));
        assert!(matches!(
            expand_positional("MATCH (n:@1)", &[Arg::Uid(1)]),
            Err(ExpandError::KindMismatch { .. })
        ));
        assert!(matches!(expand_positional("MATCH (n {$0})", &[]), Err(ExpandError::ZeroIndex { .. })));
    }

    #[test]
    fn empty_collection_gives_empty_plan() {
        let e = expand_positional("MATCH (n {[]1}) RETURN n", &[Arg::Uids(vec![])]).unwrap();
        let plan = e.batch.unwrap();
        assert!(plan.queries.is_empty());
        assert_eq!(plan.prototype, "MATCH (n {`$uid`: 0}) RETURN n");
    }
}
