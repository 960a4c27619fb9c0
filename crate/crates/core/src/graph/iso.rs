//! Id-insensitive equality of labeled, propertied multigraphs.
//!
//! Colour refinement partitions both graphs with a shared colour table, then a
//! backtracking search looks for a bijection that preserves node colours and
//! the multiset of relationship signatures between every mapped pair.

use std::collections::HashMap;

use super::{GraphError, Properties, PropertyGraph};

/// Default node-count bound for [`structurally_equal`].
pub const DEFAULT_ISO_LIMIT: usize = 64;

/// True iff some bijection of nodes preserves labels, property maps and
/// labeled relationships. Graphs above [`DEFAULT_ISO_LIMIT`] nodes are
/// rejected.
pub fn structurally_equal(a: &PropertyGraph, b: &PropertyGraph) -> Result<bool, GraphError> {
    structurally_equal_bounded(a, b, DEFAULT_ISO_LIMIT)
}

pub fn structurally_equal_bounded(
    a: &PropertyGraph,
    b: &PropertyGraph,
    limit: usize,
) -> Result<bool, GraphError> {
    for g in [a, b] {
        if g.node_count() > limit {
            return Err(GraphError::SizeLimitExceeded {
                size: g.node_count(),
                limit,
            });
        }
    }
    if a.node_count() != b.node_count() || a.relationship_count() != b.relationship_count() {
        return Ok(false);
    }
    let mut edge_sigs: HashMap<(String, Properties), usize> = HashMap::new();
    let ea = Encoded::new(a, &mut edge_sigs);
    let eb = Encoded::new(b, &mut edge_sigs);

    let mut node_sigs: HashMap<(String, Properties), usize> = HashMap::new();
    let mut ca: Vec<usize> = a
        .nodes()
        .map(|n| intern(&mut node_sigs, (n.label.as_str().to_string(), n.properties.clone())))
        .collect();
    let mut cb: Vec<usize> = b
        .nodes()
        .map(|n| intern(&mut node_sigs, (n.label.as_str().to_string(), n.properties.clone())))
        .collect();
    if histogram(&ca) != histogram(&cb) {
        return Ok(false);
    }

    let mut classes = distinct(&ca);
    loop {
        let mut table: HashMap<(usize, Vec<(bool, usize, usize)>), usize> = HashMap::new();
        let na = ea.refine(&ca, &mut table);
        let nb = eb.refine(&cb, &mut table);
        if histogram(&na) != histogram(&nb) {
            return Ok(false);
        }
        let next = distinct(&na);
        ca = na;
        cb = nb;
        if next == classes {
            break;
        }
        classes = next;
    }

    let mut search = Search {
        a: &ea,
        b: &eb,
        ca: &ca,
        cb: &cb,
        forward: vec![None; a.node_count()],
        used: vec![false; b.node_count()],
    };
    let order = search.order();
    Ok(search.extend(&order, 0))
}

fn intern<K: std::hash::Hash + Eq>(table: &mut HashMap<K, usize>, key: K) -> usize {
    let next = table.len();
    *table.entry(key).or_insert(next)
}

fn histogram(colors: &[usize]) -> HashMap<usize, usize> {
    let mut h = HashMap::new();
    for c in colors {
        *h.entry(*c).or_insert(0) += 1;
    }
    h
}

fn distinct(colors: &[usize]) -> usize {
    histogram(colors).len()
}

/// Adjacency with relationship signatures replaced by interned ids.
struct Encoded {
    /// per node: (other endpoint, signature)
    out: Vec<Vec<(usize, usize)>>,
    inn: Vec<Vec<(usize, usize)>>,
}

impl Encoded {
    fn new(g: &PropertyGraph, sigs: &mut HashMap<(String, Properties), usize>) -> Self {
        let n = g.node_count();
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for r in g.relationships() {
            let sig = intern(sigs, (r.label.as_str().to_string(), r.properties.clone()));
            out[r.start.0].push((r.end.0, sig));
            inn[r.end.0].push((r.start.0, sig));
        }
        Encoded { out, inn }
    }

    fn refine(
        &self,
        colors: &[usize],
        table: &mut HashMap<(usize, Vec<(bool, usize, usize)>), usize>,
    ) -> Vec<usize> {
        (0..colors.len())
            .map(|v| {
                let mut around: Vec<(bool, usize, usize)> = self.out[v]
                    .iter()
                    .map(|&(w, s)| (true, s, colors[w]))
                    .chain(self.inn[v].iter().map(|&(w, s)| (false, s, colors[w])))
                    .collect();
                around.sort_unstable();
                intern(table, (colors[v], around))
            })
            .collect()
    }
}

struct Search<'a> {
    a: &'a Encoded,
    b: &'a Encoded,
    ca: &'a [usize],
    cb: &'a [usize],
    forward: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl Search<'_> {
    /// Smallest colour classes first, then breadth-first so that each node is
    /// checked against already-mapped neighbours as early as possible.
    fn order(&self) -> Vec<usize> {
        let n = self.ca.len();
        let sizes = histogram(self.ca);
        let mut seeds: Vec<usize> = (0..n).collect();
        seeds.sort_by_key(|&v| (sizes[&self.ca[v]], v));
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in seeds {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &(w, _) in self.a.out[v].iter().chain(self.a.inn[v].iter()) {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        order
    }

    fn extend(&mut self, order: &[usize], depth: usize) -> bool {
        let Some(&u) = order.get(depth) else {
            return true;
        };
        for v in 0..self.cb.len() {
            if self.used[v] || self.cb[v] != self.ca[u] {
                continue;
            }
            self.forward[u] = Some(v);
            self.used[v] = true;
            if self.consistent(u, v) && self.extend(order, depth + 1) {
                return true;
            }
            self.forward[u] = None;
            self.used[v] = false;
        }
        false
    }

    /// Edges between `u` and mapped nodes must match edges between `v` and
    /// their images, signature for signature.
    fn consistent(&self, u: usize, v: usize) -> bool {
        let image = |w: usize| self.forward[w];
        let mut backward: HashMap<usize, usize> = HashMap::new();
        for (x, y) in self.forward.iter().enumerate() {
            if let Some(y) = y {
                backward.insert(*y, x);
            }
        }
        for (adj_a, adj_b) in [(&self.a.out, &self.b.out), (&self.a.inn, &self.b.inn)] {
            let mut left: Vec<(usize, usize)> = adj_a[u]
                .iter()
                .filter_map(|&(w, s)| image(w).map(|img| (img, s)))
                .collect();
            let mut right: Vec<(usize, usize)> = adj_b[v]
                .iter()
                .filter(|(w, _)| backward.contains_key(w))
                .map(|&(w, s)| (w, s))
                .collect();
            left.sort_unstable();
            right.sort_unstable();
            if left != right {
                return false;
            }
        }
        true
    }
}
