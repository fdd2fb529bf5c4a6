//! Weighted undirected simple graphs: the compilation target.
//!
//! Vertices are `0..n`. Each stored edge has `u < v` and a nonzero weight;
//! a zero weight means "no edge" and is dropped at construction. Unweighted
//! graphs carry weight one on every edge.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T = Rational> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T = Rational> {
    n: usize,
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> Graph<T> {
    /// Builds a graph from `(u, v, weight)` triples in any endpoint order.
    ///
    /// Zero weights are dropped; self-loops, out-of-range endpoints and
    /// repeated pairs are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("vertex count must be positive".into()));
        }
        let mut seen = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has an endpoint >= n = {n}"
                )));
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key, w).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", key.0, key.1)));
            }
        }
        let edges = seen
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|((u, v), weight)| Edge { u, v, weight })
            .collect();
        Ok(Self { n, edges })
    }

    /// Unit-weight graph from an edge list.
    pub fn unweighted(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(n, edges.into_iter().map(|(u, v)| (u, v, T::one())))
    }

    pub fn empty(n: usize) -> Self {
        assert!(n > 0, "vertex count must be positive");
        Self { n, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        Self::unweighted(n, pairs(n)).expect("complete graph is valid")
    }

    pub fn path(n: usize) -> Self {
        Self::unweighted(n, (1..n).map(|v| (v - 1, v))).expect("path graph is valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least 3 vertices");
        Self::unweighted(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle graph is valid")
    }

    /// Star `K_{1,n-1}` centered at vertex 0.
    pub fn star(n: usize) -> Self {
        Self::unweighted(n, (1..n).map(|v| (0, v))).expect("star graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn weight(&self, a: usize, b: usize) -> T {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&key))
            .map(|i| self.edges[i].weight.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        !self.weight(a, b).is_zero()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.u == v {
                    Some(e.v)
                } else if e.v == v {
                    Some(e.u)
                } else {
                    None
                }
            })
            .collect()
    }

    /// The common weight when every edge carries the same one (`None` for mixed
    /// weights; one for the empty graph).
    pub fn uniform_weight(&self) -> Option<T> {
        let first = match self.edges.first() {
            Some(e) => e.weight.clone(),
            None => return Some(T::one()),
        };
        self.edges.iter().all(|e| e.weight == first).then_some(first)
    }

    /// Every weight is exactly one.
    pub fn is_unit_weighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_one())
    }

    /// Sum of absolute edge weights.
    pub fn total_weight(&self) -> T {
        self.edges.iter().fold(T::zero(), |acc, e| acc + e.weight.abs())
    }

    pub fn to_adjacency(&self) -> AdjacencyMatrix<T> {
        let mut a = AdjacencyMatrix::zeros(self.n);
        for e in &self.edges {
            a.set_symmetric(e.u, e.v, e.weight.clone());
        }
        a
    }

    pub fn map_weights<S: Scalar>(&self, f: impl Fn(&T) -> S) -> Graph<S> {
        Graph::new(self.n, self.edges.iter().map(|e| (e.u, e.v, f(&e.weight))))
            .expect("relabelling weights keeps a valid graph")
    }
}

impl Graph<Rational> {
    pub fn to_scalar<S: Scalar>(&self) -> Graph<S> {
        self.map_weights(S::from_rational)
    }
}

/// All unordered pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Dense symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix<T = Rational> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> AdjacencyMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![T::zero(); n * n],
        }
    }

    /// Checks symmetry and the zero diagonal.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix is not square".into()));
        }
        let entries: Vec<T> = rows.into_iter().flatten().collect();
        let a = Self { n, entries };
        for i in 0..n {
            if !a.get(i, i).is_zero() {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in i + 1..n {
                if a.get(i, j) != a.get(j, i) {
                    return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)`; `i != j`.
    pub fn set_symmetric(&mut self, i: usize, j: usize, value: T) {
        assert_ne!(i, j, "diagonal entries are fixed at zero");
        self.entries[i * self.n + j] = value.clone();
        self.entries[j * self.n + i] = value;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Upper-triangle entries in [`pairs`] order.
    pub fn upper(&self) -> Vec<T> {
        pairs(self.n).map(|(i, j)| self.get(i, j).clone()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        pairs(self.n).all(|(i, j)| self.get(i, j) == self.get(j, i))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i).is_zero())
    }

    /// First upper-triangle position where the matrices differ beyond the
    /// scalar's tolerance.
    pub fn first_mismatch(&self, other: &Self) -> Option<(usize, usize)> {
        if self.n != other.n {
            return Some((0, 0));
        }
        pairs(self.n).find(|&(i, j)| !self.get(i, j).near(other.get(i, j)))
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.first_mismatch(other).is_none()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(Self { n: self.n, entries })
    }

    /// Reads the matrix back as a graph (nonzero upper entries become edges).
    pub fn to_graph(&self) -> Graph<T> {
        Graph::new(self.n, pairs(self.n).map(|(i, j)| (i, j, self.get(i, j).clone())))
            .expect("adjacency matrix describes a simple graph")
    }
}

/// Parses the edge-list text format.
///
/// ```text
/// # comment
/// n 3
/// 0 1
/// 1 2 1/2
/// ```
///
/// The first non-comment line must be `n <count>`; every following line is
/// `u v [weight]` with the weight defaulting to one. Weights accept `p/q`,
/// integers and plain decimals.
pub fn parse_edge_list(text: &str) -> Result<Graph<Rational>> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize, Rational)> = Vec::new();
    let mut seen = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| Error::Parse { line: line_no, message };
        let Some(count) = n else {
            if fields.len() != 2 || fields[0] != "n" {
                return Err(err(format!("expected header `n <count>`, found {line:?}")));
            }
            let count: usize = fields[1]
                .parse()
                .map_err(|_| err(format!("invalid vertex count {:?}", fields[1])))?;
            if count == 0 {
                return Err(err("vertex count must be positive".into()));
            }
            n = Some(count);
            continue;
        };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(err(format!("expected `u v [weight]`, found {line:?}")));
        }
        let index = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err(format!("invalid vertex index {s:?}")))?;
            if v >= count {
                return Err(err(format!("vertex index {v} >= n = {count}")));
            }
            Ok(v)
        };
        let u = index(fields[0])?;
        let v = index(fields[1])?;
        if u == v {
            return Err(err(format!("self-loop at vertex {u}")));
        }
        let w = match fields.get(2) {
            Some(s) => parse_rational(s).ok_or_else(|| err(format!("invalid weight {s:?}")))?,
            None => Rational::one(),
        };
        if let Some(first) = seen.insert((u.min(v), u.max(v)), line_no) {
            return Err(err(format!("duplicate edge ({u}, {v}), first given on line {first}")));
        }
        edges.push((u, v, w));
    }
    let n = n.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing header `n <count>`".into(),
    })?;
    Graph::new(n, edges)
}

/// Inverse of [`parse_edge_list`]. Unit weights are written explicitly.
pub fn serialize_edge_list(g: &Graph<Rational>) -> String {
    let mut out = format!("n {}\n", g.n());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, format_rational(&e.weight));
    }
    out
}

/// JSON form `{"n": int, "edges": [[u, v, "p/q"], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GraphDocument {
    pub n: usize,
    pub edges: Vec<(usize, usize, String)>,
}

impl From<&Graph<Rational>> for GraphDocument {
    fn from(g: &Graph<Rational>) -> Self {
        Self {
            n: g.n(),
            edges: g
                .edges()
                .iter()
                .map(|e| (e.u, e.v, format_rational(&e.weight)))
                .collect(),
        }
    }
}

impl TryFrom<GraphDocument> for Graph<Rational> {
    type Error = Error;

    fn try_from(doc: GraphDocument) -> Result<Self> {
        let edges = doc
            .edges
            .into_iter()
            .map(|(u, v, w)| {
                parse_rational(&w)
                    .map(|w| (u, v, w))
                    .ok_or_else(|| Error::Format(format!("invalid weight {w:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Graph::new(doc.n, edges)
    }
}

pub fn graph_to_json(g: &Graph<Rational>) -> String {
    serde_json::to_string(&GraphDocument::from(g)).expect("graph serializes")
}

pub fn graph_from_json(text: &str) -> Result<Graph<Rational>> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    doc.try_into()
}

/// Reads either format: JSON when the text starts with `{`, edge list otherwise.
pub fn parse_graph(text: &str) -> Result<Graph<Rational>> {
    if text.trim_start().starts_with('{') {
        graph_from_json(text)
    } else {
        parse_edge_list(text)
    }
}

/// Erdős–Rényi `G(n, p)`.
///
/// Pairs are visited in lexicographic order; each is kept when a uniform
/// draw in `[0, 1)` falls below `p`, and a kept edge then draws its weight
/// uniformly from `weight_set` (weight one when the set is empty). The
/// stream comes from ChaCha8 seeded through `SeedableRng::seed_from_u64`,
/// so graphs are reproducible across platforms for a fixed seed.
pub fn random_er_graph<T: Scalar>(n: usize, p: f64, weight_set: &[T], seed: u64) -> Result<Graph<T>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("vertex count must be positive".into()));
    }
    if weight_set.iter().any(|w| w.is_zero()) {
        return Err(Error::InvalidArgument("weight set contains zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for (u, v) in pairs(n) {
        if rng.random::<f64>() < p {
            let w = if weight_set.is_empty() {
                T::one()
            } else {
                weight_set[rng.random_range(0..weight_set.len())].clone()
            };
            edges.push((u, v, w));
        }
    }
    Graph::new(n, edges)
}

/// Largest `n` accepted by [`enumerate_labeled_graphs`].
pub const MAX_ENUMERATION_N: usize = 5;

/// Every labeled unweighted graph on `n` vertices, in edge-bitmask order
/// (bit `k` ↔ the `k`-th pair of [`pairs`]). With `dedupe`, only the graph
/// whose bitmask is minimal over all vertex relabellings is kept, giving one
/// representative per isomorphism class.
pub fn enumerate_labeled_graphs(n: usize, dedupe: bool) -> Result<impl Iterator<Item = Graph<Rational>>> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            what: "vertex count",
            value: n,
            max: MAX_ENUMERATION_N,
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("vertex count must be positive".into()));
    }
    let pair_list: Vec<(usize, usize)> = pairs(n).collect();
    let perms = permutations(n);
    let total: u64 = 1 << pair_list.len();
    Ok((0..total).filter_map(move |mask| {
        if dedupe && canonical_mask(mask, n, &pair_list, &perms) != mask {
            return None;
        }
        Some(graph_from_mask(n, &pair_list, mask))
    }))
}

/// Edge bitmask of an unweighted graph in [`pairs`] order.
pub fn edge_mask<T: Scalar>(g: &Graph<T>) -> u64 {
    assert!(g.n() <= 11, "edge mask limited to 11 vertices");
    pairs(g.n())
        .enumerate()
        .filter(|(_, (i, j))| g.has_edge(*i, *j))
        .fold(0u64, |acc, (k, _)| acc | (1 << k))
}

/// Minimal edge bitmask over all vertex permutations (isomorphism-class key).
pub fn canonical_form<T: Scalar>(g: &Graph<T>) -> u64 {
    let pair_list: Vec<(usize, usize)> = pairs(g.n()).collect();
    canonical_mask(edge_mask(g), g.n(), &pair_list, &permutations(g.n()))
}

fn graph_from_mask(n: usize, pair_list: &[(usize, usize)], mask: u64) -> Graph<Rational> {
    Graph::unweighted(
        n,
        pair_list
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &p)| p),
    )
    .expect("bitmask graph is valid")
}

fn canonical_mask(mask: u64, n: usize, pair_list: &[(usize, usize)], perms: &[Vec<usize>]) -> u64 {
    let index = |i: usize, j: usize| {
        let (a, b) = (i.min(j), i.max(j));
        // position of (a, b) in lexicographic pair order
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    };
    perms
        .iter()
        .map(|p| {
            pair_list
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .fold(0u64, |acc, (_, &(i, j))| acc | 1 << index(p[i], p[j]))
        })
        .min()
        .unwrap_or(mask)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Small named graphs used by examples, tests and the noise sweep.
pub mod catalog {
    use super::Graph;
    use crate::scalar::Rational;

    /// Vertex labels of [`two_hub_graph`], by index.
    pub const TWO_HUB_LABELS: [&str; 6] = ["u0", "u1", "u2", "w0", "w1", "w2"];

    /// Six vertices `u0, u1, u2, w0, w1, w2` (indices 0..6). Hub `u2` is joined
    /// to `u0, w0, w1, w2` and hub `u1` to `w0, w1, w2`: seven edges that split
    /// into two stars.
    pub fn two_hub_graph() -> Graph<Rational> {
        Graph::unweighted(6, [(2, 0), (2, 3), (2, 4), (2, 5), (1, 3), (1, 4), (1, 5)]).expect("valid")
    }

    /// Path `0 - 1 - 2`.
    pub fn path3() -> Graph<Rational> {
        Graph::path(3)
    }
}
