//! Provably bounded compilations.
//!
//! Every construction is built from one primitive: a complete bipartite
//! coupling `V1 × V2` of uniform strength `μ`, realized by four operations
//! (see [`biclique_sequence`]). Third rows of all primitives are the
//! all-`+1` row, so merging after composition saves one row per extra
//! primitive. That gives `3m + 1` operations edge by edge and `3n - 2` for
//! unweighted graphs split into at most `n - 1` stars.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pulse::{FlipRow, MergePolicy, PulseSequence};
use crate::scalar::Scalar;

/// `V1 × V2` couplings of strength `mu`; `v3` holds the untouched vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Biclique<T> {
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
    pub v3: Vec<usize>,
    pub mu: T,
}

impl<T: Scalar> Biclique<T> {
    /// `v3` becomes every vertex of `0..n` outside `v1 ∪ v2`.
    pub fn new(n: usize, v1: Vec<usize>, v2: Vec<usize>, mu: T) -> Result<Self> {
        let mut seen = vec![false; n];
        for &v in v1.iter().chain(&v2) {
            if v >= n {
                return Err(Error::InvalidArgument(format!("vertex {v} >= n = {n}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidArgument(format!(
                    "vertex {v} appears twice in the biclique sides"
                )));
            }
        }
        let v3 = (0..n).filter(|&v| !seen[v]).collect();
        Ok(Self { v1, v2, v3, mu })
    }

    fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &v in self.v1.iter().chain(&self.v2).chain(&self.v3) {
            if v >= n {
                return Err(Error::InvalidArgument(format!("vertex {v} >= n = {n}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidArgument(format!("biclique vertex sets overlap at {v}")));
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} is in none of the biclique sets"
            )));
        }
        Ok(())
    }
}

/// Four operations realizing `b`. Over the blocks `(V1, V2, V3)` the rows are
/// `(+,+,-)`, `(+,-,-)`, `(+,+,+)`, `(+,-,+)` with strengths
/// `μ/4, -μ/4, μ/4, -μ/4`. Pairs inside one block, and pairs touching `V3`,
/// cancel; `V1 × V2` pairs collect `μ`.
pub fn biclique_sequence<T: Scalar>(b: &Biclique<T>, n: usize) -> Result<PulseSequence<T>> {
    b.validate(n)?;
    let quarter = b.mu.clone() / T::from_u8(4).expect("4 is representable");
    let row = |flip_v2: bool, flip_v3: bool| {
        let v2 = b.v2.iter().filter(move |_| flip_v2);
        let v3 = b.v3.iter().filter(move |_| flip_v3);
        FlipRow::from_flipped(n, v2.chain(v3).copied())
    };
    PulseSequence::from_ops(
        n,
        [
            (row(false, true), quarter.clone()),
            (row(true, true), -quarter.clone()),
            (row(false, false), quarter.clone()),
            (row(true, false), -quarter),
        ],
    )
}

/// Composes the primitives of a user-supplied edge-disjoint biclique
/// partition, then merges rows under `policy`.
pub fn biclique_partition_sequence<T: Scalar>(
    parts: &[Biclique<T>],
    n: usize,
    policy: MergePolicy,
) -> Result<PulseSequence<T>> {
    let mut seq = PulseSequence::new(n);
    for b in parts {
        seq = seq.compose(&biclique_sequence(b, n)?)?;
    }
    Ok(seq.merge(policy))
}

/// One primitive per edge with `μ = z_e`. At most `3m + 1` operations.
pub fn weighted_edge_by_edge<T: Scalar>(g: &Graph<T>, policy: MergePolicy) -> PulseSequence<T> {
    let parts: Vec<Biclique<T>> = g
        .edges()
        .iter()
        .map(|e| Biclique::new(g.n(), vec![e.u], vec![e.v], e.weight.clone()).expect("edge is valid"))
        .collect();
    biclique_partition_sequence(&parts, g.n(), policy).expect("edge bicliques are valid")
}

/// Vertex `center` joined to every vertex of `leaves`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Star {
    pub center: usize,
    pub leaves: Vec<usize>,
}

impl Star {
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.leaves.iter().map(|&l| (self.center.min(l), self.center.max(l)))
    }
}

fn require_uniform<T: Scalar>(g: &Graph<T>) -> Result<T> {
    g.uniform_weight().ok_or(Error::NonUniformWeights)
}

/// Star `i` is centered at `order[i]` and holds its edges to vertices later
/// in `order`. Empty stars are skipped, so at most `n - 1` stars remain.
pub fn star_decomposition<T: Scalar>(g: &Graph<T>, order: &[usize]) -> Result<Vec<Star>> {
    require_uniform(g)?;
    let n = g.n();
    let mut position = vec![usize::MAX; n];
    for (k, &v) in order.iter().enumerate() {
        if v >= n || position[v] != usize::MAX {
            return Err(Error::InvalidArgument(format!("order is not a permutation of 0..{n}")));
        }
        position[v] = k;
    }
    if order.len() != n {
        return Err(Error::InvalidArgument(format!(
            "order has {} entries, expected {n}",
            order.len()
        )));
    }
    let mut stars = Vec::new();
    for &center in order {
        let mut leaves: Vec<usize> = g
            .neighbors(center)
            .into_iter()
            .filter(|&l| position[l] > position[center])
            .collect();
        leaves.sort_unstable();
        if !leaves.is_empty() {
            stars.push(Star { center, leaves });
        }
    }
    Ok(stars)
}

/// Repeatedly takes the vertex of largest residual degree (ties: lowest
/// index) and deletes its edges; exhausted vertices follow in index order.
pub fn greedy_star_order<T: Scalar>(g: &Graph<T>) -> Result<Vec<usize>> {
    require_uniform(g)?;
    let n = g.n();
    let mut adjacent = vec![vec![false; n]; n];
    for e in g.edges() {
        adjacent[e.u][e.v] = true;
        adjacent[e.v][e.u] = true;
    }
    let mut degree: Vec<usize> = (0..n).map(|v| adjacent[v].iter().filter(|&&a| a).count()).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        let best = (0..n)
            .filter(|&v| !placed[v] && degree[v] > 0)
            .max_by(|&a, &b| degree[a].cmp(&degree[b]).then(b.cmp(&a)));
        let Some(v) = best else { break };
        placed[v] = true;
        order.push(v);
        for u in 0..n {
            if adjacent[v][u] {
                adjacent[v][u] = false;
                adjacent[u][v] = false;
                degree[u] -= 1;
            }
        }
        degree[v] = 0;
    }
    order.extend((0..n).filter(|&v| !placed[v]));
    Ok(order)
}

/// Union-of-stars over the greedy order. Uniform-weight graphs only; the
/// common weight is the primitive strength. At most `3n - 2` operations and
/// total strength at most `(n - 1)|w|`.
pub fn union_of_stars<T: Scalar>(g: &Graph<T>, policy: MergePolicy) -> Result<PulseSequence<T>> {
    let order = greedy_star_order(g)?;
    union_of_stars_with_order(g, &order, policy)
}

pub fn union_of_stars_with_order<T: Scalar>(
    g: &Graph<T>,
    order: &[usize],
    policy: MergePolicy,
) -> Result<PulseSequence<T>> {
    let mu = require_uniform(g)?;
    let parts = star_decomposition(g, order)?
        .into_iter()
        .map(|s| Biclique::new(g.n(), vec![s.center], s.leaves, mu.clone()))
        .collect::<Result<Vec<_>>>()?;
    biclique_partition_sequence(&parts, g.n(), policy)
}

/// Which construction [`compile`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Stars,
    Edges,
}

impl Method {
    /// Guaranteed operation count for `g` under this method.
    pub fn l0_bound<T: Scalar>(self, g: &Graph<T>) -> usize {
        match self {
            Method::Stars => (3 * g.n()).saturating_sub(2),
            Method::Edges => 3 * g.m() + 1,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Stars => "stars",
            Method::Edges => "edges",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stars" => Ok(Method::Stars),
            "edges" => Ok(Method::Edges),
            other => Err(Error::InvalidArgument(format!(
                "unknown method {other:?} (expected stars or edges)"
            ))),
        }
    }
}

pub fn compile<T: Scalar>(g: &Graph<T>, method: Method, policy: MergePolicy) -> Result<PulseSequence<T>> {
    match method {
        Method::Stars => union_of_stars(g, policy),
        Method::Edges => Ok(weighted_edge_by_edge(g, policy)),
    }
}

/// Counting bound `⌈log2(n(n-1)/2 - 1)⌉`: `k` operations span at most `k`
/// dimensions of the `n(n-1)/2` coupling space, and a graph with all-distinct
/// weights needs enough of them. It does not bound arbitrary graphs (`K_n`
/// needs one operation).
pub fn lower_bound(n: usize) -> Result<u32> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("lower bound needs n >= 3, got {n}")));
    }
    let target = (n as u128 * (n as u128 - 1)) / 2 - 1;
    Ok(target.next_power_of_two().trailing_zeros())
}
