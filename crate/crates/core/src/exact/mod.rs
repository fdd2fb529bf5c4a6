//! Exact minimization of the operation count (L0) and of the total strength
//! (L1) over all `2^(n-1)` sign-canonical flip rows.
//!
//! L1 is a linear program solved exactly. L0 is a mixed-integer program:
//! binary `b_c` switches row `c` on, with `|w_c| <= b_c M`. Two engines solve
//! it. [`Engine::SupportSearch`] (the default) enumerates independent row
//! sets by increasing size, so the first hit is optimal. [`Engine::LpBranchAndBound`]
//! is a textbook best-bound branch-and-bound on the linear relaxation, kept
//! for cross-checking; its relaxation bound is close to the number of forced
//! rows and prunes little beyond small instances.

mod bnb;
pub mod linalg;
pub mod simplex;
pub mod support;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructions::{union_of_stars, weighted_edge_by_edge};
use crate::error::{Error, Result};
use crate::graph::{pairs, Graph};
use crate::pulse::{FlipRow, MergePolicy, PulseDocument, PulseSequence};
use crate::scalar::{format_rational, Rational};
use simplex::{LpProblem, LpStatus};
use support::{SearchOutcome, SupportSearch};

/// Largest qubit count accepted by the exact solvers (128 candidate rows).
pub const MAX_EXACT_N: usize = 8;

/// Largest qubit count accepted by [`subsample_solve`].
pub const MAX_SUBSAMPLE_N: usize = 24;

/// Up to this size the L1 program is pivoted in rational arithmetic from the
/// start; larger ones are solved in floating point first and the final basis
/// is then re-checked (and, if needed, repaired) exactly.
const RATIONAL_LP_MAX_N: usize = 6;

/// All sign-canonical flip rows on `n` qubits; row `i` is
/// [`FlipRow::from_canonical_index`]`(n, i)`, so row 0 is all `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteFlipMatrix {
    n: usize,
    rows: Vec<FlipRow>,
}

impl CompleteFlipMatrix {
    pub fn new(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self {
            n,
            rows: (0..1u64 << (n - 1))
                .map(|i| FlipRow::from_canonical_index(n, i))
                .collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[FlipRow] {
        &self.rows
    }

    /// Row `i` as a coupling column: one `s[a] s[b]` entry per pair `(a, b)`.
    pub fn column(&self, i: usize) -> Vec<i8> {
        pair_column(&self.rows[i])
    }

    pub fn columns(&self) -> Vec<Vec<i8>> {
        (0..self.rows.len()).map(|i| self.column(i)).collect()
    }
}

fn pair_column(row: &FlipRow) -> Vec<i8> {
    pairs(row.n()).map(|(a, b)| row.pair_sign(a, b)).collect()
}

fn target_vector(g: &Graph<Rational>) -> Vec<Rational> {
    pairs(g.n()).map(|(a, b)| g.weight(a, b)).collect()
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge {
            what: "qubit count for exact optimization",
            value: n,
            max: MAX_EXACT_N,
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BigMKind {
    /// Provable bound on optimal strengths (Hadamard's inequality).
    TheoremBound,
    /// Sum of absolute edge weights.
    PracticalSum,
    /// Caller-supplied value.
    Custom,
}

impl FromStr for BigMKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" | "theorem_bound" => Ok(Self::TheoremBound),
            "sum" | "practical_sum" => Ok(Self::PracticalSum),
            other => Err(Error::InvalidArgument(format!(
                "unknown big-M kind {other:?} (expected sum or theorem)"
            ))),
        }
    }
}

/// Upper bound on `|w|` in the L0 program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigM {
    #[serde(with = "crate::scalar::serde_rational")]
    pub value: Rational,
    pub kind: BigMKind,
}

impl BigM {
    /// For `r = gc(G) > 1` an optimal solution has `|w| <= r (r-1)^((r-1)/2)`
    /// (unweighted) or `Z (r-1)^((r+1)/2)` with `Z = Σ|z|`. Substituting the
    /// construction bounds for `r` gives `(3n-2)^((3n-1)/2)` for graphs whose
    /// weights are all `±1` and `Z (3m)^((3m+1)/2)` otherwise. Half-integer
    /// powers are rounded up to the next integer so the value stays rational
    /// and never undercuts the bound. An empty graph gets 1.
    pub fn theorem_bound(g: &Graph<Rational>) -> Self {
        let value = if g.is_empty() {
            Rational::one()
        } else if g.edges().iter().all(|e| e.weight.abs().is_one()) {
            let base = BigInt::from(3 * g.n() - 2);
            Rational::from_integer(ceil_sqrt(&num_traits::pow(base, 3 * g.n() - 1)))
        } else {
            // Z b^(e/2) = sqrt(p^2 b^e) / q for Z = p / q
            let z = g.total_weight();
            let b_e = num_traits::pow(BigInt::from(3 * g.m()), 3 * g.m() + 1);
            let radicand = z.numer() * z.numer() * b_e;
            Rational::new(ceil_sqrt(&radicand), z.denom().clone())
        };
        Self {
            value,
            kind: BigMKind::TheoremBound,
        }
    }

    /// `Σ|z|`, or 1 for an empty graph.
    pub fn practical_sum(g: &Graph<Rational>) -> Self {
        let z = g.total_weight();
        Self {
            value: if z.is_zero() { Rational::one() } else { z },
            kind: BigMKind::PracticalSum,
        }
    }

    pub fn new(g: &Graph<Rational>, kind: BigMKind) -> Result<Self> {
        match kind {
            BigMKind::TheoremBound => Ok(Self::theorem_bound(g)),
            BigMKind::PracticalSum => Ok(Self::practical_sum(g)),
            BigMKind::Custom => Err(Error::InvalidArgument("a custom big-M needs an explicit value".into())),
        }
    }

    pub fn custom(value: Rational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::InvalidArgument("big-M must be positive".into()));
        }
        Ok(Self {
            value,
            kind: BigMKind::Custom,
        })
    }
}

fn ceil_sqrt(x: &BigInt) -> BigInt {
    let s = x.sqrt();
    if &(&s * &s) == x {
        s
    } else {
        s + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    L0,
    L1,
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l0" => Ok(Self::L0),
            "l1" => Ok(Self::L1),
            other => Err(Error::InvalidArgument(format!(
                "unknown objective {other:?} (expected l0 or l1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Proven optimal over the full candidate row set.
    Optimal,
    /// Time limit reached; the sequence is the best one found.
    IncumbentTimeout,
    /// No sequence found (subsampled row sets only).
    Infeasible,
    /// Best over a row subsample; not a global optimality claim.
    Feasible,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::IncumbentTimeout => "incumbent_timeout",
            Self::Infeasible => "infeasible",
            Self::Feasible => "feasible",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    SupportSearch,
    LpBranchAndBound,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "support" | "support_search" => Ok(Self::SupportSearch),
            "bnb" | "lp_branch_and_bound" => Ok(Self::LpBranchAndBound),
            other => Err(Error::InvalidArgument(format!(
                "unknown engine {other:?} (expected support or bnb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub sequence: PulseSequence<Rational>,
    pub objective: Rational,
    pub objective_kind: ObjectiveKind,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    pub big_m: Option<BigM>,
    /// Largest objective value proven not to be beatable.
    pub lower_bound: Option<Rational>,
    pub engine: Option<Engine>,
    /// Linear relaxation value at the root (branch-and-bound only).
    pub root_relaxation: Option<f64>,
    /// Child relaxations that came out below their parent (branch-and-bound
    /// only; nonzero values indicate numerical trouble).
    pub bound_regressions: u64,
}

impl OptResult {
    pub fn to_document(&self) -> OptResultDocument {
        OptResultDocument {
            status: self.status,
            objective: format_rational(&self.objective),
            objective_kind: self.objective_kind,
            sequence: self.sequence.to_document(),
            nodes_explored: self.nodes_explored,
            wall_time_ms: self.wall_time.as_secs_f64() * 1e3,
            big_m: self.big_m.clone(),
            lower_bound: self.lower_bound.as_ref().map(format_rational),
            engine: self.engine,
            root_relaxation: self.root_relaxation,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("result serializes")
    }
}

/// JSON form of [`OptResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResultDocument {
    pub status: SolveStatus,
    pub objective: String,
    pub objective_kind: ObjectiveKind,
    pub sequence: PulseDocument,
    pub nodes_explored: u64,
    pub wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub big_m: Option<BigM>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower_bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub root_relaxation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct L0Options {
    pub big_m: BigMKind,
    /// Explicit value; overrides `big_m` when set.
    pub big_m_value: Option<Rational>,
    pub time_limit: Duration,
    pub engine: Engine,
    /// Starting sequence; defaults to the construction for the graph.
    pub incumbent: Option<PulseSequence<Rational>>,
}

impl Default for L0Options {
    fn default() -> Self {
        Self {
            big_m: BigMKind::PracticalSum,
            big_m_value: None,
            time_limit: Duration::from_secs(600),
            engine: Engine::SupportSearch,
            incumbent: None,
        }
    }
}

impl L0Options {
    fn resolve_big_m(&self, g: &Graph<Rational>) -> Result<BigM> {
        match &self.big_m_value {
            Some(v) => BigM::custom(v.clone()),
            None => BigM::new(g, self.big_m),
        }
    }
}

/// Union-of-stars when every weight is equal, edge-by-edge otherwise,
/// sign-canonicalized so every row is a complete-matrix row.
pub fn construction_incumbent(g: &Graph<Rational>) -> PulseSequence<Rational> {
    let seq = union_of_stars(g, MergePolicy::Signed).unwrap_or_else(|_| weighted_edge_by_edge(g, MergePolicy::Signed));
    seq.canonicalize()
}

fn prepare_incumbent(
    g: &Graph<Rational>,
    supplied: Option<&PulseSequence<Rational>>,
) -> Result<PulseSequence<Rational>> {
    match supplied {
        Some(seq) => {
            if let Some((i, j)) = seq.first_mismatch(g)? {
                return Err(Error::Unverified(format!(
                    "incumbent differs from the target at ({i}, {j})"
                )));
            }
            Ok(seq.canonicalize())
        }
        None => Ok(construction_incumbent(g)),
    }
}

fn sequence_from_support(
    n: usize,
    rows: &[FlipRow],
    columns: &[usize],
    strengths: &[Rational],
) -> PulseSequence<Rational> {
    let mut ops: Vec<(FlipRow, Rational)> = columns
        .iter()
        .zip(strengths)
        .filter(|(_, w)| !w.is_zero())
        .map(|(&c, w)| (rows[c].clone(), w.clone()))
        .collect();
    ops.sort_by_key(|(r, _)| r.canonical_index());
    PulseSequence::from_ops(n, ops).expect("rows have length n")
}

fn validate_limit(time_limit: Duration) -> Result<()> {
    if time_limit.is_zero() {
        return Err(Error::InvalidArgument("time limit must be positive".into()));
    }
    Ok(())
}

/// Minimum number of operations realizing `g`, with `|w| <= M`.
///
/// Only linearly independent row sets are considered. Every minimum-size
/// solution without the `M` constraint has one; with a binding `M` a
/// dependent set could in principle do better and would be missed.
pub fn solve_l0(g: &Graph<Rational>, options: &L0Options) -> Result<OptResult> {
    check_size(g.n())?;
    validate_limit(options.time_limit)?;
    let big_m = options.resolve_big_m(g)?;
    let incumbent = prepare_incumbent(g, options.incumbent.as_ref())?;
    let flips = CompleteFlipMatrix::new(g.n())?;
    let started = Instant::now();
    let deadline = started.checked_add(options.time_limit);
    match options.engine {
        Engine::SupportSearch => {
            let mut result = support_search_l0(g, flips.rows(), &big_m, incumbent, deadline, started)?;
            result.engine = Some(Engine::SupportSearch);
            Ok(result)
        }
        Engine::LpBranchAndBound => bnb::branch_and_bound(g, &flips, &big_m, incumbent, deadline, started),
    }
}

fn support_search_l0(
    g: &Graph<Rational>,
    rows: &[FlipRow],
    big_m: &BigM,
    incumbent: PulseSequence<Rational>,
    deadline: Option<Instant>,
    started: Instant,
) -> Result<OptResult> {
    let target = target_vector(g);
    let columns: Vec<Vec<i8>> = rows.iter().map(pair_column).collect();
    let mut search = SupportSearch::new(&columns, &target, Some(&big_m.value), deadline)
        .ok_or_else(|| Error::InvalidArgument("edge weight denominator divisible by 2^61 - 1".into()))?;

    let finish = |sequence: PulseSequence<Rational>, status, lower: usize, nodes| OptResult {
        objective: Rational::from_integer(sequence.l0().into()),
        sequence,
        objective_kind: ObjectiveKind::L0,
        status,
        nodes_explored: nodes,
        wall_time: started.elapsed(),
        big_m: Some(big_m.clone()),
        lower_bound: Some(Rational::from_integer(lower.into())),
        engine: None,
        root_relaxation: None,
        bound_regressions: 0,
    };

    let best = incumbent.l0();
    for k in 0..best {
        match search.search(k) {
            SearchOutcome::Found {
                columns: cols,
                strengths,
            } => {
                let seq = sequence_from_support(g.n(), rows, &cols, &strengths);
                let l0 = seq.l0();
                return Ok(finish(seq, SolveStatus::Optimal, l0, search.nodes));
            }
            SearchOutcome::Exhausted => {}
            SearchOutcome::TimedOut => {
                return Ok(finish(incumbent, SolveStatus::IncumbentTimeout, k, search.nodes));
            }
        }
    }
    Ok(finish(incumbent, SolveStatus::Optimal, best, search.nodes))
}

/// L0 restricted to `row_budget` canonical rows drawn with `seed`. The
/// all-`+1` row and the rows of the construction incumbent are always kept
/// (even past the budget), so the incumbent stays available. The status is
/// `feasible` unless the sample covers every row, in which case the result
/// is the full solve's.
///
/// Unlike the full solve this accepts up to [`MAX_SUBSAMPLE_N`] qubits: rows
/// are then drawn directly instead of from the enumerated matrix. Past the
/// sizes where arithmetic mod `2^61 - 1` provably mirrors the rationals (see
/// [`linalg`]) a support can be missed, never misreported.
pub fn subsample_solve(g: &Graph<Rational>, row_budget: usize, seed: u64, options: &L0Options) -> Result<OptResult> {
    let n = g.n();
    if n > MAX_SUBSAMPLE_N {
        return Err(Error::TooLarge {
            what: "qubit count for subsampling",
            value: n,
            max: MAX_SUBSAMPLE_N,
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be positive".into()));
    }
    validate_limit(options.time_limit)?;
    if row_budget < n {
        return Err(Error::InvalidArgument(format!(
            "row budget {row_budget} is below n = {n}"
        )));
    }
    let big_m = options.resolve_big_m(g)?;
    let incumbent = prepare_incumbent(g, options.incumbent.as_ref())?;
    let total: u64 = 1 << (n - 1);

    let mut keep: BTreeSet<u64> = std::iter::once(0).collect();
    keep.extend(incumbent.ops().iter().map(|op| op.row.canonical_index()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = (row_budget as u64).min(total);
    if n <= MAX_EXACT_N {
        let mut rest: Vec<u64> = (0..total).filter(|i| !keep.contains(i)).collect();
        rest.shuffle(&mut rng);
        let extra = wanted.saturating_sub(keep.len() as u64) as usize;
        keep.extend(rest.into_iter().take(extra));
    } else {
        while (keep.len() as u64) < wanted {
            keep.insert(rng.random_range(0..total));
        }
    }
    let rows: Vec<FlipRow> = keep.iter().map(|&i| FlipRow::from_canonical_index(n, i)).collect();
    let full = rows.len() as u64 == total;

    let started = Instant::now();
    let deadline = started.checked_add(options.time_limit);
    let mut result = support_search_l0(g, &rows, &big_m, incumbent, deadline, started)?;
    result.engine = Some(Engine::SupportSearch);
    if !full && result.status == SolveStatus::Optimal {
        result.status = SolveStatus::Feasible;
        // the proven bound only holds for the sample
        result.lower_bound = None;
    }
    if !full && result.status == SolveStatus::IncumbentTimeout {
        result.lower_bound = None;
    }
    Ok(result)
}

/// Minimum total strength `Σ|w|` realizing `g`, via the linear program
/// `min Σ (w⁺ + w⁻)` subject to `Q (w⁺ - w⁻) = a`, `w± >= 0`.
pub fn solve_l1(g: &Graph<Rational>) -> Result<OptResult> {
    check_size(g.n())?;
    let started = Instant::now();
    let flips = CompleteFlipMatrix::new(g.n())?;
    let columns = flips.columns();
    let k = columns.len();
    let target = target_vector(g);

    let problem = |to: &dyn Fn(i8) -> Rational| LpProblem {
        a: (0..target.len())
            .map(|e| {
                let mut row: Vec<Rational> = columns.iter().map(|c| to(c[e])).collect();
                row.extend(columns.iter().map(|c| to(-c[e])));
                row
            })
            .collect(),
        b: target.clone(),
        c: vec![Rational::one(); 2 * k],
        upper: vec![None; 2 * k],
    };
    let exact = problem(&|v| Rational::from_integer(v.into()));

    let warm = if g.n() > RATIONAL_LP_MAX_N {
        let float = LpProblem::<f64> {
            a: exact
                .a
                .iter()
                .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(0.0)).collect())
                .collect(),
            b: target.iter().map(crate::scalar::rational_to_f64).collect(),
            c: vec![1.0; 2 * k],
            upper: vec![None; 2 * k],
        };
        let s = simplex::solve(&float, None);
        (s.status == LpStatus::Optimal).then_some(s.basis)
    } else {
        None
    };
    let solution = simplex::solve(&exact, warm.as_deref());
    if solution.status != LpStatus::Optimal {
        return Err(Error::Unverified(format!(
            "L1 program ended with status {:?}",
            solution.status
        )));
    }
    let strengths: Vec<Rational> = (0..k)
        .map(|c| solution.x[c].clone() - solution.x[k + c].clone())
        .collect();
    let cols: Vec<usize> = (0..k).collect();
    let sequence = sequence_from_support(g.n(), flips.rows(), &cols, &strengths);
    if let Some((i, j)) = sequence.first_mismatch(g)? {
        return Err(Error::Unverified(format!("L1 optimum misses pair ({i}, {j})")));
    }
    Ok(OptResult {
        objective: sequence.l1(),
        lower_bound: Some(solution.objective.clone()),
        sequence,
        objective_kind: ObjectiveKind::L1,
        status: SolveStatus::Optimal,
        nodes_explored: solution.iterations as u64,
        wall_time: started.elapsed(),
        big_m: None,
        engine: None,
        root_relaxation: None,
        bound_regressions: 0,
    })
}
