//! Best-bound branch-and-bound on the L0 program.
//!
//! Strengths are scaled by `M` (`w = M y`), so each node solves
//!
//! ```text
//! min Σ_{c free} (y⁺_c + y⁻_c)   s.t.   Q (y⁺ - y⁻) = a / M,   0 <= y± <= 1
//! ```
//!
//! over the rows not fixed to zero; rows fixed to one cost nothing in the LP
//! and one each in the bound. Node LPs run in `f64`. Integer candidates come
//! from the support of each node solution and are re-solved exactly before
//! they replace the incumbent, so floating error can cost pruning power but
//! never correctness of the returned sequence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use num_traits::{Signed, ToPrimitive};

use super::linalg::solve_exact;
use super::simplex::{self, LpProblem, LpStatus};
use super::{
    pair_column, sequence_from_support, target_vector, BigM, CompleteFlipMatrix, Engine, ObjectiveKind, OptResult,
    SolveStatus,
};
use crate::error::Result;
use crate::graph::Graph;
use crate::pulse::PulseSequence;
use crate::scalar::{rational_to_f64, Rational};

/// Slack on relaxation bounds before a node is pruned.
const BOUND_MARGIN: f64 = 1e-6;
/// Relaxation values closer than this to 0 or 1 count as integral.
const INTEGRALITY_TOL: f64 = 1e-7;

struct Node {
    id: u64,
    /// Per row: `None` free, `Some(false)` off, `Some(true)` on.
    fixed: Vec<Option<bool>>,
    relaxation: Relaxation,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .relaxation
            .bound
            .total_cmp(&self.relaxation.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Relaxation {
    bound: f64,
    /// `b_c = |y_c|` per row.
    activation: Vec<f64>,
    /// Rows with a basic, nonzero strength.
    support: Vec<usize>,
}

struct Context<'a> {
    columns: Vec<Vec<i8>>,
    target: Vec<Rational>,
    scaled_target: Vec<f64>,
    big_m: &'a BigM,
}

impl Context<'_> {
    fn relax(&self, fixed: &[Option<bool>]) -> Option<Relaxation> {
        let active: Vec<usize> = (0..fixed.len()).filter(|&c| fixed[c] != Some(false)).collect();
        let rows = self.target.len();
        let a: Vec<Vec<f64>> = (0..rows)
            .map(|e| {
                let mut row: Vec<f64> = active.iter().map(|&c| self.columns[c][e] as f64).collect();
                row.extend(active.iter().map(|&c| -(self.columns[c][e] as f64)));
                row
            })
            .collect();
        let cost: Vec<f64> = active
            .iter()
            .map(|&c| if fixed[c] == Some(true) { 0.0 } else { 1.0 })
            .collect();
        let problem = LpProblem {
            a,
            b: self.scaled_target.clone(),
            c: [cost.clone(), cost].concat(),
            upper: vec![Some(1.0); 2 * active.len()],
        };
        let s = simplex::solve(&problem, None);
        if s.status != LpStatus::Optimal {
            return None;
        }
        let forced = fixed.iter().filter(|f| **f == Some(true)).count();
        let mut activation = vec![0.0; fixed.len()];
        let mut support = Vec::new();
        let na = active.len();
        for (k, &c) in active.iter().enumerate() {
            let y = s.x[k] - s.x[na + k];
            activation[c] = y.abs();
            if y.abs() > 1e-9 {
                support.push(c);
            }
        }
        Some(Relaxation {
            bound: forced as f64 + s.objective,
            activation,
            support,
        })
    }

    /// Exact strengths on `support`, if they realize the target within `M`.
    fn exact_candidate(&self, support: &[usize]) -> Option<Vec<Rational>> {
        let cols: Vec<Vec<i8>> = support.iter().map(|&c| self.columns[c].clone()).collect();
        let w = solve_exact(&cols, &self.target)?;
        w.iter().all(|v| v.abs() <= self.big_m.value).then_some(w)
    }
}

pub(super) fn branch_and_bound(
    g: &Graph<Rational>,
    flips: &CompleteFlipMatrix,
    big_m: &BigM,
    mut incumbent: PulseSequence<Rational>,
    deadline: Option<Instant>,
    started: Instant,
) -> Result<OptResult> {
    let columns: Vec<Vec<i8>> = flips.rows().iter().map(pair_column).collect();
    let target = target_vector(g);
    let m = rational_to_f64(&big_m.value);
    let ctx = Context {
        scaled_target: target.iter().map(|v| rational_to_f64(v) / m).collect(),
        columns,
        target,
        big_m,
    };
    let k = flips.rows().len();

    let mut nodes: u64 = 0;
    let mut regressions: u64 = 0;
    let mut next_id: u64 = 0;
    let mut heap = BinaryHeap::new();
    let mut timed_out = false;
    let root_fixed = vec![None; k];
    let root = ctx.relax(&root_fixed);
    let root_bound = root.as_ref().map(|r| r.bound);
    if let Some(relaxation) = root {
        heap.push(Node {
            id: next_id,
            fixed: root_fixed,
            relaxation,
        });
        next_id += 1;
    }

    // pruned when the bound cannot reach incumbent - 1
    let prunable = |bound: f64, best: usize| bound > best as f64 - 1.0 + BOUND_MARGIN;

    while let Some(node) = heap.pop() {
        let relaxation = &node.relaxation;
        let best = incumbent.l0();
        if prunable(relaxation.bound, best) {
            // best-bound order: every open node is prunable too
            heap.clear();
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            heap.push(node);
            break;
        }
        nodes += 1;

        if relaxation.support.len() < best {
            if let Some(w) = ctx.exact_candidate(&relaxation.support) {
                let seq = sequence_from_support(g.n(), flips.rows(), &relaxation.support, &w);
                if seq.l0() < incumbent.l0() {
                    incumbent = seq;
                }
            }
        }

        // most fractional free row, ties to the lowest index
        let branch = (0..k)
            .filter(|&c| node.fixed[c].is_none())
            .map(|c| (c, relaxation.activation[c]))
            .filter(|&(_, b)| b > INTEGRALITY_TOL && b < 1.0 - INTEGRALITY_TOL)
            .min_by(|x, y| (x.1 - 0.5).abs().total_cmp(&(y.1 - 0.5).abs()).then(x.0.cmp(&y.0)));
        let Some((c, _)) = branch else {
            continue;
        };
        for value in [false, true] {
            let mut fixed = node.fixed.clone();
            fixed[c] = Some(value);
            let Some(child) = ctx.relax(&fixed) else { continue };
            if child.bound < relaxation.bound - BOUND_MARGIN {
                regressions += 1;
            }
            if prunable(child.bound, incumbent.l0()) {
                continue;
            }
            heap.push(Node {
                id: next_id,
                fixed,
                relaxation: child,
            });
            next_id += 1;
        }
    }

    let status = if timed_out {
        SolveStatus::IncumbentTimeout
    } else {
        SolveStatus::Optimal
    };
    let proven = if timed_out {
        let open = heap.iter().map(|n| n.relaxation.bound).fold(f64::INFINITY, f64::min);
        (open.min(incumbent.l0() as f64) - BOUND_MARGIN).ceil().max(0.0)
    } else {
        incumbent.l0() as f64
    };
    Ok(OptResult {
        objective: Rational::from_integer(incumbent.l0().into()),
        sequence: incumbent,
        objective_kind: ObjectiveKind::L0,
        status,
        nodes_explored: nodes,
        wall_time: started.elapsed(),
        big_m: Some(big_m.clone()),
        lower_bound: Some(Rational::from_integer(proven.to_i64().unwrap_or(0).into())),
        engine: Some(Engine::LpBranchAndBound),
        root_relaxation: root_bound,
        bound_regressions: regressions,
    })
}
