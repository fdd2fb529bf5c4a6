//! Exact minimum-support search.
//!
//! The target couplings `a` (one entry per vertex pair) must be written as
//! `Σ_c w_c q_c` over columns `q_c ∈ {±1}^pairs` of the complete flip matrix,
//! with as few nonzero `w_c` as possible. A minimum support is linearly
//! independent (a dependent column could be eliminated), so only independent
//! column sets are visited.
//!
//! For `k = 1, 2, …` a depth-first search picks columns in increasing index
//! order, keeping every remaining column and the target reduced modulo the
//! span of the chosen ones. With `k - 2` columns chosen and residual `R`,
//! two more columns `a < b` finish the support iff
//! `R = α r_a + λ r_b` with `α, λ ≠ 0`. Writing `r_c = u_c + β_c R`, where
//! `u_c` is `r_c` with its `R` component (along a fixed pivot) removed, this
//! holds iff `u_a` and `u_b` are parallel and nonzero, say `u_c = σ_c û_c`
//! with `û_c` normalized, and `β_a / σ_a ≠ β_b / σ_b`. Columns are bucketed
//! by `û_c`, so the last two levels cost one pass instead of a double loop.
//!
//! Arithmetic is modulo `2^31 - 1` while the Hadamard bound keeps every
//! relevant minor below it, and modulo `2^61 - 1` beyond (see
//! [`super::linalg`]). Each candidate support is re-solved over the rationals
//! and checked against the strength bound before it is accepted.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linalg::{self, Field, M31, M61};
use crate::scalar::Rational;

/// Outcome of a search at one or more support sizes.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    /// Columns (indices into the candidate list) and their exact strengths.
    Found {
        columns: Vec<usize>,
        strengths: Vec<Rational>,
    },
    /// Every support of the searched size was ruled out.
    Exhausted,
    /// Deadline reached before the size was settled.
    TimedOut,
}

pub struct SupportSearch<'a> {
    /// Candidate columns as `±1` vectors over the pairs.
    columns: &'a [Vec<i8>],
    target: &'a [Rational],
    /// Largest admissible `|w|`, if any.
    bound: Option<&'a Rational>,
    deadline: Option<Instant>,
    d: usize,
    k_cols: usize,
    target_m61: Vec<u64>,
    /// `None` when `2^31 - 1` divides a denominator.
    target_m31: Option<Vec<u64>>,
    /// `log2` of the Euclidean norm of the target with denominators cleared.
    log2_norm: f64,
    pub nodes: u64,
}

impl<'a> SupportSearch<'a> {
    /// `None` when the target cannot be mapped into `F_p` (a denominator
    /// divisible by `2^61 - 1`).
    pub fn new(
        columns: &'a [Vec<i8>],
        target: &'a [Rational],
        bound: Option<&'a Rational>,
        deadline: Option<Instant>,
    ) -> Option<Self> {
        let d = target.len();
        assert!(columns.iter().all(|c| c.len() == d));
        let target_m61 = target.iter().map(M61::from_rational).collect::<Option<Vec<u64>>>()?;
        let target_m31 = target.iter().map(M31::from_rational).collect::<Option<Vec<u64>>>();
        let lcm = target.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let norm_sq: BigInt = target
            .iter()
            .map(|v| {
                let t = v.numer() * (&lcm / v.denom());
                &t * &t
            })
            .sum();
        let log2_norm = norm_sq.to_f64().map_or(f64::INFINITY, |x| 0.5 * x.max(1.0).log2());
        Some(Self {
            columns,
            target,
            bound,
            deadline,
            d,
            k_cols: columns.len(),
            target_m61,
            target_m31,
            log2_norm,
            nodes: 0,
        })
    }

    /// Looks for a support of size at most `k` (sizes below `k` are assumed
    /// ruled out already; a smaller one found along the way is still returned).
    pub fn search(&mut self, k: usize) -> SearchOutcome {
        if self.target.iter().all(Zero::is_zero) {
            return SearchOutcome::Found {
                columns: vec![],
                strengths: vec![],
            };
        }
        if k == 0 {
            return SearchOutcome::Exhausted;
        }
        // Every witnessing minor has at most k ±1 columns and one target
        // column, so Hadamard bounds it by (k+1)^(k/2) |t|.
        let log2_minor = 0.5 * k as f64 * ((k + 1) as f64).log2() + self.log2_norm;
        match self.target_m31.take() {
            Some(t) if log2_minor + 1.0 < 31.0 => {
                let outcome = self.run::<M31>(&t, k);
                self.target_m31 = Some(t);
                outcome
            }
            small => {
                self.target_m31 = small;
                let t = std::mem::take(&mut self.target_m61);
                let outcome = self.run::<M61>(&t, k);
                self.target_m61 = t;
                outcome
            }
        }
    }

    fn run<F: Field>(&mut self, target: &[u64], k: usize) -> SearchOutcome {
        let cols: Vec<u64> = self
            .columns
            .iter()
            .flat_map(|c| c.iter().map(|&v| F::from_i64(v as i64)))
            .collect();
        let levels = k.saturating_sub(1).max(1);
        let mut st = State {
            reduced: vec![cols; levels],
            residual: vec![target.to_vec(); levels],
            chosen: Vec::with_capacity(k),
            basis: vec![0; self.d],
            keys: vec![0; self.k_cols * self.d],
            entries: Vec::with_capacity(self.k_cols),
            leads: Vec::with_capacity(self.k_cols),
            prefix: Vec::with_capacity(self.k_cols + 1),
        };
        match self.dfs::<F>(&mut st, 0, k) {
            Ok(Some(found)) => found,
            Ok(None) => SearchOutcome::Exhausted,
            Err(TimedOut) => SearchOutcome::TimedOut,
        }
    }

    fn timed_out(&self) -> bool {
        self.nodes.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn dfs<F: Field>(&mut self, st: &mut State, start: usize, k: usize) -> Result<Option<SearchOutcome>, TimedOut> {
        self.nodes += 1;
        if self.timed_out() {
            return Err(TimedOut);
        }
        let depth = st.chosen.len();
        if depth + 2 >= k {
            return Ok(self.finish::<F>(st, start, k - depth));
        }
        let d = self.d;
        for c in start..self.k_cols {
            // keep enough columns after c to reach size k
            if self.k_cols - c < k - depth {
                break;
            }
            let (lower, upper) = st.reduced.split_at_mut(depth + 1);
            let cur = &lower[depth];
            let col = &cur[c * d..(c + 1) * d];
            let Some(piv) = col.iter().position(|&v| v != 0) else {
                continue;
            };
            let scale = F::inv(col[piv]);
            for (b, &v) in st.basis.iter_mut().zip(col) {
                *b = F::mul(v, scale);
            }

            let next = &mut upper[0];
            next[(c + 1) * d..].copy_from_slice(&cur[(c + 1) * d..]);
            for row in next[(c + 1) * d..].chunks_exact_mut(d) {
                eliminate::<F>(row, &st.basis, piv);
            }
            let (lower, upper) = st.residual.split_at_mut(depth + 1);
            upper[0].copy_from_slice(&lower[depth]);
            eliminate::<F>(&mut upper[0], &st.basis, piv);

            st.chosen.push(c);
            let found = self.dfs::<F>(st, c + 1, k)?;
            st.chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// Completes the chosen set with at most `need` (1 or 2) columns from `start..`.
    fn finish<F: Field>(&mut self, st: &mut State, start: usize, need: usize) -> Option<SearchOutcome> {
        let depth = st.chosen.len();
        let d = self.d;
        let r = &st.residual[depth];
        let Some(piv) = r.iter().position(|&v| v != 0) else {
            return self.accept(&st.chosen, &[]);
        };
        let r_inv = F::inv(r[piv]);
        for (b, &v) in st.basis.iter_mut().zip(r) {
            *b = F::mul(v, r_inv);
        }
        let cur = &st.reduced[depth];

        st.leads.clear();
        for c in start..self.k_cols {
            let col = &cur[c * d..(c + 1) * d];
            let beta = col[piv];
            let key = &mut st.keys[c * d..(c + 1) * d];
            for ((out, &v), &rn) in key.iter_mut().zip(col).zip(&st.basis) {
                *out = F::sub(v, F::mul(beta, rn));
            }
            let Some(lead) = key.iter().position(|&v| v != 0) else {
                if beta != 0 {
                    // r_c parallel to R: one more column suffices
                    if let Some(found) = self.accept(&st.chosen, &[c]) {
                        return Some(found);
                    }
                }
                continue;
            };
            if need >= 2 {
                st.leads.push((c, key[lead], beta));
            }
        }
        if st.leads.is_empty() {
            return None;
        }

        // one inversion for all leading entries
        st.prefix.clear();
        st.prefix.push(1);
        for &(_, sigma, _) in &st.leads {
            let last = *st.prefix.last().unwrap();
            st.prefix.push(F::mul(last, sigma));
        }
        let mut acc = F::inv(*st.prefix.last().unwrap());
        st.entries.clear();
        for (t, &(c, sigma, beta)) in st.leads.iter().enumerate().rev() {
            let sigma_inv = F::mul(acc, st.prefix[t]);
            acc = F::mul(acc, sigma);
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for v in st.keys[c * d..(c + 1) * d].iter_mut() {
                *v = F::mul(*v, sigma_inv);
                h = (h ^ *v).wrapping_mul(0x0100_0000_01b3);
            }
            st.entries.push((h, c, F::mul(beta, sigma_inv)));
        }
        st.entries.sort_unstable();
        let entries = &st.entries;
        let mut g = 0;
        while g < entries.len() {
            let mut end = g + 1;
            while end < entries.len() && entries[end].0 == entries[g].0 {
                end += 1;
            }
            for x in g..end {
                for y in x + 1..end {
                    let (_, a, ra) = entries[x];
                    let (_, b, rb) = entries[y];
                    if ra != rb && st.keys[a * d..(a + 1) * d] == st.keys[b * d..(b + 1) * d] {
                        if let Some(found) = self.accept(&st.chosen, &[a, b]) {
                            return Some(found);
                        }
                    }
                }
            }
            g = end;
        }
        None
    }

    /// Exact check of a candidate support.
    fn accept(&self, chosen: &[usize], extra: &[usize]) -> Option<SearchOutcome> {
        let mut columns: Vec<usize> = chosen.iter().chain(extra).copied().collect();
        columns.sort_unstable();
        let cols: Vec<Vec<i8>> = columns.iter().map(|&c| self.columns[c].clone()).collect();
        let strengths = linalg::solve_exact(&cols, self.target)?;
        if let Some(m) = self.bound {
            if strengths.iter().any(|w| w.abs() > *m) {
                return None;
            }
        }
        Some(SearchOutcome::Found { columns, strengths })
    }
}

struct State {
    /// Per depth: columns reduced by the chosen prefix, flattened. Only
    /// columns after the last chosen one are current.
    reduced: Vec<Vec<u64>>,
    residual: Vec<Vec<u64>>,
    chosen: Vec<usize>,
    /// Scratch row: the normalized pivot column or residual.
    basis: Vec<u64>,
    /// Normalized `û_c` per column, flattened.
    keys: Vec<u64>,
    /// `(hash of û_c, column, β_c / σ_c)`.
    entries: Vec<(u64, usize, u64)>,
    /// `(column, σ_c, β_c)` for columns with `u_c ≠ 0`.
    leads: Vec<(usize, u64, u64)>,
    prefix: Vec<u64>,
}

struct TimedOut;

/// `row -= row[piv] * basis`, where `basis[piv] = 1`.
#[inline]
fn eliminate<F: Field>(row: &mut [u64], basis: &[u64], piv: usize) {
    let f = row[piv];
    if f == 0 {
        return;
    }
    let neg = F::neg(f);
    for (x, &b) in row.iter_mut().zip(basis) {
        if b != 0 {
            *x = F::add(*x, F::mul(neg, b));
        }
    }
}
