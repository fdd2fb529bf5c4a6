//! Dense bounded-variable primal simplex for
//!
//! ```text
//! min c·x   subject to   A x = b,   0 <= x_j <= u_j   (u_j may be infinite)
//! ```
//!
//! Phase I adds one artificial per row. Once feasible the artificials are
//! pinned to zero by an upper bound of zero, so redundant rows need no
//! special handling. Entering columns follow Dantzig's rule until a run of
//! degenerate pivots, then Bland's rule; ties always go to the lowest index,
//! so runs are deterministic. Over an exact scalar every comparison is exact;
//! over floats reduced costs and pivots are screened with the scalar's
//! tolerance.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct LpProblem<T> {
    /// Row-major `m × n` constraint matrix.
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    /// `None` for an unbounded variable.
    pub upper: Vec<Option<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub objective: T,
    /// Basic variable per row. Indices `>= n` are artificials.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

const DEGENERATE_RUN_BEFORE_BLAND: usize = 30;

struct Tableau<T> {
    m: usize,
    /// Structural plus artificial columns.
    width: usize,
    /// `B⁻¹ [A | I]`.
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    xb: Vec<T>,
    at_upper: Vec<bool>,
    upper: Vec<Option<T>>,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Limit,
}

impl<T: Scalar> Tableau<T> {
    fn new(p: &LpProblem<T>) -> Self {
        let m = p.a.len();
        let n = p.c.len();
        let width = n + m;
        let mut t = Vec::with_capacity(m);
        let mut xb = Vec::with_capacity(m);
        for i in 0..m {
            // rows are negated where needed so the artificial start is feasible
            let neg = p.b[i] < T::zero();
            let mut row: Vec<T> = p.a[i]
                .iter()
                .map(|v| if neg { -v.clone() } else { v.clone() })
                .collect();
            row.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
            t.push(row);
            xb.push(p.b[i].abs());
        }
        let mut upper = p.upper.clone();
        upper.extend(std::iter::repeat_n(None, m));
        Self {
            m,
            width,
            t,
            basis: (n..n + m).collect(),
            xb,
            at_upper: vec![false; width],
            upper,
            iterations: 0,
            max_iterations: 50_000 + 200 * width,
        }
    }

    fn is_basic(&self) -> Vec<bool> {
        let mut basic = vec![false; self.width];
        for &j in &self.basis {
            basic[j] = true;
        }
        basic
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.t[r][q].clone();
        for v in self.t[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        let pivot_row = self.t[r].clone();
        for i in 0..self.m {
            if i == r || self.t[i][q].is_zero() {
                continue;
            }
            let f = self.t[i][q].clone();
            for (v, p) in self.t[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v = v.clone() - f.clone() * p.clone();
                }
            }
        }
        self.basis[r] = q;
    }

    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let mut d = cost.to_vec();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = &cost[bj];
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.width {
                if !self.t[i][j].is_zero() {
                    d[j] = d[j].clone() - cb.clone() * self.t[i][j].clone();
                }
            }
        }
        d
    }

    fn objective(&self, cost: &[T]) -> T {
        let mut z = T::zero();
        for (i, &bj) in self.basis.iter().enumerate() {
            z = z + cost[bj].clone() * self.xb[i].clone();
        }
        for j in 0..self.width {
            if self.at_upper[j] {
                if let Some(u) = &self.upper[j] {
                    z = z + cost[j].clone() * u.clone();
                }
            }
        }
        z
    }

    fn eligible(&self, d: &T, j: usize) -> bool {
        let tol = T::tolerance();
        if self.at_upper[j] {
            *d > tol
        } else {
            *d < -tol && !matches!(&self.upper[j], Some(u) if u.is_zero())
        }
    }

    /// Runs primal simplex iterations for `cost` from the current basis.
    fn run(&mut self, cost: &[T]) -> Step {
        let mut degenerate_run = 0;
        loop {
            if self.iterations >= self.max_iterations {
                return Step::Limit;
            }
            let basic = self.is_basic();
            let d = self.reduced_costs(cost);
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let mut entering: Option<usize> = None;
            for j in 0..self.width {
                if basic[j] || !self.eligible(&d[j], j) {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                match entering {
                    Some(e) if d[e].abs() >= d[j].abs() => {}
                    _ => entering = Some(j),
                }
            }
            let Some(q) = entering else {
                return Step::Optimal;
            };
            let increasing = !self.at_upper[q];

            // ratio test: largest step before a basic variable or q itself hits a bound
            let piv_tol = T::tolerance();
            let mut best: Option<(T, Option<usize>, bool)> = self.upper[q].clone().map(|u| (u, None, false));
            for i in 0..self.m {
                let a = &self.t[i][q];
                if a.abs() <= piv_tol {
                    continue;
                }
                // x_B[i] moves at rate -a per unit increase of x_q
                let toward_lower = (*a > T::zero()) == increasing;
                let limit = if toward_lower {
                    Some((self.xb[i].clone() / a.abs(), false))
                } else {
                    self.upper[self.basis[i]]
                        .as_ref()
                        .map(|u| ((u.clone() - self.xb[i].clone()) / a.abs(), true))
                };
                let Some((ratio, to_upper)) = limit else { continue };
                let ratio = if ratio < T::zero() { T::zero() } else { ratio };
                let better = match &best {
                    None => true,
                    Some((r, row, _)) => {
                        ratio < *r
                            || (ratio == *r
                                && match row {
                                    None => false,
                                    Some(k) => self.basis[i] < self.basis[*k],
                                })
                    }
                };
                if better {
                    best = Some((ratio, Some(i), to_upper));
                }
            }
            let Some((step, leave, to_upper)) = best else {
                return Step::Unbounded;
            };
            self.iterations += 1;
            if step.is_negligible() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let signed = if increasing { step.clone() } else { -step.clone() };
            for i in 0..self.m {
                if !self.t[i][q].is_zero() {
                    self.xb[i] = self.xb[i].clone() - signed.clone() * self.t[i][q].clone();
                }
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some(r) => {
                    let out = self.basis[r];
                    let start = if self.at_upper[q] {
                        self.upper[q].clone().expect("at upper implies a bound")
                    } else {
                        T::zero()
                    };
                    self.xb[r] = start + signed;
                    self.at_upper[q] = false;
                    self.at_upper[out] = to_upper;
                    self.pivot(r, q);
                }
            }
        }
    }

    /// Installs `columns` as the basis. Fails on singular choices or when the
    /// resulting point violates a bound.
    fn install_basis(&mut self, columns: &[usize]) -> bool {
        if columns.len() != self.m {
            return false;
        }
        for &q in columns {
            if q >= self.width || self.basis.contains(&q) {
                if self.basis.contains(&q) {
                    continue;
                }
                return false;
            }
            let row = (0..self.m).find(|&i| !columns.contains(&self.basis[i]) && !self.t[i][q].is_negligible());
            let Some(r) = row else { return false };
            let piv = self.t[r][q].clone();
            let ratio = self.xb[r].clone() / piv;
            for i in 0..self.m {
                if i != r && !self.t[i][q].is_zero() {
                    self.xb[i] = self.xb[i].clone() - ratio.clone() * self.t[i][q].clone();
                }
            }
            self.xb[r] = ratio;
            self.pivot(r, q);
        }
        let tol = T::tolerance();
        (0..self.m).all(|i| {
            let j = self.basis[i];
            self.xb[i] >= -tol.clone()
                && self.upper[j]
                    .as_ref()
                    .is_none_or(|u| self.xb[i] <= u.clone() + tol.clone())
        })
    }

    fn solution(&self, n: usize, cost: &[T], status: LpStatus) -> LpSolution<T> {
        let mut x = vec![T::zero(); self.width];
        for j in 0..self.width {
            if self.at_upper[j] {
                x[j] = self.upper[j].clone().expect("at upper implies a bound");
            }
        }
        for (i, &bj) in self.basis.iter().enumerate() {
            x[bj] = self.xb[i].clone();
        }
        x.truncate(n);
        LpSolution {
            status,
            objective: self.objective(cost),
            x,
            basis: self.basis.clone(),
            iterations: self.iterations,
        }
    }
}

/// Solves `p`. A `warm_basis` (one column per row, artificials allowed) that
/// is primal feasible skips phase I.
pub fn solve<T: Scalar>(p: &LpProblem<T>, warm_basis: Option<&[usize]>) -> LpSolution<T> {
    let m = p.a.len();
    let n = p.c.len();
    assert!(p.a.iter().all(|r| r.len() == n), "ragged constraint matrix");
    assert_eq!(p.b.len(), m);
    assert_eq!(p.upper.len(), n);

    let mut phase2_cost = p.c.clone();
    phase2_cost.extend(std::iter::repeat_n(T::zero(), m));

    if let Some(basis) = warm_basis {
        let mut tab = Tableau::new(p);
        if tab.install_basis(basis) {
            for j in n..n + m {
                if !tab.basis.contains(&j) {
                    tab.upper[j] = Some(T::zero());
                }
            }
            // basic artificials must be zero to pin them
            let pinned = tab.basis.iter().zip(&tab.xb).all(|(&j, v)| j < n || v.is_negligible());
            if pinned {
                for j in n..n + m {
                    tab.upper[j] = Some(T::zero());
                }
                return finish_phase2(tab, n, &phase2_cost);
            }
        }
    }

    let mut tab = Tableau::new(p);
    let mut phase1_cost = vec![T::zero(); n];
    phase1_cost.extend(std::iter::repeat_n(T::one(), m));
    match tab.run(&phase1_cost) {
        Step::Optimal => {}
        Step::Limit => return tab.solution(n, &phase2_cost, LpStatus::IterationLimit),
        Step::Unbounded => unreachable!("phase I objective is bounded below by zero"),
    }
    let infeasibility = tab.objective(&phase1_cost);
    let scale = p.b.iter().fold(T::one(), |acc, v| acc + v.abs());
    if infeasibility > T::tolerance() * scale {
        return tab.solution(n, &phase2_cost, LpStatus::Infeasible);
    }
    for j in n..n + m {
        tab.upper[j] = Some(T::zero());
        tab.at_upper[j] = false;
    }
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj >= n {
            tab.xb[i] = T::zero();
        }
    }
    finish_phase2(tab, n, &phase2_cost)
}

fn finish_phase2<T: Scalar>(mut tab: Tableau<T>, n: usize, cost: &[T]) -> LpSolution<T> {
    let status = match tab.run(cost) {
        Step::Optimal => LpStatus::Optimal,
        Step::Unbounded => LpStatus::Unbounded,
        Step::Limit => LpStatus::IterationLimit,
    };
    tab.solution(n, cost, status)
}
