//! Noisy depth-one QAOA for weighted Max-Cut, comparing a CNOT compilation
//! of the cost layer with one built from global Ising operations.
//!
//! Both compilations implement `exp(-iγC')` up to a global phase, where
//! `C' = Σ a_ij (1 - Z_i Z_j) / 2`, so without noise they agree exactly.
//!
//! Noise follows a major/minor split. Major errors (rate `λ`) are
//! depolarizing channels after every CNOT (on its two qubits) and after
//! every global operation (on all qubits). Minor errors (rate `0.1 λ`) are
//! single-qubit depolarizing followed by phase flip after every single-qubit
//! gate, plus a bit flip on every qubit before measurement.

mod density;
pub mod statevector;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use density::{DensityMatrix, Gate1, Real};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pulse::PulseSequence;
use crate::scalar::{rational_to_f64, Rational};

/// Largest qubit count the dense simulator accepts.
pub const MAX_QUBITS: usize = 10;
/// Smallest angle grid `optimize_angles` accepts per axis.
pub const MIN_GRID: usize = 8;
/// Minor error rates relative to the major rate.
pub const DEFAULT_MINOR_RATIO: f64 = 0.1;

/// Diagonal of `C'` in the computational basis: the cut value of each
/// bitstring (bit `q` of the index is the side of vertex `q`).
#[derive(Debug, Clone, PartialEq)]
pub struct CostOperator<F = f64> {
    n: usize,
    diagonal: Vec<F>,
}

impl<F: Real> CostOperator<F> {
    pub fn new(g: &Graph<Rational>) -> Result<Self> {
        if g.n() > MAX_QUBITS {
            return Err(Error::TooLarge {
                what: "qubits",
                value: g.n(),
                max: MAX_QUBITS,
            });
        }
        let edges: Vec<(usize, usize, F)> = g
            .edges()
            .iter()
            .map(|e| (e.u, e.v, F::of(rational_to_f64(&e.weight))))
            .collect();
        let diagonal = (0..1usize << g.n())
            .map(|b| {
                edges
                    .iter()
                    .filter(|(i, j, _)| (b >> i ^ b >> j) & 1 == 1)
                    .fold(F::zero(), |acc, &(_, _, w)| acc + w)
            })
            .collect();
        Ok(Self { n: g.n(), diagonal })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> &[F] {
        &self.diagonal
    }

    pub fn max_cut(&self) -> F {
        self.diagonal.iter().fold(F::neg_infinity(), |m, &v| m.max(v))
    }

    /// Average cut over all bitstrings, `⟨C'⟩` in the maximally mixed state.
    pub fn mean_cut(&self) -> F {
        let sum = self.diagonal.iter().fold(F::zero(), |acc, &v| acc + v);
        sum / F::of(self.diagonal.len() as f64)
    }
}

/// Maximum cut weight, by scanning every bitstring.
pub fn maxcut_brute_force(g: &Graph<Rational>) -> Result<f64> {
    Ok(CostOperator::<f64>::new(g)?.max_cut())
}

/// Error rates for one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// `λ`: depolarizing probability after CNOTs and global operations.
    pub major_rate: f64,
    /// Single-qubit error rates as a fraction of `λ`.
    pub minor_ratio: f64,
    /// Bit-flip probability per qubit at readout.
    pub measurement_flip: f64,
}

impl NoiseSpec {
    /// Major rate `λ`, minor and readout rates `0.1 λ`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        let spec = Self {
            major_rate: lambda,
            minor_ratio: DEFAULT_MINOR_RATIO,
            measurement_flip: DEFAULT_MINOR_RATIO * lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn noiseless() -> Self {
        Self {
            major_rate: 0.0,
            minor_ratio: DEFAULT_MINOR_RATIO,
            measurement_flip: 0.0,
        }
    }

    pub fn minor_rate(&self) -> f64 {
        self.major_rate * self.minor_ratio
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |x: f64| (0.0..=1.0).contains(&x);
        if !prob(self.major_rate) || !prob(self.minor_rate()) || !prob(self.measurement_flip) {
            return Err(Error::InvalidArgument(format!(
                "noise rates must lie in [0, 1]: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compilation {
    /// Two CNOTs around a z-rotation per edge.
    Cx,
    /// Global Ising operations with bit-flip masks, one per sequence row.
    Ms,
}

impl fmt::Display for Compilation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compilation::Cx => "cx",
            Compilation::Ms => "ms",
        })
    }
}

impl FromStr for Compilation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cx" | "cnot" => Ok(Compilation::Cx),
            "ms" | "ising" => Ok(Compilation::Ms),
            other => Err(Error::InvalidArgument(format!(
                "unknown compilation {other:?} (expected cx or ms)"
            ))),
        }
    }
}

/// A graph's depth-one QAOA circuit under one compilation, checked and
/// ready to evaluate at any angles.
#[derive(Debug, Clone)]
pub struct QaoaCircuit<F = f64> {
    cost: CostOperator<F>,
    compilation: Compilation,
    edges: Vec<(usize, usize, F)>,
    /// `(flip mask, strength)` per sequence row.
    rows: Vec<(usize, F)>,
    /// `Σ_{i<j} z_i z_j` per basis state, `z = ±1`.
    all_pairs: Vec<F>,
}

impl<F: Real> QaoaCircuit<F> {
    /// `seq` is required for [`Compilation::Ms`] and must realize `g`.
    pub fn new(g: &Graph<Rational>, compilation: Compilation, seq: Option<&PulseSequence<Rational>>) -> Result<Self> {
        let cost = CostOperator::new(g)?;
        let n = g.n();
        let edges = g
            .edges()
            .iter()
            .map(|e| (e.u, e.v, F::of(rational_to_f64(&e.weight))))
            .collect();
        let rows = match compilation {
            Compilation::Cx => Vec::new(),
            Compilation::Ms => {
                let seq = seq.ok_or_else(|| Error::InvalidArgument("ms compilation needs a sequence".into()))?;
                if let Some((i, j)) = seq.first_mismatch(g)? {
                    return Err(Error::Unverified(format!("coupling ({i}, {j}) differs")));
                }
                seq.ops()
                    .iter()
                    .filter(|op| !num_traits::Zero::is_zero(&op.strength))
                    .map(|op| {
                        let mask = op.row.flipped().fold(0usize, |m, q| m | 1 << q);
                        (mask, F::of(rational_to_f64(&op.strength)))
                    })
                    .collect()
            }
        };
        let all_pairs = (0..1usize << n)
            .map(|b| {
                let s = n as i64 - 2 * b.count_ones() as i64;
                F::of(((s * s - n as i64) / 2) as f64)
            })
            .collect();
        Ok(Self {
            cost,
            compilation,
            edges,
            rows,
            all_pairs,
        })
    }

    pub fn cost(&self) -> &CostOperator<F> {
        &self.cost
    }

    pub fn compilation(&self) -> Compilation {
        self.compilation
    }

    /// Number of two-qubit gates (CX) or global operations (MS) in the cost layer.
    pub fn entangling_count(&self) -> usize {
        match self.compilation {
            Compilation::Cx => 2 * self.edges.len(),
            Compilation::Ms => self.rows.len(),
        }
    }

    /// Final state of the noisy circuit.
    pub fn final_state(&self, gamma: F, beta: F, noise: &NoiseSpec) -> Result<DensityMatrix<F>> {
        if !gamma.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidArgument("angles must be finite".into()));
        }
        noise.validate()?;
        let n = self.cost.n;
        let major = F::of(noise.major_rate);
        let minor = F::of(noise.minor_rate());
        let minor_noise = |rho: &mut DensityMatrix<F>, q: usize| {
            rho.depolarize(&[q], minor);
            rho.phase_flip(q, minor);
        };
        let flips = |rho: &mut DensityMatrix<F>, mask: usize| {
            for q in (0..n).filter(|q| mask >> q & 1 == 1) {
                rho.apply_x_mask(1 << q);
                minor_noise(rho, q);
            }
        };

        let mut rho = DensityMatrix::plus_state(n);
        match self.compilation {
            Compilation::Cx => {
                for &(i, j, a) in &self.edges {
                    // CNOT maps Z_j to Z_i Z_j, so R_z(-γa) on j gives exp(iγa Z_i Z_j / 2)
                    rho.apply_cnot(i, j);
                    rho.depolarize(&[i, j], major);
                    rho.apply_rz(j, -gamma * a);
                    minor_noise(&mut rho, j);
                    rho.apply_cnot(i, j);
                    rho.depolarize(&[i, j], major);
                }
            }
            Compilation::Ms => {
                let all: Vec<usize> = (0..n).collect();
                for &(mask, w) in &self.rows {
                    flips(&mut rho, mask);
                    // exp(iγw/2 Σ_{i<j} Z_i Z_j); conjugating by the flips gives the row's signs
                    let theta = gamma * w / F::of(2.0);
                    let phases: Vec<Complex<F>> = self
                        .all_pairs
                        .iter()
                        .map(|&p| Complex::from_polar(F::one(), theta * p))
                        .collect();
                    rho.apply_diagonal(&phases);
                    rho.depolarize(&all, major);
                    flips(&mut rho, mask);
                }
            }
        }
        for q in 0..n {
            rho.apply_rx_half(q, beta);
            minor_noise(&mut rho, q);
        }
        let readout = F::of(noise.measurement_flip);
        for q in 0..n {
            rho.bit_flip(q, readout);
        }
        Ok(rho)
    }

    /// `⟨C'⟩` at the end of the noisy circuit.
    pub fn expectation(&self, gamma: F, beta: F, noise: &NoiseSpec) -> Result<F> {
        Ok(self
            .final_state(gamma, beta, noise)?
            .expectation_diagonal(&self.cost.diagonal))
    }
}

/// `⟨C'⟩` for one circuit evaluation.
pub fn simulate_qaoa_p1(
    g: &Graph<Rational>,
    compilation: Compilation,
    seq: Option<&PulseSequence<Rational>>,
    gamma: f64,
    beta: f64,
    noise: &NoiseSpec,
) -> Result<f64> {
    QaoaCircuit::<f64>::new(g, compilation, seq)?.expectation(gamma, beta, noise)
}

/// Best grid point of an angle scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleOptimum {
    pub gamma: f64,
    pub beta: f64,
    pub expectation: f64,
    /// `expectation / max cut` (0 for a graph without positive cuts).
    pub ratio: f64,
}

/// Scans `γ ∈ [0, 2π)` and `β ∈ [0, π)` on a `resolution × resolution`
/// grid. Ties keep the lexicographically smallest `(γ, β)`.
pub fn optimize_angles(circuit: &QaoaCircuit<f64>, noise: &NoiseSpec, resolution: usize) -> Result<AngleOptimum> {
    if resolution < MIN_GRID {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least {MIN_GRID}"
        )));
    }
    let step_g = 2.0 * std::f64::consts::PI / resolution as f64;
    let step_b = std::f64::consts::PI / resolution as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    for ig in 0..resolution {
        let gamma = ig as f64 * step_g;
        for ib in 0..resolution {
            let beta = ib as f64 * step_b;
            let e = circuit.expectation(gamma, beta, noise)?;
            if best.is_none_or(|(_, _, b)| e > b) {
                best = Some((gamma, beta, e));
            }
        }
    }
    let (gamma, beta, expectation) = best.expect("grid is non-empty");
    let max_cut = circuit.cost().max_cut();
    let ratio = if max_cut > 0.0 { expectation / max_cut } else { 0.0 };
    Ok(AngleOptimum {
        gamma,
        beta,
        expectation,
        ratio,
    })
}
