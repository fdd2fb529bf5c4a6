//! Dense density matrices over `n` qubits with the gates and channels the
//! QAOA circuits need.
//!
//! Qubit `q` is bit `q` of a basis index. Storage is row-major,
//! `data[a * dim + b] = ρ[a][b]`.

use num_complex::Complex;
use num_traits::{Float, FloatConst};

/// Real type of the simulator (`f32` or `f64`).
pub trait Real: Float + FloatConst + std::fmt::Debug + Send + Sync + 'static {
    fn of(x: f64) -> Self {
        Self::from(x).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A 2×2 single-qubit unitary, `u[row][col]`.
pub type Gate1<F> = [[Complex<F>; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<F = f64> {
    n: usize,
    dim: usize,
    data: Vec<Complex<F>>,
}

impl<F: Real> DensityMatrix<F> {
    /// `|+⟩^⊗n ⟨+|^⊗n`: every entry is `1 / 2^n`.
    pub fn plus_state(n: usize) -> Self {
        let dim = 1 << n;
        let v = Complex::new(F::one() / F::of(dim as f64), F::zero());
        Self {
            n,
            dim,
            data: vec![v; dim * dim],
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex::new(F::zero(), F::zero()); dim * dim];
        let v = F::one() / F::of(dim as f64);
        for a in 0..dim {
            data[a * dim + a] = Complex::new(v, F::zero());
        }
        Self { n, dim, data }
    }

    /// `|ψ⟩⟨ψ|`; `psi` has length `2^n` and unit norm.
    pub fn from_pure(n: usize, psi: &[Complex<F>]) -> Self {
        let dim = 1 << n;
        assert_eq!(psi.len(), dim);
        let mut data = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        Self { n, dim, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> Complex<F> {
        self.data[a * self.dim + b]
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex<F>] {
        &self.data
    }

    pub fn trace(&self) -> Complex<F> {
        (0..self.dim).fold(Complex::new(F::zero(), F::zero()), |acc, a| acc + self.get(a, a))
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> F {
        // ρ Hermitian: tr(ρ²) = Σ |ρ_ab|²
        self.data.iter().fold(F::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Largest `|ρ_ab - conj(ρ_ba)|`.
    pub fn hermiticity_error(&self) -> F {
        let mut worst = F::zero();
        for a in 0..self.dim {
            for b in a..self.dim {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    /// `tr(ρ D)` for a diagonal observable `D`.
    pub fn expectation_diagonal(&self, diag: &[F]) -> F {
        assert_eq!(diag.len(), self.dim);
        diag.iter()
            .enumerate()
            .fold(F::zero(), |acc, (a, &d)| acc + self.get(a, a).re * d)
    }

    /// Probability of each basis state.
    pub fn populations(&self) -> Vec<F> {
        (0..self.dim).map(|a| self.get(a, a).re).collect()
    }

    /// `ρ → U ρ U†` for a diagonal `U = diag(phases)`.
    pub fn apply_diagonal(&mut self, phases: &[Complex<F>]) {
        assert_eq!(phases.len(), self.dim);
        let dim = self.dim;
        for (a, row) in self.data.chunks_exact_mut(dim).enumerate() {
            let pa = phases[a];
            for (x, pb) in row.iter_mut().zip(phases) {
                *x = *x * pa * pb.conj();
            }
        }
    }

    /// `ρ → P ρ P†` for the basis permutation `a → perm(a)`.
    fn apply_permutation(&mut self, perm: impl Fn(usize) -> usize) {
        let dim = self.dim;
        let mut out = vec![Complex::new(F::zero(), F::zero()); dim * dim];
        let images: Vec<usize> = (0..dim).map(perm).collect();
        for a in 0..dim {
            let pa = images[a] * dim;
            for b in 0..dim {
                out[pa + images[b]] = self.data[a * dim + b];
            }
        }
        self.data = out;
    }

    /// Pauli `X` on every qubit set in `mask`.
    pub fn apply_x_mask(&mut self, mask: usize) {
        if mask != 0 {
            self.apply_permutation(|a| a ^ mask);
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        assert!(control != target && control < self.n && target < self.n);
        self.apply_permutation(|a| if a >> control & 1 == 1 { a ^ (1 << target) } else { a });
    }

    /// `ρ → U ρ U†` with `U` acting on qubit `q`.
    pub fn apply_gate(&mut self, q: usize, u: &Gate1<F>) {
        assert!(q < self.n);
        let dim = self.dim;
        let bit = 1 << q;
        // rows: ρ → U ρ
        for a0 in (0..dim).filter(|a| a & bit == 0) {
            let a1 = a0 | bit;
            for b in 0..dim {
                let x0 = self.data[a0 * dim + b];
                let x1 = self.data[a1 * dim + b];
                self.data[a0 * dim + b] = u[0][0] * x0 + u[0][1] * x1;
                self.data[a1 * dim + b] = u[1][0] * x0 + u[1][1] * x1;
            }
        }
        // columns: ρ → ρ U†
        let v = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
        for row in self.data.chunks_exact_mut(dim) {
            for b0 in (0..dim).filter(|b| b & bit == 0) {
                let b1 = b0 | bit;
                let (x0, x1) = (row[b0], row[b1]);
                row[b0] = x0 * v[0][0] + x1 * v[1][0];
                row[b1] = x0 * v[0][1] + x1 * v[1][1];
            }
        }
    }

    /// `R_z(θ) = exp(-iθσᶻ/2)` on qubit `q`.
    pub fn apply_rz(&mut self, q: usize, theta: F) {
        let half = theta / F::of(2.0);
        let phases: Vec<Complex<F>> = (0..self.dim)
            .map(|a| Complex::from_polar(F::one(), if a >> q & 1 == 0 { -half } else { half }))
            .collect();
        self.apply_diagonal(&phases);
    }

    /// `exp(-iβσˣ)` on qubit `q`.
    pub fn apply_rx_half(&mut self, q: usize, beta: F) {
        let c = Complex::new(beta.cos(), F::zero());
        let s = Complex::new(F::zero(), -beta.sin());
        self.apply_gate(q, &[[c, s], [s, c]]);
    }

    /// Depolarizing channel on `qubits`: with probability `lambda` their
    /// joint state is replaced by the maximally mixed one,
    /// `ρ → (1-λ) ρ + λ tr_S(ρ) ⊗ I_S / 2^|S|`.
    pub fn depolarize(&mut self, qubits: &[usize], lambda: F) {
        if lambda == F::zero() || qubits.is_empty() {
            return;
        }
        let smask = qubits.iter().fold(0usize, |m, &q| {
            assert!(q < self.n);
            m | 1 << q
        });
        let dim = self.dim;
        let k = smask.count_ones();
        let weight = lambda / F::of((1u64 << k) as f64);
        let keep = F::one() - lambda;
        let mut out: Vec<Complex<F>> = self.data.iter().map(|&x| x * keep).collect();
        let subsets: Vec<usize> = {
            let mut v = Vec::with_capacity(1 << k);
            let mut s = 0usize;
            loop {
                v.push(s);
                s = s.wrapping_sub(smask) & smask;
                if s == 0 {
                    break;
                }
            }
            v
        };
        for a in (0..dim).filter(|a| a & smask == 0) {
            for b in (0..dim).filter(|b| b & smask == 0) {
                let sum = subsets.iter().fold(Complex::new(F::zero(), F::zero()), |acc, &s| {
                    acc + self.data[(a | s) * dim + (b | s)]
                });
                let v = sum * weight;
                for &s in &subsets {
                    out[(a | s) * dim + (b | s)] = out[(a | s) * dim + (b | s)] + v;
                }
            }
        }
        self.data = out;
    }

    /// `ρ → (1-p) ρ + p Z ρ Z` on qubit `q`.
    pub fn phase_flip(&mut self, q: usize, p: F) {
        let bit = 1 << q;
        let damp = F::one() - F::of(2.0) * p;
        let dim = self.dim;
        for (a, row) in self.data.chunks_exact_mut(dim).enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                if (a ^ b) & bit != 0 {
                    *x = *x * damp;
                }
            }
        }
    }

    /// `ρ → (1-p) ρ + p X ρ X` on qubit `q`.
    pub fn bit_flip(&mut self, q: usize, p: F) {
        if p == F::zero() {
            return;
        }
        let mut flipped = self.clone();
        flipped.apply_x_mask(1 << q);
        let keep = F::one() - p;
        for (x, y) in self.data.iter_mut().zip(&flipped.data) {
            *x = *x * keep + *y * p;
        }
    }
}
