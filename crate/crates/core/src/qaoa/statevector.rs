//! Noiseless depth-one QAOA on a pure state vector, applying `exp(-iγC')`
//! directly from the edge list. Serves as a reference for the noisy
//! density-matrix circuits at `λ = 0`.

use num_complex::Complex;

use crate::graph::Graph;
use crate::scalar::{rational_to_f64, Rational};

fn cut(edges: &[(usize, usize, f64)], b: usize) -> f64 {
    edges
        .iter()
        .filter(|(i, j, _)| (b >> i & 1) != (b >> j & 1))
        .map(|e| e.2)
        .sum()
}

/// `⟨γ,β| C' |γ,β⟩` for `|γ,β⟩ = exp(-iβB) exp(-iγC') |+⟩^⊗n`.
pub fn ideal_expectation(g: &Graph<Rational>, gamma: f64, beta: f64) -> f64 {
    let n = g.n();
    let dim = 1usize << n;
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .map(|e| (e.u, e.v, rational_to_f64(&e.weight)))
        .collect();
    let amp = 1.0 / (dim as f64).sqrt();
    let mut psi: Vec<Complex<f64>> = (0..dim)
        .map(|b| Complex::from_polar(amp, -gamma * cut(&edges, b)))
        .collect();
    let (c, s) = (Complex::new(beta.cos(), 0.0), Complex::new(0.0, -beta.sin()));
    for q in 0..n {
        let bit = 1 << q;
        for b0 in (0..dim).filter(|b| b & bit == 0) {
            let (x0, x1) = (psi[b0], psi[b0 | bit]);
            psi[b0] = c * x0 + s * x1;
            psi[b0 | bit] = s * x0 + c * x1;
        }
    }
    psi.iter().enumerate().map(|(b, z)| z.norm_sqr() * cut(&edges, b)).sum()
}
