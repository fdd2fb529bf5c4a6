//! Compiles weighted coupling graphs into sequences of global Ising
//! operations conjugated by single-qubit bit flips.
//!
//! A sequence row is a sign pattern `s ∈ {±1}^n` with a strength `w`; the
//! sequence realizes the couplings `A[i][j] = Σ_p w_p s_p[i] s_p[j]`. The
//! crate provides closed-form constructions (edge by edge and union of
//! stars), exact minimization of the number of rows and of the total
//! strength for up to eight vertices, an execution-time model, and a noisy
//! QAOA simulator comparing the resulting circuits with CNOT compilations.
//!
//! Everything in [`pulse`], [`graph`], [`constructions`] and [`cost`] is
//! generic over [`Scalar`]; exact rationals are the default and the aliases
//! below name the common instantiations.

pub mod constructions;
pub mod cost;
pub mod error;
pub mod exact;
pub mod graph;
pub mod pulse;
pub mod qaoa;
pub mod scalar;

pub use constructions::{compile, union_of_stars, weighted_edge_by_edge, Method};
pub use cost::{estimate_time, TimingParams};
pub use error::{Error, Result};
pub use exact::{solve_l0, solve_l1, L0Options, OptResult, SolveStatus};
pub use graph::{AdjacencyMatrix, Edge, Graph};
pub use pulse::{FlipRow, IsingOp, MergePolicy, PulseSequence};
pub use scalar::{Rational, Scalar};

pub type GraphF64 = Graph<f64>;
pub type GraphF32 = Graph<f32>;
pub type PulseSequenceF64 = PulseSequence<f64>;
pub type PulseSequenceF32 = PulseSequence<f32>;
pub type AdjacencyMatrixF64 = AdjacencyMatrix<f64>;
pub type AdjacencyMatrixF32 = AdjacencyMatrix<f32>;
pub type TimingParamsF64 = TimingParams<f64>;
pub type TimingParamsF32 = TimingParams<f32>;
pub type DensityMatrixF64 = qaoa::DensityMatrix<f64>;
pub type DensityMatrixF32 = qaoa::DensityMatrix<f32>;
