//! Execution-time estimate for a compiled sequence on a trapped-ion device.
//!
//! A sequence of `L0` operations needs `L0 + 1` rounds of bit flips around
//! them, and an operation of strength `w` on `n` ions runs for
//! `|w| · n · t_ising_per_ion`:
//!
//! ```text
//! τ = (L0 + 1) t_pi + L1 · n · t_ising_per_ion
//! ```
//!
//! Durations are in microseconds throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::PulseSequence;
use crate::scalar::Scalar;

/// Device timings in microseconds, all positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingParams<T = f64> {
    /// Single-qubit bit flip.
    pub t_pi: T,
    /// Global Ising operation of unit strength, per ion.
    pub t_ising_per_ion: T,
    /// Reference two-qubit gate; reported, not used in the estimate.
    pub t_ms: T,
}

impl<T: Scalar> Default for TimingParams<T> {
    fn default() -> Self {
        Self {
            t_pi: T::from_i64(5).unwrap(),
            t_ising_per_ion: T::from_i64(50).unwrap(),
            t_ms: T::from_i64(100).unwrap(),
        }
    }
}

impl<T: Scalar> TimingParams<T> {
    pub fn new(t_pi: T, t_ising_per_ion: T, t_ms: T) -> Result<Self> {
        let p = Self {
            t_pi,
            t_ising_per_ion,
            t_ms,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_pi", &self.t_pi),
            ("t_ising_per_ion", &self.t_ising_per_ion),
            ("t_ms", &self.t_ms),
        ] {
            // Negated so NaN is rejected too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(*v > T::zero()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Duration of one global operation of unit strength on `n` ions.
    pub fn t_ising(&self, n: usize) -> T {
        self.t_ising_per_ion.clone() * T::from_usize(n).unwrap()
    }
}

/// Estimated run time of `seq`, in microseconds. Pass a canonical sequence
/// for the tightest figure; repeated rows are charged separately.
pub fn estimate_time<T: Scalar>(seq: &PulseSequence<T>, params: &TimingParams<T>) -> T {
    estimate_from_norms(seq.n(), seq.l0(), seq.l1(), params)
}

/// The same estimate from `(n, L0, L1)` alone.
pub fn estimate_from_norms<T: Scalar>(n: usize, l0: usize, l1: T, params: &TimingParams<T>) -> T {
    let flips = T::from_usize(l0 + 1).unwrap() * params.t_pi.clone();
    flips + l1 * params.t_ising(n)
}

/// Estimate for the union-of-stars bound on `n` vertices: `L0 = 3n - 2`,
/// `L1 = n - 1`.
pub fn worst_case_unweighted<T: Scalar>(n: usize, params: &TimingParams<T>) -> T {
    let l0 = (3 * n).saturating_sub(2);
    let l1 = T::from_usize(n.saturating_sub(1)).unwrap();
    estimate_from_norms(n, l0, l1, params)
}
