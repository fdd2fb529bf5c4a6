//! Arithmetic modulo Mersenne primes and exact rational elimination.
//!
//! The support search screens column sets over `F_p`. Dependence over `Q`
//! always survives reduction mod `p`; independence and non-membership survive
//! whenever the witnessing minor is below `p` in absolute value, which the
//! Hadamard bound guarantees for the sizes each field is used at. Every
//! positive answer is still re-derived over `Q` by [`solve_exact`] before it
//! is trusted.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, Zero};

use crate::scalar::Rational;

/// A prime field whose elements are stored as canonical `u64` residues.
pub trait Field {
    const P: u64;

    fn mul(a: u64, b: u64) -> u64;

    #[inline]
    fn add(a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= Self::P {
            s - Self::P
        } else {
            s
        }
    }

    #[inline]
    fn sub(a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + Self::P - b
        }
    }

    #[inline]
    fn neg(a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            Self::P - a
        }
    }

    fn pow(mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = Self::mul(acc, base);
            }
            base = Self::mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `a` must be nonzero.
    #[inline]
    fn inv(a: u64) -> u64 {
        debug_assert!(a != 0);
        Self::pow(a, Self::P - 2)
    }

    fn from_i64(v: i64) -> u64 {
        let m = v.unsigned_abs() % Self::P;
        if v < 0 && m != 0 {
            Self::P - m
        } else {
            m
        }
    }

    fn from_bigint(v: &BigInt) -> u64 {
        let m: BigInt = v.abs() % BigInt::from(Self::P);
        let (_, digits) = m.to_u64_digits();
        let r = digits.first().copied().unwrap_or(0);
        if v.sign() == Sign::Minus && r != 0 {
            Self::P - r
        } else {
            r
        }
    }

    /// Image of `r`; `None` when `P` divides the denominator.
    fn from_rational(r: &Rational) -> Option<u64> {
        let d = Self::from_bigint(r.denom());
        (d != 0).then(|| Self::mul(Self::from_bigint(r.numer()), Self::inv(d)))
    }
}

/// Integers modulo `2^61 - 1`.
pub struct M61;

/// Integers modulo `2^31 - 1`. Products of two residues fit in a `u64`.
pub struct M31;

impl Field for M61 {
    const P: u64 = (1 << 61) - 1;

    #[inline]
    fn mul(a: u64, b: u64) -> u64 {
        let x = a as u128 * b as u128;
        let p = Self::P;
        let lo = (x as u64) & p;
        let hi = (x >> 61) as u64;
        let s = lo + (hi & p) + (hi >> 61);
        let s = (s & p) + (s >> 61);
        if s >= p {
            s - p
        } else {
            s
        }
    }
}

impl Field for M31 {
    const P: u64 = (1 << 31) - 1;

    #[inline]
    fn mul(a: u64, b: u64) -> u64 {
        let x = a * b;
        let p = Self::P;
        let s = (x & p) + (x >> 31);
        let s = (s & p) + (s >> 31);
        if s >= p {
            s - p
        } else {
            s
        }
    }
}

/// Unique `w` with `Σ_c w_c columns[c] = target`, or `None` when the columns
/// are dependent or the target lies outside their span. Columns have equal
/// length; entries are small integers.
pub fn solve_exact(columns: &[Vec<i8>], target: &[Rational]) -> Option<Vec<Rational>> {
    let k = columns.len();
    let rows = target.len();
    let mut m: Vec<Vec<Rational>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Rational> = columns
                .iter()
                .map(|c| Rational::from_integer(BigInt::from(c[i])))
                .collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let mut pivot_rows = Vec::with_capacity(k);
    let mut r = 0;
    for col in 0..k {
        let pr = (r..rows).find(|&i| !m[i][col].is_zero())?;
        m.swap(r, pr);
        let pivot = m[r][col].clone();
        for x in m[r][col..].iter_mut() {
            *x = &*x / &pivot;
        }
        for i in 0..rows {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..=k {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivot_rows.push(r);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some(pivot_rows.iter().map(|&i| m[i][k].clone()).collect())
}
