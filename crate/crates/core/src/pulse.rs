//! Compiled programs: sequences of global Ising operations, each wrapped in a
//! layer of single-qubit bit flips.
//!
//! Operation `p` applies the uniform all-to-all coupling with strength `w_p`
//! while the qubits marked in its flip row are conjugated by X. Qubit pair
//! `(i, j)` therefore accumulates `w_p * s_p[i] * s_p[j]`, where `s_p` is the
//! row read as a `±1` vector. Summing over the sequence gives the realized
//! coupling matrix (see [`PulseSequence::evaluate`]).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pairs, AdjacencyMatrix, Graph};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// A `±1` vector of length `n`, stored as a bitmask (bit set ⇔ qubit flipped ⇔ `-1`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlipRow {
    n: usize,
    bits: Vec<u64>,
}

impl FlipRow {
    /// The row with no flips (all `+1`).
    pub fn all_plus(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; n.div_ceil(64).max(1)],
        }
    }

    /// Entries must be `+1` or `-1`.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let mut row = Self::all_plus(signs.len());
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => row.set_flipped(i, true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "flip row entry {other} at position {i} is not ±1"
                    )))
                }
            }
        }
        Ok(row)
    }

    pub fn from_flipped(n: usize, flipped: impl IntoIterator<Item = usize>) -> Self {
        let mut row = Self::all_plus(n);
        for i in flipped {
            assert!(i < n, "qubit {i} out of range for n = {n}");
            row.set_flipped(i, true);
        }
        row
    }

    /// Parses the mask string used in program files: `'+'` keeps, `'-'` flips.
    pub fn from_mask_str(mask: &str) -> Result<Self> {
        let signs = mask
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Format(format!("invalid mask character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::from_signs(&signs)
    }

    /// Row `index` of the complete canonical flip matrix on `n` qubits: qubit
    /// 0 is never flipped and qubit `b + 1` is flipped iff bit `b` of `index`
    /// is set.
    pub fn from_canonical_index(n: usize, index: u64) -> Self {
        assert!((1..=64).contains(&n), "canonical index rows need 1 <= n <= 64");
        assert!(index >> (n - 1) == 0, "index {index} out of range for n = {n}");
        let mut row = Self::all_plus(n);
        row.bits[0] = index << 1;
        row
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_flipped(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn sign(&self, i: usize) -> i8 {
        if self.is_flipped(i) {
            -1
        } else {
            1
        }
    }

    fn set_flipped(&mut self, i: usize, flipped: bool) {
        if flipped {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.sign(i)).collect()
    }

    pub fn flipped(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.is_flipped(i))
    }

    pub fn flip_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn negated(&self) -> Self {
        let mut row = self.clone();
        for i in 0..self.n {
            row.set_flipped(i, !self.is_flipped(i));
        }
        row
    }

    /// `±` representative with a `+1` first entry.
    pub fn canonical(&self) -> Self {
        if self.n > 0 && self.is_flipped(0) {
            self.negated()
        } else {
            self.clone()
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.n == 0 || !self.is_flipped(0)
    }

    /// Inverse of [`FlipRow::from_canonical_index`] for canonical rows.
    pub fn canonical_index(&self) -> u64 {
        assert!(self.n <= 64, "canonical index rows need n <= 64");
        self.canonical().bits[0] >> 1
    }

    /// `s[i] * s[j]`.
    #[inline]
    pub fn pair_sign(&self, i: usize, j: usize) -> i8 {
        if self.is_flipped(i) == self.is_flipped(j) {
            1
        } else {
            -1
        }
    }

    pub fn to_mask_string(&self) -> String {
        (0..self.n)
            .map(|i| if self.is_flipped(i) { '-' } else { '+' })
            .collect()
    }
}

impl fmt::Debug for FlipRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlipRow({})", self.to_mask_string())
    }
}

impl fmt::Display for FlipRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_mask_string())
    }
}

/// One global Ising operation with its flip layer.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingOp<T = Rational> {
    pub row: FlipRow,
    pub strength: T,
}

/// How duplicate rows are merged after composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergePolicy {
    /// Merge only rows that are identical as written.
    #[default]
    Identical,
    /// Merge rows equal up to global sign and normalize every row to a `+1`
    /// first entry (the canonical form).
    Signed,
}

impl fmt::Display for MergePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergePolicy::Identical => "identical",
            MergePolicy::Signed => "signed",
        })
    }
}

impl std::str::FromStr for MergePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identical" => Ok(MergePolicy::Identical),
            "signed" => Ok(MergePolicy::Signed),
            other => Err(Error::InvalidArgument(format!(
                "unknown merge policy {other:?} (expected identical or signed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence<T = Rational> {
    n: usize,
    ops: Vec<IsingOp<T>>,
}

impl<T: Scalar> PulseSequence<T> {
    pub fn new(n: usize) -> Self {
        Self { n, ops: Vec::new() }
    }

    pub fn from_ops(n: usize, ops: impl IntoIterator<Item = (FlipRow, T)>) -> Result<Self> {
        let mut seq = Self::new(n);
        for (row, strength) in ops {
            seq.push(row, strength)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, row: FlipRow, strength: T) -> Result<()> {
        if row.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: row.n(),
            });
        }
        self.ops.push(IsingOp { row, strength });
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[IsingOp<T>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Number of operations with a nonzero strength.
    pub fn l0(&self) -> usize {
        self.ops.iter().filter(|op| !op.strength.is_zero()).count()
    }

    /// Sum of absolute strengths.
    pub fn l1(&self) -> T {
        self.ops.iter().fold(T::zero(), |acc, op| acc + op.strength.abs())
    }

    /// Realized couplings: `A[i][j] = Σ_p w_p s_p[i] s_p[j]` off the diagonal.
    pub fn evaluate(&self) -> AdjacencyMatrix<T> {
        let mut a = AdjacencyMatrix::zeros(self.n);
        for (i, j) in pairs(self.n) {
            let mut acc = T::zero();
            for op in &self.ops {
                if op.row.pair_sign(i, j) > 0 {
                    acc = acc + op.strength.clone();
                } else {
                    acc = acc - op.strength.clone();
                }
            }
            a.set_symmetric(i, j, acc);
        }
        a
    }

    /// Whether the sequence realizes `g` (exact for exact scalars).
    pub fn verify(&self, g: &Graph<T>) -> Result<bool> {
        Ok(self.first_mismatch(g)?.is_none())
    }

    /// First pair `(i, j)` whose realized coupling differs from the target.
    pub fn first_mismatch(&self, g: &Graph<T>) -> Result<Option<(usize, usize)>> {
        if g.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                found: self.n,
            });
        }
        Ok(self.evaluate().first_mismatch(&g.to_adjacency()))
    }

    /// Operations of `self` followed by those of `other`; realized couplings add.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut ops = self.ops.clone();
        ops.extend(other.ops.iter().cloned());
        Ok(Self { n: self.n, ops })
    }

    /// Canonical form: rows normalized to a `+1` first entry, rows equal up to
    /// sign merged by summing strengths (`w r rᵀ = w (-r)(-r)ᵀ`), zero
    /// strengths dropped. Row order follows first occurrence.
    pub fn canonicalize(&self) -> Self {
        self.merge(MergePolicy::Signed)
    }

    pub fn merge(&self, policy: MergePolicy) -> Self {
        let mut index: HashMap<FlipRow, usize> = HashMap::new();
        let mut merged: Vec<IsingOp<T>> = Vec::new();
        for op in &self.ops {
            let row = match policy {
                MergePolicy::Identical => op.row.clone(),
                MergePolicy::Signed => op.row.canonical(),
            };
            match index.get(&row) {
                Some(&k) => {
                    merged[k].strength = merged[k].strength.clone() + op.strength.clone();
                }
                None => {
                    index.insert(row.clone(), merged.len());
                    merged.push(IsingOp {
                        row,
                        strength: op.strength.clone(),
                    });
                }
            }
        }
        merged.retain(|op| !op.strength.is_negligible());
        Self { n: self.n, ops: merged }
    }

    pub fn is_canonical(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.ops
            .iter()
            .all(|op| op.row.is_canonical() && !op.strength.is_zero() && seen.insert(&op.row))
    }

    pub fn scaled(&self, factor: &T) -> Self {
        Self {
            n: self.n,
            ops: self
                .ops
                .iter()
                .map(|op| IsingOp {
                    row: op.row.clone(),
                    strength: op.strength.clone() * factor.clone(),
                })
                .collect(),
        }
    }

    pub fn map_strengths<S: Scalar>(&self, f: impl Fn(&T) -> S) -> PulseSequence<S> {
        PulseSequence {
            n: self.n,
            ops: self
                .ops
                .iter()
                .map(|op| IsingOp {
                    row: op.row.clone(),
                    strength: f(&op.strength),
                })
                .collect(),
        }
    }
}

impl PulseSequence<Rational> {
    pub fn to_scalar<S: Scalar>(&self) -> PulseSequence<S> {
        self.map_strengths(S::from_rational)
    }

    pub fn to_document(&self) -> PulseDocument {
        PulseDocument {
            n: self.n,
            ops: self
                .ops
                .iter()
                .map(|op| PulseOpDocument {
                    mask: op.row.to_mask_string(),
                    w: format_rational(&op.strength),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("sequence serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PulseDocument = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        doc.try_into()
    }
}

/// Program file: `{"n": int, "ops": [{"mask": "+--+", "w": "p/q"}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseDocument {
    pub n: usize,
    pub ops: Vec<PulseOpDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseOpDocument {
    pub mask: String,
    pub w: String,
}

impl TryFrom<PulseDocument> for PulseSequence<Rational> {
    type Error = Error;

    fn try_from(doc: PulseDocument) -> Result<Self> {
        let mut seq = Self::new(doc.n);
        for (k, op) in doc.ops.into_iter().enumerate() {
            let row = FlipRow::from_mask_str(&op.mask)?;
            if row.n() != doc.n {
                return Err(Error::Format(format!(
                    "operation {k}: mask has length {}, expected {}",
                    row.n(),
                    doc.n
                )));
            }
            let w = parse_rational(&op.w)
                .ok_or_else(|| Error::Format(format!("operation {k}: invalid strength {:?}", op.w)))?;
            seq.push(row, w)?;
        }
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rational};
    use proptest::prelude::*;

    fn row(mask: &str) -> FlipRow {
        FlipRow::from_mask_str(mask).unwrap()
    }

    /// The two-operation program realizing the path 0-1-2.
    fn path_program() -> PulseSequence {
        PulseSequence::from_ops(3, [(row("+++"), rational(1, 2)), (row("+-+"), rational(-1, 2))]).unwrap()
    }

    /// Independent evaluation: explicit ±1 matrices and a triple loop.
    fn evaluate_oracle(signs: &[Vec<i64>], w: &[Rational]) -> Vec<Vec<Rational>> {
        let n = signs[0].len();
        let mut a = vec![vec![int(0); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for (p, s) in signs.iter().enumerate() {
                    a[i][j] += w[p].clone() * int(s[i] * s[j]);
                }
            }
        }
        a
    }

    #[test]
    fn mask_and_sign_views_agree() {
        let r = row("+--+");
        assert_eq!(r.signs(), vec![1, -1, -1, 1]);
        assert_eq!(r.flipped().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(r.pair_sign(0, 1), -1);
        assert_eq!(r.pair_sign(1, 2), 1);
        assert_eq!(r.negated().to_mask_string(), "-++-");
        assert_eq!(row("-+").canonical(), row("+-"));
        assert!(FlipRow::from_signs(&[1, 0]).is_err());
        assert!(FlipRow::from_mask_str("+x").is_err());
        let wide = FlipRow::from_flipped(130, [0, 64, 129]);
        assert_eq!(wide.flip_count(), 3);
        assert_eq!(wide.negated().flip_count(), 127);
        assert!(wide.canonical().is_canonical());
    }

    #[test]
    fn canonical_indices_round_trip() {
        for idx in 0..16 {
            let r = FlipRow::from_canonical_index(5, idx);
            assert!(r.is_canonical());
            assert_eq!(r.canonical_index(), idx);
            assert_eq!(r.negated().canonical_index(), idx);
        }
        assert_eq!(FlipRow::from_canonical_index(3, 0), FlipRow::all_plus(3));
    }

    #[test]
    fn path_program_realizes_path() {
        let a = path_program().evaluate();
        let expected = Graph::path(3).to_adjacency();
        assert_eq!(a, expected);
        assert!(path_program().verify(&Graph::path(3)).unwrap());
        assert!(!path_program().verify(&Graph::complete(3)).unwrap());
        assert!(path_program().verify(&Graph::path(4)).is_err());
    }

    #[test]
    fn single_unflipped_op_is_complete_graph() {
        let k3 = PulseSequence::from_ops(3, [(FlipRow::all_plus(3), int(1))]).unwrap();
        assert_eq!(k3.evaluate(), Graph::complete(3).to_adjacency());
        for n in 2..9 {
            let kn = PulseSequence::from_ops(n, [(FlipRow::all_plus(n), int(1))]).unwrap();
            assert!(kn.verify(&Graph::complete(n)).unwrap());
        }
    }

    #[test]
    fn composing_single_rows_gives_path() {
        let a = PulseSequence::from_ops(3, [(row("+++"), rational(1, 2))]).unwrap();
        let b = PulseSequence::from_ops(3, [(row("+-+"), rational(-1, 2))]).unwrap();
        assert!(a.compose(&b).unwrap().verify(&Graph::path(3)).unwrap());
        assert_eq!(a.compose(&PulseSequence::new(3)).unwrap(), a);
        assert!(a.compose(&PulseSequence::new(4)).is_err());
    }

    #[test]
    fn canonicalize_merges_and_cancels() {
        let r = row("+-+");
        // r and -r contribute the same outer product, so strengths add
        let opp = PulseSequence::from_ops(3, [(r.clone(), int(2)), (r.negated(), int(-2))]).unwrap();
        assert!(opp.canonicalize().is_empty());
        let same = PulseSequence::from_ops(3, [(r.clone(), int(1)), (r.negated(), int(1))]).unwrap();
        let c = same.canonicalize();
        assert_eq!(c.len(), 1);
        assert_eq!(c.ops()[0].strength, int(2));
        assert_eq!(c.evaluate(), same.evaluate());

        let ones = PulseSequence::from_ops(
            3,
            [
                (FlipRow::all_plus(3), rational(1, 4)),
                (FlipRow::all_plus(3), rational(1, 4)),
            ],
        )
        .unwrap();
        let merged = ones.canonicalize();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged.ops()[0].strength, rational(1, 2));
    }

    #[test]
    fn identical_policy_keeps_negated_rows_apart() {
        let r = row("+-+");
        let seq =
            PulseSequence::from_ops(3, [(r.clone(), int(1)), (r.negated(), int(-1)), (r.clone(), int(2))]).unwrap();
        let m = seq.merge(MergePolicy::Identical);
        assert_eq!(m.len(), 2);
        assert_eq!(m.ops()[0].strength, int(3));
        assert_eq!(m.evaluate(), seq.evaluate());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let p = path_program();
        let doc = p.to_json();
        assert!(doc.contains(r#""mask": "+-+""#));
        assert!(doc.contains(r#""w": "-1/2""#));
        assert_eq!(PulseSequence::from_json(&doc).unwrap(), p);
        assert!(PulseSequence::from_json(r#"{"n":3,"ops":[{"mask":"++","w":"1"}]}"#).is_err());
        assert!(PulseSequence::from_json(r#"{"n":2,"ops":[{"mask":"++","w":"a"}]}"#).is_err());
    }

    #[test]
    fn float_instantiation_matches_exact() {
        let p = path_program();
        let f: PulseSequence<f64> = p.to_scalar();
        assert!(f.verify(&Graph::<f64>::path(3)).unwrap());
        let f32seq: PulseSequence<f32> = p.to_scalar();
        assert!(f32seq.verify(&Graph::<f32>::path(3)).unwrap());
    }

    fn arb_sequence(n: usize, max_k: usize) -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>, Vec<i64>)> {
        (1..=max_k).prop_flat_map(move |k| {
            (
                prop::collection::vec(
                    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i64 } else { -1 }), n),
                    k,
                ),
                prop::collection::vec(-6i64..=6, k),
                prop::collection::vec(1i64..=4, k),
            )
        })
    }

    fn build(signs: &[Vec<i64>], num: &[i64], den: &[i64]) -> (PulseSequence, Vec<Rational>) {
        let n = signs[0].len();
        let w: Vec<Rational> = num.iter().zip(den).map(|(a, b)| rational(*a, *b)).collect();
        let seq = PulseSequence::from_ops(
            n,
            signs.iter().zip(&w).map(|(s, w)| {
                let s8: Vec<i8> = s.iter().map(|&x| x as i8).collect();
                (FlipRow::from_signs(&s8).unwrap(), w.clone())
            }),
        )
        .unwrap();
        (seq, w)
    }

    proptest! {
        #[test]
        fn evaluate_matches_triple_loop((signs, num, den) in arb_sequence(5, 6)) {
            let (seq, w) = build(&signs, &num, &den);
            let oracle = evaluate_oracle(&signs, &w);
            let a = seq.evaluate();
            for i in 0..5 {
                for j in 0..5 {
                    prop_assert_eq!(a.get(i, j), &oracle[i][j]);
                }
            }
        }

        #[test]
        fn evaluate_symmetries((signs, num, den) in arb_sequence(4, 6), flip in 0usize..6) {
            let (seq, _) = build(&signs, &num, &den);
            let base = seq.evaluate();
            prop_assert!(base.has_zero_diagonal());
            let mut ops: Vec<(FlipRow, Rational)> =
                seq.ops().iter().map(|o| (o.row.clone(), o.strength.clone())).collect();
            ops.reverse();
            if flip < ops.len() {
                ops[flip].0 = ops[flip].0.negated();
            }
            ops.push((FlipRow::from_flipped(4, [2]), int(0)));
            let variant = PulseSequence::from_ops(4, ops).unwrap();
            prop_assert_eq!(variant.evaluate(), base);
        }

        #[test]
        fn compose_is_additive(
            (s1, n1, d1) in arb_sequence(4, 5),
            (s2, n2, d2) in arb_sequence(4, 5),
        ) {
            let (a, _) = build(&s1, &n1, &d1);
            let (b, _) = build(&s2, &n2, &d2);
            let sum = a.evaluate().add(&b.evaluate()).unwrap();
            prop_assert_eq!(a.compose(&b).unwrap().evaluate(), sum);
        }

        #[test]
        fn canonicalize_preserves_and_shrinks((signs, num, den) in arb_sequence(4, 8)) {
            let (seq, _) = build(&signs, &num, &den);
            let c = seq.canonicalize();
            prop_assert_eq!(c.evaluate(), seq.evaluate());
            prop_assert!(c.is_canonical());
            prop_assert!(c.l0() <= seq.l0());
            prop_assert!(c.l1() <= seq.l1());
            prop_assert_eq!(c.canonicalize(), c);
        }
    }
}
