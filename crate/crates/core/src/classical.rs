//! Classical binary linear codes given by a parity-check matrix.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec};

/// Largest code dimension for which codewords are enumerated exhaustively.
pub const MAX_ENUMERATION_DIM: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicalError {
    #[error("code dimension {k} exceeds the exhaustive enumeration bound of {limit}")]
    TooLarge { k: usize, limit: usize },
    #[error("code has dimension 0 and therefore no codeword basis")]
    ZeroDimension,
    #[error("bit index {index} out of range for a code of length {n}")]
    BitOutOfRange { index: usize, n: usize },
}

/// `[n, k, d]` together with the check count `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    /// Absent when `k == 0`.
    pub d: Option<usize>,
    pub m: usize,
}

#[derive(Debug)]
pub struct ClassicalCode {
    h: BitMatrix,
    rank: OnceLock<usize>,
    distance: OnceLock<Option<usize>>,
}

impl Clone for ClassicalCode {
    fn clone(&self) -> Self {
        Self {
            h: self.h.clone(),
            rank: self.rank.clone(),
            distance: self.distance.clone(),
        }
    }
}

impl PartialEq for ClassicalCode {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h
    }
}

impl Eq for ClassicalCode {}

/// Codeword basis in systematic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystematicBasis {
    /// Position `p` of the permuted code holds original bit `column_permutation[p]`.
    pub column_permutation: Vec<usize>,
    /// `k × n` generator with columns in permuted order; its first `k` columns are `I_k`.
    pub generator: BitMatrix,
}

impl SystematicBasis {
    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    /// Original bit indices carrying the logical information, one per generator row.
    pub fn info_positions(&self) -> &[usize] {
        &self.column_permutation[..self.k()]
    }

    /// Generator rows mapped back to the original bit order.
    pub fn codewords(&self) -> Vec<BitVec> {
        let n = self.column_permutation.len();
        (0..self.k())
            .map(|r| {
                let mut v = BitVec::zeros(n);
                for p in self.generator.row_support(r) {
                    v.set(self.column_permutation[p], true);
                }
                v
            })
            .collect()
    }
}

impl ClassicalCode {
    pub fn new(h: BitMatrix) -> Self {
        Self {
            h,
            rank: OnceLock::new(),
            distance: OnceLock::new(),
        }
    }

    /// Repetition code on `n` bits with the cyclic check set `x_i + x_{i+1}`.
    pub fn cyclic_repetition(n: usize) -> Self {
        let mut h = BitMatrix::zeros(n, n);
        for i in 0..n {
            h.set(i, i, true);
            h.set(i, (i + 1) % n, true);
        }
        Self::new(h)
    }

    /// Hamming code of length `2^r - 1`; column `j` is the binary expansion of `j + 1`.
    pub fn hamming(r: usize) -> Self {
        let n = (1usize << r) - 1;
        let mut h = BitMatrix::zeros(r, n);
        for j in 0..n {
            for i in 0..r {
                if ((j + 1) >> i) & 1 == 1 {
                    h.set(i, j, true);
                }
            }
        }
        Self::new(h)
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn rank(&self) -> usize {
        *self.rank.get_or_init(|| self.h.rank())
    }

    pub fn dimension(&self) -> usize {
        self.n() - self.rank()
    }

    pub fn codeword_basis(&self) -> Vec<BitVec> {
        self.h.kernel_basis()
    }

    pub fn is_codeword(&self, v: &BitVec) -> bool {
        self.h.mul_vec(v).map(|s| s.is_zero()).unwrap_or(false)
    }

    /// Exact minimum weight of a non-zero codeword, `None` when `k == 0`.
    pub fn min_distance(&self) -> Result<Option<usize>, ClassicalError> {
        if let Some(d) = self.distance.get() {
            return Ok(*d);
        }
        let basis = self.codeword_basis();
        let d = min_weight_of_span(&basis, self.n())?;
        let _ = self.distance.set(d);
        Ok(d)
    }

    pub fn params(&self) -> Result<CodeParams, ClassicalError> {
        Ok(CodeParams {
            n: self.n(),
            k: self.dimension(),
            d: self.min_distance()?,
            m: self.m(),
        })
    }

    /// The code of `Hᵀ`: bits and checks exchanged.
    pub fn transpose_code(&self) -> Self {
        Self::new(self.h.transpose())
    }

    pub fn systematic_basis(&self) -> Result<SystematicBasis, ClassicalError> {
        let basis = self.codeword_basis();
        if basis.is_empty() {
            return Err(ClassicalError::ZeroDimension);
        }
        let n = self.n();
        let g = BitMatrix::from_bitvecs(&basis, n).rref();
        let k = g.rank;
        let mut column_permutation = g.pivot_cols.clone();
        let pivots: BTreeSet<usize> = g.pivot_cols.iter().copied().collect();
        column_permutation.extend((0..n).filter(|c| !pivots.contains(c)));
        let mut generator = BitMatrix::zeros(k, n);
        for r in 0..k {
            for (p, &c) in column_permutation.iter().enumerate() {
                if g.rref.get(r, c) {
                    generator.set(r, p, true);
                }
            }
        }
        Ok(SystematicBasis {
            column_permutation,
            generator,
        })
    }

    /// Keeps every check but only the listed bits (in ascending order).
    pub fn puncture(&self, keep_bits: &BTreeSet<usize>) -> Result<Self, ClassicalError> {
        if let Some(&bad) = keep_bits.iter().find(|&&b| b >= self.n()) {
            return Err(ClassicalError::BitOutOfRange {
                index: bad,
                n: self.n(),
            });
        }
        let cols: Vec<usize> = keep_bits.iter().copied().collect();
        let h = self.h.select_columns(&cols).expect("columns validated above");
        Ok(Self::new(h))
    }
}

/// Minimum weight over all non-zero combinations of `basis`, walking the
/// combinations in Gray-code order so each step is a single XOR.
pub(crate) fn min_weight_of_span(basis: &[BitVec], n: usize) -> Result<Option<usize>, ClassicalError> {
    let k = basis.len();
    if k == 0 {
        return Ok(None);
    }
    if k > MAX_ENUMERATION_DIM {
        return Err(ClassicalError::TooLarge {
            k,
            limit: MAX_ENUMERATION_DIM,
        });
    }
    let mut current = BitVec::zeros(n);
    let mut best = usize::MAX;
    for step in 1u64..(1u64 << k) {
        let flip = step.trailing_zeros() as usize;
        current.xor_assign(&basis[flip]);
        best = best.min(current.weight());
        if best == 1 {
            break;
        }
    }
    Ok(Some(best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::tests::arb_matrix;
    use proptest::prelude::*;

    fn rep3() -> ClassicalCode {
        ClassicalCode::new(BitMatrix::from_rows(&[[1, 1, 0], [0, 1, 1], [1, 0, 1]]))
    }

    /// Independent oracle: scan all 2^n vectors.
    fn brute_force_distance(c: &ClassicalCode) -> Option<usize> {
        let n = c.n();
        (1u32..(1 << n))
            .filter_map(|mask| {
                let v = BitVec::from_bits((0..n).map(|i| mask >> i & 1 == 1));
                c.is_codeword(&v).then(|| v.weight())
            })
            .min()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(rep3().dimension(), 1);
        assert_eq!(ClassicalCode::new(BitMatrix::identity(5)).dimension(), 0);
        assert_eq!(ClassicalCode::new(BitMatrix::zeros(1, 4)).dimension(), 4);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(rep3().min_distance().unwrap(), Some(3));
        assert_eq!(ClassicalCode::new(BitMatrix::identity(4)).min_distance().unwrap(), None);
        assert_eq!(
            ClassicalCode::new(BitMatrix::zeros(1, 4)).min_distance().unwrap(),
            Some(1)
        );
        assert_eq!(ClassicalCode::hamming(3).min_distance().unwrap(), Some(3));
    }

    #[test]
    fn distance_refuses_large_dimension() {
        let c = ClassicalCode::new(BitMatrix::zeros(1, MAX_ENUMERATION_DIM + 1));
        assert_eq!(
            c.min_distance(),
            Err(ClassicalError::TooLarge {
                k: MAX_ENUMERATION_DIM + 1,
                limit: MAX_ENUMERATION_DIM
            })
        );
    }

    #[test]
    fn transpose_examples() {
        let t = rep3().transpose_code();
        assert_eq!(t.dimension(), 1);
        assert_eq!(t.min_distance().unwrap(), Some(3));
        assert_eq!(
            ClassicalCode::new(BitMatrix::identity(3)).transpose_code().dimension(),
            0
        );
        assert_eq!(rep3().transpose_code().transpose_code(), rep3());
    }

    #[test]
    fn systematic_examples() {
        let s = rep3().systematic_basis().unwrap();
        assert_eq!(s.codewords(), vec![BitVec::from_support(3, &[0, 1, 2])]);
        assert!(s.generator.get(0, 0));

        assert_eq!(
            ClassicalCode::new(BitMatrix::identity(2)).systematic_basis(),
            Err(ClassicalError::ZeroDimension)
        );

        let ham = ClassicalCode::hamming(3);
        let s = ham.systematic_basis().unwrap();
        assert_eq!(s.generator.shape(), (4, 7));
        let lead = s.generator.select_columns(&[0, 1, 2, 3]).unwrap();
        assert_eq!(lead, BitMatrix::identity(4));
        let g = BitMatrix::from_bitvecs(&s.codewords(), 7);
        assert!(g.matmul(&ham.parity_check().transpose()).unwrap().is_zero());
    }

    #[test]
    fn puncture_examples() {
        let keep: BTreeSet<usize> = [0, 1].into();
        assert_eq!(rep3().puncture(&keep).unwrap().dimension(), 0);
        let all: BTreeSet<usize> = (0..3).collect();
        assert_eq!(rep3().puncture(&all).unwrap(), rep3());
        let none = rep3().puncture(&BTreeSet::new()).unwrap();
        assert_eq!(none.parity_check().shape(), (3, 0));
        assert_eq!(none.dimension(), 0);
        assert_eq!(
            rep3().puncture(&[5].into()),
            Err(ClassicalError::BitOutOfRange { index: 5, n: 3 })
        );
    }

    proptest! {
        #[test]
        fn transpose_dimension_relation(h in arb_matrix(6, 8)) {
            let c = ClassicalCode::new(h);
            let t = c.transpose_code();
            prop_assert_eq!(c.dimension() as isize - t.dimension() as isize,
                            c.n() as isize - c.m() as isize);
        }

        #[test]
        fn systematic_rows_are_codewords(h in arb_matrix(5, 9)) {
            let c = ClassicalCode::new(h);
            if let Ok(s) = c.systematic_basis() {
                prop_assert_eq!(s.k(), c.dimension());
                for g in s.codewords() {
                    prop_assert!(c.is_codeword(&g));
                }
                let lead: Vec<usize> = (0..s.k()).collect();
                prop_assert_eq!(s.generator.select_columns(&lead).unwrap(), BitMatrix::identity(s.k()));
            } else {
                prop_assert_eq!(c.dimension(), 0);
            }
        }

        #[test]
        fn puncture_never_increases_dimension(h in arb_matrix(5, 9), mask in any::<u16>()) {
            let c = ClassicalCode::new(h);
            let keep: BTreeSet<usize> = (0..c.n()).filter(|i| mask >> i & 1 == 1).collect();
            prop_assert!(c.puncture(&keep).unwrap().dimension() <= c.dimension());
        }

        #[test]
        fn distance_matches_exhaustive_scan(h in arb_matrix(6, 12)) {
            let c = ClassicalCode::new(h);
            prop_assert_eq!(c.min_distance().unwrap(), brute_force_distance(&c));
        }
    }
}
