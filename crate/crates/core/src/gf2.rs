//! Dense linear algebra over GF(2).
//!
//! Matrices are stored row-major with each row packed into 64-bit words, so
//! row operations are word-parallel XORs. Everything here is sized for desk
//! scale work (a few thousand columns at most).

use std::fmt;

use thiserror::Error;

const WORD_BITS: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A packed bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of length `len` with ones at `support`.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.set(i, true);
        }
        v
    }

    pub fn unit(len: usize, index: usize) -> Self {
        Self::from_support(len, &[index])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        xor_words(&mut self.words, &other.words);
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn as_words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, "]")
    }
}

#[inline]
fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Dense binary matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Output of [`BitMatrix::rref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrefResult {
    pub rref: BitMatrix,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
    /// Invertible row-operation matrix `U` with `U * input == rref`.
    pub row_ops: BitMatrix,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from 0/1 rows. Panics on ragged input or entries other
    /// than 0 and 1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_rows_with_cols(rows, cols)
    }

    /// Like [`BitMatrix::from_rows`] but keeps `cols` explicit so empty row
    /// lists still carry a width.
    pub fn from_rows_with_cols<R: AsRef<[u8]>>(rows: &[R], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged row {i}");
            for (j, &b) in row.iter().enumerate() {
                assert!(b <= 1, "entry {b} at ({i},{j}) is not a bit");
                if b == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn from_bitvecs(vectors: &[BitVec], cols: usize) -> Self {
        let mut m = Self::zeros(vectors.len(), cols);
        for (i, v) in vectors.iter().enumerate() {
            assert_eq!(v.len(), cols, "vector {i} has wrong length");
            m.row_words_mut(i).copy_from_slice(v.as_words());
        }
        m
    }

    /// Column vector (n×1) holding `v`.
    pub fn column_from(v: &BitVec) -> Self {
        let mut m = Self::zeros(v.len(), 1);
        for i in v.support() {
            m.set(i, 0, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "({r},{c}) out of {:?}", self.shape());
        (self.data[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "({r},{c}) out of {:?}", self.shape());
        let word = &mut self.data[r * self.stride + c / WORD_BITS];
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "({r},{c}) out of {:?}", self.shape());
        self.data[r * self.stride + c / WORD_BITS] ^= 1u64 << (c % WORD_BITS);
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn row_vectors(&self) -> Vec<BitVec> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn column(&self, c: usize) -> BitVec {
        BitVec::from_bits((0..self.rows).map(|r| self.get(r, c)))
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Positions of all non-zero entries in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.count_ones());
        for r in 0..self.rows {
            for c in self.row_support(r) {
                out.push((r, c));
            }
        }
        out
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        if src == dst {
            return;
        }
        let stride = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * stride);
            (&lo[src * stride..(src + 1) * stride], &mut hi[..stride])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * stride);
            (&hi[..stride], &mut lo[dst * stride..(dst + 1) * stride])
        };
        xor_words(b, a);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (r, c) in self.nonzeros() {
            t.set(c, r, true);
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.shape() != other.shape() {
            return Err(Gf2Error::DimensionMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = self.clone();
        xor_words(&mut out.data, &other.data);
        Ok(out)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in self.row_support(r) {
                let src = other.row_words(k);
                let dst = &mut out.data[r * out.stride..(r + 1) * out.stride];
                xor_words(dst, src);
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(v.as_words())
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>();
            if parity % 2 == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    pub fn hstack(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                op: "hstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for (r, c) in self.nonzeros() {
            out.set(r, c, true);
        }
        for (r, c) in other.nonzeros() {
            out.set(r, self.cols + c, true);
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch {
                op: "vstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows + other.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        Ok(out)
    }

    /// Kronecker product: `(a⊗b)[i·rb + p, j·cb + q] = a[i,j]·b[p,q]`.
    pub fn kron(&self, other: &Self) -> Self {
        let (rb, cb) = other.shape();
        let mut out = Self::zeros(self.rows * rb, self.cols * cb);
        let b_nz = other.nonzeros();
        for (i, j) in self.nonzeros() {
            for &(p, q) in &b_nz {
                out.set(i * rb + p, j * cb + q, true);
            }
        }
        out
    }

    /// Submatrix made of the listed columns, in the order given.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self, Gf2Error> {
        let mut out = Self::zeros(self.rows, columns.len());
        for (new_c, &c) in columns.iter().enumerate() {
            if c >= self.cols {
                return Err(Gf2Error::IndexOutOfRange {
                    index: c,
                    len: self.cols,
                });
            }
            for r in 0..self.rows {
                if self.get(r, c) {
                    out.set(r, new_c, true);
                }
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form, pivot columns, rank and the row-operation
    /// matrix. Pivot rows are taken from the lowest-index candidate row.
    pub fn rref(&self) -> RrefResult {
        let mut m = self.clone();
        let mut u = Self::identity(self.rows);
        let mut pivot_cols = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(p, next);
            u.swap_rows(p, next);
            for r in 0..self.rows {
                if r != next && m.get(r, c) {
                    m.xor_row_into(next, r);
                    u.xor_row_into(next, r);
                }
            }
            pivot_cols.push(c);
            next += 1;
        }
        RrefResult {
            rank: pivot_cols.len(),
            rref: m,
            pivot_cols,
            row_ops: u,
        }
    }

    pub fn rank(&self) -> usize {
        // Elimination without tracking U.
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(p, rank);
            for r in rank + 1..self.rows {
                if m.get(r, c) {
                    m.xor_row_into(rank, r);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of `{v : self * v = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let RrefResult { rref, pivot_cols, .. } = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVec::zeros(self.cols);
                v.set(f, true);
                for (r, &pc) in pivot_cols.iter().enumerate() {
                    if rref.get(r, f) {
                        v.set(pc, true);
                    }
                }
                v
            })
            .collect()
    }

    /// Whether `v` lies in the row space of `self`.
    pub fn row_space_contains(&self, v: &BitVec) -> bool {
        RowSpace::new(self).contains(v)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Reduced basis of a row space, for repeated membership queries.
#[derive(Debug, Clone)]
pub struct RowSpace {
    basis: Vec<BitVec>,
    pivots: Vec<usize>,
    len: usize,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        let r = m.rref();
        Self {
            basis: (0..r.rank).map(|i| r.rref.row(i)).collect(),
            pivots: r.pivot_cols,
            len: m.cols(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BitVec] {
        &self.basis
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.len);
        let mut w = v.clone();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if w.get(p) {
                w.xor_assign(b);
            }
        }
        w
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` if it is independent of the current span. Returns whether it was added.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let w = self.reduce(v);
        let Some(p) = (0..self.len).find(|&i| w.get(i)) else {
            return false;
        };
        // Keep the basis fully reduced on pivot columns.
        for b in &mut self.basis {
            if b.get(p) {
                b.xor_assign(&w);
            }
        }
        self.basis.push(w);
        self.pivots.push(p);
        true
    }
}
