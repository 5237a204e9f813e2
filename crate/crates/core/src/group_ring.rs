//! Finite groups, the group algebra F₂[G] and matrices over it.
//!
//! Elements of a group are indexed `0..order` with the identity at index 0.
//! A group algebra element is stored as its coefficient vector over that
//! fixed element order, and the binary map sends it to the sum of the
//! left-regular permutation matrices of its support.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec};

/// Groups up to this order get a full associativity check at construction.
const FULL_ASSOCIATIVITY_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("multiplication table is empty")]
    Empty,
    #[error("multiplication table row {row} has length {len}, expected {order}")]
    Ragged { row: usize, len: usize, order: usize },
    #[error("table entry ({a},{b}) = {value} is not a group element")]
    EntryOutOfRange { a: usize, b: usize, value: usize },
    #[error("element 0 is not the identity")]
    IdentityNotFirst,
    #[error("multiplication table is not a Latin square (row or column {index})")]
    NotLatin { index: usize },
    #[error("not associative: ({a}·{b})·{c} != {a}·({b}·{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("group order must be positive")]
    ZeroOrder,
    #[error("operands live over different groups ({left} vs {right})")]
    GroupMismatch { left: String, right: String },
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("cannot parse group element term {term:?}: {reason}")]
    BadTerm { term: String, reason: String },
    #[error("unknown group spec {0:?}")]
    BadSpec(String),
}

/// A finite group given by its multiplication table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    mul: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    /// Named generators used by the polynomial text format.
    generators: Vec<(String, usize)>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.order())
    }
}

impl FiniteGroup {
    /// Validates a multiplication table and derives inverses.
    pub fn from_table(name: impl Into<String>, mul: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let l = mul.len();
        if l == 0 {
            return Err(GroupError::Empty);
        }
        for (a, row) in mul.iter().enumerate() {
            if row.len() != l {
                return Err(GroupError::Ragged {
                    row: a,
                    len: row.len(),
                    order: l,
                });
            }
            if let Some((b, &value)) = row.iter().enumerate().find(|(_, &v)| v >= l) {
                return Err(GroupError::EntryOutOfRange { a, b, value });
            }
        }
        for g in 0..l {
            if mul[0][g] != g || mul[g][0] != g {
                return Err(GroupError::IdentityNotFirst);
            }
        }
        for i in 0..l {
            let mut row_seen = vec![false; l];
            let mut col_seen = vec![false; l];
            for j in 0..l {
                if std::mem::replace(&mut row_seen[mul[i][j]], true)
                    || std::mem::replace(&mut col_seen[mul[j][i]], true)
                {
                    return Err(GroupError::NotLatin { index: i });
                }
            }
        }
        let check = |a: usize, b: usize, c: usize| -> Result<(), GroupError> {
            if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                Err(GroupError::NotAssociative { a, b, c })
            } else {
                Ok(())
            }
        };
        if l <= FULL_ASSOCIATIVITY_LIMIT {
            for a in 0..l {
                for b in 0..l {
                    for c in 0..l {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            // Deterministic sample of triples.
            let mut state = 0x9e37_79b9_7f4a_7c15u64;
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % l as u64) as usize
            };
            for _ in 0..20_000 {
                let (a, b, c) = (next(), next(), next());
                check(a, b, c)?;
            }
        }
        let inverse = (0..l)
            .map(|g| (0..l).find(|&h| mul[g][h] == 0).expect("Latin square has an inverse"))
            .collect();
        Ok(Self {
            name: name.into(),
            mul,
            inverse,
            generators: Vec::new(),
        })
    }

    fn with_generators(mut self, generators: Vec<(String, usize)>) -> Self {
        self.generators = generators;
        self
    }

    /// Cyclic group `Z_l`; element `i` is `x^i`.
    pub fn cyclic(l: usize) -> Result<Self, GroupError> {
        if l == 0 {
            return Err(GroupError::ZeroOrder);
        }
        let mul = (0..l).map(|a| (0..l).map(|b| (a + b) % l).collect()).collect();
        let g = Self::from_table(format!("Z{l}"), mul)?;
        let gens = if l > 1 { vec![("x".to_string(), 1)] } else { vec![] };
        Ok(g.with_generators(gens))
    }

    /// `Z_a × Z_b`; element `x^i y^j` has index `i·b + j`.
    pub fn cyclic_product(a: usize, b: usize) -> Result<Self, GroupError> {
        if a == 0 || b == 0 {
            return Err(GroupError::ZeroOrder);
        }
        let l = a * b;
        let mul = (0..l)
            .map(|u| {
                (0..l)
                    .map(|v| ((u / b + v / b) % a) * b + (u % b + v % b) % b)
                    .collect()
            })
            .collect();
        let g = Self::from_table(format!("Z{a}xZ{b}"), mul)?;
        let mut gens = Vec::new();
        if a > 1 {
            gens.push(("x".to_string(), b));
        }
        if b > 1 {
            gens.push(("y".to_string(), 1));
        }
        Ok(g.with_generators(gens))
    }

    /// Dihedral group of order `2n`: element `r^i s^j` has index `i + n·j`,
    /// generators `x = r`, `y = s`. `dihedral(3)` is S₃.
    pub fn dihedral(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::ZeroOrder);
        }
        let l = 2 * n;
        // r^i s^j · r^k s^t = r^(i + (-1)^j k) s^(j + t)
        let mul = (0..l)
            .map(|u| {
                let (i, j) = (u % n, u / n);
                (0..l)
                    .map(|v| {
                        let (k, t) = (v % n, v / n);
                        let rot = if j == 0 { (i + k) % n } else { (i + n - k) % n };
                        rot + n * ((j + t) % 2)
                    })
                    .collect()
            })
            .collect();
        let g = Self::from_table(format!("D{n}"), mul)?;
        let mut gens = Vec::new();
        if n > 1 {
            gens.push(("x".to_string(), 1));
        }
        gens.push(("y".to_string(), n));
        Ok(g.with_generators(gens))
    }

    /// Parses `Z<l>`, `Z<a>xZ<b>` or `D<n>`. Table groups are loaded by the
    /// file-format layer.
    pub fn from_spec(spec: &str) -> Result<Self, GroupError> {
        let bad = || GroupError::BadSpec(spec.to_string());
        let parse_z =
            |s: &str| -> Result<usize, GroupError> { s.strip_prefix('Z').and_then(|d| d.parse().ok()).ok_or_else(bad) };
        if let Some(n) = spec.strip_prefix('D') {
            return Self::dihedral(n.parse().map_err(|_| bad())?);
        }
        match spec.split_once('x') {
            Some((a, b)) => Self::cyclic_product(parse_z(a)?, parse_z(b)?),
            None => Self::cyclic(parse_z(spec)?),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    #[inline]
    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn generators(&self) -> &[(String, usize)] {
        &self.generators
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..a).all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    /// Text label of an element as used by the polynomial format.
    pub fn label(&self, g: usize) -> String {
        if g == 0 {
            return "1".to_string();
        }
        if let Some(word) = self.generator_word(g) {
            return word;
        }
        format!("g{g}")
    }

    /// Shortest `x^a*y^b` style word for `g` when the group has named
    /// generators and such a word exists.
    fn generator_word(&self, g: usize) -> Option<String> {
        let gens = &self.generators;
        let power = |e: usize, k: usize| (0..k).fold(0, |acc, _| self.mul(acc, e));
        match gens.len() {
            1 => {
                let (name, e) = &gens[0];
                (1..self.order()).find(|&k| power(*e, k) == g).map(|k| fmt_pow(name, k))
            }
            2 => {
                let (xn, x) = &gens[0];
                let (yn, y) = &gens[1];
                for a in 0..self.order() {
                    for b in 0..self.order() {
                        if self.mul(power(*x, a), power(*y, b)) == g {
                            let mut parts = Vec::new();
                            if a > 0 {
                                parts.push(fmt_pow(xn, a));
                            }
                            if b > 0 {
                                parts.push(fmt_pow(yn, b));
                            }
                            return Some(parts.join("*"));
                        }
                    }
                }
                None
            }
            _ => None,
        }
    }

    /// Parses a monomial such as `x^2*y`, `xy`, `g4` or `1`.
    pub fn parse_term(&self, term: &str) -> Result<usize, GroupError> {
        let err = |reason: &str| GroupError::BadTerm {
            term: term.to_string(),
            reason: reason.to_string(),
        };
        let s: String = term.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty term"));
        }
        if s == "1" || s == "e" {
            return Ok(0);
        }
        let bytes = s.as_bytes();
        let mut pos = 0;
        let mut acc = 0;
        let read_num = |pos: &mut usize| -> Option<usize> {
            let start = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            s[start..*pos].parse().ok()
        };
        while pos < bytes.len() {
            if bytes[pos] == b'*' {
                pos += 1;
                continue;
            }
            let factor = if bytes[pos] == b'g' {
                pos += 1;
                let idx = read_num(&mut pos).ok_or_else(|| err("expected element index after g"))?;
                if idx >= self.order() {
                    return Err(err("element index out of range"));
                }
                idx
            } else {
                let c = (bytes[pos] as char).to_string();
                pos += 1;
                self.generators
                    .iter()
                    .find(|(n, _)| *n == c)
                    .map(|(_, e)| *e)
                    .ok_or_else(|| err("unknown generator"))?
            };
            let mut exp = 1;
            if pos < bytes.len() && bytes[pos] == b'^' {
                pos += 1;
                exp = read_num(&mut pos).ok_or_else(|| err("expected exponent"))?;
            }
            for _ in 0..exp {
                acc = self.mul(acc, factor);
            }
        }
        Ok(acc)
    }
}

fn fmt_pow(name: &str, k: usize) -> String {
    if k == 1 {
        name.to_string()
    } else {
        format!("{name}^{k}")
    }
}

/// Left-regular permutation matrix of a single group element:
/// `B(g)[p, q] = 1` iff `g·q == p`.
pub fn regular_matrix(group: &FiniteGroup, g: usize) -> BitMatrix {
    let l = group.order();
    let mut m = BitMatrix::zeros(l, l);
    for q in 0..l {
        m.set(group.mul(g, q), q, true);
    }
    m
}

/// Element of F₂[G].
#[derive(Clone, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    group: Arc<FiniteGroup>,
    coeffs: BitVec,
}

impl fmt::Debug for GroupAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for GroupAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support = self.support();
        if support.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = support.iter().map(|&g| self.group.label(g)).collect();
        write!(f, "{}", terms.join("+"))
    }
}

impl GroupAlgebraElement {
    pub fn zero(group: &Arc<FiniteGroup>) -> Self {
        Self {
            group: Arc::clone(group),
            coeffs: BitVec::zeros(group.order()),
        }
    }

    pub fn one(group: &Arc<FiniteGroup>) -> Self {
        Self::monomial(group, 0)
    }

    pub fn monomial(group: &Arc<FiniteGroup>, g: usize) -> Self {
        Self::from_support(group, &[g])
    }

    /// Sum of the listed elements; repeated elements cancel.
    pub fn from_support(group: &Arc<FiniteGroup>, elements: &[usize]) -> Self {
        let mut e = Self::zero(group);
        for &g in elements {
            let c = e.coeffs.get(g);
            e.coeffs.set(g, !c);
        }
        e
    }

    /// Parses `"1+x+x^2"`, `"0"`, `"x*y"`, `"g3"`.
    pub fn parse(group: &Arc<FiniteGroup>, text: &str) -> Result<Self, GroupError> {
        let text = text.trim();
        if text == "0" {
            return Ok(Self::zero(group));
        }
        let elems = text
            .split('+')
            .map(|t| group.parse_term(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_support(group, &elems))
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn coeff(&self, g: usize) -> bool {
        self.coeffs.get(g)
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.support()
    }

    pub fn weight(&self) -> usize {
        self.coeffs.weight()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    fn same_group(&self, other: &Self) -> Result<(), GroupError> {
        if Arc::ptr_eq(&self.group, &other.group) || self.group == other.group {
            Ok(())
        } else {
            Err(GroupError::GroupMismatch {
                left: self.group.name().to_string(),
                right: other.group.name().to_string(),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, GroupError> {
        self.same_group(other)?;
        let mut out = self.clone();
        out.coeffs.xor_assign(&other.coeffs);
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GroupError> {
        self.same_group(other)?;
        let mut out = Self::zero(&self.group);
        for a in self.support() {
            for b in other.support() {
                let g = self.group.mul(a, b);
                let c = out.coeffs.get(g);
                out.coeffs.set(g, !c);
            }
        }
        Ok(out)
    }

    /// Antipode: coefficient of `g` moves to `g⁻¹`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(&self.group);
        for g in self.support() {
            out.coeffs.set(self.group.inverse(g), true);
        }
        out
    }

    pub fn binary(&self) -> BitMatrix {
        let l = self.group.order();
        let mut m = BitMatrix::zeros(l, l);
        for g in self.support() {
            for q in 0..l {
                m.toggle(self.group.mul(g, q), q);
            }
        }
        m
    }
}

/// Which side the identity goes on in [`GroupAlgebraMatrix::kron_identity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentitySide {
    /// `I_r ⊗ H`
    Left,
    /// `H ⊗ I_r`
    Right,
}

/// Matrix with entries in F₂[G].
#[derive(Clone, PartialEq, Eq)]
pub struct GroupAlgebraMatrix {
    group: Arc<FiniteGroup>,
    rows: usize,
    cols: usize,
    entries: Vec<GroupAlgebraElement>,
}

impl fmt::Debug for GroupAlgebraMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "GroupAlgebraMatrix {}x{} over {} [",
            self.rows,
            self.cols,
            self.group.name()
        )?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl GroupAlgebraMatrix {
    pub fn zeros(group: &Arc<FiniteGroup>, rows: usize, cols: usize) -> Self {
        Self {
            group: Arc::clone(group),
            rows,
            cols,
            entries: vec![GroupAlgebraElement::zero(group); rows * cols],
        }
    }

    pub fn identity(group: &Arc<FiniteGroup>, n: usize) -> Self {
        let mut m = Self::zeros(group, n, n);
        for i in 0..n {
            m.set(i, i, GroupAlgebraElement::one(group));
        }
        m
    }

    /// Row-major entries; panics when an entry lives over another group.
    pub fn from_entries(
        group: &Arc<FiniteGroup>,
        rows: usize,
        cols: usize,
        entries: Vec<GroupAlgebraElement>,
    ) -> Result<Self, GroupError> {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        for e in &entries {
            if e.group().as_ref() != group.as_ref() {
                return Err(GroupError::GroupMismatch {
                    left: group.name().to_string(),
                    right: e.group().name().to_string(),
                });
            }
        }
        Ok(Self {
            group: Arc::clone(group),
            rows,
            cols,
            entries,
        })
    }

    /// Parses a grid of polynomial strings.
    pub fn parse_grid<S: AsRef<str>>(group: &Arc<FiniteGroup>, rows: &[Vec<S>]) -> Result<Self, GroupError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(GroupError::ShapeMismatch {
                    op: "parse_grid",
                    left: (i, row.len()),
                    right: (r, c),
                });
            }
            for s in row {
                entries.push(GroupAlgebraElement::parse(group, s.as_ref())?);
            }
        }
        Self::from_entries(group, r, c, entries)
    }

    /// Lifts a binary matrix: every 1 becomes the identity element.
    pub fn from_binary(group: &Arc<FiniteGroup>, m: &BitMatrix) -> Self {
        let mut out = Self::zeros(group, m.rows(), m.cols());
        for (r, c) in m.nonzeros() {
            out.set(r, c, GroupAlgebraElement::one(group));
        }
        out
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
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

    pub fn get(&self, r: usize, c: usize) -> &GroupAlgebraElement {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, e: GroupAlgebraElement) {
        assert_eq!(e.group().as_ref(), self.group.as_ref(), "entry from a different group");
        self.entries[r * self.cols + c] = e;
    }

    pub fn is_monomial(&self) -> bool {
        self.entries.iter().all(|e| e.weight() <= 1)
    }

    /// Binary matrix of non-zero entries.
    pub fn support_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.get(r, c).is_zero() {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// The `ml × nl` binary image, entry by entry through the regular representation.
    pub fn binary_map(&self) -> BitMatrix {
        let l = self.group.order();
        let mut out = BitMatrix::zeros(self.rows * l, self.cols * l);
        for r in 0..self.rows {
            for c in 0..self.cols {
                for g in self.get(r, c).support() {
                    for q in 0..l {
                        out.toggle(r * l + self.group.mul(g, q), c * l + q);
                    }
                }
            }
        }
        out
    }

    /// Transpose with every entry sent through [`GroupAlgebraElement::conj`].
    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(&self.group, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// `H ⊗ I_r` or `I_r ⊗ H` over the ring.
    pub fn kron_identity(&self, r: usize, side: IdentitySide) -> Self {
        let (m, n) = self.shape();
        let mut out = Self::zeros(&self.group, m * r, n * r);
        for i in 0..m {
            for j in 0..n {
                let e = self.get(i, j);
                if e.is_zero() {
                    continue;
                }
                for t in 0..r {
                    match side {
                        IdentitySide::Right => out.set(i * r + t, j * r + t, e.clone()),
                        IdentitySide::Left => out.set(t * m + i, t * n + j, e.clone()),
                    }
                }
            }
        }
        out
    }

    fn check_group(&self, other: &Self) -> Result<(), GroupError> {
        if self.group == other.group {
            Ok(())
        } else {
            Err(GroupError::GroupMismatch {
                left: self.group.name().to_string(),
                right: other.group.name().to_string(),
            })
        }
    }

    pub fn hstack(&self, other: &Self) -> Result<Self, GroupError> {
        self.check_group(other)?;
        if self.rows != other.rows {
            return Err(GroupError::ShapeMismatch {
                op: "hstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(&self.group, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, GroupError> {
        self.check_group(other)?;
        if self.cols != other.rows {
            return Err(GroupError::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(&self.group, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = GroupAlgebraElement::zero(&self.group);
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }
}
