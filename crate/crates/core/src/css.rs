//! Commutation, logical counts, exact distances and canonical logicals of
//! CSS codes.

use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

use crate::classical::{ClassicalCode, ClassicalError};
use crate::gf2::{BitMatrix, BitVec, RowSpace};
use crate::graph::{lift_from_ring_matrix, lift_regular_action};
use crate::group_ring::{FiniteGroup, GroupAlgebraElement, GroupAlgebraMatrix};
use crate::product::{balanced_product, lifted_product, CssCode, ProductError};

/// Default cap on enumerated vectors per distance computation.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CssError {
    #[error("checks do not commute ({count} anticommuting X/Z pairs)")]
    NonCommuting { count: usize },
    #[error("distance search needs 2^{dimension} vectors, budget is {budget}")]
    BudgetExceeded { dimension: usize, budget: u64 },
    #[error("inputs encode no logical qubits")]
    NoLogicals,
    #[error("group {0} is not abelian")]
    NonAbelian(String),
    #[error("lifted Tanner graph is not a covering of its base")]
    NotCovering,
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Product(#[from] ProductError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commutation {
    /// `(X check, Z check)` pairs with odd overlap.
    pub anticommuting: Vec<(usize, usize)>,
}

impl Commutation {
    pub fn commutes(&self) -> bool {
        self.anticommuting.is_empty()
    }
}

pub fn check_commutation(code: &CssCode) -> Commutation {
    let product = code
        .h_x()
        .matmul(&code.h_z().transpose())
        .expect("H_X and H_Z share columns");
    Commutation {
        anticommuting: product.nonzeros(),
    }
}

fn require_commuting(code: &CssCode) -> Result<(), CssError> {
    let c = check_commutation(code);
    if c.commutes() {
        Ok(())
    } else {
        Err(CssError::NonCommuting {
            count: c.anticommuting.len(),
        })
    }
}

/// `n − rank(H_X) − rank(H_Z)`.
pub fn logical_count(code: &CssCode) -> Result<usize, CssError> {
    require_commuting(code)?;
    Ok(code.n() - code.h_x().rank() - code.h_z().rank())
}

/// `k₁k₂ + k₁ᵀk₂ᵀ` from the classical dimensions.
pub fn hgp_k_formula(c1: &ClassicalCode, c2: &ClassicalCode) -> usize {
    let (t1, t2) = (c1.transpose_code(), c2.transpose_code());
    c1.dimension() * c2.dimension() + t1.dimension() * t2.dimension()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CssParams {
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    /// Minimum weight of an X-type logical.
    pub d_x: Option<usize>,
    /// Minimum weight of a Z-type logical.
    pub d_z: Option<usize>,
}

impl std::fmt::Display for CssParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.d {
            Some(d) => write!(f, "[[{},{},{}]]", self.n, self.k, d),
            None => write!(f, "[[{},{}]]", self.n, self.k),
        }
    }
}

/// Minimum weight over `ker(a) \ rowspace(b)`, where the rows of `b` lie in `ker(a)`.
///
/// The kernel basis is split into a basis of `rowspace(b)` followed by logical
/// representatives; a combination lies outside the row space exactly when it
/// uses a logical representative, so the Gray-code walk tracks that part as a mask.
fn min_logical_weight(a: &BitMatrix, b: &BitMatrix, budget: u64) -> Result<Option<usize>, CssError> {
    let n = a.cols();
    let mut span = RowSpace::new(b);
    let stabilisers = span.basis().to_vec();
    let logicals: Vec<BitVec> = a.kernel_basis().into_iter().filter(|v| span.insert(v)).collect();
    if logicals.is_empty() {
        return Ok(None);
    }
    let dimension = stabilisers.len() + logicals.len();
    if dimension >= 64 || (1u64 << dimension) > budget {
        return Err(CssError::BudgetExceeded { dimension, budget });
    }
    let basis: Vec<&BitVec> = logicals.iter().chain(&stabilisers).collect();
    let k = logicals.len();
    let mut current = BitVec::zeros(n);
    let mut logical_mask = 0u64;
    let mut best = usize::MAX;
    for step in 1u64..(1u64 << dimension) {
        let flip = step.trailing_zeros() as usize;
        current.xor_assign(basis[flip]);
        if flip < k {
            logical_mask ^= 1 << flip;
        }
        if logical_mask != 0 {
            best = best.min(current.weight());
            if best == 1 {
                break;
            }
        }
    }
    Ok(Some(best))
}

/// Exact `n, k, d` by enumeration, refusing when either kernel exceeds `budget`
/// vectors. Codes with `k = 0` get no distance.
pub fn css_distance(code: &CssCode, budget: u64) -> Result<CssParams, CssError> {
    let k = logical_count(code)?;
    if k == 0 {
        return Ok(CssParams {
            n: code.n(),
            k,
            d: None,
            d_x: None,
            d_z: None,
        });
    }
    let d_z = min_logical_weight(code.h_x(), code.h_z(), budget)?;
    let d_x = min_logical_weight(code.h_z(), code.h_x(), budget)?;
    let d = match (d_x, d_z) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };
    Ok(CssParams {
        n: code.n(),
        k,
        d,
        d_x,
        d_z,
    })
}

/// Smallest of `d₁, d₂, d₁ᵀ, d₂ᵀ`, skipping codes of dimension zero.
pub fn hgp_distance_bound(c1: &ClassicalCode, c2: &ClassicalCode) -> Result<Option<usize>, CssError> {
    let mut best: Option<usize> = None;
    for c in [c1.clone(), c2.clone(), c1.transpose_code(), c2.transpose_code()] {
        if let Some(d) = c.min_distance()? {
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    Ok(best)
}

/// Dual bases of X and Z logicals with their symplectic pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalBasis {
    pub x_logicals: Vec<BitVec>,
    pub z_logicals: Vec<BitVec>,
    /// `pairing[i][j] = x_i · z_j`.
    pub pairing: BitMatrix,
}

impl LogicalBasis {
    pub fn k(&self) -> usize {
        self.x_logicals.len()
    }

    /// Checks kernel membership, independence from the stabilisers and a
    /// full-rank pairing.
    pub fn is_valid_for(&self, code: &CssCode) -> bool {
        let in_kernel = |h: &BitMatrix, v: &BitVec| h.mul_vec(v).map(|s| s.is_zero()).unwrap_or(false);
        let independent = |stab: &BitMatrix, vs: &[BitVec]| {
            let mut span = RowSpace::new(stab);
            vs.iter().all(|v| span.insert(v))
        };
        self.x_logicals.iter().all(|v| in_kernel(code.h_z(), v))
            && self.z_logicals.iter().all(|v| in_kernel(code.h_x(), v))
            && independent(code.h_x(), &self.x_logicals)
            && independent(code.h_z(), &self.z_logicals)
            && self.pairing.rank() == self.k()
    }
}

fn tensor(a: &BitVec, b: &BitVec) -> BitVec {
    let nb = b.len();
    let support: Vec<usize> = a
        .support()
        .into_iter()
        .flat_map(|i| b.support().into_iter().map(move |j| i * nb + j))
        .collect();
    BitVec::from_support(a.len() * nb, &support)
}

fn place(v: &BitVec, offset: usize, n: usize) -> BitVec {
    let support: Vec<usize> = v.support().into_iter().map(|i| i + offset).collect();
    BitVec::from_support(n, &support)
}

/// Codewords of a systematic basis with their information positions.
type Systematic = (Vec<BitVec>, Vec<usize>);

/// Logicals of `hgp(c1, c2)` built from systematic codewords.
///
/// On Q1, Z logicals are `s₁ ⊗ e_b` and X logicals `e_a ⊗ s₂`, with `a`, `b`
/// the information positions of `c1`, `c2`; Q2 uses the transpose codes the
/// other way round. The pairing is the identity.
pub fn hgp_canonical_logicals(c1: &ClassicalCode, c2: &ClassicalCode) -> Result<LogicalBasis, CssError> {
    let (n1, n2) = (c1.n(), c2.n());
    let (m1, m2) = (c1.m(), c2.m());
    let n = n1 * n2 + m1 * m2;
    let mut x_logicals = Vec::new();
    let mut z_logicals = Vec::new();
    let systematic = |c: &ClassicalCode| -> Result<Option<Systematic>, CssError> {
        if c.dimension() == 0 {
            return Ok(None);
        }
        let s = c.systematic_basis()?;
        Ok(Some((s.codewords(), s.info_positions().to_vec())))
    };
    if let (Some((s1, info1)), Some((s2, info2))) = (systematic(c1)?, systematic(c2)?) {
        for (i, w1) in s1.iter().enumerate() {
            for (j, w2) in s2.iter().enumerate() {
                z_logicals.push(place(&tensor(w1, &BitVec::unit(n2, info2[j])), 0, n));
                x_logicals.push(place(&tensor(&BitVec::unit(n1, info1[i]), w2), 0, n));
            }
        }
    }
    let (t1, t2) = (c1.transpose_code(), c2.transpose_code());
    if let (Some((s1, info1)), Some((s2, info2))) = (systematic(&t1)?, systematic(&t2)?) {
        for (i, w1) in s1.iter().enumerate() {
            for (j, w2) in s2.iter().enumerate() {
                z_logicals.push(place(&tensor(&BitVec::unit(m1, info1[i]), w2), n1 * n2, n));
                x_logicals.push(place(&tensor(w1, &BitVec::unit(m2, info2[j])), n1 * n2, n));
            }
        }
    }
    if x_logicals.is_empty() {
        return Err(CssError::NoLogicals);
    }
    let k = x_logicals.len();
    let mut pairing = BitMatrix::zeros(k, k);
    for (i, x) in x_logicals.iter().enumerate() {
        for (j, z) in z_logicals.iter().enumerate() {
            pairing.set(i, j, x.dot(z));
        }
    }
    Ok(LogicalBasis {
        x_logicals,
        z_logicals,
        pairing,
    })
}

/// Outcome of building a code both as a lifted product and as the balanced
/// product of the lifted Tanner graphs.
#[derive(Debug, Clone)]
pub struct Coincidence {
    pub lifted: CssCode,
    pub balanced: CssCode,
    /// Qubit relabelling taking the balanced code to the lifted one, when
    /// the two agree under the canonical ordering.
    pub qubit_permutation: Option<Vec<usize>>,
}

impl Coincidence {
    pub fn coincide(&self) -> bool {
        self.qubit_permutation.is_some()
    }
}

/// Compares `lifted_product(m1, m2)` with the balanced product of the lifts of
/// `m1` and `m2` under left multiplication.
pub fn lp_bp_coincide(m1: &GroupAlgebraMatrix, m2: &GroupAlgebraMatrix) -> Result<Coincidence, CssError> {
    let group = m1.group();
    if !group.is_abelian() {
        return Err(CssError::NonAbelian(group.name().to_string()));
    }
    let lifted = lifted_product(m1, m2)?;
    let (a, b) = (lift_from_ring_matrix(m1), lift_from_ring_matrix(m2));
    if !a.covering.verify().is_covering() || !b.covering.verify().is_covering() {
        return Err(CssError::NotCovering);
    }
    let action = |t| {
        lift_regular_action(group, t).map_err(|e| ProductError::Action {
            side: "lift",
            source: e,
        })
    };
    let (act_a, act_b) = (action(&a.cover)?, action(&b.cover)?);
    let balanced = balanced_product(&a.cover, &b.cover, &act_a, &act_b)?;
    let same = balanced.h_x() == lifted.h_x() && balanced.h_z() == lifted.h_z() && balanced.layout() == lifted.layout();
    let qubit_permutation = same.then(|| (0..lifted.n()).collect());
    Ok(Coincidence {
        lifted,
        balanced,
        qubit_permutation,
    })
}

/// Matrix over `group` with uniformly random coefficients.
pub fn random_ring_matrix<R: Rng + ?Sized>(
    group: &Arc<FiniteGroup>,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> GroupAlgebraMatrix {
    let l = group.order();
    let entries = (0..rows * cols)
        .map(|_| {
            let support: Vec<usize> = (0..l).filter(|_| rng.gen_bool(0.5)).collect();
            GroupAlgebraElement::from_support(group, &support)
        })
        .collect();
    GroupAlgebraMatrix::from_entries(group, rows, cols, entries).expect("entries share the group")
}

/// Matrix whose entries are each zero or a single random group element.
pub fn random_monomial_matrix<R: Rng + ?Sized>(
    group: &Arc<FiniteGroup>,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> GroupAlgebraMatrix {
    let l = group.order();
    let entries = (0..rows * cols)
        .map(|_| {
            if rng.gen_bool(0.25) {
                GroupAlgebraElement::zero(group)
            } else {
                GroupAlgebraElement::monomial(group, rng.gen_range(0..l))
            }
        })
        .collect();
    GroupAlgebraMatrix::from_entries(group, rows, cols, entries).expect("entries share the group")
}

#[derive(Debug, Clone)]
pub struct NonCommutingInstance {
    /// 1-based draw on which the instance was found.
    pub draw: usize,
    pub m1: GroupAlgebraMatrix,
    pub m2: GroupAlgebraMatrix,
    pub code: CssCode,
}

/// Draws random pairs of ring matrices (at most `max_dim × max_dim`) until
/// their lifted product fails to commute.
pub fn search_noncommuting_lp<R: Rng + ?Sized>(
    group: &Arc<FiniteGroup>,
    max_dim: usize,
    draws: usize,
    rng: &mut R,
) -> Option<NonCommutingInstance> {
    for draw in 1..=draws {
        let mut pick = || (rng.gen_range(1..=max_dim), rng.gen_range(1..=max_dim));
        let ((r1, c1), (r2, c2)) = (pick(), pick());
        let m1 = random_ring_matrix(group, r1, c1, rng);
        let m2 = random_ring_matrix(group, r2, c2, rng);
        let code = lifted_product(&m1, &m2).expect("same group");
        if !code.is_commuting() {
            return Some(NonCommutingInstance { draw, m1, m2, code });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_ring::tests::{s3, z};
    use crate::product::hgp;
    use crate::product::tests::{arb_classical, one_plus_z, rep3};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: scan every vector of `ker(a)` by brute force over
    /// all `2^n` bit patterns and test row-space membership by rank.
    fn brute_logical_weight(a: &BitMatrix, b: &BitMatrix) -> Option<usize> {
        let n = a.cols();
        let rank_b = b.rank();
        let mut best = None;
        for mask in 1u64..(1 << n) {
            let v = BitVec::from_bits((0..n).map(|i| mask >> i & 1 == 1));
            if !a.mul_vec(&v).unwrap().is_zero() {
                continue;
            }
            let stacked = b.vstack(&BitMatrix::from_bitvecs(std::slice::from_ref(&v), n)).unwrap();
            if stacked.rank() > rank_b {
                let w = v.weight();
                best = Some(best.map_or(w, |x: usize| x.min(w)));
            }
        }
        best
    }

    #[test]
    fn toric_parameters() {
        let code = hgp(&rep3(), &rep3());
        assert!(check_commutation(&code).commutes());
        assert_eq!(logical_count(&code).unwrap(), 2);
        assert_eq!(hgp_k_formula(&rep3(), &rep3()), 2);
        let p = css_distance(&code, DEFAULT_BUDGET).unwrap();
        assert_eq!((p.n, p.k, p.d), (18, 2, Some(3)));
        assert_eq!(p.to_string(), "[[18,2,3]]");
        assert_eq!(hgp_distance_bound(&rep3(), &rep3()).unwrap(), Some(3));
    }

    #[test]
    fn lifted_example_parameters() {
        let m = one_plus_z();
        let code = lifted_product(&m, &m).unwrap();
        let p = css_distance(&code, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.to_string(), "[[6,2,2]]");
        assert_eq!(brute_logical_weight(code.h_x(), code.h_z()), p.d_z);
        assert_eq!(brute_logical_weight(code.h_z(), code.h_x()), p.d_x);
    }

    #[test]
    fn checkless_code_keeps_every_qubit() {
        let code = CssCode::from_matrices(BitMatrix::zeros(0, 4), BitMatrix::zeros(0, 4)).unwrap();
        assert!(check_commutation(&code).commutes());
        assert_eq!(logical_count(&code).unwrap(), 4);
        assert_eq!(css_distance(&code, DEFAULT_BUDGET).unwrap().d, Some(1));
    }

    #[test]
    fn zero_logical_codes_have_no_distance() {
        let full = ClassicalCode::new(BitMatrix::identity(2));
        let code = hgp(&full, &full);
        assert_eq!(logical_count(&code).unwrap(), 0);
        assert_eq!(hgp_k_formula(&full, &full), 0);
        assert_eq!(css_distance(&code, DEFAULT_BUDGET).unwrap().d, None);
        assert!(matches!(
            hgp_canonical_logicals(&full, &full),
            Err(CssError::NoLogicals)
        ));
        assert_eq!(hgp_distance_bound(&full, &full).unwrap(), None);
    }

    #[test]
    fn hamming_formula_and_bound() {
        let h = ClassicalCode::hamming(3);
        assert_eq!(hgp_k_formula(&h, &h), 16);
        assert_eq!(logical_count(&hgp(&h, &h)).unwrap(), 16);
        assert_eq!(hgp_distance_bound(&h, &h).unwrap(), Some(3));
    }

    #[test]
    fn budget_is_enforced() {
        let h = ClassicalCode::hamming(3);
        let code = hgp(&h, &h);
        assert!(matches!(
            css_distance(&code, 1 << 10),
            Err(CssError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn toric_canonical_logicals() {
        let basis = hgp_canonical_logicals(&rep3(), &rep3()).unwrap();
        let code = hgp(&rep3(), &rep3());
        assert_eq!(basis.k(), 2);
        assert_eq!(basis.pairing, BitMatrix::identity(2));
        assert!(basis.is_valid_for(&code));
        let z0 = &basis.z_logicals[0];
        assert_eq!(z0.weight(), 3);
        let rows: std::collections::BTreeSet<usize> = z0.support().iter().map(|&j| code.layout().qubit(j)[1]).collect();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn noncommuting_codes_are_refused() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let found = search_noncommuting_lp(&s3(), 2, 10_000, &mut rng).expect("S3 instance");
        assert!(!check_commutation(&found.code).commutes());
        assert!(matches!(logical_count(&found.code), Err(CssError::NonCommuting { .. })));
        assert!(matches!(
            css_distance(&found.code, DEFAULT_BUDGET),
            Err(CssError::NonCommuting { .. })
        ));
    }

    #[test]
    fn abelian_search_finds_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(search_noncommuting_lp(&z(4), 2, 300, &mut rng).is_none());
    }

    #[test]
    fn coincidence_examples() {
        let m = one_plus_z();
        let c = lp_bp_coincide(&m, &m).unwrap();
        assert!(c.coincide());
        assert_eq!(
            css_distance(&c.balanced, DEFAULT_BUDGET).unwrap().to_string(),
            "[[6,2,2]]"
        );

        let g = z(1);
        let a = GroupAlgebraMatrix::from_binary(&g, rep3().parity_check());
        assert!(lp_bp_coincide(&a, &a).unwrap().coincide());

        let m = GroupAlgebraMatrix::parse_grid(&s3(), &[vec!["x"]]).unwrap();
        assert!(matches!(lp_bp_coincide(&m, &m), Err(CssError::NonAbelian(_))));
    }

    #[test]
    fn random_klein_instances_coincide() {
        let g = Arc::new(FiniteGroup::cyclic_product(2, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m1 = random_monomial_matrix(&g, 2, 2, &mut rng);
            let m2 = random_monomial_matrix(&g, 2, 2, &mut rng);
            assert!(lp_bp_coincide(&m1, &m2).unwrap().coincide());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn rank_count_matches_formula(c1 in arb_classical(5, 7), c2 in arb_classical(5, 7)) {
            let code = hgp(&c1, &c2);
            prop_assert_eq!(logical_count(&code).unwrap(), hgp_k_formula(&c1, &c2));
            for r in 0..code.x_check_count() {
                for s in 0..code.z_check_count() {
                    prop_assert!(!code.h_x().row(r).dot(&code.h_z().row(s)));
                }
            }
        }

        #[test]
        fn canonical_logicals_are_dual(c1 in arb_classical(4, 5), c2 in arb_classical(4, 5)) {
            let code = hgp(&c1, &c2);
            match hgp_canonical_logicals(&c1, &c2) {
                Ok(basis) => {
                    prop_assert_eq!(basis.k(), logical_count(&code).unwrap());
                    prop_assert_eq!(&basis.pairing, &BitMatrix::identity(basis.k()));
                    prop_assert!(basis.is_valid_for(&code));
                }
                Err(e) => {
                    prop_assert_eq!(e, CssError::NoLogicals);
                    prop_assert_eq!(logical_count(&code).unwrap(), 0);
                }
            }
        }

        #[test]
        fn distance_respects_bound(c1 in arb_classical(3, 4), c2 in arb_classical(3, 4)) {
            let code = hgp(&c1, &c2);
            let p = css_distance(&code, 1 << 20).unwrap();
            if p.k > 0 {
                let bound = hgp_distance_bound(&c1, &c2).unwrap().unwrap();
                prop_assert!(p.d.unwrap() >= bound);
            }
        }

        #[test]
        fn enumeration_matches_brute_force(
            hx in crate::gf2::tests::arb_matrix(3, 9),
            seed in any::<u64>(),
        ) {
            // Z checks drawn from the kernel of H_X so the pair commutes.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kernel = hx.kernel_basis();
            let rows: Vec<BitVec> = (0..rng.gen_range(0..=3usize))
                .map(|_| {
                    let mut v = BitVec::zeros(hx.cols());
                    for b in &kernel {
                        if rng.gen_bool(0.5) {
                            v.xor_assign(b);
                        }
                    }
                    v
                })
                .collect();
            let hz = BitMatrix::from_bitvecs(&rows, hx.cols());
            let code = CssCode::from_matrices(hx.clone(), hz.clone()).unwrap();
            let p = css_distance(&code, DEFAULT_BUDGET).unwrap();
            if p.k > 0 {
                prop_assert_eq!(p.d_z, brute_logical_weight(&hx, &hz));
                prop_assert_eq!(p.d_x, brute_logical_weight(&hz, &hx));
            }
        }
    }
}
