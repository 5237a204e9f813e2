//! Multigraphs with typed vertices, group actions on them, quotients and
//! covering maps.
//!
//! Tanner graphs are the bipartite special case: checks occupy vertex ids
//! `0..m` and bits `m..m+n`. Parallel edges are kept, since quotients create
//! them; only the parity-check shadow reduces multiplicities mod 2.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::gf2::BitMatrix;
use crate::group_ring::{FiniteGroup, GroupAlgebraElement, GroupAlgebraMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Plain,
    Check,
    Bit,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({0},{1}) has an endpoint outside the vertex range")]
    EdgeOutOfRange(usize, usize),
    #[error("edge ({u},{v}) joins vertices of kinds {ku:?} and {kv:?}")]
    BadEdgeKinds {
        u: usize,
        v: usize,
        ku: VertexKind,
        kv: VertexKind,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("action has {found} permutations but the group has order {order}")]
    WrongElementCount { found: usize, order: usize },
    #[error("permutation for element {g} has length {len}, graph has {vertices} vertices")]
    WrongLength { g: usize, len: usize, vertices: usize },
    #[error("image of element {g} is not a permutation")]
    NotPermutation { g: usize },
    #[error("identity element does not act trivially")]
    IdentityNotTrivial,
    #[error("perm({g}·{h}) != perm({g})∘perm({h})")]
    NotHomomorphism { g: usize, h: usize },
    #[error("element {g} sends vertex {v} to a vertex of another kind")]
    NotTypePreserving { g: usize, v: usize },
    #[error("element {g} does not map the edge multiset onto itself (edge ({u},{v}))")]
    EdgesNotInvariant { g: usize, u: usize, v: usize },
    #[error("generators do not determine an action: {0}")]
    Generators(String),
}

/// Undirected multigraph whose vertices carry a [`VertexKind`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    kinds: Vec<VertexKind>,
    /// Sorted, each edge stored as `(min, max)`.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(kinds: Vec<VertexKind>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let n = kinds.len();
        let mut norm = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EdgeOutOfRange(u, v));
            }
            let (ku, kv) = (kinds[u], kinds[v]);
            let ok = matches!(
                (ku, kv),
                (VertexKind::Plain, VertexKind::Plain)
                    | (VertexKind::Check, VertexKind::Bit)
                    | (VertexKind::Bit, VertexKind::Check)
            );
            if !ok {
                return Err(GraphError::BadEdgeKinds { u, v, ku, kv });
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        Ok(Self { kinds, edges: norm })
    }

    pub fn plain(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        Self::new(vec![VertexKind::Plain; vertices], edges)
    }

    /// Cycle `0 - 1 - … - (n-1) - 0`.
    pub fn cycle(n: usize) -> Self {
        Self::plain(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).expect("cycle edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[VertexKind] {
        &self.kinds
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.kinds[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Multiset of neighbours with multiplicity; a self-loop counts twice.
    pub fn neighbour_counts(&self) -> Vec<BTreeMap<usize, usize>> {
        let mut out = vec![BTreeMap::new(); self.vertex_count()];
        for &(u, v) in &self.edges {
            *out[u].entry(v).or_insert(0) += 1;
            *out[v].entry(u).or_insert(0) += 1;
        }
        out
    }

    pub fn edge_multiset(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for &e in &self.edges {
            *m.entry(e).or_insert(0) += 1;
        }
        m
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Cartesian product; vertex `(a, b)` gets id `a·|B| + b`.
    pub fn cartesian_product(&self, other: &Graph) -> Graph {
        let nb = other.vertex_count();
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            for b in 0..nb {
                edges.push((u * nb + b, v * nb + b));
            }
        }
        for a in 0..self.vertex_count() {
            for &(u, v) in &other.edges {
                edges.push((a * nb + u, a * nb + v));
            }
        }
        Graph::plain(self.vertex_count() * nb, edges).expect("product edges are in range")
    }
}

/// Bipartite Tanner multigraph. Edge `(c, b)` joins check `c` and bit `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    checks: usize,
    bits: usize,
    edges: Vec<(usize, usize)>,
}

impl TannerGraph {
    pub fn new(checks: usize, bits: usize, mut edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if let Some(&(c, b)) = edges.iter().find(|&&(c, b)| c >= checks || b >= bits) {
            return Err(GraphError::EdgeOutOfRange(c, b));
        }
        edges.sort_unstable();
        Ok(Self { checks, bits, edges })
    }

    pub fn from_parity_check(h: &BitMatrix) -> Self {
        Self {
            checks: h.rows(),
            bits: h.cols(),
            edges: h.nonzeros(),
        }
    }

    pub fn checks(&self) -> usize {
        self.checks
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Check-by-bit incidence with multiplicities reduced mod 2.
    pub fn biadjacency(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.checks, self.bits);
        for &(c, b) in &self.edges {
            m.toggle(c, b);
        }
        m
    }

    /// Number of (check, bit) pairs whose multiplicity is lost or changed by
    /// reducing mod 2.
    pub fn parity_reduction_loss(&self) -> usize {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &e in &self.edges {
            *counts.entry(e).or_insert(0) += 1;
        }
        counts.values().filter(|&&c| c > 1).count()
    }

    pub fn to_graph(&self) -> Graph {
        let mut kinds = vec![VertexKind::Check; self.checks];
        kinds.extend(std::iter::repeat_n(VertexKind::Bit, self.bits));
        let edges = self.edges.iter().map(|&(c, b)| (c, self.checks + b)).collect();
        Graph::new(kinds, edges).expect("Tanner edges are valid")
    }

    /// Inverse of [`TannerGraph::to_graph`]; checks must precede bits.
    pub fn from_graph(g: &Graph) -> Option<Self> {
        let checks = g.kinds().iter().take_while(|&&k| k == VertexKind::Check).count();
        if g.kinds()[checks..].iter().any(|&k| k != VertexKind::Bit) {
            return None;
        }
        let bits = g.vertex_count() - checks;
        let edges = g.edges().iter().map(|&(c, b)| (c, b - checks)).collect();
        Self::new(checks, bits, edges).ok()
    }
}

/// Permutation action of a finite group on the vertices of a graph, one
/// permutation per group element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    group: Arc<FiniteGroup>,
    perms: Vec<Vec<usize>>,
}

impl GroupAction {
    /// Action from one permutation per group element; validated against `graph`.
    pub fn new(group: &Arc<FiniteGroup>, perms: Vec<Vec<usize>>, graph: &Graph) -> Result<Self, ActionError> {
        let action = Self {
            group: Arc::clone(group),
            perms,
        };
        action.validate(graph)?;
        Ok(action)
    }

    pub fn trivial(graph: &Graph) -> Self {
        let group = Arc::new(FiniteGroup::cyclic(1).expect("order 1"));
        Self {
            group,
            perms: vec![(0..graph.vertex_count()).collect()],
        }
    }

    /// Extends permutations given for a generating set to the whole group
    /// (breadth-first over words) and validates the result.
    pub fn from_generators(
        group: &Arc<FiniteGroup>,
        generators: &[(usize, Vec<usize>)],
        graph: &Graph,
    ) -> Result<Self, ActionError> {
        let nv = graph.vertex_count();
        let l = group.order();
        let mut perms: Vec<Option<Vec<usize>>> = vec![None; l];
        perms[0] = Some((0..nv).collect());
        for (g, p) in generators {
            if *g >= l {
                return Err(ActionError::Generators(format!("element {g} out of range")));
            }
            if p.len() != nv {
                return Err(ActionError::WrongLength {
                    g: *g,
                    len: p.len(),
                    vertices: nv,
                });
            }
        }
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(g) = queue.pop_front() {
            let pg = perms[g].clone().expect("queued elements are known");
            for (s, ps) in generators {
                let gs = group.mul(g, *s);
                // perm(g·s)(v) = perm(g)(perm(s)(v))
                let composed: Vec<usize> = ps.iter().map(|&v| pg[v]).collect();
                match &perms[gs] {
                    None => {
                        perms[gs] = Some(composed);
                        queue.push_back(gs);
                    }
                    Some(existing) if *existing != composed => {
                        return Err(ActionError::Generators(format!(
                            "element {gs} reached with two different permutations"
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
        let perms = perms
            .into_iter()
            .enumerate()
            .map(|(g, p)| p.ok_or_else(|| ActionError::Generators(format!("element {g} not generated"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(group, perms, graph)
    }

    /// Builds a Tanner-graph action from separate check and bit permutations per element.
    pub fn on_tanner(
        group: &Arc<FiniteGroup>,
        check_perms: &[Vec<usize>],
        bit_perms: &[Vec<usize>],
        graph: &TannerGraph,
    ) -> Result<Self, ActionError> {
        let m = graph.checks();
        let perms = check_perms
            .iter()
            .zip(bit_perms)
            .map(|(cp, bp)| cp.iter().copied().chain(bp.iter().map(|&b| b + m)).collect())
            .collect();
        Self::new(group, perms, &graph.to_graph())
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    #[inline]
    pub fn apply(&self, g: usize, v: usize) -> usize {
        self.perms[g][v]
    }

    pub fn perm(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    pub fn validate(&self, graph: &Graph) -> Result<(), ActionError> {
        let l = self.group.order();
        let nv = graph.vertex_count();
        if self.perms.len() != l {
            return Err(ActionError::WrongElementCount {
                found: self.perms.len(),
                order: l,
            });
        }
        for (g, p) in self.perms.iter().enumerate() {
            if p.len() != nv {
                return Err(ActionError::WrongLength {
                    g,
                    len: p.len(),
                    vertices: nv,
                });
            }
            let mut seen = vec![false; nv];
            for &v in p {
                if v >= nv || std::mem::replace(&mut seen[v], true) {
                    return Err(ActionError::NotPermutation { g });
                }
            }
            if let Some(v) = (0..nv).find(|&v| graph.kind(p[v]) != graph.kind(v)) {
                return Err(ActionError::NotTypePreserving { g, v });
            }
        }
        if self.perms[0].iter().enumerate().any(|(i, &v)| i != v) {
            return Err(ActionError::IdentityNotTrivial);
        }
        for g in 0..l {
            for h in 0..l {
                let gh = self.group.mul(g, h);
                if (0..nv).any(|v| self.perms[gh][v] != self.perms[g][self.perms[h][v]]) {
                    return Err(ActionError::NotHomomorphism { g, h });
                }
            }
        }
        let edges = graph.edge_multiset();
        for g in 0..l {
            for (&(u, v), &count) in &edges {
                let (a, b) = (self.perms[g][u], self.perms[g][v]);
                if edges.get(&(a.min(b), a.max(b))) != Some(&count) {
                    return Err(ActionError::EdgesNotInvariant { g, u, v });
                }
            }
        }
        Ok(())
    }

    /// Pairs `(g, v)` with `g ≠ e` and `g·v = v`; empty iff the action is free.
    pub fn fixed_points(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for g in 1..self.group.order() {
            for (v, &w) in self.perms[g].iter().enumerate() {
                if v == w {
                    out.push((g, v));
                }
            }
        }
        out
    }

    pub fn is_free(&self) -> FreeCheck {
        FreeCheck {
            witness: self.fixed_points().into_iter().next(),
        }
    }

    /// First forbidden edge, if any.
    ///
    /// On plain vertices this is an edge between `a` and `g·a` for some
    /// `g ≠ e`. On Tanner vertices both ends of an edge have different kinds,
    /// so the check becomes: no edge is mapped onto itself by a non-identity
    /// element.
    pub fn fixed_edge(&self, graph: &Graph) -> Option<FixedEdge> {
        for &(u, v) in graph.edges() {
            for g in 1..self.group.order() {
                let (gu, gv) = (self.apply(g, u), self.apply(g, v));
                let hit = match graph.kind(u) {
                    VertexKind::Plain => gu == v || gv == u,
                    _ => (gu == u && gv == v) || (gu == v && gv == u),
                };
                if hit {
                    return Some(FixedEdge {
                        element: g,
                        edge: (u, v),
                    });
                }
            }
        }
        None
    }

    pub fn has_fixed_edge(&self, graph: &Graph) -> bool {
        self.fixed_edge(graph).is_some()
    }

    /// `P(g)` as a binary matrix on the vertex ids in `range`: `P[g·v, v] = 1`.
    pub fn permutation_matrix(&self, g: usize, range: std::ops::Range<usize>) -> BitMatrix {
        let offset = range.start;
        let mut m = BitMatrix::zeros(range.len(), range.len());
        for v in range {
            m.set(self.apply(g, v) - offset, v - offset, true);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeCheck {
    /// A non-identity element and a vertex it fixes.
    pub witness: Option<(usize, usize)>,
}

impl FreeCheck {
    pub fn free(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedEdge {
    pub element: usize,
    pub edge: (usize, usize),
}

/// Orbit bookkeeping for a quotient: classes, basepoints and the group
/// element that carries each basepoint to each vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientLayout {
    /// Vertex orbits ordered by basepoint; each sorted ascending.
    pub classes: Vec<Vec<usize>>,
    /// Lowest vertex id in each orbit.
    pub basepoints: Vec<usize>,
    pub class_of: Vec<usize>,
    /// First group element (in the group's element order) with `g·basepoint = v`.
    pub row_of: Vec<usize>,
    /// Stabiliser of each basepoint.
    pub stabilisers: Vec<Vec<usize>>,
}

impl QuotientLayout {
    pub fn new(action: &GroupAction, vertex_count: usize) -> Self {
        let l = action.group().order();
        let mut class_of = vec![usize::MAX; vertex_count];
        let mut row_of = vec![usize::MAX; vertex_count];
        let mut classes = Vec::new();
        let mut basepoints = Vec::new();
        let mut stabilisers = Vec::new();
        for v in 0..vertex_count {
            if class_of[v] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members = BTreeSet::new();
            let mut stab = Vec::new();
            for g in 0..l {
                let w = action.apply(g, v);
                if w == v {
                    stab.push(g);
                }
                if class_of[w] == usize::MAX {
                    class_of[w] = id;
                    row_of[w] = g;
                }
                members.insert(w);
            }
            classes.push(members.into_iter().collect());
            basepoints.push(v);
            stabilisers.push(stab);
        }
        Self {
            classes,
            basepoints,
            class_of,
            row_of,
            stabilisers,
        }
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn is_free_class(&self, class: usize) -> bool {
        self.stabilisers[class].len() == 1
    }
}

/// Quotient multigraph plus the orbit layout. Each edge orbit becomes one
/// quotient edge per parallel copy.
pub fn quotient(graph: &Graph, action: &GroupAction) -> (Graph, QuotientLayout) {
    let layout = QuotientLayout::new(action, graph.vertex_count());
    let kinds = layout.basepoints.iter().map(|&b| graph.kind(b)).collect();
    let multiset = graph.edge_multiset();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut edges = Vec::new();
    for (&(u, v), &count) in &multiset {
        if seen.contains(&(u, v)) {
            continue;
        }
        for g in 0..action.group().order() {
            let (a, b) = (action.apply(g, u), action.apply(g, v));
            seen.insert((a.min(b), a.max(b)));
        }
        for _ in 0..count {
            edges.push((layout.class_of[u], layout.class_of[v]));
        }
    }
    let q = Graph::new(kinds, edges).expect("quotient edges respect kinds");
    (q, layout)
}

pub fn tanner_quotient(graph: &TannerGraph, action: &GroupAction) -> (Graph, QuotientLayout) {
    quotient(&graph.to_graph(), action)
}

/// A vertex map from a cover graph to a base graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringMap {
    pub cover: Graph,
    pub base: Graph,
    pub vertex_map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoveringViolation {
    /// Vertex maps outside the base or the map has the wrong length.
    BadImage {
        vertex: usize,
    },
    KindMismatch {
        vertex: usize,
        image: usize,
    },
    /// Neighbourhood of `vertex` does not match that of its image.
    Neighbourhood {
        vertex: usize,
        image: usize,
        base_neighbour: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringReport {
    pub violations: Vec<CoveringViolation>,
    /// `l` when every base vertex has exactly `l` preimages.
    pub lift_degree: Option<usize>,
}

impl CoveringReport {
    pub fn is_covering(&self) -> bool {
        self.violations.is_empty()
    }
}

impl CoveringMap {
    /// Checks that every cover vertex's incident edges map bijectively onto
    /// those of its image, counting parallel edges.
    pub fn verify(&self) -> CoveringReport {
        let mut violations = Vec::new();
        let nb = self.base.vertex_count();
        if self.vertex_map.len() != self.cover.vertex_count() {
            violations.push(CoveringViolation::BadImage {
                vertex: self.vertex_map.len().min(self.cover.vertex_count()),
            });
            return CoveringReport {
                violations,
                lift_degree: None,
            };
        }
        for (v, &f) in self.vertex_map.iter().enumerate() {
            if f >= nb {
                violations.push(CoveringViolation::BadImage { vertex: v });
            } else if self.cover.kind(v) != self.base.kind(f) {
                violations.push(CoveringViolation::KindMismatch { vertex: v, image: f });
            }
        }
        if !violations.is_empty() {
            return CoveringReport {
                violations,
                lift_degree: None,
            };
        }
        let base_nbrs = self.base.neighbour_counts();
        let cover_nbrs = self.cover.neighbour_counts();
        for v in 0..self.cover.vertex_count() {
            let f = self.vertex_map[v];
            let mut image_counts: BTreeMap<usize, usize> = BTreeMap::new();
            for (&w, &c) in &cover_nbrs[v] {
                *image_counts.entry(self.vertex_map[w]).or_insert(0) += c;
            }
            let keys: BTreeSet<usize> = image_counts.keys().chain(base_nbrs[f].keys()).copied().collect();
            for x in keys {
                let expected = base_nbrs[f].get(&x).copied().unwrap_or(0);
                let found = image_counts.get(&x).copied().unwrap_or(0);
                if expected != found {
                    violations.push(CoveringViolation::Neighbourhood {
                        vertex: v,
                        image: f,
                        base_neighbour: x,
                        expected,
                        found,
                    });
                }
            }
        }
        let mut fibre = vec![0usize; nb];
        for &f in &self.vertex_map {
            fibre[f] += 1;
        }
        let lift_degree = match fibre.first() {
            Some(&l) if fibre.iter().all(|&x| x == l) => Some(l),
            None => Some(0),
            _ => None,
        };
        CoveringReport {
            violations,
            lift_degree,
        }
    }
}

/// Tanner graph of `B(m)` with its projection onto the base multigraph.
#[derive(Debug, Clone)]
pub struct Lift {
    pub cover: TannerGraph,
    /// Base Tanner multigraph: entry `m[i][j]` of weight `w` gives `w` parallel edges.
    pub base: TannerGraph,
    pub covering: CoveringMap,
    /// Largest number of parallel base edges needed by a single entry.
    pub max_multiplicity: usize,
}

impl Lift {
    /// Whether the lift also covers the simple base graph (entry ≠ 0).
    pub fn covers_simple_base(&self) -> bool {
        self.max_multiplicity <= 1
    }
}

/// Builds the lifted Tanner graph of a ring matrix. Check `(i, p)` is joined
/// to bit `(j, q)` once for every `g` in the support of `m[i][j]` with `g·q = p`.
pub fn lift_from_ring_matrix(m: &GroupAlgebraMatrix) -> Lift {
    let group = m.group();
    let l = group.order();
    let (rows, cols) = m.shape();
    let mut cover_edges = Vec::new();
    let mut base_edges = Vec::new();
    let mut max_multiplicity = 0;
    for i in 0..rows {
        for j in 0..cols {
            let support = m.get(i, j).support();
            max_multiplicity = max_multiplicity.max(support.len());
            for &g in &support {
                base_edges.push((i, j));
                for q in 0..l {
                    cover_edges.push((i * l + group.mul(g, q), j * l + q));
                }
            }
        }
    }
    let cover = TannerGraph::new(rows * l, cols * l, cover_edges).expect("lift edges in range");
    let base = TannerGraph::new(rows, cols, base_edges).expect("base edges in range");
    let vertex_map = (0..rows * l)
        .map(|c| c / l)
        .chain((0..cols * l).map(|b| rows + b / l))
        .collect();
    let covering = CoveringMap {
        cover: cover.to_graph(),
        base: base.to_graph(),
        vertex_map,
    };
    Lift {
        cover,
        base,
        covering,
        max_multiplicity,
    }
}

/// Left-multiplication action `h·(j, q) = (j, h·q)` on a lifted Tanner graph
/// with `checks` check blocks and `bits` bit blocks. Validation fails when
/// this is not a graph automorphism, which can only happen for non-abelian groups.
pub fn lift_regular_action(group: &Arc<FiniteGroup>, lift: &TannerGraph) -> Result<GroupAction, ActionError> {
    let l = group.order();
    let nv = lift.checks() + lift.bits();
    let perms = (0..l)
        .map(|h| (0..nv).map(|v| (v / l) * l + group.mul(h, v % l)).collect())
        .collect();
    GroupAction::new(group, perms, &lift.to_graph())
}

/// Reads voltages off a free action on a Tanner graph: the edge orbit through
/// check basepoint `c₀` and bit `t·b₀` contributes `t⁻¹` to the entry of
/// their classes. This inverts [`lift_from_ring_matrix`] for the action of
/// [`lift_regular_action`].
pub fn ring_matrix_from_quotient(graph: &TannerGraph, action: &GroupAction) -> Option<GroupAlgebraMatrix> {
    if !action.is_free().free() {
        return None;
    }
    let g = graph.to_graph();
    let layout = QuotientLayout::new(action, g.vertex_count());
    let group = action.group();
    let check_classes: Vec<usize> = (0..layout.class_count())
        .filter(|&c| g.kind(layout.basepoints[c]) == VertexKind::Check)
        .collect();
    let bit_classes: Vec<usize> = (0..layout.class_count())
        .filter(|&c| g.kind(layout.basepoints[c]) == VertexKind::Bit)
        .collect();
    let check_pos: BTreeMap<usize, usize> = check_classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let bit_pos: BTreeMap<usize, usize> = bit_classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut m = GroupAlgebraMatrix::zeros(group, check_classes.len(), bit_classes.len());
    for &(c, b) in g.edges() {
        // Only count edges whose check end is a basepoint: one per edge orbit.
        if layout.row_of[c] != 0 {
            continue;
        }
        let t = layout.row_of[b];
        let (i, j) = (check_pos[&layout.class_of[c]], bit_pos[&layout.class_of[b]]);
        let updated = m
            .get(i, j)
            .add(&GroupAlgebraElement::monomial(group, group.inverse(t)))
            .expect("same group");
        m.set(i, j, updated);
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_ring::tests::z;
    use proptest::prelude::*;

    /// 6-cycle on vertices 0..6 (labelled 1..6 in figures) with z: v ↦ v+2.
    fn six_cycle_z3() -> (Graph, GroupAction) {
        let g = Graph::cycle(6);
        let gen = (0..6).map(|v| (v + 2) % 6).collect();
        let a = GroupAction::from_generators(&z(3), &[(1, gen)], &g).unwrap();
        (g, a)
    }

    #[test]
    fn six_cycle_action_is_free_without_forbidden_edges() {
        let (g, a) = six_cycle_z3();
        assert!(a.is_free().free());
        assert!(!a.has_fixed_edge(&g));
    }

    #[test]
    fn fixed_vertex_is_reported() {
        // K4 with z = (1 2 3)(4), vertices 0..4.
        let g = Graph::plain(4, vec![(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)]).unwrap();
        let a = GroupAction::from_generators(&z(3), &[(1, vec![1, 2, 0, 3])], &g).unwrap();
        let check = a.is_free();
        assert_eq!(check.witness, Some((1, 3)));
    }

    #[test]
    fn trivial_group_is_free_and_clean() {
        let g = Graph::cycle(5);
        let a = GroupAction::trivial(&g);
        assert!(a.is_free().free());
        assert!(a.fixed_edge(&g).is_none());
        let (q, layout) = quotient(&g, &a);
        assert_eq!(q, g);
        assert_eq!(layout.basepoints, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn antipodal_double_edge_is_forbidden() {
        let g = Graph::plain(2, vec![(0, 1), (0, 1)]).unwrap();
        let a = GroupAction::from_generators(&z(2), &[(1, vec![1, 0])], &g).unwrap();
        assert!(a.is_free().free());
        assert_eq!(
            a.fixed_edge(&g),
            Some(FixedEdge {
                element: 1,
                edge: (0, 1)
            })
        );
    }

    #[test]
    fn six_cycle_quotient_has_double_edge() {
        let (g, a) = six_cycle_z3();
        let (q, layout) = quotient(&g, &a);
        assert_eq!(q.vertex_count(), 2);
        assert_eq!(q.edges(), &[(0, 1), (0, 1)]);
        assert_eq!(layout.classes, vec![vec![0, 2, 4], vec![1, 3, 5]]);
        assert_eq!(layout.basepoints, vec![0, 1]);
        assert_eq!(layout.row_of, vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn invalid_actions_are_rejected() {
        let g = Graph::cycle(4);
        // Rotation by one is not an automorphism of order 3.
        let err = GroupAction::from_generators(&z(3), &[(1, vec![1, 2, 3, 0])], &g).unwrap_err();
        assert!(matches!(
            err,
            ActionError::Generators(_) | ActionError::NotHomomorphism { .. }
        ));
        // Swap of two vertices of a path that breaks edges.
        let p = Graph::plain(3, vec![(0, 1), (1, 2)]).unwrap();
        let err = GroupAction::from_generators(&z(2), &[(1, vec![1, 0, 2])], &p).unwrap_err();
        assert!(matches!(err, ActionError::EdgesNotInvariant { .. }));
        // Type changes are refused.
        let t = TannerGraph::new(1, 1, vec![(0, 0)]).unwrap().to_graph();
        let err = GroupAction::from_generators(&z(2), &[(1, vec![1, 0])], &t).unwrap_err();
        assert!(matches!(err, ActionError::NotTypePreserving { .. }));
    }

    /// The 3-vertex line graph (bit - check - bit) and its 2-lift as two
    /// disjoint paths.
    fn line_graph_two_lift() -> CoveringMap {
        let base = TannerGraph::new(1, 2, vec![(0, 0), (0, 1)]).unwrap().to_graph();
        let cover = TannerGraph::new(2, 4, vec![(0, 0), (0, 1), (1, 2), (1, 3)])
            .unwrap()
            .to_graph();
        // checks 0,1 -> 0; bits 2,3,4,5 -> base bits 1,2,1,2
        CoveringMap {
            cover,
            base,
            vertex_map: vec![0, 0, 1, 2, 1, 2],
        }
    }

    #[test]
    fn two_lift_is_a_covering() {
        let report = line_graph_two_lift().verify();
        assert!(report.is_covering(), "{report:?}");
        assert_eq!(report.lift_degree, Some(2));
    }

    #[test]
    fn identity_map_is_a_covering() {
        let g = Graph::cycle(5);
        let report = CoveringMap {
            cover: g.clone(),
            base: g,
            vertex_map: (0..5).collect(),
        }
        .verify();
        assert!(report.is_covering());
        assert_eq!(report.lift_degree, Some(1));
    }

    #[test]
    fn collapsing_adjacent_vertices_is_reported() {
        let cover = Graph::plain(3, vec![(0, 1), (1, 2)]).unwrap();
        let base = Graph::plain(2, vec![(0, 1)]).unwrap();
        let report = CoveringMap {
            cover,
            base,
            vertex_map: vec![0, 0, 1],
        }
        .verify();
        assert!(!report.is_covering());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, CoveringViolation::Neighbourhood { vertex: 0, .. })));
    }

    #[test]
    fn lift_examples() {
        let g = z(3);
        let m = GroupAlgebraMatrix::parse_grid(&g, &[vec!["1+x"]]).unwrap();
        let lift = lift_from_ring_matrix(&m);
        assert_eq!((lift.cover.checks(), lift.cover.bits()), (3, 3));
        assert_eq!(lift.base.edges(), &[(0, 0), (0, 0)]);
        let r = lift.covering.verify();
        assert!(r.is_covering());
        assert_eq!(r.lift_degree, Some(3));
        assert!(!lift.covers_simple_base());

        let g2 = z(2);
        let one = GroupAlgebraMatrix::parse_grid(&g2, &[vec!["1"]]).unwrap();
        let lift = lift_from_ring_matrix(&one);
        assert_eq!(lift.cover.edges(), &[(0, 0), (1, 1)]);
        assert!(lift.covering.verify().is_covering());
        assert!(lift.covers_simple_base());

        let full = GroupAlgebraMatrix::parse_grid(&g, &[vec!["1+x+x^2"]]).unwrap();
        let lift = lift_from_ring_matrix(&full);
        assert_eq!(lift.max_multiplicity, 3);
        assert!(!lift.covers_simple_base());
        let simple = CoveringMap {
            base: TannerGraph::new(1, 1, vec![(0, 0)]).unwrap().to_graph(),
            ..lift.covering.clone()
        };
        assert!(!simple.verify().is_covering());
    }

    #[test]
    fn biadjacency_reduces_multiplicity() {
        let t = TannerGraph::new(1, 2, vec![(0, 0), (0, 0), (0, 1)]).unwrap();
        assert_eq!(t.biadjacency(), BitMatrix::from_rows(&[[0, 1]]));
        assert_eq!(t.parity_reduction_loss(), 1);
    }

    fn arb_monomial_matrix() -> impl Strategy<Value = GroupAlgebraMatrix> {
        (1usize..=8, 1usize..=3, 1usize..=3).prop_flat_map(|(l, r, c)| {
            proptest::collection::vec(proptest::option::of(0..l), r * c).prop_map(move |cells| {
                let g = z(l);
                let entries = cells
                    .iter()
                    .map(|cell| match cell {
                        Some(e) => GroupAlgebraElement::monomial(&g, *e),
                        None => GroupAlgebraElement::zero(&g),
                    })
                    .collect();
                GroupAlgebraMatrix::from_entries(&g, r, c, entries).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn monomial_lifts_are_coverings(m in arb_monomial_matrix()) {
            let lift = lift_from_ring_matrix(&m);
            let report = lift.covering.verify();
            prop_assert!(report.is_covering());
            prop_assert_eq!(report.lift_degree, Some(m.group().order()));
            prop_assert_eq!(lift.cover.biadjacency(), m.binary_map());
        }

        #[test]
        fn regular_action_quotients_round_trip(m in arb_monomial_matrix()) {
            let lift = lift_from_ring_matrix(&m);
            let action = lift_regular_action(m.group(), &lift.cover).unwrap();
            prop_assert!(action.is_free().free());
            let (q, layout) = tanner_quotient(&lift.cover, &action);
            prop_assert_eq!(q.vertex_count(), m.rows() + m.cols());
            prop_assert_eq!(layout.class_count() * m.group().order(), lift.cover.checks() + lift.cover.bits());
            let back = ring_matrix_from_quotient(&lift.cover, &action).unwrap();
            prop_assert_eq!(&back, &m);
            let relift = lift_from_ring_matrix(&back);
            prop_assert_eq!(relift.cover.edges(), lift.cover.edges());
        }

        #[test]
        fn action_commutes_with_biadjacency(m in arb_monomial_matrix()) {
            let lift = lift_from_ring_matrix(&m);
            let action = lift_regular_action(m.group(), &lift.cover).unwrap();
            let a = lift.cover.biadjacency();
            let (mc, nb) = (lift.cover.checks(), lift.cover.bits());
            for g in m.group().elements() {
                let pc = action.permutation_matrix(g, 0..mc);
                let pb = action.permutation_matrix(g, mc..mc + nb);
                prop_assert_eq!(pc.matmul(&a).unwrap(), a.matmul(&pb).unwrap());
            }
        }
    }
}
