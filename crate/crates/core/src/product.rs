//! Hypergraph, lifted and balanced products, each returning a [`CssCode`]
//! with its coordinate layout.
//!
//! Qubit columns are ordered Q1 block first, then Q2. Coordinates follow the
//! closed forms below (2D for hypergraph products, 3D with the group element
//! on `z` otherwise):
//!
//! | family | 2D                                  | 3D                                            |
//! |--------|-------------------------------------|-----------------------------------------------|
//! | X      | `(i/n2, i%n2)`                      | `(i/(n2 l), (i/l)%n2, i%l)`                   |
//! | Z      | `(i/m2 + m1, i%m2 + n2)`            | `(i/(m2 l) + m1, (i/l)%m2 + n2, i%l)`         |
//! | Q1     | `(j/n2 + m1, j%n2)`                 | `(j/(n2 l) + m1, (j/l)%n2, j%l)`              |
//! | Q2     | `(j/m2, j%m2 + n2)`                 | `(j/(m2 l), (j/l)%m2 + n2, j%l)`              |

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::ClassicalCode;
use crate::gf2::BitMatrix;
use crate::graph::{ActionError, FixedEdge, Graph, GroupAction, QuotientLayout, TannerGraph, VertexKind};
use crate::group_ring::{FiniteGroup, GroupAlgebraMatrix, GroupError, IdentitySide};

pub type Coord = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    X,
    Z,
    Q1,
    Q2,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::X, Role::Z, Role::Q1, Role::Q2];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::X => "X",
            Role::Z => "Z",
            Role::Q1 => "Q1",
            Role::Q2 => "Q2",
        }
    }

    pub fn is_qubit(self) -> bool {
        matches!(self, Role::Q1 | Role::Q2)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown role {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutKind {
    #[serde(rename = "2d")]
    Flat,
    #[serde(rename = "3d")]
    Layered,
}

impl LayoutKind {
    pub fn dims(self) -> usize {
        match self {
            LayoutKind::Flat => 2,
            LayoutKind::Layered => 3,
        }
    }
}

/// One coordinate per X check, Z check and qubit. Flat tables keep `z = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateTable {
    pub kind: LayoutKind,
    pub x_checks: Vec<Coord>,
    pub z_checks: Vec<Coord>,
    pub q1: Vec<Coord>,
    pub q2: Vec<Coord>,
}

impl CoordinateTable {
    pub fn empty(kind: LayoutKind) -> Self {
        Self {
            kind,
            x_checks: Vec::new(),
            z_checks: Vec::new(),
            q1: Vec::new(),
            q2: Vec::new(),
        }
    }

    /// Hypergraph-product layout for `H1: m1×n1`, `H2: m2×n2`.
    pub fn hgp(m1: usize, n1: usize, m2: usize, n2: usize) -> Self {
        let mut t = Self::lifted(m1, n1, m2, n2, 1);
        t.kind = LayoutKind::Flat;
        t
    }

    /// Lifted-product layout for ring matrices `m1×n1`, `m2×n2` over a group of order `l`.
    pub fn lifted(m1: usize, n1: usize, m2: usize, n2: usize, l: usize) -> Self {
        let x_checks = (0..m1 * n2 * l).map(|i| [i / (n2 * l), (i / l) % n2, i % l]).collect();
        let z_checks = (0..n1 * m2 * l)
            .map(|i| [i / (m2 * l) + m1, (i / l) % m2 + n2, i % l])
            .collect();
        let q1 = (0..n1 * n2 * l)
            .map(|j| [j / (n2 * l) + m1, (j / l) % n2, j % l])
            .collect();
        let q2 = (0..m1 * m2 * l)
            .map(|j| [j / (m2 * l), (j / l) % m2 + n2, j % l])
            .collect();
        Self {
            kind: LayoutKind::Layered,
            x_checks,
            z_checks,
            q1,
            q2,
        }
    }

    /// Every qubit on the `x` axis; used for codes read from plain matrices.
    pub fn line(qubits: usize, x_checks: usize, z_checks: usize) -> Self {
        Self {
            kind: LayoutKind::Flat,
            x_checks: (0..x_checks).map(|i| [i, 1, 0]).collect(),
            z_checks: (0..z_checks).map(|i| [i, 2, 0]).collect(),
            q1: (0..qubits).map(|j| [j, 0, 0]).collect(),
            q2: Vec::new(),
        }
    }

    pub fn family(&self, role: Role) -> &[Coord] {
        match role {
            Role::X => &self.x_checks,
            Role::Z => &self.z_checks,
            Role::Q1 => &self.q1,
            Role::Q2 => &self.q2,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.q1.len() + self.q2.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.x_checks.len() + self.z_checks.len() + self.qubit_count()
    }

    /// Coordinate of global qubit `j` (Q1 block first).
    pub fn qubit(&self, j: usize) -> Coord {
        if j < self.q1.len() {
            self.q1[j]
        } else {
            self.q2[j - self.q1.len()]
        }
    }

    /// Global qubit index of `(role, index)` for qubit roles.
    pub fn qubit_index(&self, role: Role, index: usize) -> Option<usize> {
        match role {
            Role::Q1 => Some(index),
            Role::Q2 => Some(self.q1.len() + index),
            _ => None,
        }
    }

    /// `(role, index, coordinate)` for every vertex, in X, Z, Q1, Q2 order.
    pub fn entries(&self) -> impl Iterator<Item = (Role, usize, Coord)> + '_ {
        Role::ALL
            .into_iter()
            .flat_map(move |r| self.family(r).iter().enumerate().map(move |(i, &c)| (r, i, c)))
    }

    /// First pair of vertices sharing a coordinate, if any.
    pub fn collision(&self) -> Option<((Role, usize), (Role, usize))> {
        let mut seen: BTreeMap<Coord, (Role, usize)> = BTreeMap::new();
        for (r, i, c) in self.entries() {
            if let Some(&prev) = seen.get(&c) {
                return Some((prev, (r, i)));
            }
            seen.insert(c, (r, i));
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductKind {
    Hypergraph,
    Lifted,
    HypergraphOfLifts,
    Balanced,
    Matrices,
}

/// Inputs of a construction. `m1, n1, m2, n2` are the block dimensions
/// (ring-matrix shapes or quotient class counts) and `l` the group order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ProductKind,
    pub group: Option<String>,
    pub l: usize,
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssCode {
    h_x: BitMatrix,
    h_z: BitMatrix,
    layout: CoordinateTable,
    provenance: Provenance,
    commuting: bool,
    parity_reductions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("H_X has {x} columns but H_Z has {z}")]
    ColumnMismatch { x: usize, z: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("actions are over different groups ({0} and {1})")]
    GroupMismatch(String, String),
    #[error("balanced products need an abelian group, {0} is not")]
    NonAbelian(String),
    #[error("invalid action on {side}: {source}")]
    Action {
        side: &'static str,
        #[source]
        source: ActionError,
    },
    #[error("action on A is not free: element {element} fixes vertex {vertex}")]
    NotFree { element: usize, vertex: usize },
    #[error("action on A has a forbidden edge ({}, {}) for element {}", .0.edge.0, .0.edge.1, .0.element)]
    FixedEdge(FixedEdge),
}

impl CssCode {
    /// Code from bare check matrices, laid out on a line.
    pub fn from_matrices(h_x: BitMatrix, h_z: BitMatrix) -> Result<Self, ProductError> {
        if h_x.cols() != h_z.cols() {
            return Err(ProductError::ColumnMismatch {
                x: h_x.cols(),
                z: h_z.cols(),
            });
        }
        let layout = CoordinateTable::line(h_x.cols(), h_x.rows(), h_z.rows());
        let provenance = Provenance {
            kind: ProductKind::Matrices,
            group: None,
            l: 1,
            m1: h_x.rows(),
            n1: h_x.cols(),
            m2: h_z.rows(),
            n2: h_z.cols(),
        };
        Ok(Self::assemble(h_x, h_z, layout, provenance, 0))
    }

    fn assemble(
        h_x: BitMatrix,
        h_z: BitMatrix,
        layout: CoordinateTable,
        provenance: Provenance,
        parity_reductions: usize,
    ) -> Self {
        let commuting = h_x
            .matmul(&h_z.transpose())
            .expect("H_X and H_Z share columns")
            .is_zero();
        Self {
            h_x,
            h_z,
            layout,
            provenance,
            commuting,
            parity_reductions,
        }
    }

    pub fn h_x(&self) -> &BitMatrix {
        &self.h_x
    }

    pub fn h_z(&self) -> &BitMatrix {
        &self.h_z
    }

    pub fn n(&self) -> usize {
        self.h_x.cols()
    }

    pub fn x_check_count(&self) -> usize {
        self.h_x.rows()
    }

    pub fn z_check_count(&self) -> usize {
        self.h_z.rows()
    }

    /// Qubits plus checks.
    pub fn vertex_count(&self) -> usize {
        self.n() + self.x_check_count() + self.z_check_count()
    }

    pub fn layout(&self) -> &CoordinateTable {
        &self.layout
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_commuting(&self) -> bool {
        self.commuting
    }

    /// Check/qubit pairs joined by more than one edge before mod-2 reduction.
    pub fn parity_reductions(&self) -> usize {
        self.parity_reductions
    }
}

pub fn hgp(c1: &ClassicalCode, c2: &ClassicalCode) -> CssCode {
    let (h1, h2) = (c1.parity_check(), c2.parity_check());
    let (m1, n1) = h1.shape();
    let (m2, n2) = h2.shape();
    let h_x = h1
        .kron(&BitMatrix::identity(n2))
        .hstack(&BitMatrix::identity(m1).kron(&h2.transpose()))
        .expect("row counts agree");
    let h_z = BitMatrix::identity(n1)
        .kron(h2)
        .hstack(&h1.transpose().kron(&BitMatrix::identity(m2)))
        .expect("row counts agree");
    let provenance = Provenance {
        kind: ProductKind::Hypergraph,
        group: None,
        l: 1,
        m1,
        n1,
        m2,
        n2,
    };
    CssCode::assemble(h_x, h_z, CoordinateTable::hgp(m1, n1, m2, n2), provenance, 0)
}

fn same_group(m1: &GroupAlgebraMatrix, m2: &GroupAlgebraMatrix) -> Result<(), ProductError> {
    if m1.group().as_ref() != m2.group().as_ref() {
        return Err(GroupError::GroupMismatch {
            left: m1.group().name().to_string(),
            right: m2.group().name().to_string(),
        }
        .into());
    }
    Ok(())
}

/// Lifted product. The result may fail to commute over non-abelian groups;
/// see [`CssCode::is_commuting`].
pub fn lifted_product(m1: &GroupAlgebraMatrix, m2: &GroupAlgebraMatrix) -> Result<CssCode, ProductError> {
    same_group(m1, m2)?;
    let (r1, c1) = m1.shape();
    let (r2, c2) = m2.shape();
    let l = m1.group().order();
    let x = m1
        .kron_identity(c2, IdentitySide::Right)
        .hstack(&m2.conj_transpose().kron_identity(r1, IdentitySide::Left))?;
    let z = m2
        .kron_identity(c1, IdentitySide::Left)
        .hstack(&m1.conj_transpose().kron_identity(r2, IdentitySide::Right))?;
    let provenance = Provenance {
        kind: ProductKind::Lifted,
        group: Some(m1.group().name().to_string()),
        l,
        m1: r1,
        n1: c1,
        m2: r2,
        n2: c2,
    };
    let layout = CoordinateTable::lifted(r1, c1, r2, c2, l);
    Ok(CssCode::assemble(x.binary_map(), z.binary_map(), layout, provenance, 0))
}

/// Hypergraph product of the expanded binary matrices.
pub fn hgp_of_lifts(m1: &GroupAlgebraMatrix, m2: &GroupAlgebraMatrix) -> Result<CssCode, ProductError> {
    same_group(m1, m2)?;
    let mut code = hgp(
        &ClassicalCode::new(m1.binary_map()),
        &ClassicalCode::new(m2.binary_map()),
    );
    code.provenance.kind = ProductKind::HypergraphOfLifts;
    code.provenance.group = Some(m1.group().name().to_string());
    Ok(code)
}

/// Closed-form coordinates for the code's construction; balanced products
/// return the basepoint layout they were built with.
pub fn layout_of(code: &CssCode) -> CoordinateTable {
    let p = &code.provenance;
    match p.kind {
        ProductKind::Hypergraph => CoordinateTable::hgp(p.m1, p.n1, p.m2, p.n2),
        ProductKind::HypergraphOfLifts => CoordinateTable::hgp(p.m1 * p.l, p.n1 * p.l, p.m2 * p.l, p.n2 * p.l),
        ProductKind::Lifted => CoordinateTable::lifted(p.m1, p.n1, p.m2, p.n2, p.l),
        ProductKind::Balanced | ProductKind::Matrices => code.layout.clone(),
    }
}

/// Orbit data for `(A × B)/H` under `h·(a, b) = (h·a, h⁻¹·b)`.
///
/// Each orbit has the representative `(basepoint of a's class, row_of(a)·b)`,
/// so quotient vertices are pairs (A class, B vertex), numbered
/// `class · |B| + b`.
#[derive(Debug, Clone)]
pub struct BalancedQuotient {
    pub a_layout: QuotientLayout,
    pub b_layout: QuotientLayout,
    pub b_vertices: usize,
    /// Quotient edges (one per edge orbit, parallel copies kept).
    pub edges: Vec<(usize, usize)>,
}

impl BalancedQuotient {
    pub fn vertex_count(&self) -> usize {
        self.a_layout.class_count() * self.b_vertices
    }

    pub fn split(&self, v: usize) -> (usize, usize) {
        (v / self.b_vertices, v % self.b_vertices)
    }
}

fn check_pair(a: &Graph, b: &Graph, action_a: &GroupAction, action_b: &GroupAction) -> Result<(), ProductError> {
    let (ga, gb) = (action_a.group(), action_b.group());
    if ga.as_ref() != gb.as_ref() {
        return Err(ProductError::GroupMismatch(
            ga.name().to_string(),
            gb.name().to_string(),
        ));
    }
    if !ga.is_abelian() {
        return Err(ProductError::NonAbelian(ga.name().to_string()));
    }
    action_a
        .validate(a)
        .map_err(|source| ProductError::Action { side: "A", source })?;
    action_b
        .validate(b)
        .map_err(|source| ProductError::Action { side: "B", source })?;
    if let Some((element, vertex)) = action_a.is_free().witness {
        return Err(ProductError::NotFree { element, vertex });
    }
    if let Some(fixed) = action_a.fixed_edge(a) {
        return Err(ProductError::FixedEdge(fixed));
    }
    Ok(())
}

/// Quotient of the Cartesian product `A × B`. Requires a free, fixed-edge-free
/// action on `A` and an abelian group.
pub fn balanced_quotient(
    a: &Graph,
    b: &Graph,
    action_a: &GroupAction,
    action_b: &GroupAction,
) -> Result<BalancedQuotient, ProductError> {
    check_pair(a, b, action_a, action_b)?;
    let group = action_a.group();
    let a_layout = QuotientLayout::new(action_a, a.vertex_count());
    let b_layout = QuotientLayout::new(action_b, b.vertex_count());
    let nb = b.vertex_count();
    let class = |u: usize, v: usize| a_layout.class_of[u] * nb + action_b.apply(a_layout.row_of[u], v);
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut add = |p: usize, q: usize| *counts.entry((p.min(q), p.max(q))).or_insert(0) += 1;
    for &(u, w) in a.edges() {
        for v in 0..nb {
            add(class(u, v), class(w, v));
        }
    }
    for u in 0..a.vertex_count() {
        for &(v, w) in b.edges() {
            add(class(u, v), class(u, w));
        }
    }
    let l = group.order();
    let mut edges = Vec::new();
    for ((p, q), c) in counts {
        debug_assert_eq!(c % l, 0, "free action gives full edge orbits");
        edges.extend(std::iter::repeat_n((p, q), c / l));
    }
    Ok(BalancedQuotient {
        a_layout,
        b_layout,
        b_vertices: nb,
        edges,
    })
}

/// Plain-graph balanced product with `(A class, B class, row)` coordinates.
#[derive(Debug, Clone)]
pub struct BalancedGraph {
    pub graph: Graph,
    pub coords: Vec<Coord>,
}

pub fn balanced_product_graph(
    a: &Graph,
    b: &Graph,
    action_a: &GroupAction,
    action_b: &GroupAction,
) -> Result<BalancedGraph, ProductError> {
    let q = balanced_quotient(a, b, action_a, action_b)?;
    let coords = (0..q.vertex_count())
        .map(|v| {
            let (alpha, w) = q.split(v);
            [alpha, q.b_layout.class_of[w], q.b_layout.row_of[w]]
        })
        .collect();
    let graph = Graph::plain(q.vertex_count(), q.edges.clone()).expect("quotient edges in range");
    Ok(BalancedGraph { graph, coords })
}

/// Index of each class among the classes of the same vertex kind.
fn classes_by_kind(layout: &QuotientLayout, g: &Graph, kind: VertexKind) -> (Vec<Option<usize>>, usize) {
    let mut idx = vec![None; layout.class_count()];
    let mut next = 0;
    for (c, &b) in layout.basepoints.iter().enumerate() {
        if g.kind(b) == kind {
            idx[c] = Some(next);
            next += 1;
        }
    }
    (idx, next)
}

/// Balanced product `(A × B)/H` of two Tanner graphs.
///
/// X checks are (check of A, bit of B), Z checks (bit of A, check of B),
/// Q1 qubits (bit, bit) and Q2 qubits (check, check). Within each family the
/// quotient vertices are ordered by coordinate, which reproduces the
/// lifted-product indexing when `A` and `B` are lifts with their regular actions.
pub fn balanced_product(
    a: &TannerGraph,
    b: &TannerGraph,
    action_a: &GroupAction,
    action_b: &GroupAction,
) -> Result<CssCode, ProductError> {
    let (ga, gb) = (a.to_graph(), b.to_graph());
    let q = balanced_quotient(&ga, &gb, action_a, action_b)?;
    let (a_check, m1) = classes_by_kind(&q.a_layout, &ga, VertexKind::Check);
    let (a_bit, n1) = classes_by_kind(&q.a_layout, &ga, VertexKind::Bit);
    let (b_check, m2) = classes_by_kind(&q.b_layout, &gb, VertexKind::Check);
    let (b_bit, n2) = classes_by_kind(&q.b_layout, &gb, VertexKind::Bit);

    let mut families: BTreeMap<Role, Vec<(Coord, usize)>> = BTreeMap::new();
    for v in 0..q.vertex_count() {
        let (alpha, w) = q.split(v);
        let beta = q.b_layout.class_of[w];
        let z = q.b_layout.row_of[w];
        let (role, coord) = match (ga.kind(q.a_layout.basepoints[alpha]), gb.kind(w)) {
            (VertexKind::Check, VertexKind::Bit) => (Role::X, [a_check[alpha].unwrap(), b_bit[beta].unwrap(), z]),
            (VertexKind::Bit, VertexKind::Check) => {
                (Role::Z, [a_bit[alpha].unwrap() + m1, b_check[beta].unwrap() + n2, z])
            }
            (VertexKind::Bit, VertexKind::Bit) => (Role::Q1, [a_bit[alpha].unwrap() + m1, b_bit[beta].unwrap(), z]),
            (VertexKind::Check, VertexKind::Check) => {
                (Role::Q2, [a_check[alpha].unwrap(), b_check[beta].unwrap() + n2, z])
            }
            _ => unreachable!("Tanner graphs only carry checks and bits"),
        };
        families.entry(role).or_default().push((coord, v));
    }
    for members in families.values_mut() {
        members.sort_unstable();
    }
    let family = |r: Role| families.get(&r).cloned().unwrap_or_default();
    let (xs, zs, q1, q2) = (family(Role::X), family(Role::Z), family(Role::Q1), family(Role::Q2));

    // vertex -> (role, position within family)
    let mut position = vec![(Role::X, 0usize); q.vertex_count()];
    for (role, members) in [(Role::X, &xs), (Role::Z, &zs), (Role::Q1, &q1), (Role::Q2, &q2)] {
        for (i, &(_, v)) in members.iter().enumerate() {
            position[v] = (role, i);
        }
    }
    let n = q1.len() + q2.len();
    let column = |role: Role, i: usize| if role == Role::Q1 { i } else { q1.len() + i };
    let mut x_mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut z_mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(u, v) in &q.edges {
        let (pu, pv) = (position[u], position[v]);
        let (check, qubit) = if pu.0.is_qubit() { (pv, pu) } else { (pu, pv) };
        let target = match check.0 {
            Role::X => &mut x_mult,
            Role::Z => &mut z_mult,
            _ => unreachable!("product edges join a check and a qubit"),
        };
        *target.entry((check.1, column(qubit.0, qubit.1))).or_insert(0) += 1;
    }
    let build = |rows: usize, mult: &BTreeMap<(usize, usize), usize>| {
        let mut h = BitMatrix::zeros(rows, n);
        for (&(r, c), &k) in mult {
            h.set(r, c, k % 2 == 1);
        }
        h
    };
    let reductions = x_mult.values().chain(z_mult.values()).filter(|&&k| k > 1).count();
    let h_x = build(xs.len(), &x_mult);
    let h_z = build(zs.len(), &z_mult);
    let coords = |f: &[(Coord, usize)]| f.iter().map(|&(c, _)| c).collect();
    let layout = CoordinateTable {
        kind: LayoutKind::Layered,
        x_checks: coords(&xs),
        z_checks: coords(&zs),
        q1: coords(&q1),
        q2: coords(&q2),
    };
    let group: &Arc<FiniteGroup> = action_a.group();
    let provenance = Provenance {
        kind: ProductKind::Balanced,
        group: Some(group.name().to_string()),
        l: group.order(),
        m1,
        n1,
        m2,
        n2,
    };
    Ok(CssCode::assemble(h_x, h_z, layout, provenance, reductions))
}

/// Result of comparing the planes of a lifted-product layout with the
/// Tanner graphs of the expanded factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneReport {
    /// Planes of fixed `x` whose induced check/qubit incidence differs from `B(m2)`.
    pub bad_x: Vec<usize>,
    /// Planes of fixed `y` whose induced incidence differs from `B(m1)`.
    pub bad_y: Vec<usize>,
}

impl PlaneReport {
    pub fn holds(&self) -> bool {
        self.bad_x.is_empty() && self.bad_y.is_empty()
    }
}

/// Incidence between the vertices of `rows` and `cols` whose coordinate
/// satisfies `keep`, each family ordered by `(y or x, z)` inside the plane.
fn induced(code: &CssCode, row_role: Role, col_role: Role, keep: impl Fn(&Coord) -> bool) -> BitMatrix {
    let layout = &code.layout;
    let pick = |role: Role| -> Vec<usize> {
        let mut v: Vec<usize> = (0..layout.family(role).len())
            .filter(|&i| keep(&layout.family(role)[i]))
            .collect();
        v.sort_by_key(|&i| layout.family(role)[i]);
        v
    };
    let (rows, cols) = (pick(row_role), pick(col_role));
    let incidence = |r: Role, c: Role, i: usize, j: usize| -> bool {
        match (r, c) {
            (Role::X | Role::Z, _) => {
                let h = if r == Role::X { &code.h_x } else { &code.h_z };
                h.get(i, layout.qubit_index(c, j).expect("qubit column"))
            }
            (_, Role::X | Role::Z) => {
                let h = if c == Role::X { &code.h_x } else { &code.h_z };
                h.get(j, layout.qubit_index(r, i).expect("qubit row"))
            }
            _ => false,
        }
    };
    let mut m = BitMatrix::zeros(rows.len(), cols.len());
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            if incidence(row_role, col_role, i, j) {
                m.set(a, b, true);
            }
        }
    }
    m
}

/// Checks that every plane of fixed `x` carries a copy of the Tanner graph of
/// `B(m2)` and every plane of fixed `y` one of `B(m1)`, under the explicit
/// correspondence given by the coordinates.
pub fn lp_plane_structure(code: &CssCode, m1: &GroupAlgebraMatrix, m2: &GroupAlgebraMatrix) -> PlaneReport {
    let (bm1, bm2) = (m1.binary_map(), m2.binary_map());
    let (r1, c1) = m1.shape();
    let (r2, c2) = m2.shape();
    let mut bad_x = Vec::new();
    for x in 0..r1 + c1 {
        let same = if x < r1 {
            // Q2 rows are checks of m2, X checks its bits.
            induced(code, Role::Q2, Role::X, |c| c[0] == x) == bm2
        } else {
            induced(code, Role::Z, Role::Q1, |c| c[0] == x) == bm2
        };
        // Nothing else may connect inside the plane.
        let stray = induced(code, Role::X, Role::Q1, |c| c[0] == x).is_zero()
            && induced(code, Role::Z, Role::Q2, |c| c[0] == x).is_zero();
        if !(same && stray) {
            bad_x.push(x);
        }
    }
    let mut bad_y = Vec::new();
    for y in 0..c2 + r2 {
        let same = if y < c2 {
            induced(code, Role::X, Role::Q1, |c| c[1] == y) == bm1
        } else {
            induced(code, Role::Q2, Role::Z, |c| c[1] == y) == bm1
        };
        let stray = induced(code, Role::X, Role::Q2, |c| c[1] == y).is_zero()
            && induced(code, Role::Z, Role::Q1, |c| c[1] == y).is_zero();
        if !(same && stray) {
            bad_y.push(y);
        }
    }
    PlaneReport { bad_x, bad_y }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::{lift_from_ring_matrix, lift_regular_action};
    use crate::group_ring::tests::{arb_matrix as arb_ring_matrix, s3, z};
    use proptest::prelude::*;

    pub(crate) fn rep3() -> ClassicalCode {
        ClassicalCode::cyclic_repetition(3)
    }

    pub(crate) fn one_plus_z() -> GroupAlgebraMatrix {
        GroupAlgebraMatrix::parse_grid(&z(3), &[vec!["1+x"]]).unwrap()
    }

    #[test]
    fn hgp_examples() {
        let code = hgp(&rep3(), &rep3());
        assert_eq!(code.n(), 18);
        assert_eq!((code.x_check_count(), code.z_check_count()), (9, 9));
        assert!(code.is_commuting());
        assert_eq!(code.layout().x_checks[0], [0, 0, 0]);

        let bit = ClassicalCode::new(BitMatrix::zeros(0, 1));
        let trivial = hgp(&bit, &bit);
        assert_eq!(trivial.n(), 1);
        assert_eq!((trivial.x_check_count(), trivial.z_check_count()), (0, 0));
    }

    #[test]
    fn hgp_layout_matches_listing() {
        let (m1, n1, m2, n2) = (2, 3, 3, 4);
        let t = CoordinateTable::hgp(m1, n1, m2, n2);
        for (j, c) in t.q2.iter().enumerate() {
            assert_eq!(*c, [j / m2, j % m2 + n2, 0]);
        }
        for (i, c) in t.z_checks.iter().enumerate() {
            assert_eq!(*c, [i / m2 + m1, i % m2 + n2, 0]);
        }
        for (j, c) in t.q1.iter().enumerate() {
            assert_eq!(*c, [j / n2 + m1, j % n2, 0]);
        }
        assert!(t.collision().is_none());
    }

    #[test]
    fn lifted_product_example() {
        let m = one_plus_z();
        let code = lifted_product(&m, &m).unwrap();
        assert_eq!(code.n(), 6);
        assert_eq!(code.h_x().shape(), (3, 6));
        assert!(code.is_commuting());
        let baseline = hgp_of_lifts(&m, &m).unwrap();
        assert_eq!(baseline.n(), 18);
        assert_eq!(code.vertex_count(), 12);
        assert_eq!(baseline.vertex_count(), 36);
    }

    #[test]
    fn group_mismatch_is_an_error() {
        let a = one_plus_z();
        let b = GroupAlgebraMatrix::parse_grid(&z(2), &[vec!["1"]]).unwrap();
        assert!(matches!(lifted_product(&a, &b), Err(ProductError::Group(_))));
    }

    #[test]
    fn trivial_group_lift_is_hgp() {
        let h = ClassicalCode::hamming(3);
        let g = z(1);
        let m = GroupAlgebraMatrix::from_binary(&g, h.parity_check());
        let r = GroupAlgebraMatrix::from_binary(&g, rep3().parity_check());
        let lp = lifted_product(&m, &r).unwrap();
        let base = hgp(&h, &rep3());
        assert_eq!(lp.h_x(), base.h_x());
        assert_eq!(lp.h_z(), base.h_z());
        let flat: Vec<_> = lp.layout().entries().map(|(r, i, c)| (r, i, [c[0], c[1], 0])).collect();
        let hgp_entries: Vec<_> = base.layout().entries().collect();
        assert_eq!(flat, hgp_entries);
    }

    fn six_cycle_and_k4() -> (Graph, Graph, GroupAction, GroupAction) {
        let a = Graph::cycle(6);
        let b = Graph::plain(4, vec![(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)]).unwrap();
        let g = z(3);
        let act_a = GroupAction::from_generators(&g, &[(1, (0..6).map(|v| (v + 2) % 6).collect())], &a).unwrap();
        let act_b = GroupAction::from_generators(&g, &[(1, vec![1, 2, 0, 3])], &b).unwrap();
        (a, b, act_a, act_b)
    }

    #[test]
    fn plain_balanced_product_has_eight_vertices() {
        let (a, b, act_a, act_b) = six_cycle_and_k4();
        let bp = balanced_product_graph(&a, &b, &act_a, &act_b).unwrap();
        assert_eq!(bp.graph.vertex_count(), 8);
        // Every product edge orbit has 3 members.
        assert_eq!(bp.graph.edge_count() * 3, a.cartesian_product(&b).edge_count());
        let distinct: std::collections::BTreeSet<_> = bp.coords.iter().collect();
        assert_eq!(distinct.len(), 8);
        // The fixed vertex of B only uses the identity row.
        assert!(bp.coords.iter().filter(|c| c[1] == 1).all(|c| c[2] == 0));
    }

    #[test]
    fn balanced_product_refuses_bad_actions() {
        let (a, b, act_a, act_b) = six_cycle_and_k4();
        assert!(matches!(
            balanced_product_graph(&b, &a, &act_b, &act_a),
            Err(ProductError::NotFree { element: 1, vertex: 3 })
        ));
        let pair = Graph::plain(2, vec![(0, 1), (0, 1)]).unwrap();
        let swap = GroupAction::from_generators(&z(2), &[(1, vec![1, 0])], &pair).unwrap();
        let trivial = GroupAction::new(&z(2), vec![vec![0], vec![0]], &Graph::plain(1, vec![]).unwrap()).unwrap();
        assert!(matches!(
            balanced_product_graph(&pair, &Graph::plain(1, vec![]).unwrap(), &swap, &trivial),
            Err(ProductError::FixedEdge(_))
        ));
        let _ = (act_a, act_b);

        let m = GroupAlgebraMatrix::parse_grid(&s3(), &[vec!["x"]]).unwrap();
        let lift = lift_from_ring_matrix(&m);
        let perms = (0..6)
            .map(|h| {
                (0..12)
                    .map(|v| (v / 6) * 6 + s3().mul(v % 6, s3().inverse(h)))
                    .collect()
            })
            .collect();
        let action = GroupAction::new(&s3(), perms, &lift.cover.to_graph()).unwrap();
        assert!(matches!(
            balanced_product(&lift.cover, &lift.cover, &action, &action),
            Err(ProductError::NonAbelian(_))
        ));
    }

    #[test]
    fn balanced_product_of_lifts_is_lifted_product() {
        let m = one_plus_z();
        let lift = lift_from_ring_matrix(&m);
        let action = lift_regular_action(m.group(), &lift.cover).unwrap();
        let bp = balanced_product(&lift.cover, &lift.cover, &action, &action).unwrap();
        let lp = lifted_product(&m, &m).unwrap();
        assert_eq!(bp.h_x(), lp.h_x());
        assert_eq!(bp.h_z(), lp.h_z());
        assert_eq!(bp.layout(), lp.layout());
        assert_eq!(bp.vertex_count() * 3, (2 * 3) * (2 * 3));
    }

    #[test]
    fn trivial_group_balanced_product_is_hgp() {
        let h1 = ClassicalCode::hamming(3);
        let t1 = TannerGraph::from_parity_check(h1.parity_check());
        let t2 = TannerGraph::from_parity_check(rep3().parity_check());
        let (a1, a2) = (
            GroupAction::trivial(&t1.to_graph()),
            GroupAction::trivial(&t2.to_graph()),
        );
        let bp = balanced_product(&t1, &t2, &a1, &a2).unwrap();
        let base = hgp(&h1, &rep3());
        assert_eq!(bp.h_x(), base.h_x());
        assert_eq!(bp.h_z(), base.h_z());
    }

    #[test]
    fn lifted_planes_copy_the_factors() {
        let g = z(3);
        let m1 = GroupAlgebraMatrix::parse_grid(&g, &[vec!["1+x", "x^2"], vec!["0", "1"]]).unwrap();
        let m2 = GroupAlgebraMatrix::parse_grid(&g, &[vec!["1", "x", "x^2"]]).unwrap();
        let code = lifted_product(&m1, &m2).unwrap();
        assert!(lp_plane_structure(&code, &m1, &m2).holds());
        // Swapping the factors breaks the correspondence.
        let swapped = lifted_product(&m2, &m1).unwrap();
        assert!(!lp_plane_structure(&swapped, &m1, &m2).holds());
    }

    pub(crate) fn arb_classical(max_m: usize, max_n: usize) -> impl Strategy<Value = ClassicalCode> {
        crate::gf2::tests::arb_matrix(max_m, max_n).prop_map(ClassicalCode::new)
    }

    fn arb_abelian() -> impl Strategy<Value = Arc<FiniteGroup>> {
        prop_oneof![
            (1usize..=5).prop_map(z),
            Just(Arc::new(FiniteGroup::cyclic_product(2, 2).unwrap())),
        ]
    }

    proptest! {
        #[test]
        fn hgp_always_commutes(c1 in arb_classical(6, 8), c2 in arb_classical(6, 8)) {
            let code = hgp(&c1, &c2);
            prop_assert!(code.is_commuting());
            prop_assert_eq!(code.n(), c1.n() * c2.n() + c1.m() * c2.m());
            prop_assert_eq!(code.layout(), &layout_of(&code));
            prop_assert!(code.layout().collision().is_none());
        }

        #[test]
        fn lifted_layouts_are_exact(
            (m1, m2) in arb_abelian().prop_flat_map(|g| (arb_ring_matrix(g.clone(), 3, 3), arb_ring_matrix(g, 3, 3)))
        ) {
            let code = lifted_product(&m1, &m2).unwrap();
            let l = m1.group().order();
            prop_assert!(code.is_commuting());
            prop_assert_eq!(code.vertex_count(), (m1.rows() + m1.cols()) * (m2.rows() + m2.cols()) * l);
            prop_assert!(code.layout().collision().is_none());
            prop_assert!(lp_plane_structure(&code, &m1, &m2).holds());
            let base = hgp_of_lifts(&m1, &m2).unwrap();
            prop_assert_eq!(base.vertex_count(), code.vertex_count() * l);
        }

        #[test]
        fn balanced_products_of_abelian_lifts_commute(
            (m1, m2, extra) in arb_abelian().prop_flat_map(|g| (
                arb_ring_matrix(g.clone(), 2, 3),
                arb_ring_matrix(g.clone(), 2, 3),
                crate::group_ring::tests::arb_element(g),
            ))
        ) {
            // B gets a non-free action: extra check fixed by the whole group,
            // joined to every bit of the first block whose label is in `extra`.
            let la = lift_from_ring_matrix(&m1);
            let lb = lift_from_ring_matrix(&m2);
            let g = m1.group();
            let l = g.order();
            let act_a = lift_regular_action(g, &la.cover).unwrap();
            let extra_check = lb.cover.checks();
            let mut edges = lb.cover.edges().to_vec();
            if !extra.is_zero() && lb.cover.bits() > 0 {
                edges.extend((0..l).map(|q| (extra_check, q)));
            }
            let b = TannerGraph::new(extra_check + 1, lb.cover.bits(), edges).unwrap();
            let perms: Vec<Vec<usize>> = (0..l)
                .map(|h| {
                    let mut p: Vec<usize> = (0..extra_check).map(|v| (v / l) * l + g.mul(h, v % l)).collect();
                    p.push(extra_check);
                    p.extend((0..lb.cover.bits()).map(|v| extra_check + 1 + (v / l) * l + g.mul(h, v % l)));
                    p
                })
                .collect();
            let act_b = GroupAction::new(g, perms, &b.to_graph()).unwrap();
            let bp = balanced_product(&la.cover, &b, &act_a, &act_b).unwrap();
            prop_assert!(bp.is_commuting());
            let total = (la.cover.checks() + la.cover.bits()) * (b.checks() + b.bits());
            prop_assert_eq!(bp.vertex_count() * l, total);
            prop_assert!(bp.layout().collision().is_none());
        }
    }
}
