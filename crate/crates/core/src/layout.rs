//! Rendering of coordinate tables to JSON, SVG, TikZ and DOT.
//!
//! JSON (`qpc-layout/1`) is the normative format; the other three are views of
//! the same data. Qubits are circles, X checks filled squares and Z checks
//! open squares. Overlaid Pauli operators colour their qubits: Z red, Y green,
//! X blue.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::product::{Coord, CoordinateTable, CssCode, LayoutKind, Role};

pub const SCHEMA_VERSION: &str = "qpc-layout/1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("unknown output format {0:?} (expected svg, tikz, dot or json)")]
    UnknownFormat(String),
    #[error("3D layouts need an oblique projection")]
    MissingProjection,
    #[error("2D layouts cannot be projected")]
    UnexpectedProjection,
    #[error("overlay refers to qubit {index} but the code has {n} qubits")]
    OverlayOutOfRange { index: usize, n: usize },
    #[error("edge refers to {role} {index}, which is not in the layout")]
    EdgeOutOfRange { role: Role, index: usize },
    #[error("unsupported layout version {0:?}")]
    Version(String),
    #[error("vertex {role} {index} is out of order or duplicated")]
    VertexOrder { role: Role, index: usize },
    #[error("coordinate of {role} {index} has {found} components, expected {expected}")]
    CoordArity {
        role: Role,
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("invalid layout JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Svg,
    Tikz,
    Dot,
    Json,
}

impl FromStr for Format {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(Format::Svg),
            "tikz" | "tex" => Ok(Format::Tikz),
            "dot" => Ok(Format::Dot),
            "json" => Ok(Format::Json),
            _ => Err(LayoutError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    None,
    /// `(x, y, z) ↦ (x + shear·y, z + y_scale·y)`.
    Oblique {
        shear: f64,
        y_scale: f64,
    },
}

impl Projection {
    pub fn oblique() -> Self {
        Projection::Oblique {
            shear: 0.5,
            y_scale: 0.35,
        }
    }

    pub fn apply(&self, c: Coord) -> (f64, f64) {
        let [x, y, z] = c.map(|v| v as f64);
        match *self {
            Projection::None => (x, y),
            Projection::Oblique { shear, y_scale } => (x + shear * y, z + y_scale * y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSpec {
    pub projection: Projection,
    /// Pixels (SVG) or points (TikZ) per grid step.
    pub scale: f64,
    pub edges: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            projection: Projection::None,
            scale: 12.0,
            edges: false,
        }
    }
}

impl RenderSpec {
    /// Default spec for a table: no projection in 2D, oblique in 3D.
    pub fn for_kind(kind: LayoutKind) -> Self {
        let projection = match kind {
            LayoutKind::Flat => Projection::None,
            LayoutKind::Layered => Projection::oblique(),
        };
        Self {
            projection,
            ..Self::default()
        }
    }

    fn validate(&self, kind: LayoutKind) -> Result<(), LayoutError> {
        match (kind, self.projection) {
            (LayoutKind::Layered, Projection::None) => Err(LayoutError::MissingProjection),
            (LayoutKind::Flat, Projection::Oblique { .. }) => Err(LayoutError::UnexpectedProjection),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn color(self) -> &'static str {
        match self {
            Pauli::X => "blue",
            Pauli::Y => "green",
            Pauli::Z => "red",
        }
    }
}

/// Pauli operator drawn on top of the layout, keyed by global qubit index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorOverlay {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub paulis: BTreeMap<usize, Pauli>,
}

impl OperatorOverlay {
    pub fn from_support(name: impl Into<String>, pauli: Pauli, support: &[usize]) -> Self {
        Self {
            name: Some(name.into()),
            paulis: support.iter().map(|&q| (q, pauli)).collect(),
        }
    }
}

pub type VertexRef = (Role, usize);

/// Coordinate table plus the check/qubit edges to draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Figure {
    pub table: CoordinateTable,
    pub edges: Vec<(VertexRef, VertexRef)>,
}

impl Figure {
    pub fn new(table: CoordinateTable) -> Self {
        Self {
            table,
            edges: Vec::new(),
        }
    }

    /// Figure of a code; `with_edges` adds one edge per non-zero check entry.
    pub fn from_code(code: &CssCode, with_edges: bool) -> Self {
        let table = code.layout().clone();
        let mut edges = Vec::new();
        if with_edges {
            let q1 = table.q1.len();
            let qubit = |j: usize| if j < q1 { (Role::Q1, j) } else { (Role::Q2, j - q1) };
            for (r, c) in code.h_x().nonzeros() {
                edges.push(((Role::X, r), qubit(c)));
            }
            for (r, c) in code.h_z().nonzeros() {
                edges.push(((Role::Z, r), qubit(c)));
            }
        }
        Self { table, edges }
    }

    fn coord(&self, (role, index): VertexRef) -> Result<Coord, LayoutError> {
        self.table
            .family(role)
            .get(index)
            .copied()
            .ok_or(LayoutError::EdgeOutOfRange { role, index })
    }
}

#[derive(Serialize, Deserialize)]
struct JsonVertex {
    role: Role,
    index: usize,
    coord: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct JsonLayout {
    version: String,
    kind: LayoutKind,
    vertices: Vec<JsonVertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(VertexRef, VertexRef)>>,
    #[serde(default)]
    overlays: Vec<OperatorOverlay>,
}

fn check_overlays(table: &CoordinateTable, overlays: &[OperatorOverlay]) -> Result<(), LayoutError> {
    let n = table.qubit_count();
    for o in overlays {
        if let Some((&index, _)) = o.paulis.range(n..).next() {
            return Err(LayoutError::OverlayOutOfRange { index, n });
        }
    }
    Ok(())
}

/// Renders a figure. Output is deterministic for identical inputs.
pub fn emit(
    figure: &Figure,
    spec: &RenderSpec,
    overlays: &[OperatorOverlay],
    format: Format,
) -> Result<String, LayoutError> {
    check_overlays(&figure.table, overlays)?;
    for &(a, b) in &figure.edges {
        figure.coord(a)?;
        figure.coord(b)?;
    }
    match format {
        Format::Json => Ok(emit_json(figure, overlays)),
        _ => {
            spec.validate(figure.table.kind)?;
            let scene = Scene::build(figure, spec, overlays);
            Ok(match format {
                Format::Svg => scene.svg(),
                Format::Tikz => scene.tikz(),
                Format::Dot => scene.dot(),
                Format::Json => unreachable!(),
            })
        }
    }
}

fn emit_json(figure: &Figure, overlays: &[OperatorOverlay]) -> String {
    let dims = figure.table.kind.dims();
    let doc = JsonLayout {
        version: SCHEMA_VERSION.to_string(),
        kind: figure.table.kind,
        vertices: figure
            .table
            .entries()
            .map(|(role, index, c)| JsonVertex {
                role,
                index,
                coord: c[..dims].to_vec(),
            })
            .collect(),
        edges: (!figure.edges.is_empty()).then(|| figure.edges.clone()),
        overlays: overlays.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("layout serialises");
    s.push('\n');
    s
}

/// Parses a `qpc-layout/1` document. Vertices must appear in the order
/// [`emit`] writes them.
pub fn parse_json(text: &str) -> Result<(Figure, Vec<OperatorOverlay>), LayoutError> {
    let doc: JsonLayout = serde_json::from_str(text).map_err(|e| LayoutError::Json(e.to_string()))?;
    if doc.version != SCHEMA_VERSION {
        return Err(LayoutError::Version(doc.version));
    }
    let dims = doc.kind.dims();
    let mut table = CoordinateTable::empty(doc.kind);
    let mut last_role = Role::X;
    for v in doc.vertices {
        if v.coord.len() != dims {
            return Err(LayoutError::CoordArity {
                role: v.role,
                index: v.index,
                found: v.coord.len(),
                expected: dims,
            });
        }
        let family = match v.role {
            Role::X => &mut table.x_checks,
            Role::Z => &mut table.z_checks,
            Role::Q1 => &mut table.q1,
            Role::Q2 => &mut table.q2,
        };
        if v.role < last_role || v.index != family.len() {
            return Err(LayoutError::VertexOrder {
                role: v.role,
                index: v.index,
            });
        }
        last_role = v.role;
        let mut c = [0; 3];
        c[..dims].copy_from_slice(&v.coord);
        family.push(c);
    }
    let figure = Figure {
        table,
        edges: doc.edges.unwrap_or_default(),
    };
    for &(a, b) in &figure.edges {
        figure.coord(a)?;
        figure.coord(b)?;
    }
    check_overlays(&figure.table, &doc.overlays)?;
    Ok((figure, doc.overlays))
}

struct Glyph {
    role: Role,
    index: usize,
    at: (f64, f64),
    pauli: Option<Pauli>,
}

/// Projected positions in grid units with `y` pointing up.
struct Scene {
    glyphs: Vec<Glyph>,
    lines: Vec<((f64, f64), (f64, f64))>,
    edges: Vec<(VertexRef, VertexRef)>,
    min: (f64, f64),
    max: (f64, f64),
    scale: f64,
}

fn node_name((role, index): VertexRef) -> String {
    format!("{role}_{index}")
}

impl Scene {
    fn build(figure: &Figure, spec: &RenderSpec, overlays: &[OperatorOverlay]) -> Self {
        let table = &figure.table;
        let mut paulis: BTreeMap<usize, Pauli> = BTreeMap::new();
        for o in overlays {
            for (&q, &p) in &o.paulis {
                // Different letters on one qubit combine to Y.
                let merged = match paulis.get(&q) {
                    Some(&a) if a != p => Pauli::Y,
                    _ => p,
                };
                paulis.insert(q, merged);
            }
        }
        let glyphs: Vec<Glyph> = table
            .entries()
            .map(|(role, index, c)| Glyph {
                role,
                index,
                at: spec.projection.apply(c),
                pauli: table.qubit_index(role, index).and_then(|q| paulis.get(&q).copied()),
            })
            .collect();
        let lines = if spec.edges {
            figure
                .edges
                .iter()
                .map(|&(a, b)| {
                    let p = |v| spec.projection.apply(figure.coord(v).expect("edges validated"));
                    (p(a), p(b))
                })
                .collect()
        } else {
            Vec::new()
        };
        let edges = if spec.edges { figure.edges.clone() } else { Vec::new() };
        let mut min = (0.0f64, 0.0f64);
        let mut max = (0.0f64, 0.0f64);
        for g in &glyphs {
            min = (min.0.min(g.at.0), min.1.min(g.at.1));
            max = (max.0.max(g.at.0), max.1.max(g.at.1));
        }
        Self {
            glyphs,
            lines,
            edges,
            min,
            max,
            scale: spec.scale,
        }
    }

    /// SVG pixel position with a one-step margin and `y` flipped.
    fn px(&self, (x, y): (f64, f64)) -> (f64, f64) {
        ((x - self.min.0 + 1.0) * self.scale, (self.max.1 - y + 1.0) * self.scale)
    }

    fn svg(&self) -> String {
        let w = (self.max.0 - self.min.0 + 2.0) * self.scale;
        let h = (self.max.1 - self.min.1 + 2.0) * self.scale;
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
        )
        .unwrap();
        writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#).unwrap();
        for &(a, b) in &self.lines {
            let ((x1, y1), (x2, y2)) = (self.px(a), self.px(b));
            writeln!(
                out,
                r#"  <line class="edge" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="gray" stroke-width="0.5"/>"#
            )
            .unwrap();
        }
        let half = 0.3 * self.scale;
        for g in &self.glyphs {
            let (x, y) = self.px(g.at);
            let id = node_name((g.role, g.index));
            match g.role {
                Role::X | Role::Z => {
                    let (class, fill) = if g.role == Role::X {
                        ("x-check", "black")
                    } else {
                        ("z-check", "white")
                    };
                    writeln!(
                        out,
                        r#"  <rect id="{id}" class="{class}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="black"/>"#,
                        x - half,
                        y - half,
                        2.0 * half,
                        2.0 * half
                    )
                    .unwrap();
                }
                Role::Q1 | Role::Q2 => {
                    let fill = g.pauli.map_or("white", Pauli::color);
                    writeln!(
                        out,
                        r#"  <circle id="{id}" class="qubit" cx="{x:.2}" cy="{y:.2}" r="{half:.2}" fill="{fill}" stroke="black"/>"#
                    )
                    .unwrap();
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }

    fn tikz(&self) -> String {
        let mut out = String::new();
        out.push_str("\\documentclass[tikz]{standalone}\n\\begin{document}\n");
        writeln!(out, "\\begin{{tikzpicture}}[x={0}pt, y={0}pt]", self.scale).unwrap();
        for &((x1, y1), (x2, y2)) in &self.lines {
            writeln!(out, "  \\draw[gray, very thin] ({x1:.2},{y1:.2}) -- ({x2:.2},{y2:.2});").unwrap();
        }
        for g in &self.glyphs {
            let (x, y) = g.at;
            match g.role {
                Role::X => writeln!(
                    out,
                    "  \\filldraw[black] ({:.2},{:.2}) rectangle ({:.2},{:.2}); % {}",
                    x - 0.3,
                    y - 0.3,
                    x + 0.3,
                    y + 0.3,
                    node_name((g.role, g.index))
                ),
                Role::Z => writeln!(
                    out,
                    "  \\filldraw[draw=black, fill=white] ({:.2},{:.2}) rectangle ({:.2},{:.2}); % {}",
                    x - 0.3,
                    y - 0.3,
                    x + 0.3,
                    y + 0.3,
                    node_name((g.role, g.index))
                ),
                Role::Q1 | Role::Q2 => writeln!(
                    out,
                    "  \\filldraw[draw=black, fill={}] ({x:.2},{y:.2}) circle (0.3); % {}",
                    g.pauli.map_or("white", Pauli::color),
                    node_name((g.role, g.index))
                ),
            }
            .unwrap();
        }
        out.push_str("\\end{tikzpicture}\n\\end{document}\n");
        out
    }

    fn dot(&self) -> String {
        let mut out = String::from("graph layout {\n  node [label=\"\", width=0.2, height=0.2, fixedsize=true];\n");
        for g in &self.glyphs {
            let (x, y) = g.at;
            let attrs = match g.role {
                Role::X => "shape=box, style=filled, fillcolor=black".to_string(),
                Role::Z => "shape=box, style=filled, fillcolor=white".to_string(),
                Role::Q1 | Role::Q2 => {
                    format!(
                        "shape=circle, style=filled, fillcolor={}",
                        g.pauli.map_or("white", Pauli::color)
                    )
                }
            };
            writeln!(
                out,
                "  {} [{attrs}, pos=\"{x:.2},{y:.2}!\"];",
                node_name((g.role, g.index))
            )
            .unwrap();
        }
        for &(a, b) in &self.edges {
            writeln!(out, "  {} -- {};", node_name(a), node_name(b)).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::css::hgp_canonical_logicals;
    use crate::product::tests::{one_plus_z, rep3};
    use crate::product::{hgp, lifted_product};
    use proptest::prelude::*;

    fn toric_figure() -> Figure {
        Figure::from_code(&hgp(&rep3(), &rep3()), true)
    }

    #[test]
    fn empty_table_is_a_valid_document() {
        let fig = Figure::new(CoordinateTable::empty(LayoutKind::Flat));
        let spec = RenderSpec::default();
        let svg = emit(&fig, &spec, &[], Format::Svg).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<circle"));
        let json = emit(&fig, &spec, &[], Format::Json).unwrap();
        assert_eq!(parse_json(&json).unwrap().0, fig);
    }

    #[test]
    fn toric_json_lists_every_vertex() {
        let fig = toric_figure();
        let json = emit(&fig, &RenderSpec::default(), &[], Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let vertices = v["vertices"].as_array().unwrap();
        let count = |r: &str| vertices.iter().filter(|x| x["role"] == r).count();
        assert_eq!((count("Q1") + count("Q2"), count("X"), count("Z")), (18, 9, 9));
        assert_eq!(v["version"], SCHEMA_VERSION);
        assert_eq!(v["kind"], "2d");
        let (parsed, _) = parse_json(&json).unwrap();
        assert_eq!(parsed.table, CoordinateTable::hgp(3, 3, 3, 3));
    }

    #[test]
    fn overlay_paints_one_row_red() {
        let code = hgp(&rep3(), &rep3());
        let z = &hgp_canonical_logicals(&rep3(), &rep3()).unwrap().z_logicals[0];
        let overlay = OperatorOverlay::from_support("Z0", Pauli::Z, &z.support());
        let fig = Figure::from_code(&code, false);
        let svg = emit(&fig, &RenderSpec::default(), &[overlay], Format::Svg).unwrap();
        let red: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains("<circle") && l.contains("fill=\"red\""))
            .collect();
        assert_eq!(red.len(), 3);
        let cy: std::collections::BTreeSet<&str> = red
            .iter()
            .map(|l| l.split("cy=\"").nth(1).unwrap().split('"').next().unwrap())
            .collect();
        assert_eq!(cy.len(), 1);
    }

    #[test]
    fn glyph_counts_match_code() {
        let fig = toric_figure();
        let spec = RenderSpec {
            edges: true,
            ..RenderSpec::default()
        };
        let svg = emit(&fig, &spec, &[], Format::Svg).unwrap();
        assert_eq!(svg.matches("class=\"qubit\"").count(), 18);
        assert_eq!(svg.matches("class=\"x-check\"").count(), 9);
        assert_eq!(svg.matches("class=\"z-check\"").count(), 9);
        assert_eq!(svg.matches("class=\"edge\"").count(), fig.edges.len());
        let tikz = emit(&fig, &spec, &[], Format::Tikz).unwrap();
        assert_eq!(tikz.matches("circle (0.3)").count(), 18);
        let dot = emit(&fig, &spec, &[], Format::Dot).unwrap();
        assert_eq!(dot.matches(" -- ").count(), fig.edges.len());
    }

    #[test]
    fn projection_rules() {
        let code = lifted_product(&one_plus_z(), &one_plus_z()).unwrap();
        let fig = Figure::from_code(&code, false);
        assert_eq!(
            emit(&fig, &RenderSpec::default(), &[], Format::Svg),
            Err(LayoutError::MissingProjection)
        );
        let spec = RenderSpec::for_kind(LayoutKind::Layered);
        assert!(emit(&fig, &spec, &[], Format::Svg).is_ok());
        assert_eq!(
            emit(&toric_figure(), &spec, &[], Format::Tikz),
            Err(LayoutError::UnexpectedProjection)
        );
        let p = Projection::Oblique {
            shear: 0.5,
            y_scale: 0.25,
        };
        assert_eq!(p.apply([2, 4, 1]), (4.0, 2.0));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!("png".parse::<Format>(), Err(LayoutError::UnknownFormat(_))));
        let overlay = OperatorOverlay::from_support("bad", Pauli::X, &[18]);
        assert_eq!(
            emit(&toric_figure(), &RenderSpec::default(), &[overlay], Format::Json),
            Err(LayoutError::OverlayOutOfRange { index: 18, n: 18 })
        );
        assert!(matches!(parse_json("{}"), Err(LayoutError::Json(_))));
        let wrong = r#"{"version":"qpc-layout/0","kind":"2d","vertices":[]}"#;
        assert!(matches!(parse_json(wrong), Err(LayoutError::Version(_))));
    }

    #[test]
    fn no_two_glyphs_share_a_position() {
        let code = lifted_product(&one_plus_z(), &one_plus_z()).unwrap();
        let spec = RenderSpec::for_kind(LayoutKind::Layered);
        let svg = emit(&Figure::from_code(&code, false), &spec, &[], Format::Svg).unwrap();
        let mut centres = std::collections::BTreeSet::new();
        for line in svg.lines().filter(|l| l.contains("id=")) {
            let attr = |name: &str| {
                line.split(&format!("{name}=\""))
                    .nth(1)
                    .map(|s| s.split('"').next().unwrap().to_string())
            };
            let key = (attr("cx").or(attr("x")), attr("cy").or(attr("y")));
            assert!(centres.insert(key), "{line}");
        }
    }

    proptest! {
        #[test]
        fn json_round_trip_is_byte_identical(
            c1 in crate::product::tests::arb_classical(4, 5),
            c2 in crate::product::tests::arb_classical(4, 5),
            edges in any::<bool>(),
            support in proptest::collection::vec(0usize..64, 0..4),
        ) {
            let code = hgp(&c1, &c2);
            let fig = Figure::from_code(&code, edges);
            let support: Vec<usize> = support.into_iter().filter(|&q| q < code.n()).collect();
            let overlays = vec![OperatorOverlay::from_support("op", Pauli::X, &support)];
            let first = emit(&fig, &RenderSpec::default(), &overlays, Format::Json).unwrap();
            let (parsed, parsed_overlays) = parse_json(&first).unwrap();
            prop_assert_eq!(&parsed, &fig);
            let second = emit(&parsed, &RenderSpec::default(), &parsed_overlays, Format::Json).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
