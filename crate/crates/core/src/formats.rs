//! Text formats for matrices, ring matrices, graphs, actions and vertex maps.
//!
//! Blank lines and lines starting with `#` are skipped everywhere. Errors
//! carry the 1-based line number they were found on (0 for whole-file
//! problems such as a missing header).

use std::fmt::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::gf2::BitMatrix;
use crate::graph::{ActionError, Graph, GroupAction, TannerGraph};
use crate::group_ring::{FiniteGroup, GroupAlgebraElement, GroupAlgebraMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(line: usize, token: &str, what: &str) -> Result<usize, ParseError> {
    token.parse().map_err(|_| ParseError {
        line,
        message: format!("expected {what}, found {token:?}"),
    })
}

/// Plain matrix: header `m n`, then `m` rows of `n` binary digits, either
/// whitespace-separated or packed.
pub fn parse_plain_matrix(text: &str) -> Result<BitMatrix, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return err(0, "missing `m n` header");
    };
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return err(hl, format!("expected `m n` header, found {header:?}"));
    }
    let m = parse_usize(hl, dims[0], "row count")?;
    let n = parse_usize(hl, dims[1], "column count")?;
    let mut h = BitMatrix::zeros(m, n);
    // Rows of an m×0 matrix are blank lines, which are skipped.
    let mut r = if n == 0 { m } else { 0 };
    for (ln, line) in lines {
        if r == m {
            return err(ln, format!("more than {m} rows"));
        }
        let digits: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
        if digits.len() != n {
            return err(ln, format!("row has {} entries, expected {n}", digits.len()));
        }
        for (c, d) in digits.into_iter().enumerate() {
            match d {
                '0' => {}
                '1' => h.set(r, c, true),
                other => return err(ln, format!("invalid entry {other:?}")),
            }
        }
        r += 1;
    }
    if r != m {
        return err(0, format!("found {r} rows, header says {m}"));
    }
    Ok(h)
}

pub fn write_plain_matrix(h: &BitMatrix) -> String {
    let mut out = format!("{} {}\n", h.rows(), h.cols());
    for r in 0..h.rows() {
        let row: Vec<&str> = (0..h.cols()).map(|c| if h.get(r, c) { "1" } else { "0" }).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// alist: `n m`, maximum column and row weights, the weight lists, then
/// 1-based column supports followed by row supports (zero padding allowed).
pub fn parse_alist(text: &str) -> Result<BitMatrix, ParseError> {
    let lines: Vec<(usize, Vec<&str>)> = content_lines(text)
        .map(|(n, l)| (n, l.split_whitespace().collect()))
        .collect();
    let numbers = |i: usize| -> Result<(usize, Vec<usize>), ParseError> {
        let Some((ln, tokens)) = lines.get(i) else {
            return err(0, "alist ended early");
        };
        let values = tokens
            .iter()
            .map(|t| parse_usize(*ln, t, "integer"))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((*ln, values))
    };
    let (ln, dims) = numbers(0)?;
    let [n, m] = dims[..] else {
        return err(ln, "expected `n m`");
    };
    let (ln, maxes) = numbers(1)?;
    if maxes.len() != 2 {
        return err(ln, "expected maximum column and row weights");
    }
    let mut next = 2;
    let mut weights = |count: usize, what: &str| -> Result<Vec<usize>, ParseError> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let (ln, w) = numbers(next)?;
        next += 1;
        if w.len() != count {
            return err(ln, format!("expected {count} {what} weights"));
        }
        Ok(w)
    };
    let col_weights = weights(n, "column")?;
    let row_weights = weights(m, "row")?;
    let mut h = BitMatrix::zeros(m, n);
    for c in 0..n {
        let (ln, entries) = numbers(next + c)?;
        let support: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
        if support.len() != col_weights[c] {
            return err(
                ln,
                format!(
                    "column {} has weight {}, expected {}",
                    c + 1,
                    support.len(),
                    col_weights[c]
                ),
            );
        }
        for r in support {
            if r > m {
                return err(ln, format!("row index {r} exceeds {m}"));
            }
            h.set(r - 1, c, true);
        }
    }
    for r in 0..m {
        let (ln, entries) = numbers(next + n + r)?;
        let support: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
        if support.len() != row_weights[r] {
            return err(
                ln,
                format!(
                    "row {} has weight {}, expected {}",
                    r + 1,
                    support.len(),
                    row_weights[r]
                ),
            );
        }
        for c in support {
            if c > n || !h.get(r, c - 1) {
                return err(
                    ln,
                    format!("row {} lists column {c}, inconsistent with the column lists", r + 1),
                );
            }
        }
    }
    if let Some((ln, _)) = lines.get(next + n + m) {
        return err(*ln, "unexpected trailing data");
    }
    Ok(h)
}

pub fn write_alist(h: &BitMatrix) -> String {
    let (m, n) = h.shape();
    let t = h.transpose();
    let col_supports: Vec<Vec<usize>> = (0..n).map(|c| t.row_support(c)).collect();
    let row_supports: Vec<Vec<usize>> = (0..m).map(|r| h.row_support(r)).collect();
    let max_col = col_supports.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = row_supports.iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    writeln!(out, "{n} {m}").unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    for supports in [&col_supports, &row_supports] {
        if !supports.is_empty() {
            writeln!(out, "{}", join(&supports.iter().map(Vec::len).collect::<Vec<_>>())).unwrap();
        }
    }
    for s in col_supports.iter().chain(&row_supports) {
        if s.is_empty() {
            out.push_str("0\n");
        } else {
            let one_based: Vec<usize> = s.iter().map(|x| x + 1).collect();
            writeln!(out, "{}", join(&one_based)).unwrap();
        }
    }
    out
}

/// Reads a Cayley table: one row of whitespace-separated element indices per line.
pub fn parse_group_table(name: &str, text: &str) -> Result<FiniteGroup, ParseError> {
    let mut rows = Vec::new();
    let mut first_line = 0;
    for (ln, line) in content_lines(text) {
        if rows.is_empty() {
            first_line = ln;
        }
        let row = line
            .split_whitespace()
            .map(|t| parse_usize(ln, t, "element index"))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    FiniteGroup::from_table(name, rows).map_err(|e| ParseError {
        line: first_line,
        message: e.to_string(),
    })
}

/// Resolves a group spec: a built-in name (`Z3`, `Z2xZ2`, `D3`, ...) or
/// `table:<path>` relative to `base_dir`.
pub fn resolve_group(spec: &str, base_dir: &Path, line: usize) -> Result<Arc<FiniteGroup>, ParseError> {
    if let Some(path) = spec.strip_prefix("table:") {
        let full = base_dir.join(path);
        let text = std::fs::read_to_string(&full).map_err(|e| ParseError {
            line,
            message: format!("cannot read group table {}: {e}", full.display()),
        })?;
        let name = Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or(path);
        return parse_group_table(name, &text).map(Arc::new).map_err(|e| ParseError {
            line,
            message: format!("{}: {e}", full.display()),
        });
    }
    FiniteGroup::from_spec(spec).map(Arc::new).map_err(|e| ParseError {
        line,
        message: e.to_string(),
    })
}

/// Ring matrix: header `m n group=<spec>`, then `m` lines of `n`
/// comma-separated polynomials such as `1+x^2`.
pub fn parse_ring_matrix(text: &str, base_dir: &Path) -> Result<GroupAlgebraMatrix, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return err(0, "missing `m n group=<spec>` header");
    };
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let [m, n, group] = tokens[..] else {
        return err(hl, format!("expected `m n group=<spec>`, found {header:?}"));
    };
    let m = parse_usize(hl, m, "row count")?;
    let n = parse_usize(hl, n, "column count")?;
    let Some(spec) = group.strip_prefix("group=") else {
        return err(hl, format!("expected `group=<spec>`, found {group:?}"));
    };
    let group = resolve_group(spec, base_dir, hl)?;
    let mut entries = Vec::with_capacity(m * n);
    let mut rows = 0;
    for (ln, line) in lines {
        if rows == m {
            return err(ln, format!("more than {m} rows"));
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != n {
            return err(ln, format!("row has {} entries, expected {n}", cells.len()));
        }
        for cell in cells {
            let e = GroupAlgebraElement::parse(&group, cell).map_err(|e| ParseError {
                line: ln,
                message: e.to_string(),
            })?;
            entries.push(e);
        }
        rows += 1;
    }
    if rows != m {
        return err(0, format!("found {rows} rows, header says {m}"));
    }
    Ok(GroupAlgebraMatrix::from_entries(&group, m, n, entries).expect("entries parsed over one group"))
}

pub fn write_ring_matrix(m: &GroupAlgebraMatrix) -> String {
    let mut out = format!("{} {} group={}\n", m.rows(), m.cols(), m.group().name());
    for r in 0..m.rows() {
        let cells: Vec<String> = (0..m.cols()).map(|c| m.get(r, c).to_string()).collect();
        out.push_str(&cells.join(", "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphFile {
    Tanner(TannerGraph),
    Plain(Graph),
}

impl GraphFile {
    pub fn to_graph(&self) -> Graph {
        match self {
            GraphFile::Tanner(t) => t.to_graph(),
            GraphFile::Plain(g) => g.clone(),
        }
    }
}

fn indexed(line: usize, token: &str, prefix: char, limit: usize) -> Result<usize, ParseError> {
    let Some(rest) = token.strip_prefix(prefix) else {
        return err(line, format!("expected `{prefix}<index>`, found {token:?}"));
    };
    let i = parse_usize(line, rest, "vertex index")?;
    if i >= limit {
        return err(line, format!("{token} out of range (limit {limit})"));
    }
    Ok(i)
}

/// Graph file: `checks <m> bits <n>` followed by `c<i> b<j>` edges, or
/// `vertices <v>` followed by `v<i> v<j>`. Repeated lines add parallel edges.
pub fn parse_graph(text: &str) -> Result<GraphFile, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return err(0, "missing graph header");
    };
    let tokens: Vec<&str> = header.split_whitespace().collect();
    match tokens[..] {
        ["checks", m, "bits", n] => {
            let m = parse_usize(hl, m, "check count")?;
            let n = parse_usize(hl, n, "bit count")?;
            let mut edges = Vec::new();
            for (ln, line) in lines {
                let t: Vec<&str> = line.split_whitespace().collect();
                let [c, b] = t[..] else {
                    return err(ln, format!("expected `c<i> b<j>`, found {line:?}"));
                };
                edges.push((indexed(ln, c, 'c', m)?, indexed(ln, b, 'b', n)?));
            }
            Ok(GraphFile::Tanner(TannerGraph::new(m, n, edges).expect("edges checked")))
        }
        ["vertices", v] => {
            let v = parse_usize(hl, v, "vertex count")?;
            let mut edges = Vec::new();
            for (ln, line) in lines {
                let t: Vec<&str> = line.split_whitespace().collect();
                let [a, b] = t[..] else {
                    return err(ln, format!("expected `v<i> v<j>`, found {line:?}"));
                };
                edges.push((indexed(ln, a, 'v', v)?, indexed(ln, b, 'v', v)?));
            }
            Ok(GraphFile::Plain(Graph::plain(v, edges).expect("edges checked")))
        }
        _ => err(
            hl,
            format!("expected `checks <m> bits <n>` or `vertices <v>`, found {header:?}"),
        ),
    }
}

pub fn write_graph(g: &GraphFile) -> String {
    let mut out = String::new();
    match g {
        GraphFile::Tanner(t) => {
            writeln!(out, "checks {} bits {}", t.checks(), t.bits()).unwrap();
            for &(c, b) in t.edges() {
                writeln!(out, "c{c} b{b}").unwrap();
            }
        }
        GraphFile::Plain(p) => {
            writeln!(out, "vertices {}", p.vertex_count()).unwrap();
            for &(a, b) in p.edges() {
                writeln!(out, "v{a} v{b}").unwrap();
            }
        }
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionGenerator {
    #[serde(default)]
    element: Option<String>,
    #[serde(default)]
    check_perm: Option<Vec<usize>>,
    #[serde(default)]
    bit_perm: Option<Vec<usize>>,
    #[serde(default)]
    vertex_perm: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionFile {
    group: String,
    generators: Vec<ActionGenerator>,
}

fn json_error(e: serde_json::Error) -> ParseError {
    ParseError {
        line: e.line(),
        message: e.to_string(),
    }
}

/// Group and generator permutations read from an action file, before the
/// action is extended to the whole group and validated.
#[derive(Debug, Clone)]
pub struct ActionSpec {
    pub group: Arc<FiniteGroup>,
    pub generators: Vec<(usize, Vec<usize>)>,
}

impl ActionSpec {
    pub fn build(&self, graph: &GraphFile) -> Result<GroupAction, ActionError> {
        GroupAction::from_generators(&self.group, &self.generators, &graph.to_graph())
    }
}

/// Action file: `{"group": spec, "generators": [{"element", "check_perm",
/// "bit_perm"}]}` (or `"vertex_perm"` for plain graphs). Without `element`
/// the i-th entry acts as the group's i-th named generator.
pub fn parse_action(text: &str, graph: &GraphFile, base_dir: &Path) -> Result<GroupAction, ParseError> {
    parse_action_spec(text, graph, base_dir)?
        .build(graph)
        .map_err(|e| ParseError {
            line: 0,
            message: e.to_string(),
        })
}

/// Reads an action file without validating the action itself.
pub fn parse_action_spec(text: &str, graph: &GraphFile, base_dir: &Path) -> Result<ActionSpec, ParseError> {
    let file: ActionFile = serde_json::from_str(text).map_err(json_error)?;
    let group = resolve_group(&file.group, base_dir, 0)?;
    let mut gens = Vec::new();
    for (i, g) in file.generators.iter().enumerate() {
        let element = match &g.element {
            Some(label) => group.parse_term(label).map_err(|e| ParseError {
                line: 0,
                message: format!("generator {i}: {e}"),
            })?,
            None => match group.generators().get(i) {
                Some(&(_, e)) => e,
                None => return err(0, format!("generator {i} needs an explicit element")),
            },
        };
        let perm = match (graph, g) {
            (
                GraphFile::Tanner(t),
                ActionGenerator {
                    check_perm: Some(cp),
                    bit_perm: Some(bp),
                    vertex_perm: None,
                    ..
                },
            ) => {
                if cp.len() != t.checks() || bp.len() != t.bits() {
                    return err(0, format!("generator {i}: permutation lengths do not match the graph"));
                }
                cp.iter().copied().chain(bp.iter().map(|&b| b + t.checks())).collect()
            }
            (
                GraphFile::Plain(_),
                ActionGenerator {
                    vertex_perm: Some(vp),
                    check_perm: None,
                    bit_perm: None,
                    ..
                },
            ) => vp.clone(),
            (GraphFile::Tanner(_), _) => return err(0, format!("generator {i}: expected check_perm and bit_perm")),
            (GraphFile::Plain(_), _) => return err(0, format!("generator {i}: expected vertex_perm")),
        };
        gens.push((element, perm));
    }
    Ok(ActionSpec {
        group,
        generators: gens,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    #[serde(default)]
    checks: Option<Vec<usize>>,
    #[serde(default)]
    bits: Option<Vec<usize>>,
    #[serde(default)]
    vertices: Option<Vec<usize>>,
}

/// Vertex map file for covering checks: `{"checks": [...], "bits": [...]}`
/// for Tanner graphs or `{"vertices": [...]}` for plain graphs. Indices are
/// per kind; the result uses the combined vertex numbering of [`Graph`].
pub fn parse_vertex_map(text: &str, cover: &GraphFile, base: &GraphFile) -> Result<Vec<usize>, ParseError> {
    let file: MapFile = serde_json::from_str(text).map_err(json_error)?;
    match (cover, base, file) {
        (
            GraphFile::Tanner(_),
            GraphFile::Tanner(b),
            MapFile {
                checks: Some(c),
                bits: Some(bits),
                vertices: None,
            },
        ) => Ok(c.into_iter().chain(bits.into_iter().map(|x| x + b.checks())).collect()),
        (
            GraphFile::Plain(_),
            GraphFile::Plain(_),
            MapFile {
                vertices: Some(v),
                checks: None,
                bits: None,
            },
        ) => Ok(v),
        (GraphFile::Tanner(_), GraphFile::Tanner(_), _) => err(0, "expected `checks` and `bits` arrays"),
        (GraphFile::Plain(_), GraphFile::Plain(_), _) => err(0, "expected a `vertices` array"),
        _ => err(0, "cover and base must both be Tanner graphs or both plain graphs"),
    }
}
