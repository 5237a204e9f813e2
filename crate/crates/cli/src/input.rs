use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qpc_core::classical::ClassicalCode;
use qpc_core::css::{CssError, DEFAULT_BUDGET};
use qpc_core::formats::{self, ActionSpec, GraphFile, ParseError};
use qpc_core::gf2::BitMatrix;
use qpc_core::graph::GroupAction;
use qpc_core::group_ring::{FiniteGroup, GroupAlgebraMatrix};
use qpc_core::product::ProductError;

pub const EXIT_PARSE: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ProductError> for Failure {
    fn from(e: ProductError) -> Self {
        Failure::precondition(e.to_string())
    }
}

impl From<CssError> for Failure {
    fn from(e: CssError) -> Self {
        match e {
            CssError::BudgetExceeded { .. } => Failure {
                code: EXIT_BUDGET,
                message: e.to_string(),
            },
            _ => Failure::precondition(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn parse_failure(path: &Path, e: ParseError) -> Failure {
    Failure::parse(format!("{}: {e}", path.display()))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Binary matrix in alist format (by extension) or the plain `m n` format.
pub fn matrix(path: &Path) -> CliResult<BitMatrix> {
    let text = read(path)?;
    let alist = path.extension().is_some_and(|e| e == "alist");
    let parsed = if alist {
        formats::parse_alist(&text)
    } else {
        formats::parse_plain_matrix(&text)
    };
    parsed.map_err(|e| parse_failure(path, e))
}

pub fn classical(path: &Path) -> CliResult<ClassicalCode> {
    matrix(path).map(ClassicalCode::new)
}

pub fn ring_matrix(path: &Path) -> CliResult<GroupAlgebraMatrix> {
    let text = read(path)?;
    formats::parse_ring_matrix(&text, &base_dir(path)).map_err(|e| parse_failure(path, e))
}

pub fn graph(path: &Path) -> CliResult<GraphFile> {
    let text = read(path)?;
    formats::parse_graph(&text).map_err(|e| parse_failure(path, e))
}

pub fn action_spec(path: &Path, graph: &GraphFile) -> CliResult<ActionSpec> {
    let text = read(path)?;
    formats::parse_action_spec(&text, graph, &base_dir(path)).map_err(|e| parse_failure(path, e))
}

/// Reads and validates an action; an invalid action is a precondition failure.
pub fn action(path: &Path, graph: &GraphFile) -> CliResult<GroupAction> {
    action_spec(path, graph)?
        .build(graph)
        .map_err(|e| Failure::precondition(format!("{}: {e}", path.display())))
}

pub fn vertex_map(path: &Path, cover: &GraphFile, base: &GraphFile) -> CliResult<Vec<usize>> {
    let text = read(path)?;
    formats::parse_vertex_map(&text, cover, base).map_err(|e| parse_failure(path, e))
}

pub fn group(spec: &str) -> CliResult<Arc<FiniteGroup>> {
    formats::resolve_group(spec, Path::new("."), 0)
        .map_err(|e| Failure::parse(format!("group {spec:?}: {}", e.message)))
}

/// Explicit value, then `QPC_BUDGET`, then the library default.
pub fn budget(flag: Option<u64>) -> CliResult<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("QPC_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::parse(format!("QPC_BUDGET={v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

/// `c<i>`, `b<j>` or `v<i>` name of a vertex in the combined numbering.
pub fn vertex_name(graph: &GraphFile, v: usize) -> String {
    match graph {
        GraphFile::Tanner(t) if v < t.checks() => format!("c{v}"),
        GraphFile::Tanner(t) => format!("b{}", v - t.checks()),
        GraphFile::Plain(_) => format!("v{v}"),
    }
}
