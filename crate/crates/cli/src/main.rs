//! `qpc`: build, analyse, verify and draw quantum product codes.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use input::{Failure, EXIT_PARSE};

#[derive(Parser, Debug)]
#[command(
    name = "qpc",
    version,
    about = "Workbench for hypergraph, lifted and balanced product codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a code and write its check matrices and layout.
    Construct {
        #[command(subcommand)]
        source: Source,
        /// Directory for hx/hz (plain and alist) and layout.json.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
        #[arg(long, global = true)]
        json: bool,
    },
    /// Report commutation, n, k and d.
    Analyze {
        #[command(subcommand)]
        source: Source,
        /// Largest number of vectors the distance search may enumerate.
        #[arg(long, global = true)]
        budget: Option<u64>,
        #[arg(long, global = true)]
        json: bool,
    },
    /// Render the coordinate layout of a code.
    Layout(LayoutArgs),
    /// Check a structural property and print a JSON report.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Seeded search for a non-commuting lifted product.
    Search(SearchArgs),
}

#[derive(Subcommand, Debug, Clone)]
pub enum Source {
    /// Hypergraph product of two classical codes.
    Hgp {
        #[arg(long)]
        c1: PathBuf,
        #[arg(long)]
        c2: PathBuf,
    },
    /// Lifted product of two ring matrices.
    Lp {
        #[arg(long)]
        m1: PathBuf,
        #[arg(long)]
        m2: PathBuf,
    },
    /// Hypergraph product of the expanded ring matrices.
    Lifts {
        #[arg(long)]
        m1: PathBuf,
        #[arg(long)]
        m2: PathBuf,
    },
    /// Balanced product of two graphs with group actions.
    Bp {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        action_a: PathBuf,
        #[arg(long)]
        action_b: PathBuf,
    },
    /// Explicit check matrices.
    Code {
        #[arg(long)]
        hx: PathBuf,
        #[arg(long)]
        hz: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct LayoutArgs {
    #[command(subcommand)]
    source: Option<Source>,
    /// Existing layout JSON to re-render instead of building a code.
    #[arg(long, global = true)]
    from: Option<PathBuf>,
    /// svg, tikz, dot or json.
    #[arg(long, default_value = "svg", global = true)]
    format: String,
    #[arg(long, global = true)]
    edges: bool,
    /// Canonical logical to overlay, e.g. `z0` or `x1` (hypergraph products only).
    #[arg(long, global = true)]
    logical: Option<String>,
    /// `auto`, `none` or `oblique`.
    #[arg(long, default_value = "auto", global = true)]
    projection: String,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Check {
    /// Is the vertex map a covering map?
    Covering {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Is the action valid, free and free of fixed edges?
    Action {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        action: PathBuf,
    },
    /// Does the Tanner graph of B(m) cover the base graph of m?
    Lift {
        #[arg(long)]
        ring: PathBuf,
    },
    /// Do the lifted product and the balanced product of the lifts agree?
    Coincidence {
        #[arg(long)]
        m1: PathBuf,
        #[arg(long)]
        m2: PathBuf,
    },
    /// Do the planes of the lifted-product layout carry the factor Tanner graphs?
    Planes {
        #[arg(long)]
        m1: PathBuf,
        #[arg(long)]
        m2: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Group spec (`Z<l>`, `Z<a>xZ<b>`, `D<n>` or `table:<path>`).
    #[arg(long, default_value = "D3")]
    group: String,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the two ring matrices of the instance found.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Construct { source, out, json } => commands::construct(&source, out.as_deref(), json),
        Command::Analyze { source, budget, json } => commands::analyze(&source, budget, json),
        Command::Layout(args) => commands::layout(&args),
        Command::Verify { check } => commands::verify(&check),
        Command::Search(args) => commands::search(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
