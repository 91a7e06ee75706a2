mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "compose", version, about = "Parse, check, rewrite and evaluate composite-object descriptions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Registry of join and object types (JSON). Without one, tensorial
    /// inputs get the smallest registry that types them.
    #[arg(long, global = true, value_name = "PATH")]
    pub registry: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Tensor table for the circuit backend (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub tensors: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Tensorial)]
    pub format: Format,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = compose_core::rewrite::DEFAULT_MAX_NODES)]
    pub max_nodes: usize,
    /// Exit with status 3 when an object evaluates impossible or inconsistent.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a term and print it back in normal form.
    Parse { input: PathBuf },
    /// Parse and validate; with --backend, also check backend preconditions.
    Check { input: PathBuf },
    /// Print the canonical form.
    Canon { input: PathBuf },
    /// Decide whether two terms describe the same object.
    Equiv { first: PathBuf, second: PathBuf },
    /// Describe one join the other way round.
    Reverse {
        input: PathBuf,
        #[arg(long)]
        label: u32,
    },
    /// Enumerate composition orders and check that they agree.
    Orders { input: PathBuf },
    /// Drop joins outside a sufficient set.
    Prune {
        input: PathBuf,
        /// Join types to keep, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<String>,
        /// Implication rules (JSON).
        #[arg(long, value_name = "PATH")]
        rules: Option<PathBuf>,
    },
    /// Graphviz DOT export.
    Render { input: PathBuf },
    /// Compute the generalized state.
    Eval { input: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Circuit,
    Tile,
    Beam,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Tensorial,
    Bipartite,
}

/// How a run ends, other than success.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable input, parse or validation errors.
    Usage(String),
    Internal(String),
}

impl From<compose_core::Error> for Failure {
    fn from(e: compose_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub struct Outcome {
    pub text: String,
    /// Set when --strict should turn this result into exit status 3.
    pub defective: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = std::panic::catch_unwind(|| commands::run(&cli));
    let result = match run {
        Ok(r) => r,
        Err(_) => Err(Failure::Internal("unexpected failure".into())),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = emit(&cli.opts, &outcome.text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if cli.opts.strict && outcome.defective {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(opts: &Options, text: &str) -> std::io::Result<()> {
    match &opts.out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
