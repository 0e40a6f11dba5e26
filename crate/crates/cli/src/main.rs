//! `nrsim` — simulate subcritical rank-1 random graphs, compute the limit
//! constants of their component statistics, and verify the limit laws by
//! replicated experiments.
//!
//! Exit codes: 0 success, 1 statistical rejection, 2 usage or configuration
//! error, 3 runtime error.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigOverrides, ExperimentConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum AppError {
    /// Bad flags or configuration; exit code 2.
    Usage(String),
    /// I/O or other runtime failure; exit code 3.
    Runtime(String),
}

impl AppError {
    pub fn usage(msg: impl Into<String>) -> Self {
        AppError::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        AppError::Runtime(msg.into())
    }

    fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Usage(_) => ExitCode::from(2),
            AppError::Runtime(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "{m}"),
            AppError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

/// Writes a file, attaching the path to any error.
pub fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), AppError> {
    std::fs::write(path, bytes)
        .map_err(|e| AppError::runtime(format!("writing {}: {e}", path.display())))
}

#[derive(Parser, Debug)]
#[command(name = "nrsim", version, about = "Subcritical rank-1 random graph simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags mirror the config-file keys; a flag overrides the file.
#[derive(Args, Debug, Default, Clone)]
struct SharedArgs {
    /// Config file with one key=value pair per line ('#' comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Weight family (only 'pareto' is implemented).
    #[arg(long)]
    family: Option<String>,
    /// Tail exponent (> 2).
    #[arg(long)]
    beta: Option<f64>,
    /// Pareto scale (> 0, subcritical needs t_min < (beta-2)/(beta-1)).
    #[arg(long)]
    t_min: Option<f64>,
    /// Graph kind: nr, enr, cl or grg.
    #[arg(long)]
    kind: Option<String>,
    /// Divisor: ln (realized total weight) or new (`n E[W]`, primed variants).
    #[arg(long)]
    normalizer: Option<String>,
    /// Number of vertices.
    #[arg(long)]
    n: Option<usize>,
    /// Number of replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed; replication r derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated statistics: `all`, `dist:<m>`, `deg:<m>`, `tree:<tree>`.
    #[arg(long)]
    specs: Option<String>,
    /// Comma-separated half-open intervals a:b (b may be inf).
    #[arg(long)]
    intervals: Option<String>,
    /// Significance level of the statistical tests.
    #[arg(long)]
    level: Option<f64>,
    /// Component-size cap for terminal-tree path enumeration.
    #[arg(long)]
    path_cap: Option<usize>,
    /// Results CSV written by verify (default results.csv).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Test report written by verify (default report.txt).
    #[arg(long)]
    out_report: Option<PathBuf>,
    /// Edge list written by generate (default graph.edges).
    #[arg(long)]
    out_edges: Option<PathBuf>,
    /// Weights file written by generate (default graph.weights).
    #[arg(long)]
    out_weights: Option<PathBuf>,
    /// Worker threads for the replication harness (execution detail; results
    /// are identical for every value).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample weights, generate one graph, and write edge-list and weights files.
    Generate(SharedArgs),
    /// Print the limit constant xi for a model and statistic.
    Xi {
        #[command(flatten)]
        shared: SharedArgs,
        /// Statistic: `all`, `dist:<m>`, `deg:<m>`, `tree:<tree>`.
        #[arg(long, default_value = "all")]
        spec: String,
    },
    /// Run replications and test the point-process and maximum limit laws.
    Verify(SharedArgs),
    /// Canonical form, automorphism count, and degrees of a rooted tree.
    Tree {
        /// Parent array like "0 1 1 2" (0 marks the root) or an AHU string
        /// like "(()())".
        tree: String,
    },
    /// Print moments, exponentially damped moments, and the subcritical margin.
    Moments {
        #[command(flatten)]
        shared: SharedArgs,
        /// Largest raw moment order to print.
        #[arg(long, default_value_t = 2)]
        max_k: u32,
        /// Largest damped moment order to print.
        #[arg(long, default_value_t = 3)]
        max_exp: u32,
    },
}

impl SharedArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            family: self.family.clone(),
            beta: self.beta,
            t_min: self.t_min,
            kind: self.kind.clone(),
            normalizer: self.normalizer.clone(),
            n: self.n,
            reps: self.reps,
            seed: self.seed,
            specs: self.specs.clone(),
            intervals: self.intervals.clone(),
            level: self.level,
            path_cap: self.path_cap,
            out_csv: self.out_csv.clone(),
            out_report: self.out_report.clone(),
            out_edges: self.out_edges.clone(),
            out_weights: self.out_weights.clone(),
        }
    }

    fn resolve(&self) -> Result<ExperimentConfig, AppError> {
        let flags = self.overrides();
        let merged = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    AppError::usage(format!("reading config {}: {e}", path.display()))
                })?;
                flags.or(ConfigOverrides::from_file_text(&text)?)
            }
            None => flags,
        };
        merged.resolve()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate(shared) => shared
            .resolve()
            .and_then(|cfg| commands::generate(&cfg))
            .map(|()| ExitCode::SUCCESS),
        Command::Xi { shared, spec } => shared
            .resolve()
            .and_then(|cfg| commands::xi(&cfg, spec))
            .map(|()| ExitCode::SUCCESS),
        Command::Verify(shared) => shared
            .resolve()
            .and_then(|cfg| commands::verify(&cfg, shared.threads))
            .map(|all_pass| {
                if all_pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }),
        Command::Tree { tree } => commands::tree(tree).map(|()| ExitCode::SUCCESS),
        Command::Moments { shared, max_k, max_exp } => shared
            .resolve()
            .and_then(|cfg| commands::moments(&cfg, *max_k, *max_exp))
            .map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("nrsim: {err}");
            err.exit_code()
        }
    }
}
