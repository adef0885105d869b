//! Command-line surface. `run` is the whole program; `main` only forwards
//! the process arguments and exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::engine::replay_prefix;
use crate::io::{self, IoError};
use crate::oracle::brute_force_optimal;
use crate::search::{
    combine_componentwise, optimize_scheme, optimize_system, optimize_with_flips, SearchConfig,
    SearchError, SearchReport, StrategyWeights,
};
use crate::slp::{emit_slp, emit_system_slp, SlpError};
use crate::strategy::StrategyKind;
use crate::system::{expand_and_verify, CanonicalPair};

#[derive(Parser, Debug)]
#[command(name = "addred", version, about = "Reduce the additions of fast matrix multiplication schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scheme and print its naive addition counts.
    Verify { scheme: PathBuf },
    /// Run the portfolio search on a scheme or an expression set.
    Reduce(ReduceArgs),
    /// Merge reports on the same scheme, keeping the cheapest record per component.
    Combine {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Exhaustive optimum of a small expression set.
    Oracle {
        system: PathBuf,
        #[arg(long, default_value_t = 2_000_000)]
        max_nodes: usize,
    },
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Scheme JSON, or expression-set JSON with `n_x` and `expressions`.
    input: PathBuf,
    /// Search configuration JSON, or a previous report to rerun.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    processes: Option<usize>,
    #[arg(long)]
    iterations_patience: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    reinit_fraction: Option<f64>,
    /// Strategy weights such as `gi=8,ga=4,gr=2,wr=1,mix=0.1,gp=0.01`;
    /// unlisted strategies get weight 0.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    flip_mode: bool,
    #[arg(long)]
    flip_schemes: Option<usize>,
    #[arg(long)]
    flips_max: Option<usize>,
    /// Run every process except the initial greedy one with this strategy.
    #[arg(long)]
    strategy: Option<StrategyKind>,
    #[arg(long)]
    out_slp: Option<PathBuf>,
    #[arg(long)]
    out_report: Option<PathBuf>,
    /// Include wall-clock time in the report (makes it non-reproducible).
    #[arg(long)]
    record_time: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("io: {0}")]
    Io(#[from] IoError),
    #[error("search: {0}")]
    Search(#[from] SearchError),
    #[error("slp: {0}")]
    Slp(#[from] SlpError),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid: {0}")]
    Invalid(String),
}

/// Result of reducing a bare expression set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub config: SearchConfig,
    pub cost: usize,
    pub naive: usize,
    pub substitutions: Vec<CanonicalPair>,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

/// Runs the program with `args` (including the program name) and returns
/// the exit code. Failures print one line `error: <kind>: <message>` to
/// `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(stderr, "error: usage: {first}");
            return 2;
        }
    };
    let result = match cli.command {
        Command::Verify { scheme } => verify(&scheme, stdout),
        Command::Reduce(args) => reduce(&args, stdout),
        Command::Combine { reports, out_report } => combine(&reports, out_report.as_deref(), stdout),
        Command::Oracle { system, max_nodes } => oracle(&system, max_nodes, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "error: {message}");
            1
        }
    }
}

fn verify(path: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let scheme = io::parse_scheme(&io::read_file(path)?)?;
    let check = scheme
        .check_validity(0)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let [u, v, w] = scheme.naive_costs();
    let _ = writeln!(out, "format: ({},{},{}:{})", scheme.m, scheme.n, scheme.p, scheme.r);
    let _ = writeln!(out, "valid: {}", check.valid);
    let _ = writeln!(out, "naive: u {u}, v {v}, w {w}");
    let _ = writeln!(out, "total: {}", u + v + w);
    let _ = writeln!(out, "digest: {}", scheme.digest());
    if let Some(violation) = check.first_violation {
        return Err(CliError::Invalid(format!("first violation {violation:?}")));
    }
    Ok(0)
}

fn build_config(args: &ReduceArgs) -> Result<SearchConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => io::parse_config(&io::read_file(path)?)?,
        None => SearchConfig::default(),
    };
    if let Some(n) = args.processes {
        cfg.n_processes = Some(n);
    }
    if let Some(p) = args.iterations_patience {
        cfg.patience = p;
    }
    if let Some(m) = args.max_iterations {
        cfg.max_iterations = Some(m);
    }
    if let Some(f) = args.reinit_fraction {
        cfg.reinit_fraction = f;
    }
    if let Some(w) = &args.weights {
        cfg.weights = StrategyWeights::parse(w).map_err(CliError::Config)?;
    }
    if let Some(kind) = args.strategy {
        cfg.weights = StrategyWeights::only(kind);
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if args.flip_mode || args.flip_schemes.is_some() || args.flips_max.is_some() {
        let mut flip = cfg.flip_mode.unwrap_or_default();
        if let Some(m) = args.flip_schemes {
            flip.schemes = m;
        }
        if let Some(f) = args.flips_max {
            flip.flips_max = f;
        }
        cfg.flip_mode = Some(flip);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn reduce(args: &ReduceArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = build_config(args)?;
    let bytes = io::read_file(&args.input)?;
    if io::is_system_json(&bytes) {
        return reduce_system(args, cfg, &bytes, out);
    }
    let scheme = io::parse_scheme(&bytes)?;
    let mut report = if cfg.flip_mode.is_some() {
        optimize_with_flips(&scheme, &cfg)?
    } else {
        optimize_scheme(&scheme, &cfg)?
    };
    if !args.record_time {
        report.wall_ms = None;
    }
    let target = report.scheme(&scheme).clone();
    if !report.verify_against(&target) {
        return Err(CliError::Invalid("reduced program does not reproduce the scheme".into()));
    }
    print_scheme_summary(&report, out);
    if let Some(path) = &args.out_report {
        io::write_file(path, &io::report_to_json(&report))?;
    }
    if let Some(path) = &args.out_slp {
        io::write_file(path, &emit_slp(&target, &report)?.to_string())?;
    }
    Ok(0)
}

fn print_scheme_summary(report: &SearchReport, out: &mut dyn Write) {
    let c = &report.components;
    let _ = writeln!(
        out,
        "components: u {} (naive {}, {}), v {} (naive {}, {}), w {} (naive {}, {})",
        c.u.cost,
        c.u.naive,
        c.u.strategy.code(),
        c.v.cost,
        c.v.naive,
        c.v.strategy.code(),
        c.w.cost,
        c.w.naive,
        c.w.strategy.code()
    );
    let _ = writeln!(out, "total: {} (naive {})", report.total, report.naive_total);
    let _ = writeln!(out, "iterations: {}", report.iterations);
    if let Some(flip) = &report.flip {
        let _ = writeln!(out, "flip scheme: {} (iteration {})", flip.scheme_index, flip.iteration);
    }
}

fn reduce_system(
    args: &ReduceArgs,
    cfg: SearchConfig,
    bytes: &[u8],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if cfg.flip_mode.is_some() {
        return Err(CliError::Config("flip mode needs a scheme input".into()));
    }
    let sys = io::parse_system(bytes)?;
    let start = std::time::Instant::now();
    let outcome = optimize_system(&sys, &cfg)?;
    let reduced = replay_prefix(&sys, &outcome.best.substitutions)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    if !expand_and_verify(&sys, &reduced).unwrap_or(false) {
        return Err(CliError::Invalid("reduced system does not expand to the input".into()));
    }
    let report = SystemReport {
        config: cfg,
        cost: outcome.best.cost,
        naive: sys.naive_cost(),
        substitutions: outcome.best.substitutions,
        strategy: outcome.best.strategy,
        seed: outcome.best.seed,
        iterations: outcome.iterations,
        wall_ms: args.record_time.then(|| start.elapsed().as_millis() as u64),
    };
    let _ = writeln!(out, "total: {} (naive {})", report.cost, report.naive);
    let _ = writeln!(out, "iterations: {}", report.iterations);
    if let Some(path) = &args.out_report {
        io::write_file(path, &io::report_to_json(&report))?;
    }
    if let Some(path) = &args.out_slp {
        io::write_file(path, &emit_system_slp(&reduced).to_string())?;
    }
    Ok(0)
}

fn combine(paths: &[PathBuf], out_report: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let reports = paths
        .iter()
        .map(|p| io::parse_report(&io::read_file(p)?))
        .collect::<Result<Vec<_>, _>>()?;
    let combined = combine_componentwise(&reports)?;
    print_scheme_summary(&combined, out);
    if let Some(path) = out_report {
        io::write_file(path, &io::report_to_json(&combined))?;
    }
    Ok(0)
}

fn oracle(path: &Path, max_nodes: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = io::parse_system(&io::read_file(path)?)?;
    let res = brute_force_optimal(&sys, max_nodes);
    let reduced = replay_prefix(&sys, &res.record.substitutions)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let _ = writeln!(out, "cost: {}", res.cost);
    let _ = writeln!(out, "naive: {}", sys.naive_cost());
    let _ = writeln!(out, "exact: {}", res.exact);
    let _ = writeln!(out, "nodes: {}", res.nodes);
    let _ = write!(out, "{}", emit_system_slp(&reduced));
    Ok(0)
}
