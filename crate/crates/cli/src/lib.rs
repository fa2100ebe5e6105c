//! Command-line driver: argument parsing, config overrides, output files and
//! run manifests around the `subdiff-core` library.
//!
//! Exit codes: 0 on success, 1 for usage, configuration and I/O problems,
//! 2 when the numerics break down.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use subdiff_core::harness::{
    run_study, solve, ExperimentConfig, ExperimentKind, ManifestBuilder, OutputDigest, RateReport,
};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "subdiff",
    version,
    about = "Finite element / GMMP solver for the time-fractional stochastic heat equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve once and write the trajectory CSV.
    Solve(RunArgs),
    /// Compare sigma = 0 runs against the spectral reference.
    ValidateDeterministic(RunArgs),
    /// Spatial convergence study over the ladder of cell counts.
    ConvergeSpace(RunArgs),
    /// Temporal convergence study over the ladder of step counts.
    ConvergeTime(RunArgs),
    /// Monte Carlo strong-error study with coupled Wiener paths.
    McStrong(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output CSV; the manifest is written next to it as <PATH>.manifest.json.
    /// Defaults to <subcommand>.csv in the working directory.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Number of Monte Carlo samples, overriding the configuration.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Worker threads for the sample loop (default: available cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    /// solve only: also write the binary Wiener path dump.
    #[arg(long, value_name = "PATH")]
    path_dump: Option<PathBuf>,
    /// solve only: write every N-th time step to the trajectory CSV.
    #[arg(long, value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    stride: u64,
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Solve(a) => (ExperimentKind::Solve, a),
            Command::ValidateDeterministic(a) => (ExperimentKind::ValidateDeterministic, a),
            Command::ConvergeSpace(a) => (ExperimentKind::ConvergeSpace, a),
            Command::ConvergeTime(a) => (ExperimentKind::ConvergeTime, a),
            Command::McStrong(a) => (ExperimentKind::McStrong, a),
        }
    }
}

/// Failure of one CLI invocation, already classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<subdiff_core::Error> for CliError {
    fn from(e: subdiff_core::Error) -> Self {
        if e.is_input_error() || matches!(e, subdiff_core::Error::Io(_)) {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn io_error(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{what} {}: {e}", path.display()))
}

/// Parse `argv` (program name first), run, and return the exit code.
/// Diagnostics go to standard error; a short summary goes to standard output.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let bytes =
        std::fs::read(&args.config).map_err(|e| io_error("cannot read config", &args.config, e))?;
    let mut cfg: ExperimentConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;
    if cfg.kind != kind {
        eprintln!(
            "note: config kind '{}' overridden by subcommand '{}'",
            cfg.kind.name(),
            kind.name()
        );
        cfg.kind = kind;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(m) = args.samples {
        cfg.n_samples = m;
    }
    cfg.validate()?;
    if args.path_dump.is_some() && kind != ExperimentKind::Solve {
        return Err(CliError::Input(
            "--path-dump is only available for solve".into(),
        ));
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (kind, args) = cli.command.split();
    let cfg = load_config(kind, &args)?;
    let workers = args
        .workers
        .map(usize::from)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Numerical(format!("cannot start worker pool: {e}")))?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    let builder = ManifestBuilder::start();

    let (outputs, coupling) = pool.install(|| -> Result<_, CliError> {
        if kind == ExperimentKind::Solve {
            run_solve(&cfg, &args, &out)
        } else {
            run_rate_study(&cfg, &out)
        }
    })?;

    let digests = outputs
        .iter()
        .map(|p| OutputDigest::of_file(p))
        .collect::<subdiff_core::Result<Vec<_>>>()?;
    let manifest = builder.finish(&cfg, workers, digests, coupling);
    let manifest_path = manifest_path(&out);
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Numerical(format!("cannot serialize manifest: {e}")))?;
    std::fs::write(&manifest_path, json + "\n")
        .map_err(|e| io_error("cannot write", &manifest_path, e))?;
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error("cannot create", path, e))
}

fn finish_file(w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.into_inner()
        .map_err(|e| io_error("cannot write", path, e.into_error()))?
        .sync_all()
        .map_err(|e| io_error("cannot write", path, e))
}

type Produced = (Vec<PathBuf>, Option<String>);

fn run_solve(cfg: &ExperimentConfig, args: &RunArgs, out: &Path) -> Result<Produced, CliError> {
    let (traj, path) = solve(cfg)?;
    let mut w = create(out)?;
    let stride = usize::try_from(args.stride).unwrap_or(usize::MAX);
    traj.write_csv(&mut w, stride)?;
    finish_file(w, out)?;
    println!(
        "trajectory: {} ({} steps to t = {})",
        out.display(),
        traj.len() - 1,
        traj.final_time()
    );
    let mut outputs = vec![out.to_path_buf()];
    let digest = path.as_ref().map(|p| p.digest());
    if let Some(dump) = &args.path_dump {
        let Some(p) = &path else {
            return Err(CliError::Input("--path-dump needs a nonzero sigma".into()));
        };
        let mut w = create(dump)?;
        p.write_dump(&mut w)?;
        finish_file(w, dump)?;
        println!("path dump: {}", dump.display());
        outputs.push(dump.clone());
    }
    Ok((outputs, digest))
}

fn run_rate_study(cfg: &ExperimentConfig, out: &Path) -> Result<Produced, CliError> {
    let outcome = run_study(cfg)?;
    let report = outcome.report;
    let mut w = create(out)?;
    report.write_csv(&mut w)?;
    finish_file(w, out)?;
    print_summary(&report);
    println!("results: {}", out.display());
    Ok((vec![out.to_path_buf()], report.coupling_digest.clone()))
}

fn print_summary(r: &RateReport) {
    println!("level         n   resolution        error       stderr   max nodal");
    for l in &r.levels {
        println!(
            "{:5} {:9} {:12.5e} {:12.5e} {:12.5e} {:11.4e}",
            l.level, l.n, l.resolution, l.error, l.stderr, l.max_nodal_error
        );
    }
    match (r.fitted_slope, r.slope_stderr) {
        (Some(s), Some(se)) => {
            let expected = r
                .expected_rate
                .map_or(String::new(), |e| format!(" (expected {e})"));
            println!(
                "fitted slope {s:.4} +/- {se:.4}{expected}, {} sample(s)",
                r.n_samples
            );
        }
        _ => println!("fewer than 3 levels: no slope fitted"),
    }
}
