//! `herald`: sweeps of heralded CZ and Toffoli gates and repeater rates,
//! written as CSV tables with JSON run manifests.

mod args;
mod cz;
mod error;
mod output;
mod repeater;
mod toffoli;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::cz::CzArgs;
use crate::error::{CliError, CliResult};
use crate::output::{render_csv, sha256_hex, stem, RunManifest, RunOutput};
use crate::repeater::RepeaterArgs;
use crate::toffoli::ToffoliArgs;

#[derive(Parser, Debug)]
#[command(
    name = "herald",
    version,
    about = "Heralded cavity CZ/Toffoli gate sweeps"
)]
struct Cli {
    /// Output directory for CSV tables and manifests.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads; `HERALD_JOBS` takes precedence. Default: available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CZ gate: effective theory and/or full master-equation simulation.
    Cz(CzArgs),
    /// N-qubit Toffoli gate from the effective theory.
    Toffoli(ToffoliArgs),
    /// Repeater rate scaling, recursive rate and maximal link count.
    Repeater(RepeaterArgs),
    /// Re-run a manifest and compare the checksum of its CSV.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn jobs(flag: Option<usize>) -> CliResult<usize> {
    let n = match std::env::var("HERALD_JOBS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("HERALD_JOBS = '{v}' is not a count")))?,
        ),
        Err(_) => flag,
    };
    match n {
        Some(0) => Err(CliError::usage("job count must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
    }
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(f)
}

fn execute<A: Serialize + Sync>(
    name: &str,
    args: &A,
    run: impl FnOnce(&A) -> CliResult<RunOutput> + Send,
    out: &Path,
    jobs: usize,
) -> CliResult<()> {
    let start = Instant::now();
    let result = in_pool(jobs, || run(args))?;
    let config = serde_json::to_value(args)?;
    let path = output::write_run(out, name, config, result, start.elapsed().as_secs_f64())?;
    println!("{}", path.display());
    Ok(())
}

fn rerun<A: DeserializeOwned + Sync>(
    m: &RunManifest,
    run: impl FnOnce(&A) -> CliResult<RunOutput> + Send,
    jobs: usize,
) -> CliResult<RunOutput> {
    let args: A = serde_json::from_value(m.config.clone())?;
    in_pool(jobs, || run(&args))
}

fn replay(path: &Path, jobs: usize) -> CliResult<()> {
    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let config_sha = sha256_hex(serde_json::to_string(&m.config)?.as_bytes());
    if config_sha != m.config_sha256 {
        return Err(CliError::Mismatch(format!(
            "config hash {config_sha} != {}",
            m.config_sha256
        )));
    }
    let result = match m.command.as_str() {
        "cz" => rerun(&m, CzArgs::run, jobs)?,
        "toffoli" => rerun(&m, ToffoliArgs::run, jobs)?,
        "repeater" => rerun(&m, RepeaterArgs::run, jobs)?,
        other => {
            return Err(CliError::usage(format!(
                "unknown command '{other}' in manifest"
            )))
        }
    };
    let csv = render_csv(
        &result.table,
        &m.command,
        &config_sha,
        &format!("{}.json", stem(&m.command, &config_sha)),
    );
    let sha = sha256_hex(csv.as_bytes());
    let recorded = m
        .files
        .first()
        .ok_or_else(|| CliError::usage("manifest lists no files"))?;
    if sha != recorded.sha256 {
        return Err(CliError::Mismatch(format!(
            "{}: {sha} != {}",
            recorded.path, recorded.sha256
        )));
    }
    println!("{} {sha} ok", recorded.path);
    Ok(())
}

fn main_inner(cli: Cli) -> CliResult<()> {
    let jobs = jobs(cli.jobs)?;
    match &cli.command {
        Command::Cz(a) => execute("cz", a, CzArgs::run, &cli.out, jobs),
        Command::Toffoli(a) => execute("toffoli", a, ToffoliArgs::run, &cli.out, jobs),
        Command::Repeater(a) => execute("repeater", a, RepeaterArgs::run, &cli.out, jobs),
        Command::Replay { manifest } => replay(manifest, jobs),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("herald: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
