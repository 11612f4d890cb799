use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use smrsd::harness::{
    compare, preset, read_records_file, run_sweep, run_theory, with_workers, write_records_file,
    CompareOptions, ExperimentSpec, RunManifest,
};
use smrsd::Error;

#[derive(Parser)]
#[command(name = "smrsd", version, about = "Reliable sphere decoding for SM-MIMO: simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER and visited-node sweep.
    Simulate {
        spec: PathBuf,
        /// Worker threads (overrides the spec).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Union bounds and semi-analytic complexity on the spec's grid.
    Theory {
        spec: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare simulation and theory CSVs; exits 3 on violations.
    Compare {
        sim: PathBuf,
        theory: PathBuf,
        #[arg(long)]
        high_snr_db: Option<f64>,
        #[arg(long, default_value_t = 0.10)]
        complexity_tol: f64,
        #[arg(long, default_value_t = 3.0)]
        sigma_slack: f64,
        /// Write the per-point report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print or write a built-in spec.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Invalid(Error),
    Runtime(Error),
    Violations(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Json(_) | Error::GridMismatch(_) | Error::Input(_) => {
                Failure::Invalid(e)
            }
            _ => Failure::Runtime(e),
        }
    }
}

fn load(path: &Path) -> Result<ExperimentSpec, Failure> {
    ExperimentSpec::load(path).map_err(Failure::Invalid)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { spec, workers } => {
            let spec = load(&spec)?;
            let workers = workers.or(spec.workers);
            let start = Instant::now();
            let outcome = with_workers(workers, || run_sweep(&spec))?.map_err(Failure::Runtime)?;
            let csv = spec.outputs.csv("simulate");
            write_records_file(&csv, &outcome.records).map_err(Failure::Runtime)?;
            let threads = workers.unwrap_or_else(rayon::current_num_threads);
            RunManifest::new("simulate", &spec, &csv, threads, start.elapsed(), outcome.cap_hits())
                .write(&spec.outputs.manifest("simulate"))
                .map_err(Failure::Runtime)?;
            println!("{}", csv.display());
        }
        Command::Theory { spec, workers } => {
            let spec = load(&spec)?;
            let workers = workers.or(spec.workers);
            let start = Instant::now();
            let records = with_workers(workers, || run_theory(&spec))?.map_err(Failure::Runtime)?;
            let csv = spec.outputs.csv("theory");
            write_records_file(&csv, &records).map_err(Failure::Runtime)?;
            let threads = workers.unwrap_or_else(rayon::current_num_threads);
            RunManifest::new("theory", &spec, &csv, threads, start.elapsed(), 0)
                .write(&spec.outputs.manifest("theory"))
                .map_err(Failure::Runtime)?;
            println!("{}", csv.display());
        }
        Command::Compare {
            sim,
            theory,
            high_snr_db,
            complexity_tol,
            sigma_slack,
            out,
        } => {
            let sim = read_records_file(&sim).map_err(Failure::Invalid)?;
            let theory = read_records_file(&theory).map_err(Failure::Invalid)?;
            let options = CompareOptions {
                high_snr_db,
                complexity_tol,
                sigma_slack,
            };
            let report = compare(&sim, &theory, &options)?;
            match out {
                Some(path) => report.write_csv_file(&path).map_err(Failure::Runtime)?,
                None => report.write_csv(std::io::stdout()).map_err(Failure::Runtime)?,
            }
            let n = report.violations();
            if n > 0 {
                return Err(Failure::Violations(n));
            }
        }
        Command::Preset { name, out } => {
            let json = preset(&name)?.to_json()? + "\n";
            match out {
                Some(path) => std::fs::write(&path, json)
                    .map_err(|e| Failure::Runtime(Error::Io { path, source: e }))?,
                None => print!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Violations(n)) => {
            eprintln!("{n} comparison violation(s)");
            ExitCode::from(3)
        }
    }
}
