//! Experiment runner: JSON spec in, CSV records and a run manifest out.

mod compare;
mod records;
mod spec;
mod sweep;
mod theory;

pub use compare::{compare, CompareOptions, ComparisonReport, ComparisonRow};
pub use records::{
    format_sig9, read_records, read_records_file, write_records, write_records_file, SweepRecord,
    CSV_HEADER,
};
pub use spec::{preset, DecoderKind, ExperimentSpec, OutputPaths, PRESET_NAMES};
pub use sweep::{run_sweep, simulate_point, DecoderTally, PointTally, SweepOutcome};
pub use theory::run_theory;

use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};

/// Provenance written next to each CSV.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub crate_version: &'a str,
    pub seed: u64,
    pub workers: usize,
    pub elapsed_seconds: f64,
    pub csv: &'a Path,
    /// RSD calls that hit the iteration cap (always expected to be zero).
    pub cap_hits: u64,
    pub spec: &'a ExperimentSpec,
}

impl<'a> RunManifest<'a> {
    pub fn new(
        command: &'a str,
        spec: &'a ExperimentSpec,
        csv: &'a Path,
        workers: usize,
        elapsed: Duration,
        cap_hits: u64,
    ) -> Self {
        RunManifest {
            command,
            crate_version: env!("CARGO_PKG_VERSION"),
            seed: spec.system.seed,
            workers,
            elapsed_seconds: elapsed.as_secs_f64(),
            csv,
            cap_hits,
            spec,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Runs `f` on a pool of `workers` threads (`None`: rayon's default).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
