use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::PairSummation;
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::numerics::MAX_LAGUERRE_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecoderKind {
    #[serde(rename = "ML")]
    Ml,
    #[serde(rename = "RSD")]
    Rsd,
}

impl DecoderKind {
    pub fn label(&self) -> &'static str {
        match self {
            DecoderKind::Ml => "ML",
            DecoderKind::Rsd => "RSD",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ML" => Ok(DecoderKind::Ml),
            "RSD" => Ok(DecoderKind::Rsd),
            other => Err(Error::Input(format!("unknown decoder label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: PathBuf,
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn default_stem() -> String {
    "experiment".into()
}

impl OutputPaths {
    pub fn csv(&self, command: &str) -> PathBuf {
        self.dir.join(format!("{}.{command}.csv", self.stem))
    }

    pub fn manifest(&self, command: &str) -> PathBuf {
        self.dir.join(format!("{}.{command}.manifest.json", self.stem))
    }
}

/// One experiment: a system, an SNR grid, stopping rules and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub system: SystemConfig,
    pub snr_points_db: Vec<f64>,
    pub min_trials: u64,
    #[serde(default = "default_min_bit_errors")]
    pub min_bit_errors: u64,
    /// Hard cap on trials per SNR point.
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<DecoderKind>,
    /// Empty means `[system.psi_row]`.
    #[serde(default)]
    pub rsd_psi_row_list: Vec<usize>,
    pub outputs: OutputPaths,
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
    #[serde(default = "default_channel_samples")]
    pub channel_samples_theory: usize,
    /// Trials for the screening-miss term of the RSD bound; 0 assumes it
    /// vanishes.
    #[serde(default = "default_term2_trials")]
    pub term2_trials: u64,
    #[serde(default)]
    pub pair_summation: PairSummation,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_min_bit_errors() -> u64 {
    200
}
fn default_max_trials() -> u64 {
    10_000_000
}
fn default_decoders() -> Vec<DecoderKind> {
    vec![DecoderKind::Ml, DecoderKind::Rsd]
}
fn default_quadrature_order() -> usize {
    7
}
fn default_channel_samples() -> usize {
    1000
}
fn default_term2_trials() -> u64 {
    10_000
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// ψ_row values run for the RSD decoder.
    pub fn psi_rows(&self) -> Vec<usize> {
        if self.rsd_psi_row_list.is_empty() {
            vec![self.system.psi_row]
        } else {
            self.rsd_psi_row_list.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.snr_points_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR points must be finite".into()));
        }
        if !self.snr_points_db.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("SNR points must be strictly increasing".into()));
        }
        if self.min_trials == 0 {
            return Err(Error::Config("min_trials must be at least 1".into()));
        }
        if self.max_trials < self.min_trials {
            return Err(Error::Config("max_trials must be >= min_trials".into()));
        }
        if self.decoders.is_empty() {
            return Err(Error::Config("no decoders selected".into()));
        }
        for &r in &self.rsd_psi_row_list {
            if r == 0 || r > self.system.nr {
                return Err(Error::Config(format!(
                    "psi_row {r} outside [1, {}]",
                    self.system.nr
                )));
            }
        }
        if self.quadrature_order == 0 || self.quadrature_order > MAX_LAGUERRE_ORDER {
            return Err(Error::Config(format!(
                "quadrature_order must be in 1..={MAX_LAGUERRE_ORDER}"
            )));
        }
        if self.channel_samples_theory == 0 {
            return Err(Error::Config("channel_samples_theory must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

pub const PRESET_NAMES: &[&str] = &["paper-8x8", "paper-16x16"];

/// Built-in experiment presets.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let (nt, nr, psi_col, rows): (usize, usize, usize, Vec<usize>) = match name {
        "paper-8x8" => (8, 8, 70, vec![1, 2, 4, 8]),
        "paper-16x16" => (16, 16, 180, vec![1, 2, 4, 8, 16]),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(ExperimentSpec {
        system: SystemConfig {
            m: 16,
            nt,
            nr,
            snr_db: 0.0,
            psi_row: nr,
            psi_col,
            seed: 2024,
        },
        snr_points_db: (0..=6).map(|k| f64::from(k) * 3.0).collect(),
        min_trials: 10_000,
        min_bit_errors: default_min_bit_errors(),
        max_trials: 1_000_000,
        decoders: default_decoders(),
        rsd_psi_row_list: rows,
        outputs: OutputPaths {
            dir: PathBuf::from("results"),
            stem: name.to_string(),
        },
        quadrature_order: default_quadrature_order(),
        channel_samples_theory: default_channel_samples(),
        term2_trials: default_term2_trials(),
        pair_summation: PairSummation::Full,
        workers: None,
    })
}
