use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::records::{format_sig9, SweepRecord};
use super::spec::DecoderKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    /// SNR (dB) at and above which the checks apply; `None` takes the top
    /// half of the shared grid.
    pub high_snr_db: Option<f64>,
    /// Relative tolerance between theoretical and simulated node counts.
    pub complexity_tol: f64,
    /// Standard errors a bound may sit below the simulated BER.
    pub sigma_slack: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            high_snr_db: None,
            complexity_tol: 0.10,
            sigma_slack: 3.0,
        }
    }
}

/// Per-point deltas; every delta is theory minus simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub snr_db: f64,
    pub decoder: DecoderKind,
    pub psi_row: usize,
    pub psi_col: usize,
    pub high_snr: bool,
    pub ber_margin: Option<f64>,
    pub nodes_delta: Option<f64>,
    pub nodes_rel_delta: Option<f64>,
    pub reduction_delta: Option<f64>,
    pub bound_violation: bool,
    pub complexity_violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub high_snr_db: f64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.bound_violation || r.complexity_violation)
            .count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "snr_db",
            "decoder",
            "psi_row",
            "psi_col",
            "high_snr",
            "ber_margin",
            "nodes_delta",
            "nodes_rel_delta",
            "reduction_delta",
            "bound_violation",
            "complexity_violation",
        ])?;
        let opt = |v: Option<f64>| v.map(format_sig9).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                format_sig9(r.snr_db),
                r.decoder.to_string(),
                r.psi_row.to_string(),
                r.psi_col.to_string(),
                r.high_snr.to_string(),
                opt(r.ber_margin),
                opt(r.nodes_delta),
                opt(r.nodes_rel_delta),
                opt(r.reduction_delta),
                r.bound_violation.to_string(),
                r.complexity_violation.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Input(format!("cannot write report: {e}")))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}

type Key = (u64, DecoderKind, usize, usize);

fn key(r: &SweepRecord) -> Key {
    // total_cmp order on finite values matches the bit order after this map.
    let bits = r.snr_db.to_bits();
    let ordered = if r.snr_db.is_sign_negative() { !bits } else { bits | (1 << 63) };
    (ordered, r.decoder, r.psi_row, r.psi_col)
}

fn index(records: &[SweepRecord], what: &str) -> Result<BTreeMap<Key, SweepRecord>> {
    let mut map = BTreeMap::new();
    for r in records {
        if map.insert(key(r), r.clone()).is_some() {
            return Err(Error::GridMismatch(format!(
                "duplicate {what} row at {} dB, {} ψ_row={}",
                r.snr_db, r.decoder, r.psi_row
            )));
        }
    }
    Ok(map)
}

fn both(a: Option<f64>, b: Option<f64>) -> Option<(f64, f64)> {
    a.zip(b)
}

/// Joins simulation and theory rows on `(SNR, decoder, ψ_row, ψ_col)` and
/// flags bounds below the simulated BER and node-count mismatches in the
/// high-SNR region.
pub fn compare(
    sim: &[SweepRecord],
    theory: &[SweepRecord],
    options: &CompareOptions,
) -> Result<ComparisonReport> {
    let sim = index(sim, "simulation")?;
    let theory = index(theory, "theory")?;
    if sim.is_empty() {
        return Err(Error::GridMismatch("no simulation rows".into()));
    }
    if let Some(k) = sim.keys().find(|k| !theory.contains_key(k)) {
        let r = &sim[k];
        return Err(Error::GridMismatch(format!(
            "simulation row {} dB, {} ψ_row={} ψ_col={} has no theory row",
            r.snr_db, r.decoder, r.psi_row, r.psi_col
        )));
    }
    if let Some(k) = theory.keys().find(|k| !sim.contains_key(k)) {
        let r = &theory[k];
        return Err(Error::GridMismatch(format!(
            "theory row {} dB, {} ψ_row={} ψ_col={} has no simulation row",
            r.snr_db, r.decoder, r.psi_row, r.psi_col
        )));
    }

    let mut grid: Vec<f64> = sim.values().map(|r| r.snr_db).collect();
    grid.dedup();
    let high_snr_db = options.high_snr_db.unwrap_or(grid[grid.len() / 2]);

    let rows = sim
        .iter()
        .map(|(k, s)| {
            let t = &theory[k];
            let high_snr = s.snr_db >= high_snr_db;
            let ber_margin = both(t.ber_bound, s.ber_sim).map(|(b, p)| b - p);
            let nodes_delta = both(t.nodes_theory, s.nodes_paper).map(|(a, b)| a - b);
            let nodes_rel_delta = both(t.nodes_theory, s.nodes_paper)
                .filter(|&(_, b)| b > 0.0)
                .map(|(a, b)| (a - b) / b);
            let reduction_delta = both(t.reduction_theory, s.reduction_sim).map(|(a, b)| a - b);
            let slack = options.sigma_slack * s.ber_se.unwrap_or(0.0);
            let bound_violation = high_snr && ber_margin.is_some_and(|m| m < -slack);
            let complexity_violation = high_snr
                && s.decoder == DecoderKind::Rsd
                && nodes_rel_delta.is_some_and(|d| d.abs() > options.complexity_tol);
            ComparisonRow {
                snr_db: s.snr_db,
                decoder: s.decoder,
                psi_row: s.psi_row,
                psi_col: s.psi_col,
                high_snr,
                ber_margin,
                nodes_delta,
                nodes_rel_delta,
                reduction_delta,
                bound_violation,
                complexity_violation,
            }
        })
        .collect();
    Ok(ComparisonReport { high_snr_db, rows })
}
