use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::spec::DecoderKind;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 13] = [
    "snr_db",
    "decoder",
    "psi_row",
    "psi_col",
    "ber_sim",
    "ber_se",
    "ber_bound",
    "nodes_paper",
    "nodes_total",
    "nodes_theory",
    "reduction_sim",
    "reduction_theory",
    "trials",
];

/// One `(SNR, decoder, ψ_row)` row. Simulation runs fill the `*_sim`,
/// `ber_se`, `nodes_paper`, `nodes_total` and `trials` columns; theory runs
/// fill `ber_bound`, `nodes_theory` and `reduction_theory`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub decoder: DecoderKind,
    pub psi_row: usize,
    pub psi_col: usize,
    pub ber_sim: Option<f64>,
    pub ber_se: Option<f64>,
    pub ber_bound: Option<f64>,
    pub nodes_paper: Option<f64>,
    pub nodes_total: Option<f64>,
    pub nodes_theory: Option<f64>,
    pub reduction_sim: Option<f64>,
    pub reduction_theory: Option<f64>,
    pub trials: Option<u64>,
}

impl SweepRecord {
    pub fn new(snr_db: f64, decoder: DecoderKind, psi_row: usize, psi_col: usize) -> Self {
        SweepRecord {
            snr_db,
            decoder,
            psi_row,
            psi_col,
            ber_sim: None,
            ber_se: None,
            ber_bound: None,
            nodes_paper: None,
            nodes_total: None,
            nodes_theory: None,
            reduction_sim: None,
            reduction_theory: None,
            trials: None,
        }
    }

    fn fields(&self) -> [String; 13] {
        let opt = |v: Option<f64>| v.map(format_sig9).unwrap_or_default();
        [
            format_sig9(self.snr_db),
            self.decoder.label().to_string(),
            self.psi_row.to_string(),
            self.psi_col.to_string(),
            opt(self.ber_sim),
            opt(self.ber_se),
            opt(self.ber_bound),
            opt(self.nodes_paper),
            opt(self.nodes_total),
            opt(self.nodes_theory),
            opt(self.reduction_sim),
            opt(self.reduction_theory),
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
        ]
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// dropped, exponent form outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_records<W: Write>(out: W, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn write_records_file(path: &Path, records: &[SweepRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(std::io::BufWriter::new(file), records)
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Input(format!(
            "unexpected CSV header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row?;
        let ctx = |col: &str| format!("row {}: bad {col}", line + 1);
        let float = |i: usize| -> Result<Option<f64>> {
            let s = &row[i];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Input(ctx(CSV_HEADER[i])))
            }
        };
        let int = |i: usize| -> Result<usize> {
            row[i].parse().map_err(|_| Error::Input(ctx(CSV_HEADER[i])))
        };
        out.push(SweepRecord {
            snr_db: float(0)?.ok_or_else(|| Error::Input(ctx("snr_db")))?,
            decoder: row[1].parse()?,
            psi_row: int(2)?,
            psi_col: int(3)?,
            ber_sim: float(4)?,
            ber_se: float(5)?,
            ber_bound: float(6)?,
            nodes_paper: float(7)?,
            nodes_total: float(8)?,
            nodes_theory: float(9)?,
            reduction_sim: float(10)?,
            reduction_theory: float(11)?,
            trials: if row[12].is_empty() {
                None
            } else {
                Some(row[12].parse().map_err(|_| Error::Input(ctx("trials")))?)
            },
        });
    }
    Ok(out)
}

pub fn read_records_file(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(std::io::BufReader::new(file))
}
