use rand::Rng;
use rayon::prelude::*;

use super::records::SweepRecord;
use super::spec::{DecoderKind, ExperimentSpec};
use crate::analysis::reduction_ratio;
use crate::decoders::{Detector, MlDecoder, RsdDecoder};
use crate::error::Result;
use crate::model::{
    add_noise, index_hamming_distance, map_bits, snr_to_noise_var, CandidateSet,
    ChannelRealization, Constellation,
};
use crate::streams::{stream, DOMAIN_SWEEP};

/// Trials are dispatched in batches that double from `MIN_BATCH` up to
/// `MAX_BATCH`; stopping is checked only at batch boundaries, so the trial
/// count never depends on scheduling.
const MIN_BATCH: u64 = 256;
const MAX_BATCH: u64 = 4096;

/// Exact integer counters for one decoder at one SNR point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecoderTally {
    pub bit_errors: u64,
    pub nodes_paper: u64,
    pub nodes_total: u64,
    pub cap_hits: u64,
}

impl DecoderTally {
    fn merge(&mut self, other: &DecoderTally) {
        self.bit_errors += other.bit_errors;
        self.nodes_paper += other.nodes_paper;
        self.nodes_total += other.nodes_total;
        self.cap_hits += other.cap_hits;
    }
}

/// Counters for all decoders at one SNR point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointTally {
    pub trials: u64,
    pub decoders: Vec<DecoderTally>,
}

impl PointTally {
    fn zero(n: usize) -> Self {
        PointTally {
            trials: 0,
            decoders: vec![DecoderTally::default(); n],
        }
    }

    fn merge(mut self, other: PointTally) -> Self {
        self.trials += other.trials;
        for (a, b) in self.decoders.iter_mut().zip(&other.decoders) {
            a.merge(b);
        }
        self
    }
}

/// A decoder instance plus the labels it reports under.
struct Lane {
    kind: DecoderKind,
    psi_row: usize,
    psi_col: usize,
    detector: Box<dyn Detector>,
}

fn lanes(spec: &ExperimentSpec) -> Result<Vec<Lane>> {
    let sys = &spec.system;
    let branches = sys.num_messages();
    let mut out = Vec::new();
    for &kind in &spec.decoders {
        match kind {
            DecoderKind::Ml => out.push(Lane {
                kind,
                psi_row: sys.nr,
                psi_col: branches,
                detector: Box::new(MlDecoder),
            }),
            DecoderKind::Rsd => {
                for psi_row in spec.psi_rows() {
                    out.push(Lane {
                        kind,
                        psi_row,
                        psi_col: sys.psi_col,
                        detector: Box::new(RsdDecoder::new(psi_row, sys.psi_col, sys.nr, branches)?),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Per-SNR counters and the derived CSV rows.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub tallies: Vec<PointTally>,
}

impl SweepOutcome {
    pub fn cap_hits(&self) -> u64 {
        self.tallies
            .iter()
            .flat_map(|t| &t.decoders)
            .map(|d| d.cap_hits)
            .sum()
    }
}

/// Runs every trial of one SNR point. All decoders see the same trials.
fn run_trial(
    spec: &ExperimentSpec,
    constellation: &Constellation,
    lanes: &[Lane],
    snr_index: u64,
    trial: u64,
    noise_var: f64,
    acc: &mut PointTally,
) {
    let sys = &spec.system;
    let mut rng = stream(sys.seed, DOMAIN_SWEEP, snr_index, trial);
    let bits: Vec<bool> = (0..sys.bits_per_message()).map(|_| rng.gen()).collect();
    let message = map_bits(&bits, sys).expect("width matches config");
    let h = ChannelRealization::draw(sys.nr, sys.nt, &mut rng);
    let candidates = CandidateSet::build(&h, constellation);
    let t = message.flat_index();
    let y = add_noise(candidates.vector(t), noise_var, &mut rng);

    acc.trials += 1;
    for (lane, tally) in lanes.iter().zip(acc.decoders.iter_mut()) {
        let out = lane.detector.decode(&y, &candidates);
        tally.bit_errors += u64::from(index_hamming_distance(out.estimated_index, t));
        tally.nodes_paper += out.visited_paper as u64;
        tally.nodes_total += out.visited_total as u64;
        tally.cap_hits += u64::from(out.cap_hit);
    }
}

/// Simulates one SNR point (grid position `snr_index`) at an explicit noise
/// variance, until the stopping rule is met.
pub fn simulate_point(spec: &ExperimentSpec, snr_index: usize, noise_var: f64) -> Result<PointTally> {
    spec.validate()?;
    let lanes = lanes(spec)?;
    let constellation = Constellation::qam(spec.system.m)?;
    Ok(simulate_lanes(spec, &constellation, &lanes, snr_index as u64, noise_var))
}

fn simulate_lanes(
    spec: &ExperimentSpec,
    constellation: &Constellation,
    lanes: &[Lane],
    snr_index: u64,
    noise_var: f64,
) -> PointTally {
    let mut total = PointTally::zero(lanes.len());
    loop {
        let start = total.trials;
        let end = (start + start.clamp(MIN_BATCH, MAX_BATCH)).min(spec.max_trials);
        let batch = (start..end)
            .into_par_iter()
            .fold(
                || PointTally::zero(lanes.len()),
                |mut acc, trial| {
                    run_trial(spec, constellation, lanes, snr_index, trial, noise_var, &mut acc);
                    acc
                },
            )
            .reduce(|| PointTally::zero(lanes.len()), PointTally::merge);
        total = total.merge(batch);

        let errors_met = total
            .decoders
            .iter()
            .all(|d| d.bit_errors >= spec.min_bit_errors);
        if (total.trials >= spec.min_trials && errors_met) || total.trials >= spec.max_trials {
            return total;
        }
    }
}

/// Monte Carlo BER and visited-node sweep over the spec's SNR grid.
///
/// Output is a pure function of the spec: trial `t` at grid point `p` draws
/// from its own stream keyed by `(seed, p, t)`, and all counters are
/// integers summed in any order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let sys = &spec.system;
    let lanes = lanes(spec)?;
    let constellation = Constellation::qam(sys.m)?;
    let bits = f64::from(sys.bits_per_message());

    let mut records = Vec::new();
    let mut tallies = Vec::new();
    for (p, &snr_db) in spec.snr_points_db.iter().enumerate() {
        let tally = simulate_lanes(spec, &constellation, &lanes, p as u64, snr_to_noise_var(snr_db));
        let n = tally.trials as f64;
        for (lane, d) in lanes.iter().zip(&tally.decoders) {
            let total_bits = n * bits;
            let ber = d.bit_errors as f64 / total_bits;
            let nodes_paper = d.nodes_paper as f64 / n;
            let mut rec = SweepRecord::new(snr_db, lane.kind, lane.psi_row, lane.psi_col);
            rec.ber_sim = Some(ber);
            rec.ber_se = Some((ber * (1.0 - ber) / total_bits).sqrt());
            rec.nodes_paper = Some(nodes_paper);
            rec.nodes_total = Some(d.nodes_total as f64 / n);
            rec.reduction_sim = Some(reduction_ratio(nodes_paper, sys)?);
            rec.trials = Some(tally.trials);
            records.push(rec);
        }
        tallies.push(tally);
    }
    Ok(SweepOutcome { records, tallies })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        ExperimentSpec::from_json(
            r#"{
            "system": {"m": 4, "nt": 2, "nr": 2, "psi_row": 2, "psi_col": 4, "seed": 5},
            "snr_points_db": [0, 6, 12],
            "min_trials": 3000,
            "min_bit_errors": 50,
            "max_trials": 20000,
            "rsd_psi_row_list": [1, 2],
            "outputs": {"dir": "unused"}
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let mut s = spec();
        s.min_bit_errors = 0;
        let tally = simulate_point(&s, 0, 0.0).unwrap();
        assert!(tally.trials >= 3000);
        assert!(tally.decoders.iter().all(|d| d.bit_errors == 0));
    }

    #[test]
    fn stopping_rule_and_record_shape() {
        let s = spec();
        let out = run_sweep(&s).unwrap();
        // ML + RSD(1) + RSD(2) per SNR point.
        assert_eq!(out.records.len(), 9);
        for (rec, tally) in out.records.chunks(3).zip(&out.tallies) {
            let met = tally.trials >= 3000 && tally.decoders.iter().all(|d| d.bit_errors >= 50);
            assert!(met || tally.trials == 20_000);
            assert!(tally.trials % MIN_BATCH == 0 || tally.trials == 20_000);
            assert_eq!(rec[0].decoder, DecoderKind::Ml);
            assert_eq!((rec[0].psi_row, rec[0].psi_col), (2, 8));
            assert_eq!((rec[1].psi_row, rec[2].psi_row), (1, 2));
            for r in rec {
                let ber = r.ber_sim.unwrap();
                assert!((0.0..=0.5).contains(&ber));
                let red = r.reduction_sim.unwrap();
                assert!((0.0..=1.0).contains(&red));
            }
        }
        assert_eq!(out.cap_hits(), 0);
    }

    #[test]
    fn worker_count_does_not_change_counters() {
        let s = spec();
        let one = super::super::with_workers(Some(1), || run_sweep(&s).unwrap().tallies).unwrap();
        let four = super::super::with_workers(Some(4), || run_sweep(&s).unwrap().tallies).unwrap();
        assert_eq!(one, four);
    }
}
