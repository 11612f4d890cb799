use super::records::SweepRecord;
use super::spec::{DecoderKind, ExperimentSpec};
use crate::analysis::{
    estimate_term2, expected_complexity_semianalytic, ml_ber_bound, reduction_ratio,
    rsd_ber_bound,
};
use crate::error::Result;
use crate::model::{Constellation, SystemConfig};
use crate::numerics::gauss_laguerre;

/// Analytical counterpart of [`run_sweep`](super::run_sweep): union bounds
/// and semi-analytic node counts on the same `(SNR, decoder, ψ_row)` grid.
pub fn run_theory(spec: &ExperimentSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let sys = &spec.system;
    let constellation = Constellation::qam(sys.m)?;
    let snrs = &spec.snr_points_db;
    let ml_nodes = sys.ml_nodes() as f64;
    let rule = gauss_laguerre(spec.quadrature_order)?;

    let ml_rows = spec
        .decoders
        .contains(&DecoderKind::Ml)
        .then(|| ml_ber_bound(sys, &constellation, snrs));

    let mut rsd_rows: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    if spec.decoders.contains(&DecoderKind::Rsd) {
        let term2 = snrs
            .iter()
            .map(|&db| {
                if spec.term2_trials == 0 {
                    return Ok(0.0);
                }
                let cfg = SystemConfig { snr_db: db, ..sys.clone() };
                Ok(estimate_term2(&cfg, spec.term2_trials)?.probability)
            })
            .collect::<Result<Vec<f64>>>()?;
        for psi_row in spec.psi_rows() {
            let cfg = SystemConfig { psi_row, ..sys.clone() };
            let bound = rsd_ber_bound(&cfg, &constellation, snrs, &term2, spec.pair_summation)?;
            let nodes = expected_complexity_semianalytic(&cfg, snrs, spec.channel_samples_theory, &rule)?
                .into_iter()
                .map(|e| e.expected_nodes)
                .collect();
            rsd_rows.push((psi_row, bound, nodes));
        }
    }

    let mut records = Vec::new();
    for (p, &snr_db) in snrs.iter().enumerate() {
        // Same row order as the simulation output.
        for &kind in &spec.decoders {
            match kind {
                DecoderKind::Ml => {
                    let bound = ml_rows.as_ref().expect("computed above");
                    let mut rec = SweepRecord::new(snr_db, kind, sys.nr, sys.num_messages());
                    rec.ber_bound = Some(bound[p]);
                    rec.nodes_theory = Some(ml_nodes);
                    rec.reduction_theory = Some(0.0);
                    records.push(rec);
                }
                DecoderKind::Rsd => {
                    for (psi_row, bound, nodes) in &rsd_rows {
                        let mut rec = SweepRecord::new(snr_db, kind, *psi_row, sys.psi_col);
                        rec.ber_bound = Some(bound[p]);
                        rec.nodes_theory = Some(nodes[p]);
                        rec.reduction_theory = Some(reduction_ratio(nodes[p].min(ml_nodes), sys)?);
                        records.push(rec);
                    }
                }
            }
        }
    }
    Ok(records)
}
