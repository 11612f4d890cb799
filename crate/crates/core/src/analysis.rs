//! Union-bound BER and expected visited-node complexity.
//!
//! Expected complexity follows the pruned-radius model: the decoder is
//! assumed to end on the transmitted branch, so its radius is
//! `ζ = Σ_{n<=ψ_row} |g_n|²`, a central chi-square with `2ψ_row` degrees of
//! freedom scaled by `σ_g²/2`. A node `(i, j)` on any other branch is
//! visited with probability `P(v(i, j) <= ζ)`, treating `v(i, j)` and `ζ`
//! as independent. On the transmitted branch `v(i, t) <= ζ` holds by
//! construction, so each of its `ψ_row` levels counts once.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{first_level_survivors, ml_decode};
use crate::error::{Error, Result};
use crate::model::{
    add_noise, index_hamming_distance, snr_to_noise_var, validate_psi, CandidateSet,
    ChannelRealization, Constellation, SystemConfig,
};
use crate::numerics::{gauss_laguerre, ln_kummer_1f1, marcum_q, QuadratureRule};
use crate::streams::{stream, DOMAIN_TERM2, DOMAIN_THEORY};

/// Parameters of the Rayleigh pairwise error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PepParams {
    pub mu: f64,
    pub sigma_sq: f64,
    pub rho: f64,
}

/// `σ² = ρ(|s_j|² + |s_ĵ|²)/4`, `μ = ½(1 - √(σ²/(1+σ²)))`.
pub fn pep_params(s_j: Complex64, s_jhat: Complex64, rho: f64) -> PepParams {
    let sigma_sq = rho * (s_j.norm_sqr() + s_jhat.norm_sqr()) / 4.0;
    PepParams {
        mu: mu_from_sigma_sq(sigma_sq),
        sigma_sq,
        rho,
    }
}

fn mu_from_sigma_sq(sigma_sq: f64) -> f64 {
    // 1 - r = (1 - r²)/(1 + r) with 1 - r² = 1/(1+σ²), no cancellation.
    let r = (sigma_sq / (1.0 + sigma_sq)).sqrt();
    0.5 / ((1.0 + sigma_sq) * (1.0 + r))
}

/// `μ^L Σ_{k<L} C(L-1+k, k) (1-μ)^k`: Rayleigh PEP with `L`-fold diversity.
pub fn term1_pep(mu: f64, diversity: usize) -> f64 {
    let l = diversity as f64;
    let mut binom = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for k in 0..diversity {
        if k > 0 {
            binom *= (l - 1.0 + k as f64) / k as f64;
            pow *= 1.0 - mu;
        }
        sum += binom * pow;
    }
    mu.powi(diversity as i32) * sum
}

/// Which `(j, ĵ)` pairs the RSD bound sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSummation {
    /// All `M·Nt × M·Nt` ordered pairs.
    #[default]
    Full,
    /// Only `j, ĵ < ψ_col`, as the bound is usually written.
    Literal,
}

/// Union bound `Σ_j Σ_ĵ δ(j, ĵ) [PEP_L(j, ĵ) + term2] / (M·Nt·log2(M·Nt))`.
fn union_bound(
    constellation: &Constellation,
    branches: usize,
    limit: usize,
    diversity: usize,
    rho: f64,
    term2: f64,
) -> f64 {
    let order = constellation.order();
    // PEP depends on the symbol pair only.
    let pep: Vec<f64> = (0..order * order)
        .map(|k| {
            let p = pep_params(constellation.point(k / order), constellation.point(k % order), rho);
            term1_pep(p.mu, diversity)
        })
        .collect();
    let mut sum = 0.0;
    for j in 0..limit {
        for jh in 0..limit {
            if j == jh {
                continue;
            }
            let delta = f64::from(index_hamming_distance(j, jh));
            sum += delta * (pep[(j % order) * order + jh % order] + term2);
        }
    }
    let bits = branches.trailing_zeros() as f64;
    sum / (branches as f64 * bits)
}

/// ML union bound at each SNR point (dB).
pub fn ml_ber_bound(
    config: &SystemConfig,
    constellation: &Constellation,
    snr_points_db: &[f64],
) -> Vec<f64> {
    let branches = config.num_messages();
    snr_points_db
        .iter()
        .map(|&db| {
            let rho = 1.0 / snr_to_noise_var(db);
            union_bound(constellation, branches, branches, config.nr, rho, 0.0)
        })
        .collect()
}

/// RSD union bound with diversity `ψ_row` plus the screening-miss term.
pub fn rsd_ber_bound(
    config: &SystemConfig,
    constellation: &Constellation,
    snr_points_db: &[f64],
    term2: &[f64],
    mode: PairSummation,
) -> Result<Vec<f64>> {
    config.validate()?;
    if term2.len() != snr_points_db.len() {
        return Err(Error::Input(format!(
            "{} term-2 values for {} SNR points",
            term2.len(),
            snr_points_db.len()
        )));
    }
    if let Some(bad) = term2.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Input(format!("term-2 probability {bad} outside [0, 1]")));
    }
    let branches = config.num_messages();
    let limit = match mode {
        PairSummation::Full => branches,
        PairSummation::Literal => config.psi_col,
    };
    Ok(snr_points_db
        .iter()
        .zip(term2)
        .map(|(&db, &t2)| {
            let rho = 1.0 / snr_to_noise_var(db);
            union_bound(constellation, branches, limit, config.psi_row, rho, t2)
        })
        .collect())
}

/// Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl ProbabilityEstimate {
    fn from_counts(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        ProbabilityEstimate {
            probability: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }
}

/// Whether the ML decision lies outside the `ψ_col` level-1 survivors.
pub fn optimum_screened_out(y: &[Complex64], candidates: &CandidateSet, psi_col: usize) -> Result<bool> {
    let kept = first_level_survivors(y, candidates, psi_col)?;
    let opt = ml_decode(y, candidates).estimated_index;
    Ok(kept.binary_search(&opt).is_err())
}

/// Fraction of trials at `config.snr_db` in which screening loses the ML
/// decision.
pub fn estimate_term2(config: &SystemConfig, trials: u64) -> Result<ProbabilityEstimate> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::Input("term-2 estimate needs at least one trial".into()));
    }
    let constellation = Constellation::qam(config.m)?;
    let noise_var = snr_to_noise_var(config.snr_db);
    let snr_key = config.snr_db.to_bits();
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(config.seed, DOMAIN_TERM2, snr_key, trial);
            let h = ChannelRealization::draw(config.nr, config.nt, &mut rng);
            let set = CandidateSet::build(&h, &constellation);
            let t = rand::Rng::gen_range(&mut rng, 0..set.len());
            let y = add_noise(set.vector(t), noise_var, &mut rng);
            u64::from(optimum_screened_out(&y, &set, config.psi_col).expect("validated"))
        })
        .sum();
    Ok(ProbabilityEstimate::from_counts(hits, trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityMethod {
    ClosedForm,
    Quadrature,
}

/// Expected visited nodes of the reliable sphere decoder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityEstimate {
    pub expected_nodes: f64,
    /// Standard error over channel samples (zero for a single realization).
    pub std_error: f64,
    pub method: ComplexityMethod,
    pub psi_row: usize,
    pub psi_col: usize,
    pub channel_samples: usize,
    /// Node terms whose closed form did not converge and were integrated
    /// numerically instead.
    pub fallbacks: usize,
}

/// Rule order used when the closed form breaks down.
const FALLBACK_ORDER: usize = 32;

/// `γ²_{i,j} = Σ_{n<=i} |x_{n,t} - x_{n,j}|²` for `i = 1..=depth`.
fn gamma_profile(candidates: &CandidateSet, t: usize, j: usize, depth: usize) -> Vec<f64> {
    let xt = candidates.vector(t);
    let xj = candidates.vector(j);
    xt.iter()
        .zip(xj)
        .take(depth)
        .scan(0.0, |acc, (a, b)| {
            *acc += (a - b).norm_sqr();
            Some(*acc)
        })
        .collect()
}

fn check_inputs(
    candidates: &CandidateSet,
    t: usize,
    noise_var: f64,
    psi_row: usize,
    kept: &[usize],
) -> Result<()> {
    validate_psi(psi_row, kept.len().max(1), candidates.depth(), candidates.len())?;
    if kept.is_empty() {
        return Err(Error::Config("kept set is empty".into()));
    }
    if t >= candidates.len() {
        return Err(Error::Input(format!("true index {t} out of range")));
    }
    if let Some(&j) = kept.iter().find(|&&j| j >= candidates.len()) {
        return Err(Error::Input(format!("kept index {j} out of range")));
    }
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(Error::Input(format!("noise variance must be positive, got {noise_var}")));
    }
    Ok(())
}

/// Closed-form `P(v(i, j) <= ζ)`:
/// `2^{-i} e^{-γ²/σ²} Σ_{n<L} (i)_n/(2^n n!) ₁F₁(n+i; i; γ²/(2σ²))`.
pub fn visit_probability_closed(level: usize, gamma_sq: f64, noise_var: f64, psi_row: usize) -> Result<f64> {
    let i = level as f64;
    let z = gamma_sq / (2.0 * noise_var);
    let ln2 = std::f64::consts::LN_2;
    let prefix = -i * ln2 - 2.0 * z;
    // ln((i)_n / (2^n n!)), built incrementally.
    let mut ln_coeff = 0.0;
    let mut sum = 0.0;
    for n in 0..psi_row {
        if n > 0 {
            let nf = n as f64;
            ln_coeff += (i + nf - 1.0).ln() - ln2 - nf.ln();
        }
        let ln_f = ln_kummer_1f1(n as f64 + i, i, z)?;
        sum += (prefix + ln_coeff + ln_f).exp();
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Per-`ψ_row` precomputation of `w_k z_k^{L-1}/(L-1)!` and `√(2 z_k)`.
struct RadiusQuadrature {
    coeffs: Vec<f64>,
    radii: Vec<f64>,
}

impl RadiusQuadrature {
    fn new(rule: &QuadratureRule, psi_row: usize) -> Self {
        let ln_fact: f64 = (1..psi_row).map(|k| (k as f64).ln()).sum();
        let coeffs = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&z, &w)| w * ((psi_row - 1) as f64 * z.ln() - ln_fact).exp())
            .collect();
        let radii = rule.nodes().iter().map(|&z| (2.0 * z).sqrt()).collect();
        RadiusQuadrature { coeffs, radii }
    }

    /// `1 - E_ζ[Q_i(√(2γ²)/σ_g, √(2ζ)/σ_g)]`.
    fn visit_probability(&self, level: usize, gamma_sq: f64, noise_var: f64) -> f64 {
        let a = (2.0 * gamma_sq / noise_var).sqrt();
        let expected_q: f64 = self
            .coeffs
            .iter()
            .zip(&self.radii)
            .map(|(&c, &b)| c * marcum_q(level as u32, a, b))
            .sum();
        (1.0 - expected_q).clamp(0.0, 1.0)
    }
}

/// Gauss–Laguerre `P(v(i, j) <= ζ)` with a rule of any order.
pub fn visit_probability_quadrature(
    level: usize,
    gamma_sq: f64,
    noise_var: f64,
    psi_row: usize,
    rule: &QuadratureRule,
) -> f64 {
    RadiusQuadrature::new(rule, psi_row).visit_probability(level, gamma_sq, noise_var)
}

/// Expected complexity of one channel realization from the closed form.
///
/// Terms whose ₁F₁ series does not converge fall back to a 32-point
/// Gauss–Laguerre evaluation and are counted in `fallbacks`.
pub fn expected_complexity_closed(
    candidates: &CandidateSet,
    t: usize,
    noise_var: f64,
    psi_row: usize,
    kept: &[usize],
) -> Result<ComplexityEstimate> {
    check_inputs(candidates, t, noise_var, psi_row, kept)?;
    let mut fallback: Option<RadiusQuadrature> = None;
    let mut fallbacks = 0;
    let mut total = kept.len() as f64;
    for &j in kept {
        if j == t {
            total += psi_row as f64;
            continue;
        }
        for (idx, &g) in gamma_profile(candidates, t, j, psi_row).iter().enumerate() {
            let level = idx + 1;
            total += match visit_probability_closed(level, g, noise_var, psi_row) {
                Ok(p) => p,
                Err(_) => {
                    fallbacks += 1;
                    fallback
                        .get_or_insert_with(|| {
                            let rule = gauss_laguerre(FALLBACK_ORDER).expect("valid order");
                            RadiusQuadrature::new(&rule, psi_row)
                        })
                        .visit_probability(level, g, noise_var)
                }
            };
        }
    }
    Ok(ComplexityEstimate {
        expected_nodes: total,
        std_error: 0.0,
        method: ComplexityMethod::ClosedForm,
        psi_row,
        psi_col: kept.len(),
        channel_samples: 1,
        fallbacks,
    })
}

/// Expected complexity of one channel realization by Gauss–Laguerre
/// quadrature over the radius distribution.
pub fn expected_complexity_quadrature(
    candidates: &CandidateSet,
    t: usize,
    noise_var: f64,
    psi_row: usize,
    kept: &[usize],
    rule: &QuadratureRule,
) -> Result<ComplexityEstimate> {
    check_inputs(candidates, t, noise_var, psi_row, kept)?;
    let quad = RadiusQuadrature::new(rule, psi_row);
    Ok(ComplexityEstimate {
        expected_nodes: quadrature_nodes(candidates, t, noise_var, psi_row, kept, &quad),
        std_error: 0.0,
        method: ComplexityMethod::Quadrature,
        psi_row,
        psi_col: kept.len(),
        channel_samples: 1,
        fallbacks: 0,
    })
}

fn quadrature_nodes(
    candidates: &CandidateSet,
    t: usize,
    noise_var: f64,
    psi_row: usize,
    kept: &[usize],
    quad: &RadiusQuadrature,
) -> f64 {
    let mut total = kept.len() as f64;
    for &j in kept {
        if j == t {
            total += psi_row as f64;
            continue;
        }
        total += gamma_profile(candidates, t, j, psi_row)
            .iter()
            .enumerate()
            .map(|(idx, &g)| quad.visit_probability(idx + 1, g, noise_var))
            .sum::<f64>();
    }
    total
}

/// Quadrature complexity averaged over random `(H, x_t)` draws, one
/// estimate per SNR point. The same channel draws are reused at every SNR.
pub fn expected_complexity_semianalytic(
    config: &SystemConfig,
    snr_points_db: &[f64],
    channel_samples: usize,
    rule: &QuadratureRule,
) -> Result<Vec<ComplexityEstimate>> {
    config.validate()?;
    if channel_samples == 0 {
        return Err(Error::Input("need at least one channel sample".into()));
    }
    let constellation = Constellation::qam(config.m)?;
    let quad = RadiusQuadrature::new(rule, config.psi_row);
    let noise_vars: Vec<f64> = snr_points_db.iter().map(|&db| snr_to_noise_var(db)).collect();

    // per_sample[s][p]: estimate for channel sample s at SNR point p.
    let per_sample: Vec<Vec<f64>> = (0..channel_samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(config.seed, DOMAIN_THEORY, s as u64, 0);
            let h = ChannelRealization::draw(config.nr, config.nt, &mut rng);
            let set = CandidateSet::build(&h, &constellation);
            let t = rand::Rng::gen_range(&mut rng, 0..set.len());
            let kept = first_level_survivors(set.vector(t), &set, config.psi_col)
                .expect("validated");
            noise_vars
                .iter()
                .map(|&nv| quadrature_nodes(&set, t, nv, config.psi_row, &kept, &quad))
                .collect()
        })
        .collect();

    let n = channel_samples as f64;
    Ok((0..snr_points_db.len())
        .map(|p| {
            let mean = per_sample.iter().map(|v| v[p]).sum::<f64>() / n;
            let var = if channel_samples > 1 {
                per_sample.iter().map(|v| (v[p] - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            ComplexityEstimate {
                expected_nodes: mean,
                std_error: (var / n).sqrt(),
                method: ComplexityMethod::Quadrature,
                psi_row: config.psi_row,
                psi_col: config.psi_col,
                channel_samples,
                fallbacks: 0,
            }
        })
        .collect())
}

/// `1 - Ψ / (M·Nt·Nr)`.
pub fn reduction_ratio(nodes: f64, config: &SystemConfig) -> Result<f64> {
    let full = config.ml_nodes() as f64;
    if !(0.0..=full).contains(&nodes) {
        return Err(Error::Input(format!(
            "visited nodes {nodes} outside [0, {full}]"
        )));
    }
    Ok(1.0 - nodes / full)
}
