//! Spatial-modulation signal model.
//!
//! A message is `log2(Nt·M)` bits: the leading `log2(Nt)` bits pick the
//! active antenna `a`, the trailing `log2(M)` bits the QAM symbol `m`. The
//! canonical flat index is `j = a·M + m`, and because symbol labels are
//! the binary expansion of the symbol index, the full message label is the
//! binary expansion of `j`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions, operating point and RSD parameters of one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// QAM order.
    pub m: usize,
    /// Transmit antennas.
    pub nt: usize,
    /// Receive antennas.
    pub nr: usize,
    /// Average SNR in dB.
    #[serde(default)]
    pub snr_db: f64,
    pub psi_row: usize,
    pub psi_col: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.m, 4 | 16 | 64) {
            return Err(Error::Config(format!(
                "QAM order must be 4, 16 or 64, got {}",
                self.m
            )));
        }
        if self.nt == 0 || !self.nt.is_power_of_two() {
            return Err(Error::Config(format!(
                "transmit antennas must be a power of two, got {}",
                self.nt
            )));
        }
        if self.nr == 0 {
            return Err(Error::Config("need at least one receive antenna".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config(format!("SNR must be finite, got {}", self.snr_db)));
        }
        validate_psi(self.psi_row, self.psi_col, self.nr, self.num_messages())
    }

    /// `M·Nt`, the number of hypotheses (tree branches).
    pub fn num_messages(&self) -> usize {
        self.m * self.nt
    }

    /// Bits per channel use, `log2(M·Nt)`.
    pub fn bits_per_message(&self) -> u32 {
        self.num_messages().trailing_zeros()
    }

    pub fn antenna_bits(&self) -> u32 {
        self.nt.trailing_zeros()
    }

    /// Visited nodes of exhaustive ML, `M·Nt·Nr`.
    pub fn ml_nodes(&self) -> usize {
        self.num_messages() * self.nr
    }
}

pub(crate) fn validate_psi(psi_row: usize, psi_col: usize, nr: usize, branches: usize) -> Result<()> {
    if psi_row == 0 || psi_row > nr {
        return Err(Error::Config(format!(
            "psi_row must be in [1, {nr}], got {psi_row}"
        )));
    }
    if psi_col == 0 || psi_col > branches {
        return Err(Error::Config(format!(
            "psi_col must be in [1, {branches}], got {psi_col}"
        )));
    }
    Ok(())
}

/// `σ_g² = 1/ρ`, `ρ = 10^{snr_db/10}` (unit average symbol energy).
pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Gray-labelled, unit-average-energy constellation.
///
/// Symbol `m` carries label `m` (in `log2(M)` bits, in-phase bits first).
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    /// Square M-QAM with per-axis Gray coding.
    pub fn qam(m: usize) -> Result<Self> {
        if !matches!(m, 4 | 16 | 64) {
            return Err(Error::Config(format!("unsupported QAM order {m}")));
        }
        let side = (m as f64).sqrt().round() as usize;
        let axis_bits = side.trailing_zeros();
        let mask = side - 1;
        let scale = (2.0 * (m as f64 - 1.0) / 3.0).sqrt();
        let amplitude = |gray: usize| {
            let level = gray_decode(gray);
            (2 * level) as f64 - (side - 1) as f64
        };
        let points = (0..m)
            .map(|sym| {
                let i = amplitude(sym >> axis_bits);
                let q = amplitude(sym & mask);
                Complex64::new(i / scale, q / scale)
            })
            .collect();
        Ok(Constellation { points })
    }

    /// Two-point alphabet `{+1, -1}`, for tree-shape tests only.
    pub fn bpsk() -> Self {
        Constellation {
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        }
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.points.len().trailing_zeros()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, symbol: usize) -> Complex64 {
        self.points[symbol]
    }

    /// Label of `symbol` as a `'0'`/`'1'` string.
    pub fn label(&self, symbol: usize) -> String {
        bit_string(symbol as u64, self.bits_per_symbol())
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

/// Convenience wrapper for [`Constellation::qam`].
pub fn build_qam(m: usize) -> Result<Constellation> {
    Constellation::qam(m)
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

fn bit_string(value: u64, width: u32) -> String {
    (0..width)
        .rev()
        .map(|k| if (value >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// One SM message: active antenna and QAM symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SmMessage {
    pub antenna: usize,
    pub symbol: usize,
    /// Constellation size the message belongs to.
    pub order: usize,
}

impl SmMessage {
    pub fn from_index(index: usize, order: usize) -> Self {
        SmMessage {
            antenna: index / order,
            symbol: index % order,
            order,
        }
    }

    /// `j = antenna·M + symbol`.
    pub fn flat_index(&self) -> usize {
        self.antenna * self.order + self.symbol
    }

    /// Full label, antenna bits then symbol bits.
    pub fn label(&self, config: &SystemConfig) -> String {
        bit_string(self.flat_index() as u64, config.bits_per_message())
    }
}

/// Splits `bits` into antenna and symbol fields.
pub fn map_bits(bits: &[bool], config: &SystemConfig) -> Result<SmMessage> {
    let width = config.bits_per_message() as usize;
    if bits.len() != width {
        return Err(Error::Input(format!(
            "expected {width} bits per message, got {}",
            bits.len()
        )));
    }
    let word = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
    Ok(SmMessage::from_index(word, config.m))
}

/// Inverse of [`map_bits`].
pub fn unmap_bits(message: &SmMessage, config: &SystemConfig) -> Vec<bool> {
    let width = config.bits_per_message();
    let j = message.flat_index();
    (0..width).rev().map(|k| (j >> k) & 1 == 1).collect()
}

/// Number of differing label bits.
pub fn hamming_distance(a: &SmMessage, b: &SmMessage) -> u32 {
    index_hamming_distance(a.flat_index(), b.flat_index())
}

#[inline]
pub fn index_hamming_distance(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}

/// Rayleigh flat-fading channel, `Nr × Nt`, entries i.i.d. `CN(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    nr: usize,
    nt: usize,
    /// Row-major: entry `(n, a)` at `n·nt + a`.
    entries: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn draw<R: Rng + ?Sized>(nr: usize, nt: usize, rng: &mut R) -> Self {
        let entries = (0..nr * nt).map(|_| circular_gaussian(rng, 1.0)).collect();
        ChannelRealization { nr, nt, entries }
    }

    pub fn from_entries(nr: usize, nt: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != nr * nt {
            return Err(Error::Input(format!(
                "channel needs {} entries, got {}",
                nr * nt,
                entries.len()
            )));
        }
        Ok(ChannelRealization { nr, nt, entries })
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    #[inline]
    pub fn entry(&self, n: usize, antenna: usize) -> Complex64 {
        self.entries[n * self.nt + antenna]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

/// Sample of `CN(0, variance)`: each real dimension has variance `variance/2`.
pub fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// The `M·Nt` noiseless hypotheses `x_j = h_{a(j)} s_{m(j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    nr: usize,
    order: usize,
    /// Branch-major: element `n` of branch `j` at `j·nr + n`.
    data: Vec<Complex64>,
}

impl CandidateSet {
    pub fn build(channel: &ChannelRealization, constellation: &Constellation) -> Self {
        let nr = channel.nr();
        let order = constellation.order();
        let mut data = Vec::with_capacity(channel.nt() * order * nr);
        for antenna in 0..channel.nt() {
            for &s in constellation.points() {
                data.extend((0..nr).map(|n| channel.entry(n, antenna) * s));
            }
        }
        CandidateSet { nr, order, data }
    }

    /// Number of branches, `M·Nt`.
    pub fn len(&self) -> usize {
        self.data.len() / self.nr
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Tree depth, `Nr`.
    pub fn depth(&self) -> usize {
        self.nr
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn vector(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.nr..(j + 1) * self.nr]
    }

    #[inline]
    pub fn element(&self, n: usize, j: usize) -> Complex64 {
        self.data[j * self.nr + n]
    }

    pub fn message(&self, j: usize) -> SmMessage {
        SmMessage::from_index(j, self.order)
    }
}

/// `y = h_a s_m + g`, with `g` i.i.d. `CN(0, noise_var)`.
pub fn simulate_transmission<R: Rng + ?Sized>(
    message: &SmMessage,
    channel: &ChannelRealization,
    constellation: &Constellation,
    noise_var: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let s = constellation.point(message.symbol);
    (0..channel.nr())
        .map(|n| channel.entry(n, message.antenna) * s + noise_sample(rng, noise_var))
        .collect()
}

fn noise_sample<R: Rng + ?Sized>(rng: &mut R, noise_var: f64) -> Complex64 {
    if noise_var == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        circular_gaussian(rng, noise_var)
    }
}

/// Adds `CN(0, noise_var)` noise to a hypothesis vector.
pub fn add_noise<R: Rng + ?Sized>(x: &[Complex64], noise_var: f64, rng: &mut R) -> Vec<Complex64> {
    x.iter().map(|&v| v + noise_sample(rng, noise_var)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(m: usize, nt: usize, nr: usize) -> SystemConfig {
        SystemConfig {
            m,
            nt,
            nr,
            snr_db: 10.0,
            psi_row: nr,
            psi_col: m * nt,
            seed: 1,
        }
    }

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn qpsk_points() {
        let c = build_qam(4).unwrap();
        let r = 0.5f64.sqrt();
        for p in c.points() {
            assert_relative_eq!(p.re.abs(), r, max_relative = 1e-15);
            assert_relative_eq!(p.im.abs(), r, max_relative = 1e-15);
            assert_relative_eq!(p.norm_sqr(), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn qam16_energy_levels() {
        let c = build_qam(16).unwrap();
        let mut levels: Vec<(f64, usize)> = Vec::new();
        for p in c.points() {
            let e = p.norm_sqr();
            match levels.iter_mut().find(|(v, _)| (v - e).abs() < 1e-12) {
                Some(slot) => slot.1 += 1,
                None => levels.push((e, 1)),
            }
        }
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        let counts: Vec<usize> = levels.iter().map(|l| l.1).collect();
        assert_eq!(counts, vec![4, 8, 4]);
        assert_relative_eq!(levels[2].0, 1.8, max_relative = 1e-14);
        let corner = Complex64::new(3.0, 3.0) / 10f64.sqrt();
        assert!(c.points().iter().any(|p| (p - corner).norm() < 1e-15));
    }

    #[test]
    fn unit_energy_and_gray_neighbours() {
        for m in [4, 16, 64] {
            let c = build_qam(m).unwrap();
            assert!((c.average_energy() - 1.0).abs() < 1e-12);
            let step = 2.0 / (2.0 * (m as f64 - 1.0) / 3.0).sqrt();
            let mut labels: Vec<String> = (0..m).map(|s| c.label(s)).collect();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), m);
            for a in 0..m {
                for b in 0..m {
                    let d = c.point(a) - c.point(b);
                    let axis_neighbour = (d.norm() - step).abs() < 1e-9
                        && (d.re.abs() < 1e-9 || d.im.abs() < 1e-9);
                    if axis_neighbour {
                        assert_eq!((a ^ b).count_ones(), 1, "M={m}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn unsupported_order() {
        assert!(matches!(build_qam(8), Err(Error::Config(_))));
        assert!(matches!(build_qam(2), Err(Error::Config(_))));
    }

    #[test]
    fn config_validation() {
        assert!(config(16, 8, 8).validate().is_ok());
        assert!(config(8, 8, 8).validate().is_err());
        assert!(config(16, 6, 8).validate().is_err());
        let mut c = config(16, 8, 8);
        c.psi_row = 9;
        assert!(c.validate().is_err());
        c.psi_row = 8;
        c.psi_col = 129;
        assert!(c.validate().is_err());
        c.psi_col = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn bit_mapping() {
        let cfg = config(4, 4, 2);
        let msg = map_bits(&bits("0000"), &cfg).unwrap();
        assert_eq!((msg.antenna, msg.symbol), (0, 0));
        assert_eq!(build_qam(4).unwrap().label(msg.symbol), "00");
        let msg = map_bits(&bits("1101"), &cfg).unwrap();
        assert_eq!(msg.antenna, 3);
        assert_eq!(build_qam(4).unwrap().label(msg.symbol), "01");
        assert_eq!(msg.label(&cfg), "1101");
        assert!(map_bits(&bits("110"), &cfg).is_err());
    }

    #[test]
    fn bit_mapping_round_trip() {
        let cfg = config(16, 8, 8);
        for j in 0..cfg.num_messages() {
            let w: Vec<bool> = (0..7).rev().map(|k| (j >> k) & 1 == 1).collect();
            let msg = map_bits(&w, &cfg).unwrap();
            assert_eq!(msg.flat_index(), j);
            assert_eq!(unmap_bits(&msg, &cfg), w);
        }
    }

    #[test]
    fn hamming_against_label_strings() {
        let cfg = config(64, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a0 = SmMessage::from_index(0, 64);
        assert_eq!(hamming_distance(&a0, &a0), 0);
        let ones = SmMessage::from_index(0b11111111, 64);
        assert_eq!(hamming_distance(&a0, &ones), 8);
        for _ in 0..1000 {
            let a = SmMessage::from_index(rng.gen_range(0..256), 64);
            let b = SmMessage::from_index(rng.gen_range(0..256), 64);
            let oracle = a
                .label(&cfg)
                .chars()
                .zip(b.label(&cfg).chars())
                .filter(|(x, y)| x != y)
                .count() as u32;
            assert_eq!(hamming_distance(&a, &b), oracle);
            assert_eq!(hamming_distance(&a, &b), hamming_distance(&b, &a));
            assert_eq!(hamming_distance(&a, &b) == 0, a == b);
        }
    }

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_noise_var(0.0), 1.0);
        assert_relative_eq!(snr_to_noise_var(10.0), 0.1, max_relative = 1e-15);
        assert_relative_eq!(snr_to_noise_var(3.0), 0.501_187_233_627_272_3, max_relative = 1e-15);
    }

    #[test]
    fn candidate_construction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = ChannelRealization::draw(3, 4, &mut rng);
        let c = build_qam(16).unwrap();
        let set = CandidateSet::build(&h, &c);
        assert_eq!(set.len(), 64);
        for j in 0..64 {
            let msg = set.message(j);
            for n in 0..3 {
                assert_eq!(set.vector(j)[n], h.entry(n, msg.antenna) * c.point(msg.symbol));
            }
        }
    }

    #[test]
    fn noiseless_transmission_hits_candidate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = ChannelRealization::draw(4, 2, &mut rng);
        let c = build_qam(4).unwrap();
        let set = CandidateSet::build(&h, &c);
        let msg = SmMessage::from_index(5, 4);
        let y = simulate_transmission(&msg, &h, &c, 0.0, &mut rng);
        assert_eq!(y.as_slice(), set.vector(5));
        for j in 0..set.len() {
            let d: f64 = y.iter().zip(set.vector(j)).map(|(a, b)| (a - b).norm_sqr()).sum();
            assert_eq!(d == 0.0, j == 5);
        }
    }

    #[test]
    fn noise_energy_matches_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = ChannelRealization::draw(4, 2, &mut rng);
        let c = build_qam(16).unwrap();
        let msg = SmMessage::from_index(9, 16);
        let x: Vec<Complex64> = (0..4).map(|n| h.entry(n, msg.antenna) * c.point(msg.symbol)).collect();
        let var = 0.3;
        let draws = 100_000;
        let samples: Vec<f64> = (0..draws)
            .map(|_| {
                let y = simulate_transmission(&msg, &h, &c, var, &mut rng);
                y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / draws as f64;
        let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (draws - 1) as f64).sqrt();
        let se = sd / (draws as f64).sqrt();
        assert!((mean - 4.0 * var).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn channel_entry_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 50_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let h = ChannelRealization::draw(2, 2, &mut rng);
            acc += h.entries().iter().map(|e| e.norm_sqr()).sum::<f64>();
        }
        let var = acc / (4 * n) as f64;
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }
}
