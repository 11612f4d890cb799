//! Reference implementations shared by the integration tests.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use smrsd::model::{add_noise, snr_to_noise_var, CandidateSet, ChannelRealization, Constellation};

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates over `[a, b]` split into `panels` equal pieces.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            adaptive_simpson(f, lo, lo + h, tol / panels as f64)
        })
        .sum()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Composite 20-point Gauss–Legendre over `panels` equal pieces of `[a, b]`.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(mid + 0.5 * h * xi);
        }
    }
    0.5 * h * sum
}

/// `e^{-x} I_n(x)` from `(1/π)∫_0^π e^{x(cos θ - 1)} cos(nθ) dθ`, by the
/// trapezoidal rule (spectrally accurate for this periodic integrand).
pub fn scaled_bessel_i(n: u32, x: f64) -> f64 {
    let steps = 64 + (8.0 * x.sqrt()).ceil() as usize + 4 * n as usize;
    let h = std::f64::consts::PI / steps as f64;
    let mut sum = 0.0;
    for k in 0..=steps {
        let t = k as f64 * h;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        sum += w * (x * (t.cos() - 1.0)).exp() * (n as f64 * t).cos();
    }
    sum * h / std::f64::consts::PI
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Marcum Q by direct integration of its defining density:
/// `Q_m(a, b) = ∫_b^∞ x (x/a)^{m-1} e^{-(x²+a²)/2} I_{m-1}(ax) dx`.
pub fn marcum_q_integral(m: u32, a: f64, b: f64) -> f64 {
    let density = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if a == 0.0 {
            let ln = (2 * m - 1) as f64 * x.ln()
                - x * x / 2.0
                - (m - 1) as f64 * std::f64::consts::LN_2
                - ln_factorial(m - 1);
            return ln.exp();
        }
        let ln = x.ln() + (m - 1) as f64 * (x / a).ln() - (x - a).powi(2) / 2.0;
        ln.exp() * scaled_bessel_i(m - 1, a * x)
    };
    let upper = a.max(b) + 15.0 + 2.0 * m as f64;
    if b >= upper {
        return 0.0;
    }
    let panels = ((upper - b) * 4.0).ceil() as usize;
    integrate_gl(&density, b, upper, panels)
}

pub fn qam(m: usize) -> Constellation {
    Constellation::qam(m).unwrap()
}

/// A random instance: candidate set, true index and noisy observation.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    constellation: &Constellation,
    nt: usize,
    nr: usize,
    snr_db: f64,
) -> (CandidateSet, usize, Vec<Complex64>) {
    let h = ChannelRealization::draw(nr, nt, rng);
    let set = CandidateSet::build(&h, constellation);
    let t = rng.gen_range(0..set.len());
    let y = add_noise(set.vector(t), snr_to_noise_var(snr_db), rng);
    (set, t, y)
}
