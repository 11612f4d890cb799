use crate::error::{Error, Result};

/// Relative size of the last retained term in the ₁F₁ series.
pub const KUMMER_REL_TOL: f64 = 1e-15;

/// Hard cap on the number of ₁F₁ series terms.
pub const KUMMER_MAX_TERMS: usize = 10_000;

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + f64::from(k)))
}

/// Kummer's confluent hypergeometric function `₁F₁(a; b; z)`.
///
/// Plain power series. Fails with [`Error::NonConvergence`] when the term
/// cap is reached or the sum overflows; callers with large `z` should use
/// [`ln_kummer_1f1`] instead.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    let (sum, log_scale) = scaled_series(a, b, z)?;
    let value = sum * log_scale.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonConvergence(format!(
            "1F1({a}; {b}; {z}) overflows f64"
        )))
    }
}

/// Natural logarithm of `₁F₁(a; b; z)`, for arguments where the sum is
/// positive (in particular `a, b > 0`, `z >= 0`).
///
/// The partial sum is rescaled whenever it grows large, so the result stays
/// finite long after `₁F₁` itself would overflow.
pub fn ln_kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    let (sum, log_scale) = scaled_series(a, b, z)?;
    if sum <= 0.0 {
        return Err(Error::Input(format!(
            "1F1({a}; {b}; {z}) is not positive, logarithm undefined"
        )));
    }
    Ok(sum.ln() + log_scale)
}

const RESCALE_ABOVE: f64 = 1e200;

/// Returns `(s, l)` with `₁F₁(a; b; z) = s * exp(l)`.
fn scaled_series(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::Input(format!("1F1({a}; {b}; {z}): non-finite argument")));
    }
    if b <= 0.0 && b == b.round() {
        return Err(Error::Input(format!(
            "1F1 undefined for b = {b} (zero or negative integer)"
        )));
    }

    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    let mut log_scale = 0.0_f64;
    for n in 0..KUMMER_MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * z / ((b + nf) * (nf + 1.0));
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok((sum, log_scale));
        }
        // Once the terms are shrinking the tail is bounded by a geometric
        // series, so a small relative term means convergence.
        if ratio.abs() < 1.0 && term.abs() <= KUMMER_REL_TOL * sum.abs() {
            return Ok((sum, log_scale));
        }
        if sum.abs() > RESCALE_ABOVE {
            sum /= RESCALE_ABOVE;
            term /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
    }
    Err(Error::NonConvergence(format!(
        "1F1({a}; {b}; {z}) needs more than {KUMMER_MAX_TERMS} terms"
    )))
}
