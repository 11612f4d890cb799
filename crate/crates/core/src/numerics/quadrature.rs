//! Gauss–Laguerre rules for `∫₀^∞ e^{-x} f(x) dx`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const MAX_LAGUERRE_ORDER: usize = 64;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_REL_TOL: f64 = 1e-14;
/// Rounding in the recurrence can stall Newton just above `NEWTON_REL_TOL`
/// for high orders; steps this small still mean a converged root.
const NEWTON_STALL_TOL: f64 = 1e-11;

/// Nodes and weights of a `β`-point Gauss–Laguerre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Roots of the degree-`β` Laguerre polynomial, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Approximates `∫₀^∞ e^{-x} f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Builds the `beta`-point Gauss–Laguerre rule, `1 <= beta <= 64`.
///
/// Roots come from Newton iteration on the three-term recurrence, seeded
/// with the usual asymptotic guesses; if that fails to produce a strictly
/// increasing set of converged roots, the eigenvalues of the Jacobi matrix
/// are used as seeds instead.
///
/// # Panics
///
/// If neither root finder converges. That is a defect, not an input error.
pub fn gauss_laguerre(beta: usize) -> Result<QuadratureRule> {
    if beta == 0 || beta > MAX_LAGUERRE_ORDER {
        return Err(Error::Input(format!(
            "Gauss-Laguerre order must be in 1..={MAX_LAGUERRE_ORDER}, got {beta}"
        )));
    }
    let nodes = newton_roots(beta)
        .or_else(|| jacobi_roots(beta))
        .unwrap_or_else(|| panic!("Gauss-Laguerre root finding failed for order {beta}"));
    let weights = nodes.iter().map(|&x| weight(beta, x)).collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Returns `(L_n(x), L_{n-1}(x))`.
fn laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0 - x) * p2 - jf * p3) / (jf + 1.0);
    }
    (p1, p2)
}

/// Newton-refines a seed to a root of `L_n`.
fn refine(n: usize, mut x: f64) -> Option<f64> {
    let nf = n as f64;
    let mut last_step = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let (p, pm1) = laguerre_pair(n, x);
        // x L_n'(x) = n (L_n(x) - L_{n-1}(x))
        let dp = nf * (p - pm1) / x;
        let step = p / dp;
        x -= step;
        if !x.is_finite() || x <= 0.0 {
            return None;
        }
        if step.abs() <= NEWTON_REL_TOL * x {
            return Some(x);
        }
        last_step = step.abs();
    }
    (last_step <= NEWTON_STALL_TOL * x).then_some(x)
}

fn newton_roots(n: usize) -> Option<Vec<f64>> {
    let nf = n as f64;
    let mut roots: Vec<f64> = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - roots[i - 2])
            }
        };
        z = refine(n, z)?;
        roots.push(z);
    }
    strictly_increasing(&roots).then_some(roots)
}

/// Golub–Welsch: eigenvalues of the symmetric tridiagonal Jacobi matrix,
/// then Newton polish.
fn jacobi_roots(n: usize) -> Option<Vec<f64>> {
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = (2 * k + 1) as f64;
        if k + 1 < n {
            let off = (k + 1) as f64;
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mut seeds: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    seeds.sort_by(f64::total_cmp);
    let roots = seeds
        .into_iter()
        .map(|s| refine(n, s))
        .collect::<Option<Vec<_>>>()?;
    strictly_increasing(&roots).then_some(roots)
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.first().is_some_and(|&x| x > 0.0) && xs.windows(2).all(|w| w[0] < w[1])
}

/// `w = x / ((n+1)² L_{n+1}(x)²)`.
fn weight(n: usize, x: f64) -> f64 {
    let (next, _) = laguerre_pair(n + 1, x);
    let np1 = (n + 1) as f64;
    x / (np1 * np1 * next * next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(p: u32) -> f64 {
        (1..=p).map(f64::from).product()
    }

    #[test]
    fn one_point_rule() {
        let r = gauss_laguerre(1).unwrap();
        assert_relative_eq!(r.nodes()[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.weights()[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn two_point_rule_closed_form() {
        let r = gauss_laguerre(2).unwrap();
        let s2 = 2f64.sqrt();
        assert_relative_eq!(r.nodes()[0], 2.0 - s2, max_relative = 1e-14);
        assert_relative_eq!(r.nodes()[1], 2.0 + s2, max_relative = 1e-14);
        // w = x / (9 L_3(x)^2) -> (2 ± √2)/4
        assert_relative_eq!(r.weights()[0], (2.0 + s2) / 4.0, max_relative = 1e-14);
        assert_relative_eq!(r.weights()[1], (2.0 - s2) / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn order_bounds() {
        assert!(gauss_laguerre(0).is_err());
        assert!(gauss_laguerre(65).is_err());
        assert_eq!(gauss_laguerre(64).unwrap().order(), 64);
    }

    #[test]
    fn invariants_for_all_orders() {
        for beta in 1..=MAX_LAGUERRE_ORDER {
            let r = gauss_laguerre(beta).unwrap();
            assert!(strictly_increasing(r.nodes()), "order {beta}");
            assert!(r.weights().iter().all(|&w| w > 0.0), "order {beta}");
            let s0: f64 = r.weights().iter().sum();
            let s1 = r.integrate(|x| x);
            assert!((s0 - 1.0).abs() < 1e-12, "order {beta}: Σw = {s0}");
            assert!((s1 - 1.0).abs() < 1e-12, "order {beta}: Σwz = {s1}");
        }
    }

    #[test]
    fn seven_point_moments() {
        let r = gauss_laguerre(7).unwrap();
        let m13 = r.integrate(|x| x.powi(13));
        assert_relative_eq!(m13, factorial(13), max_relative = 1e-10);
    }

    #[test]
    fn jacobi_fallback_agrees_with_newton() {
        for beta in [2, 7, 16, 40] {
            let a = newton_roots(beta).unwrap();
            let b = jacobi_roots(beta).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_relative_eq!(x, y, max_relative = 1e-13);
            }
        }
    }
}
