//! Special functions and quadrature used by the complexity analysis.
//!
//! Everything here is a pure function of its arguments.

mod marcum;
mod quadrature;
mod special;

pub use marcum::{marcum_q, noncentral_chi2_cdf, poisson_cdf};
pub use quadrature::{gauss_laguerre, QuadratureRule, MAX_LAGUERRE_ORDER};
pub use special::{kummer_1f1, ln_kummer_1f1, pochhammer, KUMMER_MAX_TERMS, KUMMER_REL_TOL};
