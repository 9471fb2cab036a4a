//! The coefficient family `c_{n,alpha,theta}` and its recurrence.
//!
//! `c_{n,alpha,theta} = prod_{i=1..n} Gamma(theta+1+(i-1)alpha) /
//! (Gamma(1-alpha) Gamma(theta+i alpha))`, with `c_0 = 1`. The product grows
//! factorially, so everything is carried in log space.

use crate::error::{Error, Result};
use crate::params::PDParams;
use crate::special::log_gamma;

/// log of `c_{n,alpha,theta}`; c is strictly positive on the admissible
/// domain so the logarithm is always defined.
pub fn log_c(n: u32, params: PDParams) -> f64 {
    let (alpha, theta) = (params.alpha(), params.theta());
    let mut acc = 0.0;
    for i in 1..=n {
        let i = i as f64;
        acc += log_gamma(theta + 1.0 + (i - 1.0) * alpha) - log_gamma(1.0 - alpha)
            - log_gamma(theta + i * alpha);
    }
    acc
}

/// `c_{n,alpha,theta}` itself. Overflows to `inf` for very large n; callers
/// needing big n work with [`log_c`].
pub fn c_coeff(n: u32, params: PDParams) -> f64 {
    log_c(n, params).exp()
}

/// Checks the splitting identity
/// `c_{m+n,alpha,theta} = c_{m,alpha,theta} c_{n,alpha,theta+alpha m}`
/// in log space at tolerance 1e-10.
pub fn c_recurrence_check(m: u32, n: u32, params: PDParams) -> bool {
    let lhs = log_c(m + n, params);
    let shifted = params.shifted(m);
    let rhs = log_c(m, params) + log_c(n, shifted);
    (lhs - rhs).abs() < 1e-10
}

/// `C_alpha = alpha / Gamma(1 - alpha)`; zero at alpha = 0.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "C_alpha needs alpha in [0,1) (got {alpha})"
        )));
    }
    Ok(alpha / log_gamma(1.0 - alpha).exp())
}
