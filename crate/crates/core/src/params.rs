use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The parameter pair (alpha, theta) of a two-parameter Poisson-Dirichlet
/// distribution, admissible iff `0 <= alpha < 1` and `theta > -alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PDParams {
    alpha: f64,
    theta: f64,
}

impl PDParams {
    /// Validates and constructs the pair. The error message names the
    /// constraint that failed.
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
            return Err(Error::Domain(format!(
                "alpha = {alpha} outside [0, 1) (need 0 <= alpha < 1)"
            )));
        }
        if !theta.is_finite() || theta <= -alpha {
            return Err(Error::Domain(format!(
                "theta = {theta} must satisfy theta > -alpha = {}",
                -alpha
            )));
        }
        Ok(PDParams { alpha, theta })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The same alpha with theta shifted by `k * alpha`. The shifted pair is
    /// always admissible for `k >= 0` since theta + k*alpha > -alpha.
    pub fn shifted(&self, k: u32) -> PDParams {
        PDParams {
            alpha: self.alpha,
            theta: self.theta + k as f64 * self.alpha,
        }
    }
}

/// Free-function form of [`PDParams::new`].
pub fn validate_params(alpha: f64, theta: f64) -> Result<PDParams> {
    PDParams::new(alpha, theta)
}
