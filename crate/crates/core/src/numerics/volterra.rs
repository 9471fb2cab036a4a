//! Marching solvers for the delay equations satisfied by the generalized
//! Dickman function.
//!
//! `volterra_march` (0 < alpha < 1) discretizes
//! `(s-1)^theta rho(s-1) + int_{s-1}^s (s-t)^-alpha t^theta d rho(t) = 0`
//! by product integration: piecewise-constant d-rho increments against the
//! exactly integrated kernel, with t^theta taken at interval midpoints.
//!
//! `renewal_march` (alpha = 0, theta > 0) marches
//! `rho(s) = theta s^-theta int_{s-1}^s t^{theta-1} rho(t) dt`
//! with composite trapezoid sums refined by Richardson extrapolation.
//!
//! Grids use h = 2^-k so the delay s - 1 always lands on a node. All powers
//! t^theta are evaluated as exp(theta ln(t/s)) so large theta cannot
//! overflow.

use crate::error::{Error, Result};
use crate::numerics::tabulated::{InterpOrder, TabulatedFunction};

/// Uniform grid [0, s_max] with dyadic step.
#[derive(Debug, Clone, Copy)]
pub struct MarchGrid {
    pub s_max: f64,
    pub h: f64,
}

impl MarchGrid {
    pub fn new(s_max: f64, h: f64) -> Result<Self> {
        if !(s_max >= 1.0) {
            return Err(Error::Domain(format!("s_max must be >= 1 (got {s_max})")));
        }
        let inv = 1.0 / h;
        if !(h > 0.0) || inv.fract() != 0.0 || !(inv as u64).is_power_of_two() || inv < 2.0 {
            return Err(Error::Domain(format!(
                "step h = {h} must be 2^-k with k >= 1 so the unit delay is node-aligned"
            )));
        }
        Ok(MarchGrid { s_max, h })
    }

    fn node_count(&self) -> usize {
        (self.s_max / self.h).ceil() as usize + 1
    }

    fn per_unit(&self) -> usize {
        (1.0 / self.h) as usize
    }
}

/// Gross monotonicity-violation threshold; small positive upticks from local
/// truncation error are clamped, anything larger is reported.
const MONOTONE_SLACK: f64 = 1e-5;

fn finalize(grid_values: Vec<f64>, h: f64) -> Result<TabulatedFunction> {
    TabulatedFunction::new(0.0, h, grid_values, InterpOrder::CubicMonotone)
}

/// Product-integration march for 0 < alpha < 1 (any admissible theta).
///
/// `seed(s)` must return `Some(rho(s))` on a prefix of the grid that covers at
/// least [0, 1]; the march continues beyond the seeded region. Seeding past 1
/// (e.g. with exact one-term series values on [0, 2]) keeps the scheme away
/// from the d-rho singularity at s = 1 when theta + alpha < 1.
pub fn volterra_march(
    alpha: f64,
    theta: f64,
    grid: MarchGrid,
    seed: impl Fn(f64) -> Option<f64>,
) -> Result<TabulatedFunction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "volterra_march needs 0 < alpha < 1 (got {alpha}); use renewal_march at alpha = 0"
        )));
    }
    let n_nodes = grid.node_count();
    let n_unit = grid.per_unit();
    let h = grid.h;

    let mut rho = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        match seed(i as f64 * h) {
            Some(v) => rho.push(v),
            None => break,
        }
    }
    if rho.len() <= n_unit {
        return Err(Error::Domain(
            "seed must cover at least the unit interval [0, 1]".into(),
        ));
    }

    // Exactly integrated kernel over one interval at distance d steps from s:
    // K_d = int_{t in [s-dh, s-(d-1)h]} (s-t)^-alpha dt
    //     = h^{1-alpha} (d^{1-alpha} - (d-1)^{1-alpha}) / (1-alpha)
    let one_m_a = 1.0 - alpha;
    let kernel: Vec<f64> = (1..=n_unit)
        .map(|d| h.powf(one_m_a) * ((d as f64).powf(one_m_a) - (d as f64 - 1.0).powf(one_m_a)) / one_m_a)
        .collect();
    let ln_node: Vec<f64> = (0..n_nodes).map(|i| (i as f64 * h).ln()).collect();
    let ln_mid: Vec<f64> = (0..n_nodes).map(|i| ((i as f64 + 0.5) * h).ln()).collect();

    let start = rho.len();
    for j in start..n_nodes {
        let ln_s = ln_node[j];
        let base = j - n_unit; // node at s - 1
        let mut acc = (theta * (ln_node[base] - ln_s)).exp() * rho[base];
        for k in base..j - 1 {
            let d_rho = rho[k + 1] - rho[k];
            if d_rho != 0.0 {
                acc += d_rho * (theta * (ln_mid[k] - ln_s)).exp() * kernel[j - k - 1] / h;
            }
        }
        let newest_coeff = (theta * (ln_mid[j - 1] - ln_s)).exp() * kernel[0] / h;
        if !newest_coeff.is_finite() || newest_coeff == 0.0 {
            return Err(Error::SingularSolve(format!(
                "degenerate newest-increment coefficient at s = {}",
                j as f64 * h
            )));
        }
        let d_new = -acc / newest_coeff;
        let prev = rho[j - 1];
        let mut v = prev + d_new;
        if v > prev + MONOTONE_SLACK || v < -MONOTONE_SLACK {
            return Err(Error::Numerical(format!(
                "volterra march left [0, rho(s-h)] at s = {} (value {v})",
                j as f64 * h
            )));
        }
        v = v.clamp(0.0, prev);
        rho.push(v);
    }
    finalize(rho, h)
}

/// Expected number of weights >= 1/s under PD(0, theta):
/// `theta int_{1/s}^1 v^-1 (1-v)^{theta-1} dv = theta sum_j y^{theta+j} /
/// (theta+j)`, y = 1 - 1/s. While this is tiny, `rho = 1 - E[N]` holds to
/// second order (the pair-count correction is O(E[N]^2)).
fn expected_count_alpha0(theta: f64, s: f64) -> f64 {
    if s <= 1.0 {
        return 0.0;
    }
    let y = 1.0 - 1.0 / s;
    let mut y_pow = y.powf(theta);
    let mut acc = y_pow / theta;
    for j in 1..200_000 {
        y_pow *= y;
        let term = y_pow / (theta + j as f64);
        acc += term;
        if term < 1e-18 * acc {
            break;
        }
    }
    theta * acc
}

/// Renewal march for alpha = 0, theta > 0. rho = 1 on [0, 1]; the region
/// where the exceedance count is negligible (E[N] <= 1e-9) is seeded with
/// `1 - E[N]`, and the march takes over once the window integrand (which
/// concentrates on a scale s/theta near t = s) is resolved by the grid.
pub fn renewal_march(theta: f64, grid: MarchGrid) -> Result<TabulatedFunction> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!(
            "renewal_march needs theta > 0 (got {theta})"
        )));
    }
    let n_nodes = grid.node_count();
    let n_unit = grid.per_unit();
    let h = grid.h;

    let ln_node: Vec<f64> = (0..n_nodes).map(|i| (i as f64 * h).ln()).collect();
    let mut rho = vec![1.0; (n_unit + 1).min(n_nodes)];
    while rho.len() < n_nodes {
        let s = rho.len() as f64 * h;
        let en = expected_count_alpha0(theta, s);
        if en > 1e-9 {
            break;
        }
        rho.push(1.0 - en);
    }
    if rho.len() < n_nodes {
        // the integrand t^{theta-1} varies by exp(theta h / s) per step; keep
        // that modest at the march start
        let s_start = rho.len() as f64 * h;
        if theta * h / s_start > 0.5 {
            return Err(Error::Domain(format!(
                "step h = {h} too coarse for theta = {theta}: per-step window \
                 variation theta*h/s = {} at the march start",
                theta * h / s_start
            )));
        }
    }

    for j in rho.len()..n_nodes {
        let ln_s = ln_node[j];
        let base = j - n_unit;
        let weight = |k: usize| ((theta - 1.0) * (ln_node[k] - ln_s)).exp();
        // trapezoid at step h, newest node excluded
        let mut fine = 0.5 * weight(base) * rho[base];
        for k in base + 1..j {
            fine += weight(k) * rho[k];
        }
        fine *= h;
        // trapezoid at step 2h (n_unit is even by construction)
        let mut coarse = 0.5 * weight(base) * rho[base];
        let mut k = base + 2;
        while k < j {
            coarse += weight(k) * rho[k];
            k += 2;
        }
        coarse *= 2.0 * h;
        // Richardson: I = (4 I_h - I_2h)/3; the newest node enters with h/3
        let partial = (4.0 * fine - coarse) / 3.0;
        // rho_j (1 - theta h / (3 s)) = (theta / s) * partial, with s = j h
        let s = j as f64 * h;
        let denom = 1.0 - theta * h / (3.0 * s);
        if denom <= 0.0 {
            return Err(Error::SingularSolve(format!(
                "implicit renewal solve singular at s = {s} (theta h too large)"
            )));
        }
        let v_raw = theta / s * partial / denom;
        let prev = rho[j - 1];
        if v_raw > prev + MONOTONE_SLACK || v_raw < -MONOTONE_SLACK {
            return Err(Error::Numerical(format!(
                "renewal march left [0, rho(s-h)] at s = {s} (value {v_raw})"
            )));
        }
        rho.push(v_raw.clamp(0.0, prev));
    }
    finalize(rho, h)
}
