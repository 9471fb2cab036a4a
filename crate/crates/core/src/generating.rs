//! The generating functions `R_{alpha,theta}` and `R_{m,alpha,theta}` on the
//! complex plane (principal branch, arg in (-pi, pi)); contact with the branch
//! cut `C_alpha u in [1, inf)` on the real axis is an error, never a silent
//! wrap.

use num_complex::Complex64;

use crate::constants::{c_alpha, log_c};
use crate::error::{Error, Result};
use crate::params::PDParams;
use crate::special::log_gamma;

/// exp(z) - 1 with a short series for small |z| to avoid cancellation.
fn expm1_c(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        z * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0)))
    } else {
        z.exp() - 1.0
    }
}

fn branch_check(alpha: f64, u: Complex64) -> Result<()> {
    if alpha == 0.0 {
        return Ok(());
    }
    let ca = c_alpha(alpha)?;
    if u.im == 0.0 && ca * u.re >= 1.0 {
        return Err(Error::BranchCut(format!(
            "C_alpha * u = {} lies on [1, inf)",
            ca * u.re
        )));
    }
    Ok(())
}

/// `R_{alpha,theta}(u)`:
/// * alpha = 0:             Gamma(theta) (e^{theta u} - 1)
/// * alpha > 0, theta != 0: Gamma(theta+1) {(1 - C_a u)^{-theta/alpha} - 1} / theta
/// * alpha > 0, theta = 0:  -log(1 - C_a u) / alpha
///
/// The alpha = 0 and theta = 0 rows are explicit code paths, never limits of
/// the general row (which contains theta/alpha).
pub fn r_function(params: PDParams, u: Complex64) -> Result<Complex64> {
    let (alpha, theta) = (params.alpha(), params.theta());
    branch_check(alpha, u)?;
    if alpha == 0.0 {
        // admissibility forces theta > 0 here
        return Ok(log_gamma(theta).exp() * expm1_c(theta * u));
    }
    let ca = c_alpha(alpha)?;
    let log_term = (Complex64::new(1.0, 0.0) - ca * u).ln();
    if theta == 0.0 {
        Ok(-log_term / alpha)
    } else {
        Ok(log_gamma(theta + 1.0).exp() / theta * expm1_c(-(theta / alpha) * log_term))
    }
}

/// Taylor coefficient `r_n = Gamma(theta + alpha n) c_{n,alpha,theta} / n!`
/// of `R_{alpha,theta}` at 0 (n >= 1).
pub fn r_taylor_coefficient(n: u32, params: PDParams) -> f64 {
    let (alpha, theta) = (params.alpha(), params.theta());
    (log_gamma(theta + alpha * n as f64) + log_c(n, params) - log_gamma(n as f64 + 1.0)).exp()
}

/// Taylor coefficients of `R_{alpha,theta}` through order `n_max`.
#[derive(Debug, Clone)]
pub struct RCoefficients {
    pub params: PDParams,
    /// coeffs[n-1] is the coefficient of u^n
    pub coeffs: Vec<f64>,
}

impl RCoefficients {
    pub fn compute(params: PDParams, n_max: u32) -> Self {
        let coeffs = (1..=n_max)
            .map(|n| r_taylor_coefficient(n, params))
            .collect();
        RCoefficients { params, coeffs }
    }
}

const GL32_NODES_HALF: [f64; 16] = [
    0.048_307_665_687_738_32,
    0.144_471_961_582_796_5,
    0.239_287_362_252_137_1,
    0.331_868_602_282_127_65,
    0.421_351_276_130_635_3,
    0.506_899_908_932_229_4,
    0.587_715_757_240_762_3,
    0.663_044_266_930_215_2,
    0.732_182_118_740_289_7,
    0.794_483_795_967_942_4,
    0.849_367_613_732_569_97,
    0.896_321_155_766_052_1,
    0.934_906_075_937_739_7,
    0.964_762_255_587_506_4,
    0.985_611_511_545_268_3,
    0.997_263_861_849_481_56,
];
const GL32_WEIGHTS_HALF: [f64; 16] = [
    0.096_540_088_514_727_8,
    0.095_638_720_079_274_86,
    0.093_844_399_080_804_57,
    0.091_173_878_695_763_88,
    0.087_652_093_004_403_8,
    0.083_311_924_226_946_75,
    0.078_193_895_787_070_3,
    0.072_345_794_108_848_51,
    0.065_822_222_776_361_85,
    0.058_684_093_478_535_55,
    0.050_998_059_262_376_18,
    0.042_835_898_022_226_68,
    0.034_273_862_913_021_43,
    0.025_392_065_309_262_06,
    0.016_274_394_730_905_67,
    0.007_018_610_009_470_097,
];

/// 32-node Gauss-Legendre on [0, 1] of a complex-valued analytic integrand.
fn gl32_unit<F: Fn(f64) -> Complex64>(f: F) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..16 {
        let half = 0.5 * GL32_NODES_HALF[i];
        acc += GL32_WEIGHTS_HALF[i] * 0.5 * (f(0.5 + half) + f(0.5 - half));
    }
    acc
}

/// `R_{m,alpha,theta}(u)` via the closed integral form
/// `(-1)^{m-1} c_{m-1} / (m-1)! * int_0^u x^{m-1} R'_{alpha,theta+alpha(m-1)}(x) dx`
/// evaluated along the straight segment [0, u]. `R_1 = R`.
pub fn r_m(m: u32, params: PDParams, u: Complex64) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::Domain("r_m needs m >= 1".into()));
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    // branch condition along the whole segment [0, u]
    if alpha > 0.0 {
        let ca = c_alpha(alpha)?;
        if u.im == 0.0 && ca * u.re >= 1.0 {
            return Err(Error::BranchCut(format!(
                "C_alpha * u = {} reaches [1, inf) along the path",
                ca * u.re
            )));
        }
    }
    if m == 1 {
        return r_function(params, u);
    }
    let mf = m as f64;
    if alpha == 0.0 {
        // Gamma(theta+1) (-theta)^{m-1} / (m-1)! * int_0^u x^{m-1} e^{theta x} dx;
        // theta > 0 always holds at alpha = 0, so (-theta)^{m-1} is
        // (-1)^{m-1} theta^{m-1}.
        let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let pref =
            sign * (log_gamma(theta + 1.0) + (mf - 1.0) * theta.ln() - log_gamma(mf)).exp();
        let integral = u * gl32_unit(|t| {
            let x = t * u;
            x.powi(m as i32 - 1) * (theta * x).exp()
        });
        return Ok(pref * integral);
    }
    let ca = c_alpha(alpha)?;
    let ta = theta / alpha;
    let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let log_pref = log_gamma(theta + 1.0) + log_gamma(ta + mf) + (mf - 1.0) * alpha.ln()
        - log_gamma(mf)
        - log_gamma(ta + 1.0)
        - mf * log_gamma(1.0 - alpha);
    let pref = sign * log_pref.exp();
    let integral = u * gl32_unit(|t| {
        let x = t * u;
        let base = Complex64::new(1.0, 0.0) - ca * x;
        x.powi(m as i32 - 1) * (-(ta + mf) * base.ln()).exp()
    });
    Ok(pref * integral)
}
