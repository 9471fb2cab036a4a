//! Distributional formulas for the ranked weights: correlation functions,
//! the law of the m-th largest weight, joint densities, exact mixed moments,
//! and the population-moment mean/covariance family.

use crate::constants::{c_alpha, log_c};
use crate::dickman::DickmanEvaluator;
use crate::error::{Error, Result};
use crate::numerics::quad::{quad, quad_exp_tail, EndpointWeights};
use crate::params::PDParams;
use crate::special::{exp_e1, log_gamma, tail_integral_t, EULER_GAMMA};
use crate::stats::compensated_sum_by_magnitude;

/// A point of an n-dimensional simplex-type region, validated at 1e-12.
#[derive(Debug, Clone)]
pub struct SimplexPoint {
    coords: Vec<f64>,
    constraint: SimplexConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimplexConstraint {
    /// coordinates >= 0 with sum <= 1
    Delta,
    /// sorted descending with sum <= s
    OrderedSum(f64),
}

impl SimplexPoint {
    pub fn delta(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("empty coordinate list".into()));
        }
        let sum: f64 = coords.iter().sum();
        if coords.iter().any(|&v| v < -1e-12) || sum > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "point outside the unit simplex (sum = {sum})"
            )));
        }
        Ok(SimplexPoint { coords, constraint: SimplexConstraint::Delta })
    }

    pub fn ordered(coords: Vec<f64>, s: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("empty coordinate list".into()));
        }
        let sum: f64 = coords.iter().sum();
        if coords.windows(2).any(|w| w[1] > w[0] + 1e-12)
            || coords.iter().any(|&v| v < -1e-12)
            || sum > s + 1e-12
        {
            return Err(Error::Domain(
                "point violates the ordered-sum constraint".into(),
            ));
        }
        Ok(SimplexPoint { coords, constraint: SimplexConstraint::OrderedSum(s) })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn constraint(&self) -> SimplexConstraint {
        self.constraint
    }
}

/// n-th correlation function
/// `q_n(v) = c_n prod v_i^-(alpha+1) (1 - sum v)^{theta + alpha n - 1}`
/// on the open simplex, 0 outside. Symmetric under coordinate permutation by
/// construction.
pub fn q_n(params: PDParams, point: &SimplexPoint) -> Result<f64> {
    if point.constraint() != SimplexConstraint::Delta {
        return Err(Error::Domain("q_n expects a Delta-constrained point".into()));
    }
    // evaluate on a sorted copy so permutations give bit-identical values
    let mut v = point.coords().to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as u32;
    let sum: f64 = v.iter().sum();
    if v.iter().any(|&x| x <= 0.0) || sum >= 1.0 {
        return Ok(0.0);
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let mut log_q = log_c(n, params) + (theta + alpha * n as f64 - 1.0) * (-sum).ln_1p();
    for &x in &v {
        log_q -= (alpha + 1.0) * x.ln();
    }
    Ok(log_q.exp())
}

/// Reference mass `int_lo^hi q_1(v) dv` for binned estimator checks; the
/// (1-v) endpoint singularity is declared when the bin touches 1.
pub fn q1_bin_mass(params: PDParams, lo: f64, hi: f64) -> Result<f64> {
    let (alpha, theta) = (params.alpha(), params.theta());
    if !(0.0 < lo && lo < hi && hi <= 1.0) {
        return Err(Error::Domain("need 0 < lo < hi <= 1".into()));
    }
    let c1 = log_c(1, params).exp();
    let exponent = theta + alpha - 1.0;
    if hi == 1.0 {
        let v = quad(
            |v| v.powf(-(alpha + 1.0)),
            lo,
            1.0,
            EndpointWeights::right(exponent)?,
            1e-10,
        )?;
        Ok(c1 * v)
    } else {
        let v = quad(
            |v| v.powf(-(alpha + 1.0)) * (1.0 - v).powf(exponent),
            lo,
            hi,
            EndpointWeights::none(),
            1e-10,
        )?;
        Ok(c1 * v)
    }
}

/// Reference mass `int_cell q_2` over `[a1,b1] x [a2,b2]` intersected with
/// the open simplex.
pub fn q2_cell_mass(params: PDParams, cell: [f64; 4]) -> Result<f64> {
    let [a1, b1, a2, b2] = cell;
    if !(0.0 < a1 && a1 < b1 && 0.0 < a2 && a2 < b2) {
        return Err(Error::Domain("bad cell".into()));
    }
    if a1 + a2 >= 1.0 {
        return Ok(0.0);
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let c2 = log_c(2, params).exp();
    let exponent = theta + 2.0 * alpha - 1.0;
    let inner = |v1: f64| -> f64 {
        let hi = b2.min(1.0 - v1);
        if hi <= a2 {
            return 0.0;
        }
        let touches_boundary = b2 >= 1.0 - v1;
        let res = if touches_boundary {
            quad(
                |v2| v2.powf(-(alpha + 1.0)),
                a2,
                hi,
                EndpointWeights::right(exponent).unwrap(),
                1e-9,
            )
        } else {
            quad(
                |v2| v2.powf(-(alpha + 1.0)) * (1.0 - v1 - v2).powf(exponent),
                a2,
                hi,
                EndpointWeights::none(),
                1e-9,
            )
        };
        res.unwrap_or(0.0) * v1.powf(-(alpha + 1.0))
    };
    let outer = quad(inner, a1, b1.min(1.0 - a2), EndpointWeights::none(), 1e-8)?;
    Ok(c2 * outer)
}

/// `rho_m(s) = P(s V_m < 1)` by the finite inclusion-exclusion series.
pub fn rho_m(ev: &DickmanEvaluator, m: u32, s: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("rho_m needs m >= 1".into()));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("rho_m needs s > 0 (got {s})")));
    }
    if s < m as f64 {
        // V_m <= 1/m forces s V_m < 1
        return Ok(1.0);
    }
    let params = ev.params();
    let k_max = (s - m as f64).floor() as u32;
    let mut terms = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let n = m + k;
        let i_n = ev.i_n(n, s)?;
        if i_n == 0.0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let log_mag = log_c(n, params) - log_gamma(m as f64) - log_gamma(k as f64 + 1.0)
            - (n as f64).ln();
        terms.push(sign * log_mag.exp() * i_n);
    }
    let tail = compensated_sum_by_magnitude(&terms);
    let value = 1.0 - tail;
    if !(-1e-8..=1.0 + 1e-8).contains(&value) {
        return Err(Error::Numerical(format!(
            "rho_m left [0,1] at m={m}, s={s}: {value}"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Density of the m-th largest weight at v in (0, 1); 0 beyond 1/m.
pub fn vm_density(ev: &DickmanEvaluator, m: u32, v: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("vm_density needs m >= 1".into()));
    }
    if !(0.0 < v && v < 1.0) {
        return Ok(0.0);
    }
    let params = ev.params();
    let (alpha, theta) = (params.alpha(), params.theta());
    let shifted = params.shifted(1);
    let upper = 1.0 / v - m as f64;
    if upper < 0.0 {
        return Ok(0.0);
    }
    let k_max = (upper + 1e-12).floor() as u32;
    if m + k_max > 14 {
        return Err(Error::Unsupported(format!(
            "vm_density series depth {} too large at v = {v}; use the Monte Carlo path",
            m + k_max
        )));
    }
    let arg = (1.0 - v) / v;
    let mut terms = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let n = m + k - 1;
        let i_n = ev.i_n_shifted(n, 1, arg)?;
        if i_n == 0.0 && n > 0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * (log_c(n, shifted) - log_gamma(k as f64 + 1.0)).exp() * i_n);
    }
    let series = compensated_sum_by_magnitude(&terms);
    let log_pref = log_c(1, params) - (alpha + 1.0) * v.ln()
        + (theta + alpha - 1.0) * (-v).ln_1p()
        - log_gamma(m as f64);
    Ok(log_pref.exp() * series)
}

/// Joint density of (V_1, ..., V_m) at a strictly decreasing point.
pub fn joint_density(ev: &DickmanEvaluator, point: &SimplexPoint) -> Result<f64> {
    let v = point.coords();
    let m = v.len() as u32;
    if !matches!(point.constraint(), SimplexConstraint::OrderedSum(s) if s <= 1.0 + 1e-12) {
        return Err(Error::Domain(
            "joint_density expects an ordered point with sum <= 1".into(),
        ));
    }
    let sum: f64 = v.iter().sum();
    if v.iter().any(|&x| x <= 0.0) || sum >= 1.0 || v.windows(2).any(|w| w[1] >= w[0]) {
        return Ok(0.0);
    }
    let params = ev.params();
    let (alpha, theta) = (params.alpha(), params.theta());
    let v_min = v[v.len() - 1];
    let rho = ev.rho(m, (1.0 - sum) / v_min)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let mut log_f = log_c(m, params)
        + (theta + alpha * m as f64 - 1.0) * (-sum).ln_1p()
        + rho.ln();
    for &x in v {
        log_f -= (alpha + 1.0) * x.ln();
    }
    Ok(log_f.exp())
}

/// `rho_m` for arguments beyond the series range: m = 1 reads the marching
/// table; m = 2 integrates the joint density of (V_1, V_2) over
/// {v_1 > v_2 >= 1/s}.
pub fn rho_m_large(ev: &DickmanEvaluator, m: u32, s: f64) -> Result<f64> {
    match m {
        1 => ev.rho(0, s),
        2 => {
            if s <= 2.0 {
                return Ok(1.0);
            }
            let params = ev.params();
            let (alpha, theta) = (params.alpha(), params.theta());
            let c = 1.0 / s;
            let exponent = theta + 2.0 * alpha - 1.0;
            let log_c2 = log_c(2, params);
            let inner = |v2: f64| -> f64 {
                let b = 1.0 - v2;
                if b <= v2 {
                    return 0.0;
                }
                quad(
                    |v1| {
                        let rem = 1.0 - v1 - v2;
                        let rho = ev.rho(2, (rem / v2).max(1e-300)).unwrap_or(0.0);
                        if rho == 0.0 {
                            return 0.0;
                        }
                        (log_c2 - (alpha + 1.0) * (v1.ln() + v2.ln()) + rho.ln()).exp()
                    },
                    v2,
                    b,
                    EndpointWeights::right(exponent).unwrap(),
                    1e-7,
                )
                .unwrap_or(0.0)
            };
            let mass = quad(inner, c, 0.5, EndpointWeights::none(), 1e-6)?;
            Ok((1.0 - mass).clamp(0.0, 1.0))
        }
        _ => Err(Error::Unsupported("rho_m_large supports m <= 2".into())),
    }
}

/// Smooth remainder of the tail weight after its leading power is factored
/// out: W(x) = x^{theta + alpha m} G(x) with
/// W(x) = exp(-theta T_0(x)) (alpha = 0) or (1 + C_a T_a(x))^{-(theta/alpha + m)}.
fn tail_factor_log_g(alpha: f64, theta: f64, m: u32, x: f64) -> Result<f64> {
    let power = theta + alpha * m as f64;
    if alpha == 0.0 {
        // E1(x) + ln x is smooth at 0 (-> -gamma)
        let e1_plus_ln = if x < 1.5 {
            let mut sum = 0.0;
            let mut term = 1.0;
            for k in 1..200 {
                term *= -x / k as f64;
                let contrib = -term / k as f64;
                sum += contrib;
                if contrib.abs() < 1e-18 {
                    break;
                }
            }
            -EULER_GAMMA + sum
        } else {
            exp_e1(x)? + x.ln()
        };
        Ok(-theta * e1_plus_ln)
    } else {
        let w = 1.0 + c_alpha(alpha)? * tail_integral_t(alpha, x)?;
        Ok(-(theta / alpha + m as f64) * w.ln() - power * x.ln())
    }
}

/// Exact mixed moment `E[V_1^{a_1} ... V_m^{a_m}]` for m <= 3 by iterated
/// quadrature of the ordered-region integral; requires sum a_i > -theta.
pub fn mixed_moment(params: PDParams, a: &[f64]) -> Result<f64> {
    let m = a.len();
    if m == 0 || m > 3 {
        return Err(Error::Unsupported(
            "mixed_moment quadrature path supports 1 <= m <= 3; use Monte Carlo beyond".into(),
        ));
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let total: f64 = a.iter().sum();
    if !(total > -theta) {
        return Err(Error::Domain(format!(
            "need sum a_i > -theta (got {total} <= {})",
            -theta
        )));
    }
    if a == [0.0] || a == [0.0, 0.0] || a == [0.0, 0.0, 0.0] {
        return Ok(1.0);
    }
    let mf = m as f64;
    let log_pref = if alpha == 0.0 {
        mf * theta.ln() + log_gamma(theta) - log_gamma(theta + total)
    } else {
        log_gamma(theta + 1.0) + log_gamma(theta / alpha + mf) + (mf - 1.0) * alpha.ln()
            - log_gamma(theta + total)
            - log_gamma(theta / alpha + 1.0)
            - mf * log_gamma(1.0 - alpha)
    };
    // after factoring the leading power of the tail weight, the innermost
    // z-exponent becomes theta + sum(a) - 1 > -1
    let g = |x: f64| tail_factor_log_g(alpha, theta, m as u32, x);
    let t_exponent = theta + total - 1.0;
    let integral = match m {
        1 => split_t_integral(t_exponent, 1.0, &|t| g(t).map(f64::exp))?,
        2 => {
            let u_exp = a[1] + theta + alpha - 1.0;
            quad(
                |u| {
                    split_t_integral(t_exponent, 1.0 + u, &|t| g(t * u).map(f64::exp))
                        .unwrap_or(0.0)
                },
                0.0,
                1.0,
                EndpointWeights::left(u_exp)?,
                1e-7,
            )?
        }
        3 => {
            let u_exp = a[1] + a[2] + theta + alpha - 1.0;
            let w_exp = a[2] + theta + 2.0 * alpha - 1.0;
            quad(
                |w| {
                    quad(
                        |u| {
                            split_t_integral(t_exponent, 1.0 + u + u * w, &|t| {
                                g(t * u * w).map(f64::exp)
                            })
                            .unwrap_or(0.0)
                        },
                        0.0,
                        1.0,
                        EndpointWeights::left(u_exp).unwrap(),
                        1e-6,
                    )
                    .unwrap_or(0.0)
                },
                0.0,
                1.0,
                EndpointWeights::left(w_exp)?,
                1e-6,
            )?
        }
        _ => unreachable!(),
    };
    Ok(log_pref.exp() * integral)
}

/// `int_0^inf t^exponent e^{-rate t} f(t) dt` with the power declared on
/// [0, 1] and exponential panels beyond.
fn split_t_integral(exponent: f64, rate: f64, f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let head = quad(
        |t| (-rate * t).exp() * f(t).unwrap_or(0.0),
        0.0,
        1.0,
        EndpointWeights::left(exponent)?,
        1e-9,
    )?;
    let tail = quad_exp_tail(
        |t| t.powf(exponent) * (-rate * t).exp() * f(t).unwrap_or(0.0),
        1.0,
        1e-9,
    )?;
    Ok(head + tail)
}

/// Mean of the population moment, `E[H_p] = Gamma(theta+1) Gamma(p-alpha) /
/// (Gamma(theta+p) Gamma(1-alpha))`, p > alpha.
pub fn h_p(params: PDParams, p: f64) -> Result<f64> {
    let (alpha, theta) = (params.alpha(), params.theta());
    if !(p > alpha) {
        return Err(Error::Domain(format!("h_p needs p > alpha (got {p})")));
    }
    Ok((log_gamma(theta + 1.0) + log_gamma(p - alpha)
        - log_gamma(theta + p)
        - log_gamma(1.0 - alpha))
    .exp())
}

/// Covariance of H_p and H_q:
/// `h_{p+q} + Gamma(p-a)Gamma(q-a)/Gamma(1-a)^2 (Gamma(t+1)(t+a)/Gamma(t+p+q)
///  - Gamma(t+1)^2/(Gamma(t+p)Gamma(t+q)))`.
pub fn cov_h(params: PDParams, p: f64, q: f64) -> Result<f64> {
    let (alpha, theta) = (params.alpha(), params.theta());
    if !(p > alpha) || !(q > alpha) {
        return Err(Error::Domain("cov_h needs p, q > alpha".into()));
    }
    let first = h_p(params, p + q)?;
    let pref = (log_gamma(p - alpha) + log_gamma(q - alpha) - 2.0 * log_gamma(1.0 - alpha)).exp();
    let t1 = (log_gamma(theta + 1.0) + (theta + alpha).ln() - log_gamma(theta + p + q)).exp();
    let t2 = (2.0 * log_gamma(theta + 1.0) - log_gamma(theta + p) - log_gamma(theta + q)).exp();
    Ok(first + pref * (t1 - t2))
}

/// Large-theta limit of `theta^{p+q-1} Cov(H_p, H_q)`.
pub fn cov_h_large_theta_limit(alpha: f64, p: f64, q: f64) -> f64 {
    (log_gamma(p + q - alpha) - log_gamma(1.0 - alpha)).exp()
        + (log_gamma(p - alpha) + log_gamma(q - alpha) - 2.0 * log_gamma(1.0 - alpha)).exp()
            * (alpha - p * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;
    use crate::sampler::{parallel_draws, top_m};
    use crate::stats::mean_and_se;
    use rand::{Rng, SeedableRng};

    fn ev(alpha: f64, theta: f64) -> DickmanEvaluator {
        DickmanEvaluator::new(validate_params(alpha, theta).unwrap())
    }

    #[test]
    fn q1_watterson_value() {
        // (0,1): q_1(v) = 1/v; at 0.5 -> 2
        let p = validate_params(0.0, 1.0).unwrap();
        let pt = SimplexPoint::delta(vec![0.5]).unwrap();
        assert!((q_n(p, &pt).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn q1_mean_measure_has_unit_first_moment() {
        // int v q_1(v) dv = 1 for any admissible params
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..8 {
            let alpha: f64 = rng.gen_range(0.0..0.9);
            let theta = rng.gen_range(-alpha + 0.05..5.0);
            let p = validate_params(alpha, theta).unwrap();
            let v = quad(
                |_| 1.0,
                0.0,
                1.0,
                EndpointWeights::new(-alpha, theta + alpha - 1.0).unwrap(),
                1e-11,
            )
            .unwrap()
                * log_c(1, p).exp();
            assert!((v - 1.0).abs() < 1e-9, "({alpha},{theta}): {v}");
        }
    }

    #[test]
    fn q2_pair_moment_identity() {
        // int_{Delta_2} v1 v2 q_2 = (theta+alpha)/(theta+1)
        for &(a, t) in &[(0.0, 1.5), (0.3, 0.7), (0.5, 0.5)] {
            let p = validate_params(a, t).unwrap();
            let inner = |v1: f64| {
                quad(
                    |_| 1.0,
                    0.0,
                    1.0 - v1,
                    EndpointWeights::new(-a, t + 2.0 * a - 1.0).unwrap(),
                    1e-10,
                )
                .unwrap()
            };
            let got = quad(inner, 0.0, 1.0, EndpointWeights::left(-a).unwrap(), 1e-8).unwrap()
                * log_c(2, p).exp();
            let want = (t + a) / (t + 1.0);
            assert!((got - want).abs() < 1e-6, "({a},{t}): {got} vs {want}");
        }
    }

    #[test]
    fn q_n_permutation_symmetric() {
        let p = validate_params(0.4, 0.9).unwrap();
        let a = SimplexPoint::delta(vec![0.1, 0.25, 0.4]).unwrap();
        let b = SimplexPoint::delta(vec![0.4, 0.1, 0.25]).unwrap();
        assert_eq!(q_n(p, &a).unwrap(), q_n(p, &b).unwrap());
    }

    #[test]
    fn rho_m_reduces_to_rho() {
        let e = ev(0.3, 0.7);
        for &s in &[1.5, 2.5, 3.5] {
            let a = rho_m(&e, 1, s).unwrap();
            let b = e.rho_series(s).unwrap();
            assert!((a - b).abs() < 1e-12, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn rho_m_below_support_is_one() {
        let e = ev(0.5, 0.5);
        assert_eq!(rho_m(&e, 2, 1.9).unwrap(), 1.0);
        assert_eq!(rho_m(&e, 3, 2.5).unwrap(), 1.0);
    }

    #[test]
    fn rho_m_monotone_in_m() {
        let e = ev(0.0, 1.0);
        for &s in &[2.5, 3.5] {
            let r1 = rho_m(&e, 1, s).unwrap();
            let r2 = rho_m(&e, 2, s).unwrap();
            let r3 = rho_m(&e, 3, s).unwrap();
            assert!(r1 <= r2 + 1e-12 && r2 <= r3 + 1e-12, "s={s}: {r1} {r2} {r3}");
        }
    }

    #[test]
    fn rho_m_matches_monte_carlo() {
        let e = ev(0.0, 1.0);
        let p = e.params();
        let s = 2.5;
        let want = rho_m(&e, 2, s).unwrap();
        let n = 100_000usize;
        let hits = parallel_draws(n, 17, |rng| {
            let r = top_m(p, 2, rng)?;
            Ok(if s * r.weights[1] < 1.0 { 1.0 } else { 0.0 })
        })
        .unwrap();
        let (mean, se) = mean_and_se(&hits).unwrap();
        assert!((mean - want).abs() < 3.5 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn vm_density_m1_equals_v1_density() {
        let e = ev(0.3, 0.7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v: f64 = rng.gen_range(0.2..0.95);
            let a = vm_density(&e, 1, v).unwrap();
            let b = e.v1_density(v).unwrap();
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "v={v}: {a} vs {b}");
        }
    }

    #[test]
    fn vm_density_support() {
        let e = ev(0.0, 1.0);
        assert_eq!(vm_density(&e, 2, 0.6).unwrap(), 0.0);
        assert!(vm_density(&e, 2, 0.4).unwrap() > 0.0);
    }

    #[test]
    fn vm_density_normalizes() {
        // m=2, (0,1): integral over (eps, 1/2) plus P(V_2 < eps) = 1
        let e = ev(0.0, 1.0);
        let eps = 1.0 / 8.0;
        let mut acc = 0.0;
        // integrate piecewise between the activation kinks at 1/(k+2)
        let mut edges: Vec<f64> = vec![eps, 0.5];
        let mut k = 2.0;
        loop {
            let edge = 1.0 / (k + 2.0);
            if edge <= eps {
                break;
            }
            edges.push(edge);
            k += 1.0;
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in edges.windows(2) {
            acc += quad(
                |v| vm_density(&e, 2, v).unwrap(),
                w[0],
                w[1],
                EndpointWeights::none(),
                1e-8,
            )
            .unwrap();
        }
        let tail = rho_m(&e, 2, 1.0 / eps).unwrap();
        assert!((acc + tail - 1.0).abs() < 1e-5, "integral {acc} + tail {tail}");
    }

    #[test]
    fn joint_density_closed_form_region() {
        // (1 - sum)/v_m <= 1 makes the rho factor 1
        let e = ev(0.3, 0.7);
        let p = e.params();
        let pt = SimplexPoint::ordered(vec![0.5, 0.4], 1.0).unwrap();
        let got = joint_density(&e, &pt).unwrap();
        let want = (log_c(2, p) - 1.3 * (0.5_f64.ln() + 0.4_f64.ln())
            + (0.7 + 0.6 - 1.0) * 0.1_f64.ln())
        .exp();
        assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
    }

    #[test]
    fn joint_density_m1_matches_v1_density() {
        let e = ev(0.5, 0.5);
        for &v in &[0.3, 0.6, 0.9] {
            let pt = SimplexPoint::ordered(vec![v], 1.0).unwrap();
            let a = joint_density(&e, &pt).unwrap();
            let b = e.v1_density(v).unwrap();
            assert!((a - b).abs() < 1e-8 * b.max(1e-12), "v={v}: {a} vs {b}");
        }
    }

    #[test]
    fn joint_density_marginalizes_to_vm() {
        // int f_2(v1, v2) dv1 over (v2, 1-v2) = vm_density(2, v2)
        let e = ev(0.0, 1.0);
        for &v2 in &[0.1, 0.2, 0.3] {
            let b = 1.0 - v2;
            let got = quad(
                |v1| {
                    let pt = SimplexPoint::ordered(vec![v1, v2], 1.0).unwrap();
                    joint_density(&e, &pt).unwrap()
                },
                v2,
                b,
                EndpointWeights::right(e.params().theta() + 2.0 * e.params().alpha() - 1.0)
                    .unwrap(),
                1e-7,
            )
            .unwrap();
            let want = vm_density(&e, 2, v2).unwrap();
            assert!((got - want).abs() < 1e-4 * want.max(1.0), "v2={v2}: {got} vs {want}");
        }
    }

    #[test]
    fn mixed_moment_trivial_and_golomb_dickman() {
        let p = validate_params(0.0, 1.0).unwrap();
        assert_eq!(mixed_moment(p, &[0.0]).unwrap(), 1.0);
        // E V_1 under (0,1) is the Golomb-Dickman constant
        let gd = mixed_moment(p, &[1.0]).unwrap();
        assert!((gd - 0.624_329_988_543_550_9).abs() < 1e-7, "{gd}");
    }

    #[test]
    fn mixed_moment_half_half_first_moments() {
        let p = validate_params(0.5, 0.5).unwrap();
        let m1 = mixed_moment(p, &[1.0]).unwrap();
        assert!((m1 - 0.483_498_347_154_425_5).abs() < 1e-6, "{m1}");
        let m2 = mixed_moment(p, &[2.0]).unwrap();
        assert!((m2 - 0.283_240_503_980_289_4).abs() < 1e-6, "{m2}");
    }

    #[test]
    fn mixed_moment_m2_against_monte_carlo() {
        let p = validate_params(0.5, 0.5).unwrap();
        let want = mixed_moment(p, &[1.0, 1.0]).unwrap();
        let n = 100_000usize;
        let draws = parallel_draws(n, 23, |rng| {
            let r = top_m(p, 2, rng)?;
            Ok(r.weights[0] * r.weights[1])
        })
        .unwrap();
        let (mean, se) = mean_and_se(&draws).unwrap();
        assert!((mean - want).abs() < 3.5 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn mixed_moment_m3_against_monte_carlo() {
        let p = validate_params(0.0, 1.0).unwrap();
        let want = mixed_moment(p, &[1.0, 1.0, 1.0]).unwrap();
        let n = 60_000usize;
        let draws = parallel_draws(n, 29, |rng| {
            let r = top_m(p, 3, rng)?;
            Ok(r.weights[0] * r.weights[1] * r.weights[2])
        })
        .unwrap();
        let (mean, se) = mean_and_se(&draws).unwrap();
        assert!((mean - want).abs() < 3.5 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn mixed_moment_precondition() {
        let p = validate_params(0.5, 0.5).unwrap();
        assert!(mixed_moment(p, &[-0.6]).is_err());
        assert!(mixed_moment(p, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn h_p_values() {
        let p = validate_params(0.3, 0.7).unwrap();
        assert!((h_p(p, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let p01 = validate_params(0.0, 1.0).unwrap();
        assert!((h_p(p01, 2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(h_p(p, 0.2).is_err());
    }

    #[test]
    fn cov_h_p_one_vanishes() {
        // H_1 is the constant 1
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let alpha: f64 = rng.gen_range(0.0..0.9);
            let theta = rng.gen_range(-alpha + 0.05..6.0);
            let q: f64 = rng.gen_range(alpha + 0.05..4.0);
            let p = validate_params(alpha, theta).unwrap();
            let c = cov_h(p, 1.0, q).unwrap();
            assert!(c.abs() < 1e-12, "({alpha},{theta},{q}): {c}");
        }
    }

    #[test]
    fn cov_h_diagonal_nonnegative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let alpha: f64 = rng.gen_range(0.0..0.9);
            let theta = rng.gen_range(-alpha + 0.05..6.0);
            let p_exp: f64 = rng.gen_range(alpha + 0.05..4.0);
            let p = validate_params(alpha, theta).unwrap();
            assert!(cov_h(p, p_exp, p_exp).unwrap() >= -1e-14);
        }
    }

    #[test]
    fn cov_h_approaches_large_theta_limit() {
        let alpha = 0.5;
        let p_exp = 2.0;
        let theta = 1e4;
        let p = validate_params(alpha, theta).unwrap();
        let finite = cov_h(p, p_exp, p_exp).unwrap() * theta.powf(2.0 * p_exp - 1.0);
        let limit = cov_h_large_theta_limit(alpha, p_exp, p_exp);
        assert!(
            ((finite - limit) / limit).abs() < 0.02,
            "finite {finite} vs limit {limit}"
        );
    }
}
