//! The generalized Dickman function `rho_{alpha,theta}(s) = P(s V_1 < 1)`:
//! the exact finite-series evaluator built from the nested integrals `I_n`,
//! marching tables for large arguments, the density of the largest weight,
//! and Laplace-transform self-checks.
//!
//! The series path is ground truth for small s (nesting depth grows with
//! floor(s)); the Volterra/renewal tables are the production path for dense
//! grids and large arguments. Recursion levels re-enter the same shifted
//! parameter family (alpha, theta + k alpha), so level tables are memoized.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::constants::{c_alpha, log_c};
use crate::error::{Error, Result};
use crate::generating::r_function;
use crate::numerics::laplace::{laplace_weighted, Bracketed};
use crate::numerics::quad::{quad, quad_exp_tail, EndpointWeights};
use crate::numerics::tabulated::{InterpOrder, TabulatedFunction};
use crate::numerics::volterra::{renewal_march, volterra_march, MarchGrid};
use crate::params::PDParams;
use crate::special::{log_gamma, tail_integral_t};
use crate::stats::compensated_sum_by_magnitude;

/// Series evaluation is exact but its cost grows with nesting depth floor(s).
const MAX_SERIES_DEPTH: u32 = 12;
/// Dispatch threshold: series below, tables above.
const SERIES_LIMIT: f64 = 4.0;
/// Grid step for internal I_n level tables.
const I_TABLE_STEP: f64 = 1.0 / 1024.0;
/// Grid step for production rho tables.
const TABLE_STEP: f64 = 1.0 / 512.0;
/// Base far cutoff; the effective cutoff scales with theta since the
/// transition of rho sits near theta/log(theta).
const RHO_FAR_CUTOFF: f64 = 512.0;

type TableKey = (u32, u32); // (n, shift)

pub struct DickmanEvaluator {
    params: PDParams,
    i_tables: RwLock<HashMap<TableKey, Arc<TabulatedFunction>>>,
    rho_tables: RwLock<HashMap<u32, Arc<TabulatedFunction>>>,
    quad_tol: f64,
}

impl DickmanEvaluator {
    pub fn new(params: PDParams) -> Self {
        DickmanEvaluator {
            params,
            i_tables: RwLock::new(HashMap::new()),
            rho_tables: RwLock::new(HashMap::new()),
            quad_tol: 1e-10,
        }
    }

    pub fn params(&self) -> PDParams {
        self.params
    }

    fn shifted(&self, shift: u32) -> PDParams {
        self.params.shifted(shift)
    }

    /// `I_1` at a shifted parameter, evaluated exactly: with y = 1 - 1/x and
    /// c = theta_shift + alpha,
    /// `I_1(x) = int_0^y w^{c-1} (1-w)^{-(alpha+1)} dw
    ///         = sum_j C_j y^{c+j} / (c+j)`, C_j the binomial-series
    /// coefficients of (1-w)^{-(alpha+1)}. The series keeps the fractional
    /// kink (x-1)^c exact, which tabulation cannot.
    fn i1_shifted(&self, shift: u32, x: f64) -> Result<f64> {
        if x <= 1.0 {
            return Ok(0.0);
        }
        let alpha = self.params.alpha();
        let c = self.shifted(shift).theta() + alpha;
        let y = 1.0 - 1.0 / x;
        if y <= 0.9 {
            let mut coeff = 1.0_f64;
            let mut y_pow = y.powf(c);
            let mut acc = y_pow / c;
            for j in 1..2000 {
                coeff *= (alpha + j as f64) / j as f64;
                y_pow *= y;
                let term = coeff * y_pow / (c + j as f64);
                acc += term;
                if term < 1e-16 * acc {
                    return Ok(acc);
                }
            }
            return Err(Error::Numerical("I_1 series did not converge".into()));
        }
        quad(
            |v| v.powf(-(alpha + 1.0)),
            1.0 / x,
            1.0,
            EndpointWeights::right(c - 1.0)?,
            self.quad_tol,
        )
    }

    /// `I_{n, alpha, theta + shift*alpha}(s)`; exact 0 for s <= n, no
    /// quadrature spent there. Level 1 is series-exact; level 2 integrates
    /// the level-1 series directly; deeper levels integrate memoized tables.
    /// The outer integral is split at the kink preimages v = 1/(k+1).
    pub fn i_n_shifted(&self, n: u32, shift: u32, s: f64) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if s <= n as f64 {
            return Ok(0.0);
        }
        if n == 1 {
            return self.i1_shifted(shift, s);
        }
        let alpha = self.params.alpha();
        let theta_s = self.shifted(shift).theta();
        let lo = (1.0 / s).min(1.0);
        let right_exp = theta_s + alpha - 1.0;
        let table = if n >= 3 {
            Some(self.i_table(n - 1, shift + 1, s - 1.0)?)
        } else {
            None
        };
        let inner_eval = |arg: f64| -> f64 {
            match &table {
                Some(t) => t.eval(arg.min(t.max_arg())).unwrap_or(0.0),
                None => self.i1_shifted(shift + 1, arg).unwrap_or(0.0),
            }
        };
        // integration edges: kink preimages of integer inner arguments
        let mut edges = vec![lo];
        for k in (1..n).rev() {
            let e = 1.0 / (k as f64 + 1.0);
            if e > lo && e < 1.0 {
                edges.push(e);
            }
        }
        edges.push(1.0);
        let mut acc = 0.0;
        for win in edges.windows(2) {
            let (a_e, b_e) = (win[0], win[1]);
            if b_e == 1.0 {
                acc += quad(
                    |v| v.powf(-(alpha + 1.0)) * inner_eval((1.0 - v) / v),
                    a_e,
                    1.0,
                    EndpointWeights::right(right_exp)?,
                    self.quad_tol,
                )?;
            } else {
                acc += quad(
                    |v| {
                        v.powf(-(alpha + 1.0))
                            * (1.0 - v).powf(right_exp)
                            * inner_eval((1.0 - v) / v)
                    },
                    a_e,
                    b_e,
                    EndpointWeights::none(),
                    self.quad_tol,
                )?;
            }
        }
        Ok(n as f64 * acc)
    }

    /// `I_{n,alpha,theta}(s)` at the base parameters.
    pub fn i_n(&self, n: u32, s: f64) -> Result<f64> {
        self.i_n_shifted(n, 0, s)
    }

    /// Level table of I_n at the given shift covering [0, x_max].
    fn i_table(&self, n: u32, shift: u32, x_max: f64) -> Result<Arc<TabulatedFunction>> {
        let key = (n, shift);
        if let Some(t) = self.i_tables.read().unwrap().get(&key) {
            if t.max_arg() >= x_max - 1e-12 {
                return Ok(t.clone());
            }
        }
        let domain = x_max.ceil().max(1.0);
        let h = I_TABLE_STEP;
        let len = (domain / h).round() as usize + 1;
        let mut values = Vec::with_capacity(len);
        for i in 0..len {
            let x = i as f64 * h;
            values.push(self.i_n_shifted(n, shift, x)?);
        }
        let table = Arc::new(TabulatedFunction::new(0.0, h, values, InterpOrder::CubicMonotone)?);
        self.i_tables.write().unwrap().insert(key, table.clone());
        Ok(table)
    }

    /// Finite alternating series for rho at the shifted parameters.
    pub fn rho_series_shifted(&self, shift: u32, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("rho needs s > 0 (got {s})")));
        }
        if s <= 1.0 {
            return Ok(1.0);
        }
        let depth = s.floor() as u32;
        if depth > MAX_SERIES_DEPTH {
            return Err(Error::Unsupported(format!(
                "series depth {depth} exceeds {MAX_SERIES_DEPTH}; use rho_table"
            )));
        }
        let sp = self.shifted(shift);
        let mut terms = Vec::with_capacity(depth as usize + 1);
        for n in 0..=depth {
            let i_n = self.i_n_shifted(n, shift, s)?;
            if i_n == 0.0 {
                continue;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(sign * (log_c(n, sp) - log_gamma(n as f64 + 1.0)).exp() * i_n);
        }
        let value = compensated_sum_by_magnitude(&terms);
        if !(-1e-8..=1.0 + 1e-8).contains(&value) {
            return Err(Error::Numerical(format!(
                "rho series left [0,1] at s = {s}: {value} (quadrature misconfiguration)"
            )));
        }
        Ok(value.clamp(0.0, 1.0))
    }

    /// `rho_{alpha,theta}(s)` by the exact series.
    pub fn rho_series(&self, s: f64) -> Result<f64> {
        self.rho_series_shifted(0, s)
    }

    /// Production table on [0, s_max]: Volterra product-integration march for
    /// alpha > 0 (seeded exactly on [0, 2] through the one-term series),
    /// renewal march for alpha = 0.
    pub fn rho_table(&self, s_max: f64, h: f64) -> Result<TabulatedFunction> {
        let grid = MarchGrid::new(s_max, h)?;
        let alpha = self.params.alpha();
        if alpha == 0.0 {
            // admissibility gives theta > 0 here
            renewal_march(self.params.theta(), grid)
        } else {
            // exact one-term series on [0, 2]; beyond 2 keep seeding while
            // the exceedance mass c_1 I_1 stays below 1e-9 (rho = 1 - c_1 I_1
            // then holds to O(1e-18)), which carries large-theta tables
            // through the unresolvable flat region
            let c1 = log_c(1, self.params).exp();
            let seed = |s: f64| -> Option<f64> {
                if s <= 1.0 {
                    Some(1.0)
                } else {
                    let i1 = self.i_n_shifted(1, 0, s).ok()?;
                    let mass = c1 * i1;
                    if s <= 2.0 {
                        Some((1.0 - mass).clamp(0.0, 1.0))
                    } else if mass <= 1e-9 {
                        Some(1.0 - mass)
                    } else {
                        None
                    }
                }
            };
            volterra_march(alpha, self.params.theta(), grid, seed)
        }
    }

    /// Cached production table at a shifted parameter, covering at least
    /// [0, s_needed].
    pub fn rho_production(&self, shift: u32, s_needed: f64) -> Result<Arc<TabulatedFunction>> {
        if let Some(t) = self.rho_tables.read().unwrap().get(&shift) {
            if t.max_arg() >= s_needed {
                return Ok(t.clone());
            }
        }
        let mut domain = 8.0_f64;
        while domain < s_needed {
            domain *= 2.0;
        }
        let sp = self.shifted(shift);
        let ev = if shift == 0 {
            None
        } else {
            Some(DickmanEvaluator::new(sp))
        };
        let source = ev.as_ref().unwrap_or(self);
        let table = Arc::new(source.rho_table(domain, TABLE_STEP)?);
        self.rho_tables.write().unwrap().insert(shift, table.clone());
        Ok(table)
    }

    /// rho at the shifted parameters, dispatching series (small s) / table
    /// (large s). Arguments beyond the far cutoff return 0.
    pub fn rho(&self, shift: u32, s: f64) -> Result<f64> {
        if s <= 1.0 {
            return Ok(1.0);
        }
        if s <= SERIES_LIMIT {
            return self.rho_series_shifted(shift, s);
        }
        // past max(512, 4 theta) the value is below ~e^-theta / e^-r0*s
        // and treated as zero
        if s > RHO_FAR_CUTOFF.max(4.0 * self.shifted(shift).theta().abs()) {
            return Ok(0.0);
        }
        let table = self.rho_production(shift, s)?;
        table.eval(s)
    }

    /// Density of the largest weight,
    /// `f(v) = c_1 v^-(alpha+1) (1-v)^{theta+alpha-1} rho_{alpha,theta+alpha}((1-v)/v)`
    /// on (0,1), 0 outside.
    pub fn v1_density(&self, v: f64) -> Result<f64> {
        if !(0.0 < v && v < 1.0) {
            return Ok(0.0);
        }
        let (alpha, theta) = (self.params.alpha(), self.params.theta());
        let arg = (1.0 - v) / v;
        let rho = self.rho(1, arg)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        let log_f = log_c(1, self.params) - (alpha + 1.0) * v.ln()
            + (theta + alpha - 1.0) * (-v).ln_1p()
            + rho.ln();
        Ok(log_f.exp())
    }

    /// Both sides of the Laplace identity at the given lambda > 0.
    ///
    /// theta > 0 uses the weighted-transform form
    /// `lambda^theta/Gamma(theta) int s^{theta-1} e^{-lambda s} rho(s) ds
    ///   = exp(-theta T_0(lambda))` (alpha = 0) or
    ///   `(1 + C_alpha T_alpha(lambda))^{-theta/alpha}` (alpha > 0);
    /// theta <= 0 (alpha > 0 only) uses the R-function form on rho - 1,
    /// whose right side evaluates R at a negative real argument where the
    /// branch condition holds automatically (asserted at runtime).
    pub fn laplace_check(&self, lambda: f64) -> Result<LaplaceCheck> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be > 0 (got {lambda})")));
        }
        let (alpha, theta) = (self.params.alpha(), self.params.theta());
        let s_max = 64.0;
        let table = self.rho_production(0, s_max)?;
        if theta > 0.0 {
            let tail_value = table.eval(table.max_arg())?;
            let lhs = laplace_weighted(&table, theta, lambda, tail_value, 1e-9)?;
            let t = tail_integral_t(alpha, lambda)?;
            let rhs = if alpha == 0.0 {
                (-theta * t).exp()
            } else {
                (1.0 + c_alpha(alpha)? * t).powf(-theta / alpha)
            };
            Ok(LaplaceCheck { lambda, lhs, rhs, gap: (lhs.value - rhs).abs() })
        } else {
            // lambda^theta int_1^inf s^{theta-1} e^{-lambda s} (rho(s)-1) ds
            //   = R_{alpha,theta}(-T_alpha(lambda))
            let max_arg = table.max_arg();
            let body = quad_exp_tail(
                |s| {
                    if s >= max_arg {
                        return 0.0;
                    }
                    let rho = table.eval(s).unwrap_or(0.0);
                    s.powf(theta - 1.0) * (-lambda * s).exp() * (rho - 1.0)
                },
                1.0,
                1e-10,
            )?;
            let pref = lambda.powf(theta);
            let main = pref * body;
            // |dropped part| <= pref * int_{s_max}^inf s^{theta-1} e^{-lambda s}
            let bound = pref * max_arg.powf(theta - 1.0) * (-lambda * max_arg).exp() / lambda;
            let lhs = Bracketed { value: main, lower: main - bound, upper: main + bound };
            let t = tail_integral_t(alpha, lambda)?;
            let u = num_complex::Complex64::new(-t, 0.0);
            let rhs = r_function(self.params, u)?;
            if rhs.im.abs() > 1e-12 * rhs.re.abs().max(1.0) {
                return Err(Error::BranchCut(format!(
                    "unexpected imaginary part {} in R at negative real argument",
                    rhs.im
                )));
            }
            Ok(LaplaceCheck { lambda, lhs, rhs: rhs.re, gap: (lhs.value - rhs.re).abs() })
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LaplaceCheck {
    pub lambda: f64,
    pub lhs: Bracketed,
    pub rhs: f64,
    pub gap: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;

    fn ev(alpha: f64, theta: f64) -> DickmanEvaluator {
        DickmanEvaluator::new(validate_params(alpha, theta).unwrap())
    }

    #[test]
    fn i_basic_values() {
        let e = ev(0.0, 1.0);
        assert_eq!(e.i_n(0, 5.0).unwrap(), 1.0);
        assert_eq!(e.i_n(2, 1.5).unwrap(), 0.0);
        // I_1 at (0,1), s=2: int_{1/2}^1 dv/v = ln 2
        let v = e.i_n(1, 2.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-10, "{v}");
    }

    #[test]
    fn rho_is_one_below_one() {
        let e = ev(0.3, 0.7);
        assert_eq!(e.rho_series(0.7).unwrap(), 1.0);
        assert_eq!(e.rho_series(1.0).unwrap(), 1.0);
    }

    #[test]
    fn rho_dickman_at_two() {
        let e = ev(0.0, 1.0);
        let v = e.rho_series(2.0).unwrap();
        assert!((v - (1.0 - std::f64::consts::LN_2)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn rho_half_half_closed_form() {
        // theta + alpha - 1 = 0 kills the (1-v) factor:
        // rho(1.5) = 1 - (1/2) int_{2/3}^1 v^{-3/2} dv = 2 - sqrt(3/2)
        let e = ev(0.5, 0.5);
        let v = e.rho_series(1.5).unwrap();
        assert!((v - 0.775_255_128_608_411).abs() < 1e-9, "{v}");
    }

    #[test]
    fn rho_dickman_at_three() {
        let e = ev(0.0, 1.0);
        let v = e.rho_series(3.0).unwrap();
        assert!((v - 0.048_608_388_291_131_57).abs() < 1e-7, "{v}");
    }

    #[test]
    fn rho_series_monotone_and_in_range() {
        for &(a, t) in &[(0.0, 1.0), (0.3, 0.7), (0.5, 0.5), (0.6, -0.3), (0.8, 1.0)] {
            let e = ev(a, t);
            let mut prev = 1.0;
            let mut s = 1.05;
            while s <= 3.8 {
                let v = e.rho_series(s).unwrap();
                assert!(v <= prev + 1e-9, "({a},{t}) uptick at s={s}");
                assert!((0.0..=1.0).contains(&v));
                prev = v;
                s += 0.25;
            }
        }
    }

    #[test]
    fn table_matches_series() {
        // renewal path
        let e = ev(0.0, 1.0);
        let t = e.rho_table(3.0, 1.0 / 1024.0).unwrap();
        let got = t.eval(3.0).unwrap();
        assert!((got - 0.048_608_388_2).abs() < 1e-4, "{got}");
        // theta = 2 cross-check at s = 1.5
        let e2 = ev(0.0, 2.0);
        let t2 = e2.rho_table(2.0, 1.0 / 1024.0).unwrap();
        let got2 = t2.eval(1.5).unwrap();
        assert!((got2 - 0.855_736_450_450_337_9).abs() < 1e-6, "{got2}");
        // volterra path with exact seed region
        let e3 = ev(0.5, 0.5);
        let t3 = e3.rho_table(3.0, 1.0 / 512.0).unwrap();
        let got3 = t3.eval(1.5).unwrap();
        assert!((got3 - 0.775_255_128_608_411).abs() < 1e-8, "{got3}");
        let got35 = t3.eval(2.5).unwrap();
        let series = e3.rho_series(2.5).unwrap();
        assert!((got35 - series).abs() < 1e-4, "{got35} vs {series}");
    }

    #[test]
    fn table_matches_series_negative_theta() {
        let e = ev(0.6, -0.3);
        let t = e.rho_table(4.0, 1.0 / 512.0).unwrap();
        for &s in &[1.25, 1.75, 2.5, 3.5] {
            let a = t.eval(s).unwrap();
            let b = e.rho_series(s).unwrap();
            assert!((a - b).abs() < 1e-3, "s={s}: table {a} vs series {b}");
        }
    }

    #[test]
    fn recursion_closure() {
        // rho(s) = c_1 int_{s-1}^inf u^{theta+alpha-1} (1+u)^{-theta}
        //          rho_{alpha,theta+alpha}(u) du  (v -> u = (1-v)/v)
        for &(a, t, s) in &[(0.3f64, 0.7f64, 0.5f64), (0.3, 0.7, 1.5), (0.3, 0.7, 2.5), (0.5, 0.5, 2.5)] {
            let e = ev(a, t);
            let lo = (s - 1.0).max(0.0);
            let shifted_table = e.rho_production(1, 80.0).unwrap();
            let integrand = |u: f64| {
                let rho = if u <= 4.0 {
                    e.rho_series_shifted(1, u.max(1e-300)).unwrap()
                } else {
                    shifted_table.eval(u.min(shifted_table.max_arg())).unwrap()
                };
                u.powf(t + a - 1.0) * (1.0 + u).powf(-t) * rho
            };
            // rho decays at least exponentially; the [72, 80] contribution
            // bounds the dropped tail
            let head = if lo < 1e-12 {
                quad(integrand, 0.0, 72.0, EndpointWeights::left(t + a - 1.0).unwrap(), 1e-9)
                    .unwrap()
            } else {
                quad(integrand, lo, 72.0, EndpointWeights::none(), 1e-9).unwrap()
            };
            let guard = quad(integrand, 72.0, 80.0, EndpointWeights::none(), 1e-6).unwrap();
            assert!(guard.abs() < 1e-9, "tail not negligible: {guard}");
            let rhs = log_c(1, e.params()).exp() * head;
            let lhs = e.rho_series(s).unwrap();
            assert!((lhs - rhs).abs() < 1e-5, "({a},{t}) s={s}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn v1_density_values() {
        // rho factor is 1 for v >= 1/2
        let e = ev(0.0, 1.0);
        let f = e.v1_density(0.6).unwrap();
        assert!((f - 1.0 / 0.6).abs() < 1e-10, "{f}");
        assert_eq!(e.v1_density(1.2).unwrap(), 0.0);
        assert_eq!(e.v1_density(-0.1).unwrap(), 0.0);
    }

    #[test]
    fn v1_density_reproduces_rho() {
        // int_{1/s}^1 f = 1 - rho(s)
        for &(a, t) in &[(0.0, 1.0), (0.3, 0.7), (0.5, 0.5)] {
            let e = ev(a, t);
            for &s in &[2.0, 3.0] {
                let lo = 1.0 / s;
                let w = EndpointWeights::right(t + a - 1.0).unwrap();
                let integral = quad(
                    |v| {
                        let arg = (1.0 - v) / v;
                        let rho = if arg <= 1.0 {
                            1.0
                        } else {
                            e.rho_series_shifted(1, arg).unwrap()
                        };
                        log_c(1, e.params()).exp() * v.powf(-(a + 1.0)) * rho
                    },
                    lo,
                    1.0,
                    w,
                    1e-9,
                )
                .unwrap();
                let want = 1.0 - e.rho_series(s).unwrap();
                assert!(
                    (integral - want).abs() < 1e-5,
                    "({a},{t}) s={s}: {integral} vs {want}"
                );
            }
        }
    }

    #[test]
    fn v1_density_normalizes() {
        // int_eps^1 f + rho(1/eps) = 1 with eps = 1/4, so every rho argument
        // stays on the exact series path (the sub-eps mass P(V_1 < eps) is
        // rho(1/eps) exactly)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut cases = vec![(0.0, 1.0), (0.5, 0.5), (0.3, -0.2), (0.8, 1.0)];
        for _ in 0..6 {
            let alpha: f64 = rng.gen_range(0.0..0.9);
            let theta = rng.gen_range(-alpha + 0.05..4.0);
            cases.push((alpha, theta));
        }
        for (a, t) in cases {
            let e = ev(a, t);
            let eps = 0.25;
            let w = EndpointWeights::right(t + a - 1.0).unwrap();
            let c1 = log_c(1, e.params()).exp();
            let main = quad(
                |v| {
                    let arg = (1.0 - v) / v;
                    let rho = if arg <= 1.0 { 1.0 } else { e.rho_series_shifted(1, arg).unwrap() };
                    c1 * v.powf(-(a + 1.0)) * rho
                },
                eps,
                1.0,
                w,
                1e-9,
            )
            .unwrap();
            let tail = e.rho_series(1.0 / eps).unwrap();
            assert!(
                (main + tail - 1.0).abs() < 1e-6,
                "({a},{t}): integral {main} + rho {tail} = {}",
                main + tail
            );
        }
    }

    #[test]
    fn laplace_identity_positive_theta() {
        // (0,1), lambda=1: rhs = exp(-E1(1))
        let e = ev(0.0, 1.0);
        let c = e.laplace_check(1.0).unwrap();
        assert!((c.rhs - 0.803_013_354_514_850_4).abs() < 1e-10);
        assert!(c.gap < 1e-3, "gap {}", c.gap);
        assert!(c.lhs.lower - 1e-3 <= c.rhs && c.rhs <= c.lhs.upper + 1e-3);
        // large lambda: both sides -> 1
        let c = e.laplace_check(50.0).unwrap();
        assert!((c.lhs.value - 1.0).abs() < 1e-6 && (c.rhs - 1.0).abs() < 1e-6);
        // (0.5, 0.5), lambda = 2
        let e = ev(0.5, 0.5);
        let c = e.laplace_check(2.0).unwrap();
        assert!((c.rhs - 0.991_580_782_455_606_2).abs() < 1e-10, "{}", c.rhs);
        assert!(c.gap < 1e-3, "gap {}", c.gap);
    }

    #[test]
    fn laplace_identity_nonpositive_theta() {
        let e = ev(0.5, 0.0);
        let c = e.laplace_check(1.0).unwrap();
        assert!(c.gap < 1e-3, "theta=0 gap {}", c.gap);
        let e = ev(0.6, -0.3);
        let c = e.laplace_check(2.0).unwrap();
        assert!(c.gap < 1e-3, "theta<0 gap {}", c.gap);
    }

    #[test]
    fn series_depth_guard() {
        let e = ev(0.0, 1.0);
        assert!(e.rho_series(13.5).is_err());
    }
}
