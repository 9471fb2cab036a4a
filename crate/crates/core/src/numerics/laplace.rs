//! Gamma-weighted Laplace transforms of tabulated functions:
//! `lambda^theta / Gamma(theta) * int_0^inf s^{theta-1} e^{-lambda s} tab(s) ds`,
//! with the tail beyond the table bounded by monotonicity (tab non-increasing)
//! and returned as an explicit bracket.

use crate::error::{Error, Result};
use crate::numerics::quad::{quad, EndpointWeights};
use crate::numerics::tabulated::TabulatedFunction;
use crate::special::{log_gamma, reg_upper_gamma};

/// A value with the interval that certainly contains the untruncated answer.
#[derive(Debug, Clone, Copy)]
pub struct Bracketed {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Bracketed {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lower..=self.upper).contains(&x)
    }
}

/// Weighted transform of a non-increasing, non-negative table over
/// [0, S_max]. The tail uses `0 <= tab(s) <= tail_value` for s >= S_max,
/// where `tail_value` is normally `tab(S_max)`.
pub fn laplace_weighted(
    tab: &TabulatedFunction,
    theta: f64,
    lambda: f64,
    tail_value: f64,
    rel_tol: f64,
) -> Result<Bracketed> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!(
            "laplace_weighted needs theta > 0 (got {theta})"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "laplace_weighted needs lambda > 0 (got {lambda})"
        )));
    }
    if tab.grid_start() > 0.0 {
        return Err(Error::Domain(
            "table must cover [0, S_max] (grid_start > 0)".into(),
        ));
    }
    let s_max = tab.max_arg();
    let log_pref = theta * lambda.ln() - log_gamma(theta);
    let pref = log_pref.exp();

    // [0, 1] with the declared s^{theta-1} endpoint weight, then exp-decaying
    // panels out to S_max
    let head = quad(
        |s| (-lambda * s).exp() * tab.eval(s).unwrap_or(0.0),
        0.0,
        1.0_f64.min(s_max),
        EndpointWeights::left(theta - 1.0)?,
        rel_tol,
    )?;
    let mut body = 0.0;
    if s_max > 1.0 {
        let mut lo = 1.0;
        let mut width = 1.0;
        while lo < s_max {
            let hi = (lo + width).min(s_max);
            body += quad(
                |s| s.powf(theta - 1.0) * (-lambda * s).exp() * tab.eval(s).unwrap_or(0.0),
                lo,
                hi,
                EndpointWeights::none(),
                rel_tol,
            )?;
            lo = hi;
            width *= 2.0;
        }
    }
    let main = pref * (head + body);
    // 0 <= tail <= tail_value * Q(theta, lambda S_max)
    let tail_bound = tail_value.max(0.0) * reg_upper_gamma(theta, lambda * s_max)?;
    Ok(Bracketed {
        value: main + 0.5 * tail_bound,
        lower: main,
        upper: main + tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::tabulated::InterpOrder;

    fn ones_table(s_max: f64, h: f64) -> TabulatedFunction {
        let n = (s_max / h) as usize + 1;
        TabulatedFunction::new(0.0, h, vec![1.0; n], InterpOrder::Linear).unwrap()
    }

    #[test]
    fn transform_of_one_theta1() {
        let tab = ones_table(60.0, 0.25);
        let b = laplace_weighted(&tab, 1.0, 1.0, 1.0, 1e-10).unwrap();
        // exact answer 1 - e^-60 plus a tail bracket of width Q(1,60) = e^-60
        assert!((b.value - 1.0).abs() < 1e-9, "{b:?}");
        assert!(b.width() <= 2.0 * (-60.0_f64).exp(), "{:?}", b.width());
        assert!(b.upper >= 1.0 - 1e-9 && b.lower <= 1.0, "{b:?}");
    }

    #[test]
    fn transform_of_one_theta2_lambda2() {
        let tab = ones_table(60.0, 0.25);
        let b = laplace_weighted(&tab, 2.0, 2.0, 1.0, 1e-10).unwrap();
        assert!((b.value - 1.0).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn bracket_contains_refined_value() {
        // decreasing table; coarse-tolerance bracket must contain the
        // tight-tolerance value
        let h = 0.125;
        let n = (40.0 / h) as usize + 1;
        let vals: Vec<f64> = (0..n).map(|i| (-0.3 * (i as f64) * h).exp()).collect();
        let tab = TabulatedFunction::new(0.0, h, vals, InterpOrder::CubicMonotone).unwrap();
        let tail = *tab.values().last().unwrap();
        let coarse = laplace_weighted(&tab, 1.5, 0.8, tail, 1e-5).unwrap();
        let fine = laplace_weighted(&tab, 1.5, 0.8, tail, 1e-11).unwrap();
        assert!(coarse.lower <= fine.value && fine.value <= coarse.upper * (1.0 + 1e-6));
    }

    #[test]
    fn domain_checks() {
        let tab = ones_table(10.0, 0.25);
        assert!(laplace_weighted(&tab, 0.0, 1.0, 1.0, 1e-8).is_err());
        assert!(laplace_weighted(&tab, 1.0, -1.0, 1.0, 1e-8).is_err());
        let off = TabulatedFunction::new(1.0, 0.25, vec![1.0, 1.0], InterpOrder::Linear).unwrap();
        assert!(laplace_weighted(&off, 1.0, 1.0, 1.0, 1e-8).is_err());
    }
}
