//! Verification suites: every analytic path checked against its independent
//! oracle (closed forms, quadrature refinement, or Monte Carlo), with one
//! structured result per check. The CLI's `verify` subcommand and the
//! acceptance test target both run these.

use std::time::Instant;

use serde::Serialize;

use crate::asymptotics::{
    clt_experiment, corollary_gumbel_gap, correlation_total_mass, cov_limit,
    empirical_correlation_1, empirical_correlation_2, gumbel_experiment, gumbel_reference,
    sigma2, sigma2_identity_gap,
};
use crate::constants::{c_recurrence_check, log_c};
use crate::dickman::DickmanEvaluator;
use crate::error::{Error, Result};
use crate::generating::{r_function, r_taylor_coefficient};
use crate::laws;
use crate::markov_krein::{
    cf_nu, cf_series, compose_check, fixed_point_check, kernel_identity_gaps, mk_identity_check,
    p_theta_membership_check, NuSpec,
};
use crate::numerics::quad::{quad, EndpointWeights};
use crate::params::validate_params;
use crate::sampler::{
    parallel_draws, ranked_prefix_above, sample_mean_functional, top_m, TailPolicy,
};
use crate::special::log_gamma;
use crate::stats::mean_and_se;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    /// developer loop: replicate counts scaled down ~50x, fixed MC thresholds
    /// widened by the corresponding sqrt factor
    Quick,
    /// the acceptance-criteria values
    Full,
}

impl Budget {
    fn reps(&self, full: usize) -> usize {
        match self {
            Budget::Full => full,
            Budget::Quick => (full / 50).max(2000),
        }
    }

    /// widening for thresholds stated at the full replicate count
    fn widen(&self, full: usize) -> f64 {
        (full as f64 / self.reps(full) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn abs_gap(name: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        CheckResult {
            name: name.into(),
            value,
            std_error: None,
            reference,
            tolerance: tol,
            pass: (value - reference).abs() <= tol,
            note: None,
        }
    }

    fn in_se(name: impl Into<String>, value: f64, se: f64, reference: f64, max_se: f64) -> Self {
        let gap = (value - reference).abs() / se.max(1e-300);
        CheckResult {
            name: name.into(),
            value,
            std_error: Some(se),
            reference,
            tolerance: max_se,
            pass: gap <= max_se,
            note: Some(format!("gap = {gap:.2} se")),
        }
    }

    /// |value - reference| <= max(max_se * se, abs_floor); for draws that
    /// can be exactly degenerate (se ~ 0).
    fn in_se_or_abs(
        name: impl Into<String>,
        value: f64,
        se: f64,
        reference: f64,
        max_se: f64,
        abs_floor: f64,
    ) -> Self {
        let gap = (value - reference).abs();
        let tol = (max_se * se).max(abs_floor);
        CheckResult {
            name: name.into(),
            value,
            std_error: Some(se),
            reference,
            tolerance: tol,
            pass: gap <= tol,
            note: Some(format!("abs gap = {gap:.2e}")),
        }
    }

    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckResult {
            name: name.into(),
            value,
            std_error: None,
            reference: 0.0,
            tolerance: threshold,
            pass: value <= threshold,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub budget: Budget,
    pub seed: u64,
    pub runtime_s: f64,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    fn new(suite: &str, budget: Budget, seed: u64, checks: Vec<CheckResult>, t0: Instant) -> Self {
        SuiteReport {
            suite: suite.into(),
            budget,
            seed,
            runtime_s: t0.elapsed().as_secs_f64(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

pub const SUITES: &[&str] = &["core", "dickman", "laws", "gumbel", "clt", "markov-krein"];

pub fn run_suite(name: &str, budget: Budget, seed: u64) -> Result<SuiteReport> {
    let t0 = Instant::now();
    let checks = match name {
        "core" => core_checks()?,
        "dickman" => {
            let mut c = dickman_ground_truth()?;
            c.extend(evaluator_sampler_consistency(budget, seed)?);
            c.extend(laplace_identities()?);
            c.extend(dickman_invariants(seed)?);
            c
        }
        "laws" => {
            let mut c = moments(budget, seed)?;
            c.extend(correlation_functions(budget, seed)?);
            c.extend(laws_invariants(seed)?);
            c
        }
        "gumbel" => gumbel_limit(budget, seed)?,
        "clt" => clt_checks(budget, seed)?,
        "markov-krein" => markov_krein_checks(budget, seed)?,
        other => {
            return Err(Error::Domain(format!(
                "unknown suite {other}; available: {SUITES:?} or 'all'"
            )))
        }
    };
    Ok(SuiteReport::new(name, budget, seed, checks, t0))
}

pub fn run_all(budget: Budget, seed: u64) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|s| run_suite(s, budget, seed)).collect()
}

// -------------------------------------------------------------------------
// core
// -------------------------------------------------------------------------

pub fn core_checks() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    // c5: coefficient recurrence on the (m, n) <= 6 grid
    let mut rng = crate::sampler::RngStream::new(99, 0);
    let mut worst_ok = true;
    for _ in 0..20 {
        let alpha = rng.uniform() * 0.95;
        let theta = -alpha + 0.05 + rng.uniform() * 8.0;
        let p = validate_params(alpha, theta)?;
        for m in 0..=6 {
            for n in 0..=6 {
                worst_ok &= c_recurrence_check(m, n, p);
            }
        }
    }
    out.push(CheckResult::below(
        "c5: c-recurrence grid (m,n)<=6, 20 random params, log-gap",
        if worst_ok { 0.0 } else { 1.0 },
        0.5,
    )
    .with_note("1e-10 log-space tolerance inside c_recurrence_check"));

    // alpha = 0 closed form
    let mut worst = 0.0_f64;
    for &theta in &[0.4, 1.0, 2.0, 7.5] {
        let p = validate_params(0.0, theta)?;
        for n in 0..=10u32 {
            let rel = (log_c(n, p).exp() - theta.powi(n as i32)).abs() / theta.powi(n as i32);
            worst = worst.max(rel);
        }
    }
    out.push(CheckResult::below("core: c at alpha=0 equals theta^n (rel)", worst, 1e-12));

    // R series coefficients vs closed form via a Cauchy circle
    let mut worst = 0.0_f64;
    for &(a, t) in &[(0.0, 1.0), (0.5, 0.5), (0.6, -0.3)] {
        let p = validate_params(a, t)?;
        let radius = 0.05;
        let samples: Vec<num_complex::Complex64> = (0..256)
            .map(|j| {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
                r_function(p, radius * num_complex::Complex64::new(ang.cos(), ang.sin())).unwrap()
            })
            .collect();
        for k in 1..=5usize {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / 256.0;
                acc += s * num_complex::Complex64::new(ang.cos(), ang.sin());
            }
            let got = (acc / 256.0).re / radius.powi(k as i32);
            let want = r_taylor_coefficient(k as u32, p);
            worst = worst.max((got - want).abs() / want.abs());
        }
    }
    out.push(CheckResult::below("core: R Taylor coefficients vs series (rel)", worst, 1e-6));

    // branch continuity in theta at fixed alpha
    let u = num_complex::Complex64::new(0.3, 0.0);
    let base = r_function(validate_params(0.5, 0.0)?, u)?;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for &theta in &[1e-2, 1e-3, 1e-4] {
        let gap = (r_function(validate_params(0.5, theta)?, u)? - base).norm();
        monotone &= gap < prev && gap < 10.0 * theta;
        prev = gap;
    }
    out.push(CheckResult::below(
        "core: R continuous across theta -> 0 (geometric decay)",
        if monotone { 0.0 } else { 1.0 },
        0.5,
    ));

    // special-function anchors
    out.push(CheckResult::abs_gap(
        "core: E1(1)",
        crate::special::exp_e1(1.0)?,
        0.219_383_934_395_520_27,
        1e-12,
    ));
    out.push(CheckResult::abs_gap(
        "core: T_0.5(1)",
        crate::special::tail_integral_t(0.5, 1.0)?,
        0.178_147_711_781_560_7,
        1e-12,
    ));
    out.push(CheckResult::abs_gap("core: log_gamma(1)", log_gamma(1.0), 0.0, 1e-15));

    // quad exactness spot checks
    let v = quad(|_| 1.0, 0.0, 1.0, EndpointWeights::new(-0.5, -0.5)?, 1e-12)?;
    out.push(CheckResult::abs_gap("core: Beta(1/2,1/2) = pi", v, std::f64::consts::PI, 1e-12));
    Ok(out)
}

// -------------------------------------------------------------------------
// dickman: criteria 1, 2, 4 and the evaluator invariants
// -------------------------------------------------------------------------

/// Criterion 1: closed-form ground truth for the three evaluator paths.
pub fn dickman_ground_truth() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let e01 = DickmanEvaluator::new(validate_params(0.0, 1.0)?);
    out.push(CheckResult::abs_gap(
        "c1: rho_series(0,1)(2) vs 1 - ln 2",
        e01.rho_series(2.0)?,
        1.0 - std::f64::consts::LN_2,
        1e-8,
    ));
    let renewal = e01.rho_table(2.0, 2.0_f64.powi(-10))?;
    out.push(CheckResult::abs_gap(
        "c1: renewal table at s=2, h=2^-10",
        renewal.eval(2.0)?,
        1.0 - std::f64::consts::LN_2,
        1e-5,
    ));
    let e55 = DickmanEvaluator::new(validate_params(0.5, 0.5)?);
    let volterra = e55.rho_table(1.5, 2.0_f64.powi(-9))?;
    out.push(CheckResult::abs_gap(
        "c1: volterra table (0.5,0.5) at s=1.5, h=2^-9",
        volterra.eval(1.5)?,
        0.775_255_128_608_411,
        1e-4,
    ));
    Ok(out)
}

pub const CONSISTENCY_PARAMS: [(f64, f64); 6] =
    [(0.0, 1.0), (0.0, 2.5), (0.3, 0.7), (0.5, 0.5), (0.6, -0.3), (0.8, 1.0)];

/// Criterion 2: empirical P(sV_1 < 1) from certified draws vs the series.
pub fn evaluator_sampler_consistency(budget: Budget, seed: u64) -> Result<Vec<CheckResult>> {
    let reps = budget.reps(1_000_000);
    let s_values = [1.5, 2.0, 3.0];
    let mut out = Vec::new();
    for (i, &(alpha, theta)) in CONSISTENCY_PARAMS.iter().enumerate() {
        let p = validate_params(alpha, theta)?;
        let ev = DickmanEvaluator::new(p);
        // the indicator {s V_1 < 1} is certified once the residual is below
        // 1/max(s): every undiscovered weight is smaller
        let floor = 1.0 / 3.0;
        let draws: Vec<[f64; 3]> = parallel_draws(reps, seed ^ (i as u64) << 8, |rng| {
            let prefix = ranked_prefix_above(p, floor, rng)?;
            let v1 = prefix.weights.first().copied().unwrap_or(0.0);
            Ok([
                if 1.5 * v1 < 1.0 { 1.0 } else { 0.0 },
                if 2.0 * v1 < 1.0 { 1.0 } else { 0.0 },
                if 3.0 * v1 < 1.0 { 1.0 } else { 0.0 },
            ])
        })?;
        for (k, &s) in s_values.iter().enumerate() {
            let sample: Vec<f64> = draws.iter().map(|d| d[k]).collect();
            let (mean, se) = mean_and_se(&sample)?;
            let want = ev.rho_series(s)?;
            out.push(CheckResult::in_se(
                format!("c2: P({s} V1 < 1) MC vs series at ({alpha},{theta})"),
                mean,
                se,
                want,
                3.5,
            ));
        }
    }
    Ok(out)
}

/// Criterion 4 (first half): Laplace-transform identity gaps.
pub fn laplace_identities() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for &(alpha, theta) in &[(0.0, 1.0), (0.0, 2.5), (0.3, 0.7), (0.5, 0.5)] {
        let ev = DickmanEvaluator::new(validate_params(alpha, theta)?);
        for &lambda in &[0.5, 1.0, 2.0, 5.0] {
            let c = ev.laplace_check(lambda)?;
            out.push(CheckResult::below(
                format!("c4: laplace gap at ({alpha},{theta}), lambda={lambda}"),
                c.gap,
                1e-3,
            ));
        }
    }
    Ok(out)
}

pub fn dickman_invariants(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    // series/table agreement on [1, 4], including negative theta
    for &(alpha, theta) in &[(0.0, 1.0), (0.3, 0.7), (0.5, 0.5), (0.6, -0.3), (0.8, 1.0)] {
        let ev = DickmanEvaluator::new(validate_params(alpha, theta)?);
        let table = ev.rho_table(4.0, 2.0_f64.powi(-9))?;
        let mut worst = 0.0_f64;
        let mut s = 1.0;
        while s <= 4.0 {
            worst = worst.max((table.eval(s)? - ev.rho_series(s)?).abs());
            s += 0.25;
        }
        out.push(CheckResult::below(
            format!("dickman: max |table - series| on [1,4] at ({alpha},{theta})"),
            worst,
            1e-3,
        ));
    }
    // grid-convergence order of the volterra march (pure, seeded on [0,1])
    let want = 2.0 - 1.5_f64.sqrt();
    let mut errs = Vec::new();
    for k in [7, 8, 9] {
        let grid = crate::numerics::volterra::MarchGrid::new(1.5, 2.0_f64.powi(-k))?;
        let t = crate::numerics::volterra::volterra_march(0.5, 0.5, grid, |s| {
            if s <= 1.0 {
                Some(1.0)
            } else {
                None
            }
        })?;
        errs.push((t.eval(1.5)? - want).abs());
    }
    out.push(CheckResult::below(
        "dickman: volterra error halving factor at s=1.5 (>= 1.8 per level)",
        if errs[0] / errs[1] >= 1.8 && errs[1] / errs[2] >= 1.8 { 0.0 } else { 1.0 },
        0.5,
    )
    .with_note(format!("errors {errs:?}")));

    // recursion closure and v1 density normalization (series route)
    let mut worst_norm = 0.0_f64;
    let mut rng = crate::sampler::RngStream::new(seed, 77);
    let mut cases = vec![(0.0, 1.0), (0.5, 0.5), (0.3, -0.2), (0.8, 1.0)];
    for _ in 0..6 {
        let alpha = rng.uniform() * 0.9;
        let theta = -alpha + 0.05 + rng.uniform() * 4.0;
        cases.push((alpha, theta));
    }
    for &(alpha, theta) in &cases {
        let ev = DickmanEvaluator::new(validate_params(alpha, theta)?);
        let eps = 0.25;
        let c1 = log_c(1, ev.params()).exp();
        let main = quad(
            |v| {
                let arg = (1.0 - v) / v;
                let rho = if arg <= 1.0 { 1.0 } else { ev.rho_series_shifted(1, arg).unwrap() };
                c1 * v.powf(-(alpha + 1.0)) * rho
            },
            eps,
            1.0,
            EndpointWeights::right(theta + alpha - 1.0)?,
            1e-9,
        )?;
        let tail = ev.rho_series(1.0 / eps)?;
        worst_norm = worst_norm.max((main + tail - 1.0).abs());
    }
    out.push(CheckResult::below(
        "dickman: V1 density normalization, 10 parameter sets",
        worst_norm,
        1e-6,
    ));

    // rho reproduced by integrating the density: int_{1/s}^1 f = 1 - rho(s)
    let mut worst = 0.0_f64;
    for &(alpha, theta) in &[(0.0, 1.0), (0.3, 0.7), (0.5, 0.5)] {
        let ev = DickmanEvaluator::new(validate_params(alpha, theta)?);
        for &s in &[2.0, 3.0] {
            let c1 = log_c(1, ev.params()).exp();
            let integral = quad(
                |v| {
                    let arg = (1.0 - v) / v;
                    let rho = if arg <= 1.0 { 1.0 } else { ev.rho_series_shifted(1, arg).unwrap() };
                    c1 * v.powf(-(alpha + 1.0)) * rho
                },
                1.0 / s,
                1.0,
                EndpointWeights::right(theta + alpha - 1.0)?,
                1e-9,
            )?;
            worst = worst.max((integral - (1.0 - ev.rho_series(s)?)).abs());
        }
    }
    out.push(CheckResult::below("dickman: int_{1/s}^1 f = 1 - rho(s)", worst, 1e-5));

    // monotone, unit-range series values
    let mut ok = true;
    let mut rng = crate::sampler::RngStream::new(seed, 78);
    for _ in 0..100 {
        let alpha = rng.uniform() * 0.9;
        let theta = -alpha + 0.05 + rng.uniform() * 4.0;
        let ev = DickmanEvaluator::new(validate_params(alpha, theta)?);
        let s = 1.0 + rng.uniform() * 3.0;
        let a = ev.rho_series(s)?;
        let b = ev.rho_series(s + 0.3)?;
        ok &= (0.0..=1.0).contains(&a) && b <= a + 1e-9;
    }
    out.push(CheckResult::below(
        "dickman: rho non-increasing in (0,1] on 100 random evaluations",
        if ok { 0.0 } else { 1.0 },
        0.5,
    ));
    Ok(out)
}

// -------------------------------------------------------------------------
// laws: criteria 3, 5 and the distributional invariants
// -------------------------------------------------------------------------

/// Criterion 5: moment formulas.
pub fn moments(budget: Budget, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let p01 = validate_params(0.0, 1.0)?;
    let gd = laws::mixed_moment(p01, &[1.0])?;
    out.push(CheckResult::abs_gap(
        "c5: E V1 at (0,1) vs Golomb-Dickman constant",
        gd,
        0.624_329_988_543_550_9,
        1e-5,
    ));
    // quadrature refinement: same integral at a 4x finer tolerance through an
    // independent composite-Simpson pass
    let refined = {
        let f = |z: f64| {
            (-z - crate::special::exp_e1(z.max(1e-300)).unwrap()).exp()
        };
        let mut acc = 0.0;
        let n = 400_000usize;
        let hi = 60.0;
        let h = hi / n as f64;
        for i in 0..n {
            let a = i as f64 * h;
            acc += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
        }
        acc
    };
    out.push(CheckResult::abs_gap("c5: Golomb-Dickman quadrature refinement", gd, refined, 1e-5));

    let reps = budget.reps(1_000_000);
    let v1 = parallel_draws(reps, seed ^ 0x51, |rng| Ok(top_m(p01, 1, rng)?.weights[0]))?;
    let (mean, se) = mean_and_se(&v1)?;
    out.push(CheckResult::in_se("c5: E V1 at (0,1) vs MC", mean, se, gd, 3.5));

    // mixed moment at (0.5, 0.5): m = 1 powers vs MC
    let p55 = validate_params(0.5, 0.5)?;
    let m2 = laws::mixed_moment(p55, &[2.0])?;
    let v1sq = parallel_draws(budget.reps(400_000), seed ^ 0x52, |rng| {
        Ok(top_m(p55, 1, rng)?.weights[0].powi(2))
    })?;
    let (mean, se) = mean_and_se(&v1sq)?;
    out.push(CheckResult::in_se("c5: E V1^2 at (0.5,0.5) vs MC", mean, se, m2, 3.5));

    // cov_H(., 1, q) vanishes
    let mut rng = crate::sampler::RngStream::new(seed, 5);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let alpha = rng.uniform() * 0.9;
        let theta = -alpha + 0.05 + rng.uniform() * 6.0;
        let q = alpha + 0.05 + rng.uniform() * 3.0;
        worst = worst.max(laws::cov_h(validate_params(alpha, theta)?, 1.0, q)?.abs());
    }
    out.push(CheckResult::below("c5: cov_H(1, q) = 0 (20 random params)", worst, 1e-12));

    // trivial expectation
    out.push(CheckResult::abs_gap(
        "c5: mixed moment of the empty exponent vector",
        laws::mixed_moment(p55, &[0.0])?,
        1.0,
        0.0,
    ));
    Ok(out)
}

/// Criterion 3: binned correlation estimators against integrated q_n.
pub fn correlation_functions(budget: Budget, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (i, &(alpha, theta)) in CONSISTENCY_PARAMS.iter().enumerate() {
        let p = validate_params(alpha, theta)?;
        // certifying every weight >= 0.05 costs ~(1/0.05)^{alpha/(1-alpha)}
        // sticks per replicate; high alpha gets a smaller (still SE-valid)
        // replicate budget
        let reps = if alpha >= 0.75 {
            budget.reps(20_000)
        } else {
            budget.reps(1_000_000)
        };
        let rep = empirical_correlation_1(p, 0.05, 20, reps, seed ^ ((i as u64) << 12))?;
        out.push(CheckResult::below(
            format!("c3: q1 binned estimator at ({alpha},{theta}), worst bin gap (se units)"),
            rep.max_gap_in_se,
            4.0,
        ));
        let (total, reference) = correlation_total_mass(&rep, p, 0.05)?;
        // aggregated counts: se of the total from the bin ses
        let se_total: f64 = rep
            .bins
            .iter()
            .map(|b| (b.std_error * (b.hi - b.lo)).powi(2))
            .sum::<f64>()
            .sqrt();
        out.push(CheckResult::in_se(
            format!("c3: q1 total mass above 0.05 at ({alpha},{theta})"),
            total,
            se_total,
            reference,
            4.0,
        ));
    }
    for &(alpha, theta) in &[(0.0, 1.0), (0.5, 0.5)] {
        let p = validate_params(alpha, theta)?;
        let rep = empirical_correlation_2(p, 0.05, 10, budget.reps(1_000_000), seed ^ 0xabc)?;
        out.push(CheckResult::below(
            format!("c3: q2 cell estimator at ({alpha},{theta}), worst cell gap (se units)"),
            rep.max_gap_in_se,
            4.0,
        ));
        // symmetry across the diagonal within statistical error
        let mut worst_sym = 0.0_f64;
        for a in &rep.bins {
            if let Some(b) = rep
                .bins
                .iter()
                .find(|b| (b.lo - a.hi).abs() < 1e-12 && (b.hi - a.lo).abs() < 1e-12)
            {
                let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
                worst_sym = worst_sym.max((a.estimate - b.estimate).abs() / se.max(1e-300));
            }
        }
        out.push(CheckResult::below(
            format!("c3: q2 diagonal symmetry at ({alpha},{theta}) (se units)"),
            worst_sym,
            5.0,
        ));
    }
    Ok(out)
}

pub fn laws_invariants(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let e01 = DickmanEvaluator::new(validate_params(0.0, 1.0)?);
    // rho_m monotone in m
    let mut ok = true;
    for &s in &[2.5, 3.5] {
        let r: Vec<f64> = (1..=3).map(|m| laws::rho_m(&e01, m, s).unwrap()).collect();
        ok &= r[0] <= r[1] + 1e-12 && r[1] <= r[2] + 1e-12;
    }
    out.push(CheckResult::below(
        "laws: rho_m non-decreasing in m",
        if ok { 0.0 } else { 1.0 },
        0.5,
    ));

    // rho_2 vs MC
    let s = 2.5;
    let want = laws::rho_m(&e01, 2, s)?;
    let p01 = e01.params();
    let hits = parallel_draws(200_000, seed ^ 0x77, |rng| {
        let r = top_m(p01, 2, rng)?;
        Ok(if s * r.weights[1] < 1.0 { 1.0 } else { 0.0 })
    })?;
    let (mean, se) = mean_and_se(&hits)?;
    out.push(CheckResult::in_se("laws: rho_2(2.5) at (0,1) vs MC", mean, se, want, 3.5));

    // vm density normalization (m = 2)
    let eps = 1.0 / 8.0;
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
    let mut acc = 0.0;
    for w in edges.windows(2) {
        acc += quad(
            |v| laws::vm_density(&e01, 2, v).unwrap(),
            w[0],
            w[1],
            EndpointWeights::none(),
            1e-8,
        )?;
    }
    let tail = laws::rho_m(&e01, 2, 1.0 / eps)?;
    out.push(CheckResult::abs_gap(
        "laws: V2 density normalization at (0,1)",
        acc + tail,
        1.0,
        1e-5,
    ));

    // joint density marginalizes to the V2 density
    let mut worst = 0.0_f64;
    for &v2 in &[0.1, 0.2, 0.3] {
        let got = quad(
            |v1| {
                let pt = laws::SimplexPoint::ordered(vec![v1, v2], 1.0).unwrap();
                laws::joint_density(&e01, &pt).unwrap()
            },
            v2,
            1.0 - v2,
            EndpointWeights::right(e01.params().theta() - 1.0)?,
            1e-7,
        )?;
        worst = worst.max((got - laws::vm_density(&e01, 2, v2)?).abs());
    }
    out.push(CheckResult::below(
        "laws: joint density marginalizes to vm_density",
        worst,
        1e-4,
    ));
    Ok(out)
}

// -------------------------------------------------------------------------
// gumbel: criterion 6
// -------------------------------------------------------------------------

pub fn gumbel_limit(budget: Budget, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let reps = budget.reps(100_000);
    let widen = budget.widen(100_000);

    // flat-threshold KS checks at theta = 500 (stated < 0.02); the true
    // finite-theta Kolmogorov distance is ~0.087 (alpha=0) / ~0.17
    // (alpha=0.3), decaying like lnln/ln -- see the decisions ledger
    for &alpha in &[0.0, 0.3] {
        let p = validate_params(alpha, 500.0)?;
        let rep = gumbel_experiment(p, 1, reps, seed ^ 0x60)?;
        out.push(
            CheckResult::below(
                format!("c6: KS(Z1 vs Gumbel) at (alpha={alpha}, theta=500)"),
                rep.marginal_ks[0],
                0.02 * widen,
            )
            .with_note(
                "stated threshold is unattainable: the exact finite-theta law sits at \
                 KS ~ 0.09-0.17 here (rate lnln(theta)/ln(theta)); see decisions ledger",
            ),
        );
    }

    // convergence direction: KS decreasing from theta=200 to theta=2000
    let ks200 = gumbel_experiment(validate_params(0.0, 200.0)?, 1, reps, seed ^ 0x61)?
        .marginal_ks[0];
    let rep2000 = gumbel_experiment(validate_params(0.0, 2000.0)?, 2, reps, seed ^ 0x61)?;
    let ks2000 = rep2000.marginal_ks[0];
    out.push(
        CheckResult::below(
            "c6: KS(theta=2000) < KS(theta=200) (same seed budget)",
            ks2000,
            ks200,
        )
        .with_note(format!("ks200 = {ks200:.4}, ks2000 = {ks2000:.4}")),
    );
    // marginal of the second point and the joint law at m = 2: trend checks
    let rep200m2 = gumbel_experiment(validate_params(0.0, 200.0)?, 2, reps, seed ^ 0x61)?;
    out.push(
        CheckResult::below(
            "c6: KS(Z2) decreasing from theta=200 to 2000",
            rep2000.marginal_ks[1],
            rep200m2.marginal_ks[1],
        )
        .with_note(format!(
            "ks200 = {:.4}, ks2000 = {:.4}",
            rep200m2.marginal_ks[1], rep2000.marginal_ks[1]
        )),
    );
    if let (Some(j), Some(j200)) = (rep2000.joint_sup_gap, rep200m2.joint_sup_gap) {
        out.push(
            CheckResult::below("c6: joint (Z1,Z2) sup-gap decreasing in theta", j, j200)
                .with_note(format!("gap200 = {j200:.4}, gap2000 = {j:.4}")),
        );
    }

    // analytic rho_m limit checks (6.12) at theta = 10^3 and the trend
    let ev1000 = DickmanEvaluator::new(validate_params(0.3, 1000.0)?);
    let ev100 = DickmanEvaluator::new(validate_params(0.3, 100.0)?);
    for m in [1u32, 2] {
        let mut sup1000 = 0.0_f64;
        let mut sup100 = 0.0_f64;
        for &x in &[-1.0, 0.0, 1.0] {
            let (_, _, gap) = corollary_gumbel_gap(&ev1000, m, x, 0.0)?;
            sup1000 = sup1000.max(gap);
            out.push(
                CheckResult::below(
                    format!("c6: |rho_{m}(theta/(x+beta)) - limit| at theta=1e3, x={x}"),
                    gap,
                    0.05,
                )
                .with_note(
                    "stated threshold unattainable at theta=1e3 for most x (see ledger); \
                     the sup-over-x trend check is the robust criterion",
                ),
            );
            let (_, _, gap100) = corollary_gumbel_gap(&ev100, m, x, 0.0)?;
            sup100 = sup100.max(gap100);
        }
        // pointwise gaps cross zero near x = 1, so the trend is monotone in
        // the sup over x, not at each fixed x
        out.push(
            CheckResult::below(
                format!("c6: sup_x rho_{m} limit gap decreasing in theta"),
                sup1000,
                sup100,
            )
            .with_note(format!("sup(100) = {sup100:.4}, sup(1000) = {sup1000:.4}")),
        );
    }
    // bounded-perturbation variant of the rescaling (constant offset)
    let (r0, _, _) = corollary_gumbel_gap(&ev1000, 1, 0.0, 0.0)?;
    let (rb, _, _) = corollary_gumbel_gap(&ev1000, 1, 0.0, 0.5)?;
    out.push(CheckResult::abs_gap(
        "c6: constant-offset rescaling variant shifts rho_1 by o(1)",
        rb,
        r0,
        0.05,
    ));

    // reference CDF validity
    let mut ok = true;
    for m in 1..=3u32 {
        let mut prev = 0.0;
        let mut x = -6.0;
        while x <= 14.0 {
            let v = gumbel_reference(m, x);
            ok &= (0.0..=1.0).contains(&v) && v >= prev - 1e-15;
            prev = v;
            x += 0.2;
        }
        ok &= gumbel_reference(m, -8.0) < 1e-5 && gumbel_reference(m, 16.0) > 1.0 - 1e-5;
    }
    out.push(CheckResult::below(
        "c6: gumbel_reference is a valid CDF (grids, m <= 3)",
        if ok { 0.0 } else { 1.0 },
        0.5,
    ));
    Ok(out)
}

// -------------------------------------------------------------------------
// clt: criterion 7
// -------------------------------------------------------------------------

pub fn clt_checks(budget: Budget, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let reps = budget.reps(100_000);
    let widen = budget.widen(100_000);

    let rep = clt_experiment(validate_params(0.0, 1e4)?, 2.0, Some(3.0), reps, seed ^ 0x70)?;
    out.push(CheckResult::abs_gap(
        "c7: Var(W_2) at (0, 1e4) vs sigma^2 = 2",
        rep.w_variance,
        2.0,
        0.1 * widen,
    ));
    out.push(CheckResult::below(
        "c7: KS(W_2 vs Normal(0,2)) at (0, 1e4)",
        rep.ks_vs_normal,
        0.02 * widen,
    ));
    out.push(CheckResult::in_se(
        "c7: mean of W_2 centered",
        rep.w_mean.mean,
        rep.w_mean.std_error,
        0.0,
        3.5,
    ));
    if let Some((c, limit)) = rep.covariance {
        // se of the sample covariance ~ sqrt((C_pp C_qq + C_pq^2)/n)
        let se = ((sigma2(0.0, 2.0)? * sigma2(0.0, 3.0)? + limit * limit) / reps as f64).sqrt();
        out.push(CheckResult::in_se("c7: Cov(W_2, W_3) vs C(2,3)", c, se, limit, 4.0));
    }

    let rep55 = clt_experiment(validate_params(0.5, 1e4)?, 2.0, None, reps, seed ^ 0x71)?;
    let s2 = sigma2(0.5, 2.0)?;
    out.push(CheckResult::abs_gap(
        "c7: Var(W_2) at (0.5, 1e4) within 5% of sigma^2",
        rep55.w_variance,
        s2,
        0.05 * s2 * widen,
    ));

    // finite-theta mean: theta^{p-1} E H_p vs closed form at theta = 1e3
    let rep_mean = clt_experiment(validate_params(0.5, 1e3)?, 2.0, None, reps, seed ^ 0x72)?;
    out.push(CheckResult::in_se(
        "c7: theta E[H_2] at (0.5, 1e3) vs closed form",
        rep_mean.scaled_mean.mean,
        rep_mean.scaled_mean.std_error,
        rep_mean.scaled_mean_reference,
        3.5,
    ));

    out.push(CheckResult::below(
        "c7: sigma^2 gamma-representation identity gap at (0.5, 2)",
        sigma2_identity_gap(0.5, 2.0)?,
        1e-8,
    ));
    out.push(CheckResult::abs_gap(
        "c7: C(p,p) equals sigma^2 (algebraic identity)",
        cov_limit(0.5, 2.0, 2.0),
        sigma2(0.5, 2.0)?,
        1e-12,
    ));
    // finite-theta covariance scaling approaches the (6.16) limit
    let p2 = validate_params(0.5, 1e4)?;
    let finite = laws::cov_h(p2, 2.0, 2.0)? * 1e4_f64.powf(3.0);
    let limit = laws::cov_h_large_theta_limit(0.5, 2.0, 2.0);
    out.push(CheckResult::abs_gap(
        "c7: theta^{2p-1} Var(H_p) vs large-theta limit (rel < 2%)",
        finite / limit,
        1.0,
        0.02,
    ));
    Ok(out)
}

// -------------------------------------------------------------------------
// markov-krein: criterion 8 plus the kernel identities of criterion 4
// -------------------------------------------------------------------------

pub fn markov_krein_checks(budget: Budget, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // criterion 4 (second half): kernel identities to 1e-10
    let mut worst = 0.0_f64;
    for &alpha in &[0.3, 0.7] {
        for &theta in &[0.5, 1.0, 2.0] {
            for &u in &[0.5, 1.0, 2.0] {
                let gaps = kernel_identity_gaps(alpha, theta, u)?;
                worst = worst.max(gaps[0]).max(gaps[1]).max(gaps[2]);
            }
        }
    }
    out.push(CheckResult::below("c4: Laplace kernel identities (worst gap)", worst, 1e-10));

    // arcsine oracle: (0,1), fair coin, z = 2; both sides 2^{-1/2}
    let coin = NuSpec::fair_coin();
    let p01 = validate_params(0.0, 1.0)?;
    let reps8 = budget.reps(1_000_000);
    let rep = mk_identity_check(p01, &coin, &[2.0], reps8, seed ^ 0x80)?;
    let row = &rep.rows[0];
    out.push(CheckResult::abs_gap(
        "c8: arcsine rhs = 2^{-1/2}",
        row.rhs,
        std::f64::consts::FRAC_1_SQRT_2,
        1e-12,
    ));
    out.push(CheckResult::in_se(
        "c8: arcsine Stieltjes identity, MC lhs vs rhs at z=2",
        row.lhs,
        row.lhs_se,
        row.rhs,
        3.5,
    ));
    // lhs positive and decreasing in z for theta > 0, nonnegative nu
    let rep_grid = mk_identity_check(p01, &coin, &[1.5, 2.0, 3.0, 5.0], budget.reps(200_000), seed ^ 0x81)?;
    let mut ok = true;
    let mut prev = f64::INFINITY;
    for r in &rep_grid.rows {
        ok &= r.lhs > 0.0 && r.lhs < prev;
        prev = r.lhs;
    }
    out.push(CheckResult::below(
        "c8: Stieltjes lhs positive, decreasing in z",
        if ok { 0.0 } else { 1.0 },
        0.5,
    ));
    out.push(CheckResult::below(
        "c8: Stieltjes identity on the z-grid (worst gap, se units)",
        rep_grid.max_gap_in_se,
        3.5,
    ));

    // Cauchy fixed point at (0.5, 0.5)
    let cauchy = NuSpec::Cauchy { location: 0.0, scale: 1.0 };
    let p55 = validate_params(0.5, 0.5)?;
    let rep = fixed_point_check(p55, &cauchy, &[0.5, 1.0, 2.0], budget.reps(200_000), seed ^ 0x82)?;
    out.push(CheckResult::below(
        "c8: Cauchy fixed point, worst CF gap (se units)",
        rep.max_gap_in_se,
        3.5,
    ));

    // degenerate nu is fixed for any parameters; draws are exact up to the
    // eps-truncation, so the criterion is absolute, not se-based
    let rep = fixed_point_check(p55, &NuSpec::delta(0.7), &[1.0], 4_000, seed ^ 0x83)?;
    let abs_gap = rep.rows[0].gap_in_se * rep.rows[0].lhs_se;
    out.push(CheckResult::below(
        "c8: degenerate nu fixed point (absolute CF gap)",
        abs_gap,
        1e-3,
    ));

    // uniform nu is not a fixed point at theta = 1 - alpha
    let rep = fixed_point_check(p55, &NuSpec::uniform01(), &[2.0], budget.reps(100_000), seed ^ 0x84)?;
    out.push(CheckResult {
        name: "c8: uniform nu non-fixedness demonstrated at t=2 (> 5 se)".into(),
        value: rep.rows[0].gap_in_se,
        std_error: None,
        reference: 5.0,
        tolerance: f64::INFINITY,
        pass: rep.rows[0].gap_in_se > 5.0,
        note: None,
    });

    // composition identity
    let rep = compose_check(0.5, 0.25, 0.5, &coin, budget.reps(100_000), seed ^ 0x85)?;
    out.push(CheckResult {
        name: "c8: composition two-sample KS p-value > 0.001".into(),
        value: rep.p_value,
        std_error: None,
        reference: 0.001,
        tolerance: f64::INFINITY,
        pass: rep.p_value > 0.001,
        note: Some(format!("KS distance {:.5}", rep.ks_distance)),
    });

    // beta >= alpha misuse rejected
    out.push(CheckResult::below(
        "c8: composition precondition (beta >= alpha rejected)",
        if compose_check(0.25, 0.5, 0.5, &coin, 10, seed).is_err() { 0.0 } else { 1.0 },
        0.5,
    ));

    // membership identity at theta in (-alpha, 0]
    let p_neg = validate_params(0.5, -0.25)?;
    let rep = p_theta_membership_check(p_neg, &coin, &[0.5, 1.0, 2.0], reps8, seed ^ 0x86)?;
    out.push(CheckResult::below(
        "c8: P_-theta membership identity, worst gap over lambda grid (se units)",
        rep.max_gap_in_se,
        3.5,
    ));
    // degenerate collapse at theta = 0
    let p0 = validate_params(0.5, 0.0)?;
    let rep = p_theta_membership_check(p0, &NuSpec::delta(1.0), &[1.0], 4_000, seed ^ 0x87)?;
    out.push(CheckResult::abs_gap(
        "c8: membership both sides collapse for delta nu at theta=0",
        rep.rows[0].rhs,
        -(2.0_f64.ln()),
        1e-12,
    ));

    // mean preservation for every test nu with a finite mean
    for nu in [NuSpec::fair_coin(), NuSpec::delta(0.3), NuSpec::uniform01()] {
        let p = validate_params(0.3, 0.7)?;
        let draws = parallel_draws(budget.reps(100_000), seed ^ 0x88, |rng| {
            Ok(sample_mean_functional(p, &nu, rng, 1e-7, TailPolicy::CompleteWithFreshDraw)?.value)
        })?;
        let (mean, se) = mean_and_se(&draws)?;
        out.push(CheckResult::in_se_or_abs(
            format!("c8: E M = mean of nu ({})", nu.label()),
            mean,
            se,
            nu.mean().unwrap(),
            3.5,
            1e-9,
        ));
    }

    // cf_series against the empirical CF
    let t = 0.5;
    let (series, remainder) = cf_series(p01, &coin, t, 3)?;
    let draws = parallel_draws(budget.reps(400_000), seed ^ 0x89, |rng| {
        Ok(sample_mean_functional(p01, &coin, rng, 1e-9, TailPolicy::Drop)?.value)
    })?;
    let re: Vec<f64> = draws.iter().map(|&m| (t * m).cos()).collect();
    let im: Vec<f64> = draws.iter().map(|&m| (t * m).sin()).collect();
    let (re_m, re_se) = mean_and_se(&re)?;
    let (im_m, im_se) = mean_and_se(&im)?;
    let gap = ((re_m - series.re).powi(2) + (im_m - series.im).powi(2)).sqrt();
    let tol = (3.5 * (re_se * re_se + im_se * im_se).sqrt()).max(remainder);
    out.push(
        CheckResult::below("c8: cf_series vs empirical CF at t=0.5", gap, tol)
            .with_note(format!("certified remainder {remainder:.2e}")),
    );

    // conjugate symmetry of the series
    let (plus, _) = cf_series(p55, &coin, 0.4, 2)?;
    let (minus, _) = cf_series(p55, &coin, -0.4, 2)?;
    out.push(CheckResult::below(
        "mk: cf_series conjugate symmetry",
        (plus - minus.conj()).norm(),
        1e-10,
    ));

    // CF linear majorant validated pointwise
    let mut ok = true;
    for nu in [
        NuSpec::fair_coin(),
        NuSpec::Cauchy { location: 0.3, scale: 1.2 },
        NuSpec::uniform01(),
    ] {
        let l = nu.cf_linear_bound()?;
        let mut s = 0.01;
        while s < 50.0 {
            ok &= (cf_nu(&nu, s)? - 1.0).norm() <= (l * s).min(2.0) + 1e-12;
            s *= 1.8;
        }
    }
    out.push(CheckResult::below(
        "mk: |psi_nu(t) - 1| <= min(2, L t) pointwise",
        if ok { 0.0 } else { 1.0 },
        0.5,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_suite_quick() {
        let rep = run_suite("core", Budget::Quick, 424242).unwrap();
        assert!(rep.pass, "{:#?}", rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn unknown_suite_rejected() {
        assert!(run_suite("nope", Budget::Quick, 1).is_err());
    }

    #[test]
    fn budget_scaling() {
        assert_eq!(Budget::Full.reps(1_000_000), 1_000_000);
        assert_eq!(Budget::Quick.reps(1_000_000), 20_000);
        assert!((Budget::Quick.widen(1_000_000) - (50.0_f64).sqrt()).abs() < 1e-12);
        assert_eq!(Budget::Full.widen(100_000), 1.0);
    }
}
