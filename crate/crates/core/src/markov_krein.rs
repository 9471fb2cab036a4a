//! The transform nu -> law of `M = sum X_i V_i` (X_i iid from nu, (V_i) a
//! PD(alpha, theta) weight sequence independent of the X's): base-measure
//! specifications, exact characteristic functions, the series expansion of
//! the transformed CF, and Monte Carlo identity checks.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{c_alpha, log_c};
use crate::error::{Error, Result};
use crate::numerics::quad::{quad, quad_complex, quad_exp_tail, EndpointWeights};
use crate::params::PDParams;
use crate::sampler::{sample_mean_functional, RngStream, TailPolicy};
use crate::special::log_gamma;
use crate::stats::{mean_and_se, two_sample_ks_test_sorted, Kahan};

/// A generic base measure given by a sampler and (optionally) its
/// characteristic function.
#[derive(Clone)]
pub struct GenericNu {
    pub label: String,
    pub sampler: Arc<dyn Fn(&mut RngStream) -> f64 + Send + Sync>,
    pub cf: Option<Arc<dyn Fn(f64) -> Complex64 + Send + Sync>>,
    /// Declares `int |x|^alpha nu(dx) < inf` for every alpha in [0, 1).
    pub has_alpha_moment: bool,
    pub mean: Option<f64>,
    /// sup |x| when the support is bounded.
    pub support_bound: Option<f64>,
    /// L with |psi(t) - 1| <= min(2, L |t|); None when no such bound holds.
    pub cf_lipschitz: Option<f64>,
}

impl std::fmt::Debug for GenericNu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GenericNu({})", self.label)
    }
}

/// Base probability measure nu.
#[derive(Debug, Clone)]
pub enum NuSpec {
    /// Finite discrete measure; atom probabilities must sum to 1.
    Discrete { atoms: Vec<(f64, f64)> },
    /// Cauchy(location, scale); scale = 0 degenerates to a point mass.
    Cauchy { location: f64, scale: f64 },
    Generic(GenericNu),
}

impl NuSpec {
    pub fn delta(c: f64) -> NuSpec {
        NuSpec::Discrete { atoms: vec![(c, 1.0)] }
    }

    /// (delta_0 + delta_1)/2.
    pub fn fair_coin() -> NuSpec {
        NuSpec::Discrete { atoms: vec![(0.0, 0.5), (1.0, 0.5)] }
    }

    pub fn uniform01() -> NuSpec {
        NuSpec::Generic(GenericNu {
            label: "uniform(0,1)".into(),
            sampler: Arc::new(|rng: &mut RngStream| rng.uniform()),
            cf: Some(Arc::new(|t: f64| {
                if t.abs() < 1e-8 {
                    Complex64::new(1.0, t / 2.0)
                } else {
                    (Complex64::new(0.0, t).exp() - 1.0) / Complex64::new(0.0, t)
                }
            })),
            has_alpha_moment: true,
            mean: Some(0.5),
            support_bound: Some(1.0),
            cf_lipschitz: Some(1.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NuSpec::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::Domain("discrete nu needs atoms".into()));
                }
                let mut mass = Kahan::new();
                for &(x, p) in atoms {
                    if !x.is_finite() || !(p >= 0.0) {
                        return Err(Error::Domain(format!("bad atom ({x}, {p})")));
                    }
                    mass.add(p);
                }
                if (mass.value() - 1.0).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "atom probabilities sum to {} (need 1 within 1e-12)",
                        mass.value()
                    )));
                }
                Ok(())
            }
            NuSpec::Cauchy { location, scale } => {
                if !location.is_finite() || !(*scale >= 0.0) {
                    return Err(Error::Domain("bad Cauchy parameters".into()));
                }
                Ok(())
            }
            NuSpec::Generic(_) => Ok(()),
        }
    }

    /// Membership in P_alpha (finite alpha-moment) for alpha in [0, 1).
    /// Discrete measures are bounded; Cauchy has all moments of order < 1
    /// and a finite log-moment.
    pub fn has_alpha_moment(&self, _alpha: f64) -> bool {
        match self {
            NuSpec::Discrete { .. } | NuSpec::Cauchy { .. } => true,
            NuSpec::Generic(g) => g.has_alpha_moment,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            NuSpec::Discrete { atoms } => {
                Some(atoms.iter().map(|&(x, p)| x * p).sum())
            }
            NuSpec::Cauchy { location, scale } => {
                if *scale == 0.0 {
                    Some(*location)
                } else {
                    None
                }
            }
            NuSpec::Generic(g) => g.mean,
        }
    }

    /// sup |x| over the support, when bounded.
    pub fn support_bound(&self) -> Option<f64> {
        match self {
            NuSpec::Discrete { atoms } => atoms
                .iter()
                .map(|&(x, _)| x.abs())
                .max_by(|a, b| a.partial_cmp(b).unwrap()),
            NuSpec::Cauchy { location, scale } => {
                if *scale == 0.0 {
                    Some(location.abs())
                } else {
                    None
                }
            }
            NuSpec::Generic(g) => g.support_bound,
        }
    }

    /// True when the support lies in [0, inf).
    pub fn nonnegative_support(&self) -> bool {
        match self {
            NuSpec::Discrete { atoms } => atoms.iter().all(|&(x, p)| p == 0.0 || x >= -0.0),
            NuSpec::Cauchy { location, scale } => *scale == 0.0 && *location >= 0.0,
            NuSpec::Generic(g) => g.label == "uniform(0,1)",
        }
    }

    /// L with |psi_nu(t) - 1| <= min(2, L|t|), certified per kind:
    /// E|X| for discrete, |m| + sigma for Cauchy.
    pub fn cf_linear_bound(&self) -> Result<f64> {
        match self {
            NuSpec::Discrete { atoms } => {
                Ok(atoms.iter().map(|&(x, p)| x.abs() * p).sum())
            }
            NuSpec::Cauchy { location, scale } => Ok(location.abs() + scale),
            NuSpec::Generic(g) => g.cf_lipschitz.ok_or_else(|| {
                Error::Unsupported(format!("no CF bound declared for {}", g.label))
            }),
        }
    }

    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        match self {
            NuSpec::Discrete { atoms } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for &(x, p) in atoms {
                    acc += p;
                    if u <= acc {
                        return x;
                    }
                }
                atoms.last().unwrap().0
            }
            NuSpec::Cauchy { location, scale } => {
                location + scale * (std::f64::consts::PI * (rng.uniform() - 0.5)).tan()
            }
            NuSpec::Generic(g) => (g.sampler)(rng),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NuSpec::Discrete { atoms } => format!("discrete({} atoms)", atoms.len()),
            NuSpec::Cauchy { location, scale } => format!("cauchy({location}, {scale})"),
            NuSpec::Generic(g) => g.label.clone(),
        }
    }
}

/// Exact characteristic function of nu.
pub fn cf_nu(nu: &NuSpec, t: f64) -> Result<Complex64> {
    match nu {
        NuSpec::Discrete { atoms } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, p) in atoms {
                acc += p * Complex64::new(0.0, t * x).exp();
            }
            Ok(acc)
        }
        NuSpec::Cauchy { location, scale } => {
            Ok((Complex64::new(0.0, location * t) - scale * t.abs()).exp())
        }
        NuSpec::Generic(g) => match &g.cf {
            Some(cf) => Ok(cf(t)),
            None => Err(Error::Unsupported(format!(
                "generic nu {} has no characteristic function",
                g.label
            ))),
        },
    }
}

/// On-disk nu specification: `{"kind": "discrete", "atoms": [[x, p], ...]}`
/// or `{"kind": "cauchy", "m": ..., "sigma": ...}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NuSpecFile {
    Discrete { atoms: Vec<(f64, f64)> },
    Cauchy { m: f64, sigma: f64 },
}

impl NuSpecFile {
    pub fn into_nu(self) -> Result<NuSpec> {
        let nu = match self {
            NuSpecFile::Discrete { atoms } => NuSpec::Discrete { atoms },
            NuSpecFile::Cauchy { m, sigma } => NuSpec::Cauchy { location: m, scale: sigma },
        };
        nu.validate()?;
        Ok(nu)
    }

    pub fn from_json(text: &str) -> Result<NuSpecFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// identity checks (filled in below the sampling layer)
// ---------------------------------------------------------------------------

/// One grid row of a transform identity report.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub at: f64,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub gap_in_se: f64,
}

/// Report for the Stieltjes/Markov-Krein style checks: MC left side vs exact
/// right side on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct TransformCheckReport {
    pub label: String,
    pub rows: Vec<IdentityRow>,
    pub max_gap_in_se: f64,
    pub replicates: usize,
    pub truncation_note: String,
}

impl TransformCheckReport {
    fn from_rows(label: String, rows: Vec<IdentityRow>, replicates: usize, note: String) -> Self {
        let max_gap_in_se = rows
            .iter()
            .map(|r| r.gap_in_se)
            .fold(0.0_f64, f64::max);
        TransformCheckReport { label, rows, max_gap_in_se, replicates, truncation_note: note }
    }
}

fn draw_means(
    params: PDParams,
    nu: &NuSpec,
    replicates: usize,
    seed: u64,
    eps: f64,
    policy: TailPolicy,
) -> Result<Vec<f64>> {
    crate::sampler::parallel_draws(replicates, seed, move |rng| {
        sample_mean_functional(params, nu, rng, eps, policy).map(|d| d.value)
    })
}

/// Stieltjes-transform identity for bounded nu on [0, B] at real z > B:
/// theta > 0: E[(z - M)^-theta] = exp(-theta int log(z-x) nu(dx))   (alpha=0)
///                              = (int (z-x)^alpha nu(dx))^{-theta/alpha}
/// theta = 0: E[log(z - M)]     = alpha^-1 log int (z-x)^alpha nu(dx)
/// theta < 0: same power form as theta > 0.
pub fn mk_identity_check(
    params: PDParams,
    nu: &NuSpec,
    z_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<TransformCheckReport> {
    nu.validate()?;
    let b = nu.support_bound().ok_or_else(|| {
        Error::Domain("mk_identity_check needs bounded nu support".into())
    })?;
    for &z in z_grid {
        if z <= b {
            return Err(Error::Domain(format!("z = {z} must exceed support bound {b}")));
        }
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let eps = 1e-9;
    let draws = draw_means(params, nu, replicates, seed, eps, TailPolicy::Drop)?;
    let atoms: Vec<(f64, f64)> = match nu {
        NuSpec::Discrete { atoms } => atoms.clone(),
        _ => return Err(Error::Unsupported("identity check implemented for discrete nu".into())),
    };
    let mut rows = Vec::new();
    for &z in z_grid {
        let samples: Vec<f64> = draws
            .iter()
            .map(|&m| {
                if theta == 0.0 {
                    (z - m).ln()
                } else {
                    (z - m).powf(-theta)
                }
            })
            .collect();
        let (lhs, se) = mean_and_se(&samples)?;
        let rhs = if alpha == 0.0 {
            // exp(-theta sum p log(z - x))
            (-theta * atoms.iter().map(|&(x, p)| p * (z - x).ln()).sum::<f64>()).exp()
        } else {
            let base: f64 = atoms.iter().map(|&(x, p)| p * (z - x).powf(alpha)).sum();
            if theta == 0.0 {
                base.ln() / alpha
            } else {
                base.powf(-theta / alpha)
            }
        };
        rows.push(IdentityRow {
            at: z,
            lhs,
            lhs_se: se,
            rhs,
            gap_in_se: (lhs - rhs).abs() / se.max(1e-300),
        });
    }
    Ok(TransformCheckReport::from_rows(
        format!("stieltjes identity, nu = {}", nu.label()),
        rows,
        replicates,
        format!("truncation at residual < {eps:e}, bias <= {:.1e}", eps * b),
    ))
}

/// Partial sum of the transformed characteristic function
/// `1 + sum_n c_n/n! int prod (psi(t v_i) - 1) v_i^-(alpha+1) (1-sum v)^{theta+alpha n-1}`
/// for n <= n_max (<= 3), with a certified remainder bound from the
/// linear CF majorant.
pub fn cf_series(
    params: PDParams,
    nu: &NuSpec,
    t: f64,
    n_max: u32,
) -> Result<(Complex64, f64)> {
    if n_max == 0 || n_max > 3 {
        return Err(Error::Unsupported(
            "cf_series supports 1 <= n_max <= 3 dimensions".into(),
        ));
    }
    if !nu.has_alpha_moment(params.alpha()) {
        return Err(Error::Domain("nu lacks the required alpha-moment".into()));
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let phi_over_v = |v: f64| -> Complex64 {
        (cf_nu(nu, t * v).unwrap() - 1.0) / v
    };
    let mut total = Complex64::new(1.0, 0.0);
    let tol = 1e-8;

    for n in 1..=n_max {
        let log_cn = log_c(n, params) - log_gamma(n as f64 + 1.0);
        let weight_exp = theta + alpha * n as f64 - 1.0;
        let integral: Complex64 = match n {
            1 => quad_complex(
                |v| phi_over_v(v) * v.powf(-alpha),
                0.0,
                1.0,
                EndpointWeights::new(0.0, weight_exp)?,
                tol,
            )?,
            2 => {
                // inner over v2 in (0, 1 - v1); weight (1-v1-v2)^{weight_exp}
                quad_complex(
                    |v1| {
                        let rem = 1.0 - v1;
                        quad_complex(
                            |v2| phi_over_v(v2) * v2.powf(-alpha),
                            0.0,
                            rem,
                            EndpointWeights::new(0.0, weight_exp).unwrap(),
                            tol * 10.0,
                        )
                        .unwrap()
                            * phi_over_v(v1)
                            * v1.powf(-alpha)
                    },
                    0.0,
                    1.0,
                    EndpointWeights::none(),
                    tol,
                )?
            }
            3 => quad_complex(
                |v1| {
                    let rem1 = 1.0 - v1;
                    quad_complex(
                        |v2| {
                            let rem2 = rem1 - v2;
                            quad_complex(
                                |v3| phi_over_v(v3) * v3.powf(-alpha),
                                0.0,
                                rem2,
                                EndpointWeights::new(0.0, weight_exp).unwrap(),
                                tol * 100.0,
                            )
                            .unwrap()
                                * phi_over_v(v2)
                                * v2.powf(-alpha)
                        },
                        0.0,
                        rem1,
                        EndpointWeights::none(),
                        tol * 10.0,
                    )
                    .unwrap()
                        * phi_over_v(v1)
                        * v1.powf(-alpha)
                },
                0.0,
                1.0,
                EndpointWeights::none(),
                tol,
            )?,
            _ => unreachable!(),
        };
        total += log_cn.exp() * integral;
    }
    let remainder = cf_series_remainder_bound(params, nu, t, n_max)?;
    Ok((total, remainder))
}

/// Bound on the dropped tail `sum_{n > n_max} c_n/n! J_n(t)` using
/// |psi(tv) - 1| <= L t v termwise:
/// `J_n <= (L t Gamma(1-alpha))^n Gamma(theta + alpha n) / Gamma(theta + n)`,
/// so term_n <= r_n (L t Gamma(1-alpha))^n / Gamma(theta+n) with r_n the
/// Taylor coefficients of R. Decay is super-geometric in n.
pub fn cf_series_remainder_bound(
    params: PDParams,
    nu: &NuSpec,
    t: f64,
    n_max: u32,
) -> Result<f64> {
    let l = nu.cf_linear_bound()?;
    let (alpha, theta) = (params.alpha(), params.theta());
    let x = (l * t.abs() * log_gamma(1.0 - alpha).exp()).max(1e-300);
    let term = |n: u32| -> f64 {
        (log_c(n, params) + log_gamma(theta + alpha * n as f64) - log_gamma(n as f64 + 1.0)
            + n as f64 * x.ln()
            - log_gamma(theta + n as f64))
        .exp()
    };
    let mut bound = 0.0;
    let mut prev = f64::INFINITY;
    for n in n_max + 1..n_max + 200 {
        let t_n = term(n);
        bound += t_n;
        if t_n <= 1e-18 * bound.max(1e-300) {
            return Ok(bound);
        }
        if t_n >= prev && n > n_max + 2 {
            return Err(Error::Numerical(
                "cf remainder terms not decreasing; bound unusable at this t".into(),
            ));
        }
        prev = t_n;
    }
    // geometric cap on whatever is left
    let ratio = term(n_max + 200) / prev.max(1e-300);
    if ratio < 0.9 {
        bound += prev * ratio / (1.0 - ratio);
        Ok(bound)
    } else {
        Err(Error::Numerical("cf remainder bound did not stabilize".into()))
    }
}

/// Compares direct PD(alpha, theta) mean draws against the nested
/// composition (outer PD(beta, theta), inner PD(alpha, -beta)) with a
/// two-sample KS test. The identity requires 0 < beta < alpha < 1 and
/// theta > -beta.
pub fn compose_check(
    alpha: f64,
    beta: f64,
    theta: f64,
    nu: &NuSpec,
    replicates: usize,
    seed: u64,
) -> Result<ComposeReport> {
    if !(0.0 < beta && beta < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "compose_check needs 0 < beta < alpha < 1 (got alpha={alpha}, beta={beta})"
        )));
    }
    if !(theta > -beta) {
        return Err(Error::Domain(format!(
            "compose_check needs theta > -beta (got theta={theta})"
        )));
    }
    nu.validate()?;
    let direct_params = PDParams::new(alpha, theta)?;
    let outer_params = PDParams::new(beta, theta)?;
    let inner_params = PDParams::new(alpha, -beta)?;

    let eps_direct = 1e-4;
    let eps_outer = 1e-4;
    let eps_inner = 3e-4;

    let mut direct = crate::sampler::parallel_draws(replicates, seed, move |rng| {
        sample_mean_functional(direct_params, nu, rng, eps_direct, TailPolicy::CompleteWithFreshDraw)
            .map(|d| d.value)
    })?;
    let mut nested = crate::sampler::parallel_draws(replicates, seed ^ 0x9e37_79b9_7f4a_7c15, move |rng| {
        let outer = crate::sampler::stick_breaking(
            outer_params,
            crate::sampler::StopRule::ResidualBelow(eps_outer),
            rng,
        )?;
        let mut acc = Kahan::new();
        for &w in &outer.sticks {
            let inner = sample_mean_functional(
                inner_params,
                nu,
                rng,
                eps_inner,
                TailPolicy::CompleteWithFreshDraw,
            )?;
            acc.add(w * inner.value);
        }
        // residual outer mass completed with one more inner draw
        let inner = sample_mean_functional(
            inner_params,
            nu,
            rng,
            eps_inner,
            TailPolicy::CompleteWithFreshDraw,
        )?;
        acc.add(outer.residual * inner.value);
        Ok(acc.value())
    })?;
    direct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nested.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (ks, p) = two_sample_ks_test_sorted(&direct, &nested)?;
    Ok(ComposeReport {
        alpha,
        beta,
        theta,
        nu: nu.label(),
        replicates,
        ks_distance: ks,
        p_value: p,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComposeReport {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub nu: String,
    pub replicates: usize,
    pub ks_distance: f64,
    pub p_value: f64,
}

/// Empirical CF of mean-functional draws against the CF of nu itself on a
/// t-grid. For Cauchy or degenerate nu the gap must vanish within MC error;
/// for other nu the report demonstrates non-fixedness.
pub fn fixed_point_check(
    params: PDParams,
    nu: &NuSpec,
    t_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<TransformCheckReport> {
    nu.validate()?;
    let eps = 1e-4;
    let draws = draw_means(params, nu, replicates, seed, eps, TailPolicy::Drop)?;
    let mut rows = Vec::new();
    for &t in t_grid {
        let re: Vec<f64> = draws.iter().map(|&m| (t * m).cos()).collect();
        let im: Vec<f64> = draws.iter().map(|&m| (t * m).sin()).collect();
        let (re_m, re_se) = mean_and_se(&re)?;
        let (im_m, im_se) = mean_and_se(&im)?;
        let target = cf_nu(nu, t)?;
        let gap = ((re_m - target.re).powi(2) + (im_m - target.im).powi(2)).sqrt();
        let se = (re_se * re_se + im_se * im_se).sqrt();
        rows.push(IdentityRow {
            at: t,
            lhs: (re_m * re_m + im_m * im_m).sqrt(),
            lhs_se: se,
            rhs: target.norm(),
            gap_in_se: gap / se.max(1e-300),
        });
    }
    Ok(TransformCheckReport::from_rows(
        format!("fixed point, nu = {}", nu.label()),
        rows,
        replicates,
        format!("truncation at residual < {eps:e}"),
    ))
}

/// For 0 < alpha < 1 and theta in (-alpha, 0], nu supported on [0, inf):
/// the transformed law keeps a (-theta)-moment, verified through
/// lambda-grid functionals:
/// theta < 0:  (E[(1 + M/lambda)^-theta] - 1)/theta
/// theta = 0:  -E[log(1 + M/lambda)]
/// against the closed form from nu's alpha-integral.
pub fn p_theta_membership_check(
    params: PDParams,
    nu: &NuSpec,
    lambda_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<TransformCheckReport> {
    let (alpha, theta) = (params.alpha(), params.theta());
    if !(alpha > 0.0) || !(theta <= 0.0) {
        return Err(Error::Domain(
            "membership check needs 0 < alpha < 1 and -alpha < theta <= 0".into(),
        ));
    }
    if !nu.nonnegative_support() {
        return Err(Error::Domain("membership check needs nu supported on [0, inf)".into()));
    }
    nu.validate()?;
    let eps = 3e-3;
    let draws = draw_means(params, nu, replicates, seed, eps, TailPolicy::CompleteWithFreshDraw)?;
    let atoms: Vec<(f64, f64)> = match nu {
        NuSpec::Discrete { atoms } => atoms.clone(),
        _ => {
            return Err(Error::Unsupported(
                "membership check implemented for discrete nu".into(),
            ))
        }
    };
    let mut rows = Vec::new();
    for &lambda in lambda_grid {
        if !(lambda > 0.0) {
            return Err(Error::Domain("lambda grid must be positive".into()));
        }
        let samples: Vec<f64> = draws
            .iter()
            .map(|&m| {
                if theta == 0.0 {
                    -(1.0 + m / lambda).ln()
                } else {
                    ((1.0 + m / lambda).powf(-theta) - 1.0) / theta
                }
            })
            .collect();
        let (lhs, se) = mean_and_se(&samples)?;
        let base: f64 = atoms
            .iter()
            .map(|&(x, p)| p * (1.0 + x.abs() / lambda).powf(alpha))
            .sum();
        let rhs = if theta == 0.0 {
            -base.ln() / alpha
        } else {
            (base.powf(-theta / alpha) - 1.0) / theta
        };
        rows.push(IdentityRow {
            at: lambda,
            lhs,
            lhs_se: se,
            rhs,
            gap_in_se: (lhs - rhs).abs() / se.max(1e-300),
        });
    }
    Ok(TransformCheckReport::from_rows(
        format!("P_-theta membership, nu = {}", nu.label()),
        rows,
        replicates,
        format!("tail completed with a fresh draw at residual < {eps:e}"),
    ))
}

/// Numeric verification of the three Laplace-kernel identities used by the
/// transform arguments, at real u > -1:
/// (a) int_0^inf s^{theta-1} e^{-s} e^{-us} ds = Gamma(theta) (1+u)^-theta
/// (b) C_a int_0^inf s^{-a-1} e^{-s} (e^{-us} - 1) ds = 1 - (1+u)^alpha
/// (c) int_0^inf s^{-1} e^{-s} (e^{-us} - 1) ds = -log(1+u)
pub fn kernel_identity_gaps(alpha: f64, theta: f64, u: f64) -> Result<[f64; 3]> {
    if !(u > -1.0) {
        return Err(Error::Domain("kernel identities need u > -1".into()));
    }
    let tol = 1e-12;
    // (a): weight s^{theta-1} on [0,1], then decaying tail
    let head = quad(
        |s| (-(1.0 + u) * s).exp(),
        0.0,
        1.0,
        EndpointWeights::left(theta - 1.0)?,
        tol,
    )?;
    let tail = quad_exp_tail(|s| s.powf(theta - 1.0) * (-(1.0 + u) * s).exp(), 1.0, tol)?;
    let gap_a = (head + tail - log_gamma(theta).exp() * (1.0 + u).powf(-theta)).abs();

    let ca = c_alpha(alpha)?;
    let em1 = |x: f64| x.exp_m1();
    let head_b = quad(
        |s| (-s).exp() * em1(-u * s) / s,
        0.0,
        1.0,
        EndpointWeights::left(-alpha)?,
        tol,
    )?;
    let tail_b = quad_exp_tail(
        |s| s.powf(-alpha - 1.0) * (-s).exp() * em1(-u * s),
        1.0,
        tol,
    )?;
    let gap_b = (ca * (head_b + tail_b) - (1.0 - (1.0 + u).powf(alpha))).abs();

    let head_c = quad(
        |s| (-s).exp() * em1(-u * s) / s,
        0.0,
        1.0,
        EndpointWeights::none(),
        tol,
    )?;
    let tail_c = quad_exp_tail(|s| (-s).exp() * em1(-u * s) / s, 1.0, tol)?;
    let gap_c = (head_c + tail_c + (1.0 + u).ln()).abs();
    Ok([gap_a, gap_b, gap_c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;

    #[test]
    fn nu_validation() {
        assert!(NuSpec::fair_coin().validate().is_ok());
        assert!(NuSpec::Discrete { atoms: vec![(0.0, 0.4), (1.0, 0.4)] }
            .validate()
            .is_err());
        assert!(NuSpec::Cauchy { location: 0.0, scale: -1.0 }.validate().is_err());
    }

    #[test]
    fn cf_values() {
        // delta_c
        let d = NuSpec::delta(2.0);
        let v = cf_nu(&d, 0.7).unwrap();
        assert!((v - Complex64::new(0.0, 1.4).exp()).norm() < 1e-15);
        // fair coin at t = pi: (1 + e^{i pi})/2 = 0
        let v = cf_nu(&NuSpec::fair_coin(), std::f64::consts::PI).unwrap();
        assert!(v.norm() < 1e-15);
        // Cauchy(0,1) at t=1: e^-1
        let v = cf_nu(&NuSpec::Cauchy { location: 0.0, scale: 1.0 }, 1.0).unwrap();
        assert!((v.re - (-1.0_f64).exp()).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn cf_conjugate_symmetry() {
        let nu = NuSpec::fair_coin();
        for &t in &[0.3, 1.1, 2.7] {
            let a = cf_nu(&nu, t).unwrap();
            let b = cf_nu(&nu, -t).unwrap();
            assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn cf_linear_bound_holds_pointwise() {
        let cases = vec![
            NuSpec::fair_coin(),
            NuSpec::Cauchy { location: 0.3, scale: 1.2 },
            NuSpec::uniform01(),
        ];
        for nu in cases {
            let l = nu.cf_linear_bound().unwrap();
            let mut s = 0.013;
            while s < 40.0 {
                let gap = (cf_nu(&nu, s).unwrap() - 1.0).norm();
                assert!(
                    gap <= (l * s).min(2.0) + 1e-12,
                    "{}: |psi({s})-1| = {gap} > min(2, {l}*{s})",
                    nu.label()
                );
                s *= 1.9;
            }
        }
    }

    #[test]
    fn kernel_identities_hold() {
        for &alpha in &[0.3, 0.7] {
            for &theta in &[0.5, 1.0, 2.0] {
                for &u in &[0.5, 1.0, 2.0] {
                    let gaps = kernel_identity_gaps(alpha, theta, u).unwrap();
                    for (i, g) in gaps.iter().enumerate() {
                        assert!(*g < 1e-10, "identity {i} at a={alpha}, t={theta}, u={u}: {g}");
                    }
                }
            }
        }
    }

    #[test]
    fn nu_file_round_trip() {
        let nu = NuSpecFile::from_json(r#"{"kind":"discrete","atoms":[[0.0,0.5],[1.0,0.5]]}"#)
            .unwrap()
            .into_nu()
            .unwrap();
        assert_eq!(nu.mean(), Some(0.5));
        let nu = NuSpecFile::from_json(r#"{"kind":"cauchy","m":0.0,"sigma":1.0}"#)
            .unwrap()
            .into_nu()
            .unwrap();
        assert!(matches!(nu, NuSpec::Cauchy { .. }));
        assert!(NuSpecFile::from_json(r#"{"kind":"weird"}"#).is_err());
    }

    #[test]
    fn cf_series_at_zero_is_one() {
        let p = validate_params(0.3, 0.7).unwrap();
        let (v, rem) = cf_series(p, &NuSpec::fair_coin(), 0.0, 2).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(rem < 1e-12);
    }

    #[test]
    fn cf_series_delta_matches_exponential() {
        // M = c exactly, so the partial sum approximates e^{ict} within the
        // certified remainder
        let p = validate_params(0.0, 1.0).unwrap();
        let c = 1.0;
        for &t in &[0.2, 0.5] {
            let (v, rem) = cf_series(p, &NuSpec::delta(c), t, 3).unwrap();
            let want = Complex64::new(0.0, c * t).exp();
            assert!(
                (v - want).norm() <= rem + 1e-7,
                "t={t}: {v} vs {want}, rem {rem}"
            );
        }
    }

    #[test]
    fn cf_series_conjugate_pair() {
        let p = validate_params(0.5, 0.5).unwrap();
        let (a, _) = cf_series(p, &NuSpec::fair_coin(), 0.4, 2).unwrap();
        let (b, _) = cf_series(p, &NuSpec::fair_coin(), -0.4, 2).unwrap();
        assert!((a - b.conj()).norm() < 1e-10);
    }
}
