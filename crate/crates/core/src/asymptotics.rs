//! Large-theta behavior: the Gumbel point-process limit of the rescaled
//! weights, the central limit theorem for population moments, and the
//! binned empirical correlation estimator that validates the correlation
//! functions against raw samples.

use rayon::prelude::*;
use serde::Serialize;

use crate::dickman::DickmanEvaluator;
use crate::error::{Error, Result};
use crate::laws;
use crate::params::PDParams;
use crate::sampler::{
    parallel_draws, ranked_prefix_above, sample_hp_pair_tail_adjusted, sample_hp_tail_adjusted,
    top_m, RngStream,
};
use crate::special::{log_gamma, normal_cdf};
use crate::stats::{ks_distance_sorted, mean_and_se, variance, Kahan};

/// Monte Carlo estimate: mean, standard error (sample sd / sqrt(n)), count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MCEstimate {
    pub fn from_sample(data: &[f64]) -> Result<Self> {
        let (mean, std_error) = mean_and_se(data)?;
        Ok(MCEstimate { mean, std_error, n: data.len() })
    }

    /// |mean - reference| in standard-error units.
    pub fn gap_in_se(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.std_error.max(1e-300)
    }
}

/// Centering sequence `beta = log theta - (alpha+1) log log theta -
/// log Gamma(1-alpha)`; needs theta > 1.
pub fn beta_scale(params: PDParams) -> Result<f64> {
    let (alpha, theta) = (params.alpha(), params.theta());
    if !(theta > 1.0) {
        return Err(Error::Domain(format!(
            "beta_scale needs theta > 1 (got {theta})"
        )));
    }
    Ok(theta.ln() - (alpha + 1.0) * theta.ln().ln() - log_gamma(1.0 - alpha))
}

/// Limit CDF of the m-th rescaled point:
/// `exp(-e^-x) sum_{k=0}^{m-1} e^{-kx} / k!`.
pub fn gumbel_reference(m: u32, x: f64) -> f64 {
    let e = (-x).exp();
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..m {
        if k > 0 {
            term *= e / k as f64;
        }
        sum += term;
    }
    // the exact value is a CDF; clamp the last-ulp rounding overshoot
    ((-e).exp() * sum).min(1.0)
}

/// Joint limit CDF of the two largest rescaled points,
/// `P(Z_1* <= x1, Z_2* <= x2) = (1 + e^-m - e^-x1) exp(-e^-m)`,
/// m = min(x1, x2).
pub fn gumbel_joint_cdf2(x1: f64, x2: f64) -> f64 {
    let m = x1.min(x2);
    let em = (-m).exp();
    ((1.0 + em - (-x1).exp()) * (-em).exp()).clamp(0.0, 1.0)
}

/// A configured limit experiment: which rescaling to study, at which
/// parameters, with how many replicates.
#[derive(Debug, Clone, Serialize)]
pub struct LimitExperiment {
    pub params: PDParams,
    pub rescale: Rescale,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub enum Rescale {
    /// ranked-weight rescaling Z_i = theta V_i - beta, tracking the first m
    Gumbel { m: u32 },
    /// population-moment rescaling W_p
    Clt { p: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub enum ExperimentReport {
    Gumbel(GumbelReport),
    Clt(CltReport),
}

impl LimitExperiment {
    pub fn new(params: PDParams, rescale: Rescale, replicates: usize, seed: u64) -> Result<Self> {
        match rescale {
            Rescale::Gumbel { m } => {
                if !(params.theta() > 1.0) {
                    return Err(Error::Domain(
                        "gumbel rescaling needs theta > 1 (log log theta)".into(),
                    ));
                }
                if m == 0 {
                    return Err(Error::Domain("need m >= 1".into()));
                }
            }
            Rescale::Clt { p } => {
                if !(p > params.alpha()) || p == 1.0 {
                    return Err(Error::Domain("clt rescaling needs p > alpha, p != 1".into()));
                }
            }
        }
        if replicates < 2 {
            return Err(Error::Domain("need at least two replicates".into()));
        }
        Ok(LimitExperiment { params, rescale, replicates, seed })
    }

    pub fn run(&self) -> Result<ExperimentReport> {
        match self.rescale {
            Rescale::Gumbel { m } => Ok(ExperimentReport::Gumbel(gumbel_experiment(
                self.params,
                m,
                self.replicates,
                self.seed,
            )?)),
            Rescale::Clt { p } => Ok(ExperimentReport::Clt(clt_experiment(
                self.params,
                p,
                None,
                self.replicates,
                self.seed,
            )?)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GumbelReport {
    pub alpha: f64,
    pub theta: f64,
    pub m: u32,
    pub replicates: usize,
    pub uncertified: usize,
    /// per-margin KS distance of Z_i against its limit CDF
    pub marginal_ks: Vec<f64>,
    /// sup over a grid of |empirical joint CDF - closed form| (m >= 2)
    pub joint_sup_gap: Option<f64>,
}

/// Draws certified top-m replicates, rescales Z_i = theta V_i - beta, and
/// compares against the limit laws.
pub fn gumbel_experiment(
    params: PDParams,
    m: u32,
    replicates: usize,
    seed: u64,
) -> Result<GumbelReport> {
    let beta = beta_scale(params)?;
    let theta = params.theta();
    let draws: Vec<(Vec<f64>, bool)> = parallel_draws(replicates, seed, |rng| {
        let r = top_m(params, m as usize, rng)?;
        Ok((r.weights, r.certified))
    })?;
    let uncertified = draws.iter().filter(|d| !d.1).count();
    let mut marginal_ks = Vec::new();
    for i in 0..m as usize {
        let mut z: Vec<f64> = draws
            .iter()
            .filter(|d| d.1)
            .map(|d| theta * d.0[i] - beta)
            .collect();
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        marginal_ks.push(ks_distance_sorted(&z, |x| gumbel_reference(i as u32 + 1, x))?);
    }
    let joint_sup_gap = if m >= 2 {
        let z: Vec<(f64, f64)> = draws
            .iter()
            .filter(|d| d.1)
            .map(|d| (theta * d.0[0] - beta, theta * d.0[1] - beta))
            .collect();
        let grid = [-1.5, -0.75, 0.0, 0.5, 1.0, 1.5, 2.5];
        let mut sup: f64 = 0.0;
        for &x1 in &grid {
            for &x2 in &grid {
                let emp = z.iter().filter(|&&(a, b)| a <= x1 && b <= x2).count() as f64
                    / z.len() as f64;
                sup = sup.max((emp - gumbel_joint_cdf2(x1, x2)).abs());
            }
        }
        Some(sup)
    } else {
        None
    };
    Ok(GumbelReport {
        alpha: params.alpha(),
        theta,
        m,
        replicates,
        uncertified,
        marginal_ks,
        joint_sup_gap,
    })
}

/// Analytic check of the rescaled rho_m limit: with s = theta/(x + beta) + b,
/// `rho_m(s) -> gumbel_reference(m, x)` as theta grows. Returns
/// (rho_m value, limit value, absolute gap).
pub fn corollary_gumbel_gap(
    ev: &DickmanEvaluator,
    m: u32,
    x: f64,
    b_offset: f64,
) -> Result<(f64, f64, f64)> {
    let beta = beta_scale(ev.params())?;
    let s = ev.params().theta() / (x + beta) + b_offset;
    if !(s > 0.0) {
        return Err(Error::Domain(format!("rescaled argument {s} must be positive")));
    }
    let rho = laws::rho_m_large(ev, m, s)?;
    let limit = gumbel_reference(m, x);
    Ok((rho, limit, (rho - limit).abs()))
}

/// Limit variance of the rescaled population moment,
/// `sigma^2 = Gamma(1-a) Gamma(2p-a) / Gamma(p-a)^2 + a - p^2`, p > a, p != 1.
pub fn sigma2(alpha: f64, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || !(p > alpha) || p == 1.0 {
        return Err(Error::Domain(format!(
            "sigma2 needs 0 <= alpha < 1, p > alpha, p != 1 (got alpha={alpha}, p={p})"
        )));
    }
    Ok((log_gamma(1.0 - alpha) + log_gamma(2.0 * p - alpha) - 2.0 * log_gamma(p - alpha)).exp()
        + alpha
        - p * p)
}

/// Gap between sigma2 and its gamma-variable representation
/// `(1-a) Var(Gamma(1-a) Y^{p-1} / Gamma(p-a)) + a (p-1)^2 / (1-a)`,
/// with the Y-moments computed by quadrature against the density
/// `z^{1-a} e^-z / Gamma(2-a)`.
pub fn sigma2_identity_gap(alpha: f64, p: f64) -> Result<f64> {
    let s2 = sigma2(alpha, p)?;
    let norm = log_gamma(2.0 - alpha).exp();
    let moment = |r: f64| -> Result<f64> {
        // int_0^inf z^{1-alpha+r} e^-z dz / Gamma(2-alpha)
        let head = crate::numerics::quad::quad(
            |z| (-z).exp(),
            0.0,
            1.0,
            crate::numerics::quad::EndpointWeights::left(1.0 - alpha + r)?,
            1e-12,
        )?;
        let tail = crate::numerics::quad::quad_exp_tail(
            |z| z.powf(1.0 - alpha + r) * (-z).exp(),
            1.0,
            1e-12,
        )?;
        Ok((head + tail) / norm)
    };
    let c = (log_gamma(1.0 - alpha) - log_gamma(p - alpha)).exp();
    let m1 = moment(p - 1.0)?;
    let m2 = moment(2.0 * (p - 1.0))?;
    let var = c * c * (m2 - m1 * m1);
    let rhs = (1.0 - alpha) * var + alpha * (p - 1.0) * (p - 1.0) / (1.0 - alpha);
    Ok((s2 - rhs).abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub alpha: f64,
    pub theta: f64,
    pub p: f64,
    pub replicates: usize,
    pub w_mean: MCEstimate,
    pub w_variance: f64,
    pub sigma2: f64,
    pub ks_vs_normal: f64,
    /// (sample covariance of (W_p, W_q), limit C(p, q)) when a pair was run
    pub covariance: Option<(f64, f64)>,
    /// finite-theta mean of theta^{p-1} H_p against the closed form
    pub scaled_mean: MCEstimate,
    pub scaled_mean_reference: f64,
}

/// Rescales H_p draws to `W_p = sqrt(theta) (Gamma(1-a) theta^{p-1} H_p /
/// Gamma(p-a) - 1)` and compares moments and law against the normal limit.
pub fn clt_experiment(
    params: PDParams,
    p: f64,
    q: Option<f64>,
    replicates: usize,
    seed: u64,
) -> Result<CltReport> {
    let (alpha, theta) = (params.alpha(), params.theta());
    let s2 = sigma2(alpha, p)?;
    let var_share = 0.005;
    let log_scale = log_gamma(1.0 - alpha) - log_gamma(p - alpha) + (p - 1.0) * theta.ln();
    let scale = log_scale.exp();

    let (hp, hq): (Vec<f64>, Option<Vec<f64>>) = match q {
        None => (
            parallel_draws(replicates, seed, |rng| {
                Ok(sample_hp_tail_adjusted(params, p, rng, var_share)?.value)
            })?,
            None,
        ),
        Some(qv) => {
            let pairs: Vec<(f64, f64)> = parallel_draws(replicates, seed, |rng| {
                sample_hp_pair_tail_adjusted(params, p, qv, rng, var_share)
            })?;
            (
                pairs.iter().map(|x| x.0).collect(),
                Some(pairs.iter().map(|x| x.1).collect()),
            )
        }
    };
    let w: Vec<f64> = hp.iter().map(|&h| theta.sqrt() * (scale * h - 1.0)).collect();
    let w_mean = MCEstimate::from_sample(&w)?;
    let w_variance = variance(&w)?;
    let mut sorted = w.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sd = s2.sqrt();
    let ks_vs_normal = ks_distance_sorted(&sorted, |x| normal_cdf(x / sd))?;

    let covariance = match (q, hq) {
        (Some(qv), Some(hq)) => {
            let log_scale_q =
                log_gamma(1.0 - alpha) - log_gamma(qv - alpha) + (qv - 1.0) * theta.ln();
            let wq: Vec<f64> = hq
                .iter()
                .map(|&h| theta.sqrt() * (log_scale_q.exp() * h - 1.0))
                .collect();
            let c = crate::stats::covariance(&w, &wq)?;
            Some((c, cov_limit(alpha, p, qv)))
        }
        _ => None,
    };

    let scaled: Vec<f64> = hp.iter().map(|&h| theta.powf(p - 1.0) * h).collect();
    let scaled_mean = MCEstimate::from_sample(&scaled)?;
    let scaled_mean_reference = theta.powf(p - 1.0) * laws::h_p(params, p)?;
    Ok(CltReport {
        alpha,
        theta,
        p,
        replicates,
        w_mean,
        w_variance,
        sigma2: s2,
        ks_vs_normal,
        covariance,
        scaled_mean,
        scaled_mean_reference,
    })
}

/// Limit covariance `C(p, q) = Gamma(1-a)Gamma(p+q-a)/(Gamma(p-a)Gamma(q-a))
/// + a - pq` of the rescaled moments.
pub fn cov_limit(alpha: f64, p: f64, q: f64) -> f64 {
    (log_gamma(1.0 - alpha) + log_gamma(p + q - alpha)
        - log_gamma(p - alpha)
        - log_gamma(q - alpha))
    .exp()
        + alpha
        - p * q
}

#[derive(Debug, Clone, Serialize)]
pub struct BinnedEstimate {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub reference: f64,
    pub gap_in_se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub alpha: f64,
    pub theta: f64,
    pub order: u32,
    pub replicates: usize,
    pub uncertified: usize,
    pub bins: Vec<BinnedEstimate>,
    pub max_gap_in_se: f64,
}

struct BinAccumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
    uncertified: usize,
}

impl BinAccumulator {
    fn new(k: usize) -> Self {
        BinAccumulator { sum: vec![0.0; k], sum_sq: vec![0.0; k], count: 0, uncertified: 0 }
    }

    fn merge(mut self, other: BinAccumulator) -> BinAccumulator {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self.count += other.count;
        self.uncertified += other.uncertified;
        self
    }
}

fn accumulate_bins<F>(
    replicates: usize,
    seed: u64,
    k: usize,
    per_replicate: F,
) -> Result<BinAccumulator>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<bool> + Sync,
{
    const CHUNK: usize = 4096;
    let n_chunks = replicates.div_ceil(CHUNK);
    let parts: Vec<BinAccumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c as u64 + 1);
            let mut acc = BinAccumulator::new(k);
            let mut scratch = vec![0.0; k];
            let count = CHUNK.min(replicates - c * CHUNK);
            for _ in 0..count {
                scratch.iter_mut().for_each(|x| *x = 0.0);
                let certified = per_replicate(&mut rng, &mut scratch)?;
                if !certified {
                    acc.uncertified += 1;
                }
                for i in 0..k {
                    acc.sum[i] += scratch[i];
                    acc.sum_sq[i] += scratch[i] * scratch[i];
                }
                acc.count += 1;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    parts
        .into_iter()
        .reduce(|a, b| a.merge(b))
        .ok_or_else(|| Error::Domain("no replicates".into()))
}

/// Binned estimator of the first correlation function: per-replicate counts
/// of certified weights in each bin over [v_min, 1], averaged and divided by
/// the bin width, against `int_bin q_1`.
pub fn empirical_correlation_1(
    params: PDParams,
    v_min: f64,
    n_bins: usize,
    replicates: usize,
    seed: u64,
) -> Result<CorrelationReport> {
    if !(v_min >= 0.02) {
        return Err(Error::Domain(
            "v_min >= 0.02 required (density singularity at 0)".into(),
        ));
    }
    let width = (1.0 - v_min) / n_bins as f64;
    let acc = accumulate_bins(replicates, seed, n_bins, |rng, scratch| {
        let prefix = ranked_prefix_above(params, v_min, rng)?;
        for &w in &prefix.weights {
            let idx = (((w - v_min) / width) as usize).min(n_bins - 1);
            scratch[idx] += 1.0;
        }
        Ok(prefix.certified)
    })?;
    let n = acc.count as f64;
    let mut bins = Vec::with_capacity(n_bins);
    let mut max_gap: f64 = 0.0;
    for i in 0..n_bins {
        let lo = v_min + i as f64 * width;
        let hi = lo + width;
        let mean = acc.sum[i] / n;
        let var = (acc.sum_sq[i] / n - mean * mean).max(0.0) * n / (n - 1.0);
        // Poisson floor keeps zero-count bins meaningful
        let se = (var / n).sqrt().max((acc.sum[i] + 1.0).sqrt() / n) / width;
        let estimate = mean / width;
        let reference = laws::q1_bin_mass(params, lo, hi)? / width;
        let gap = (estimate - reference).abs() / se.max(1e-300);
        max_gap = max_gap.max(gap);
        bins.push(BinnedEstimate { lo, hi, estimate, std_error: se, reference, gap_in_se: gap });
    }
    Ok(CorrelationReport {
        alpha: params.alpha(),
        theta: params.theta(),
        order: 1,
        replicates,
        uncertified: acc.uncertified,
        bins,
        max_gap_in_se: max_gap,
    })
}

/// Binned estimator of the second correlation function on an n x n grid over
/// [v_min, 1): counts of ordered distinct pairs per cell against
/// `int_cell q_2`. Cells whose reference mass is zero (outside the simplex)
/// are skipped.
pub fn empirical_correlation_2(
    params: PDParams,
    v_min: f64,
    n_bins: usize,
    replicates: usize,
    seed: u64,
) -> Result<CorrelationReport> {
    if !(v_min >= 0.02) {
        return Err(Error::Domain(
            "v_min >= 0.02 required (density singularity at 0)".into(),
        ));
    }
    let width = (1.0 - v_min) / n_bins as f64;
    let k = n_bins * n_bins;
    let acc = accumulate_bins(replicates, seed, k, |rng, scratch| {
        let prefix = ranked_prefix_above(params, v_min, rng)?;
        let ws = &prefix.weights;
        for (i, &wi) in ws.iter().enumerate() {
            for (j, &wj) in ws.iter().enumerate() {
                if i == j {
                    continue;
                }
                let bi = (((wi - v_min) / width) as usize).min(n_bins - 1);
                let bj = (((wj - v_min) / width) as usize).min(n_bins - 1);
                scratch[bi * n_bins + bj] += 1.0;
            }
        }
        Ok(prefix.certified)
    })?;
    let n = acc.count as f64;
    let area = width * width;
    let mut bins = Vec::new();
    let mut max_gap: f64 = 0.0;
    for bi in 0..n_bins {
        for bj in 0..n_bins {
            let cell = [
                v_min + bi as f64 * width,
                v_min + (bi + 1) as f64 * width,
                v_min + bj as f64 * width,
                v_min + (bj + 1) as f64 * width,
            ];
            let reference_mass = laws::q2_cell_mass(params, cell)?;
            if reference_mass == 0.0 {
                continue;
            }
            let idx = bi * n_bins + bj;
            let mean = acc.sum[idx] / n;
            let var = (acc.sum_sq[idx] / n - mean * mean).max(0.0) * n / (n - 1.0);
            let se = (var / n).sqrt().max((acc.sum[idx] + 1.0).sqrt() / n) / area;
            let estimate = mean / area;
            let reference = reference_mass / area;
            let gap = (estimate - reference).abs() / se.max(1e-300);
            max_gap = max_gap.max(gap);
            bins.push(BinnedEstimate {
                lo: cell[0],
                hi: cell[2],
                estimate,
                std_error: se,
                reference,
                gap_in_se: gap,
            });
        }
    }
    Ok(CorrelationReport {
        alpha: params.alpha(),
        theta: params.theta(),
        order: 2,
        replicates,
        uncertified: acc.uncertified,
        bins,
        max_gap_in_se: max_gap,
    })
}

/// Aggregated first-moment check: sum over bins of bin-width x estimate
/// equals `int_{v_min}^1 q_1` within MC error.
pub fn correlation_total_mass(report: &CorrelationReport, params: PDParams, v_min: f64) -> Result<(f64, f64)> {
    let width = report.bins[0].hi - report.bins[0].lo;
    let mut total = Kahan::new();
    for b in &report.bins {
        total.add(b.estimate * width);
    }
    let reference = laws::q1_bin_mass(params, v_min, 1.0)?;
    Ok((total.value(), reference))
}
