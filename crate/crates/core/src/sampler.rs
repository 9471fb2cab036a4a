//! Seedable random generation: Beta variates through a gamma pair, the
//! stick-breaking sequence, certified ranked prefixes, population moments,
//! and random mean functionals.
//!
//! Streams are keyed by (seed, stream_id); distinct pairs are statistically
//! independent, identical pairs reproduce bit-identical sequences. Monte
//! Carlo drivers split work into fixed chunks with per-chunk streams so the
//! result does not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laws;
use crate::markov_krein::NuSpec;
use crate::params::PDParams;
use crate::stats::Kahan;

/// Counter-based deterministic stream.
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.gen();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Gamma(shape, 1) via rand_distr (Marsaglia-Tsang squeeze-rejection;
    /// shape < 1 handled by the boosting identity G_a = G_{a+1} U^{1/a}).
    pub fn gamma(&mut self, shape: f64) -> Result<f64> {
        let g = rand_distr::Gamma::new(shape, 1.0)
            .map_err(|e| Error::Domain(format!("gamma shape {shape}: {e}")))?;
        Ok(g.sample(&mut self.rng))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }
}

/// One Beta(a, b) draw as G_a / (G_a + G_b).
pub fn beta_variate(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!("beta needs a, b > 0 (got {a}, {b})")));
    }
    loop {
        let ga = rng.gamma(a)?;
        let gb = rng.gamma(b)?;
        let s = ga + gb;
        if s > 0.0 {
            let v = ga / s;
            // keep the value in the open interval
            return Ok(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
        }
    }
}

/// Stopping rule for stick generation.
#[derive(Debug, Clone, Copy)]
pub enum StopRule {
    ResidualBelow(f64),
    Count(usize),
}

/// Raw stick-breaking output in generation order plus the unallocated
/// residual mass.
#[derive(Debug, Clone)]
pub struct StickSample {
    pub sticks: Vec<f64>,
    pub residual: f64,
}

/// Hard cap on generated sticks for the collecting samplers.
pub const STICK_CAP: usize = 1_000_000;

/// Draws the i-th breaking fraction Y_i ~ Beta(1 - alpha, theta + i alpha).
#[inline]
fn break_fraction(params: PDParams, i: usize, rng: &mut RngStream) -> Result<f64> {
    beta_variate(1.0 - params.alpha(), params.theta() + i as f64 * params.alpha(), rng)
}

/// Stick-breaking sequence: stick_i = Y_i prod_{j<i} (1 - Y_j).
pub fn stick_breaking(params: PDParams, stop: StopRule, rng: &mut RngStream) -> Result<StickSample> {
    match stop {
        StopRule::ResidualBelow(eps) => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Domain(format!("eps = {eps} outside (0,1)")));
            }
        }
        StopRule::Count(n) => {
            if n == 0 {
                return Err(Error::Domain("count must be >= 1".into()));
            }
        }
    }
    let mut sticks = Vec::new();
    let mut residual = 1.0_f64;
    let mut i = 1usize;
    loop {
        let y = break_fraction(params, i, rng)?;
        sticks.push(y * residual);
        residual *= 1.0 - y;
        match stop {
            StopRule::ResidualBelow(eps) => {
                if residual < eps {
                    break;
                }
                if sticks.len() >= STICK_CAP {
                    return Err(Error::Numerical(format!(
                        "stick cap {STICK_CAP} exceeded before residual < {eps}"
                    )));
                }
            }
            StopRule::Count(n) => {
                if sticks.len() == n {
                    break;
                }
            }
        }
        i += 1;
    }
    Ok(StickSample { sticks, residual })
}

/// Certified top-m ranked weights: once the residual drops below the current
/// m-th largest stick, every future stick is smaller, so the m largest seen
/// are exactly the true leaders.
#[derive(Debug, Clone)]
pub struct RankedPrefix {
    /// strictly decreasing
    pub weights: Vec<f64>,
    pub certified: bool,
    pub sticks_used: usize,
}

pub fn top_m(params: PDParams, m: usize, rng: &mut RngStream) -> Result<RankedPrefix> {
    if m == 0 {
        return Err(Error::Domain("top_m needs m >= 1".into()));
    }
    let mut best: Vec<f64> = Vec::with_capacity(m);
    let mut residual = 1.0_f64;
    let mut i = 1usize;
    loop {
        let y = break_fraction(params, i, rng)?;
        let stick = y * residual;
        residual *= 1.0 - y;
        if best.len() < m {
            let pos = best.partition_point(|&w| w > stick);
            best.insert(pos, stick);
        } else if stick > best[m - 1] {
            let pos = best.partition_point(|&w| w > stick);
            best.insert(pos, stick);
            best.pop();
        }
        if best.len() == m && residual < best[m - 1] {
            return Ok(RankedPrefix { weights: best, certified: true, sticks_used: i });
        }
        if i >= STICK_CAP {
            return Ok(RankedPrefix { weights: best, certified: false, sticks_used: i });
        }
        i += 1;
    }
}

/// All weights >= floor, certified: generation stops once the residual is
/// below the floor, so no undiscovered weight can reach it. The returned
/// weights are sorted decreasing.
#[derive(Debug, Clone)]
pub struct FloorPrefix {
    pub weights: Vec<f64>,
    pub residual: f64,
    pub certified: bool,
}

pub fn ranked_prefix_above(params: PDParams, floor: f64, rng: &mut RngStream) -> Result<FloorPrefix> {
    if !(floor > 0.0 && floor < 1.0) {
        return Err(Error::Domain(format!("floor = {floor} outside (0,1)")));
    }
    let cap = 20_000_000usize;
    let mut keep = Vec::new();
    let mut residual = 1.0_f64;
    let mut i = 1usize;
    loop {
        let y = break_fraction(params, i, rng)?;
        let stick = y * residual;
        residual *= 1.0 - y;
        if stick >= floor {
            keep.push(stick);
        }
        if residual < floor {
            keep.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return Ok(FloorPrefix { weights: keep, residual, certified: true });
        }
        if i >= cap {
            keep.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return Ok(FloorPrefix { weights: keep, residual, certified: false });
        }
        i += 1;
    }
}

/// Population-moment draw `H_p = sum sticks^p`.
#[derive(Debug, Clone, Copy)]
pub struct HpDraw {
    pub value: f64,
    /// expected mass of the dropped tail at the stopping time
    pub expected_remainder: f64,
    pub sticks_used: usize,
    pub converged: bool,
}

const HP_CHECK_INTERVAL: usize = 32;

/// Plain truncated sum, stopping when the expected remainder
/// `r^p h_p(alpha, theta + n alpha)` drops below `tol` (GEM self-similarity:
/// the post-n tail is residual times a fresh PD(alpha, theta + n alpha)
/// mass split). Cap exceeded is reported, not an error.
pub fn sample_hp(params: PDParams, p: f64, rng: &mut RngStream, tol: f64) -> Result<HpDraw> {
    hp_impl(params, p, rng, HpStop::ExpectedRemainder(tol), false)
}

/// Truncated sum plus the exact conditional mean of the dropped tail;
/// stops when the tail's variance share drops below `var_share` of the full
/// variance, so second moments are preserved to that relative accuracy.
pub fn sample_hp_tail_adjusted(
    params: PDParams,
    p: f64,
    rng: &mut RngStream,
    var_share: f64,
) -> Result<HpDraw> {
    hp_impl(params, p, rng, HpStop::VarianceShare(var_share), true)
}

enum HpStop {
    ExpectedRemainder(f64),
    VarianceShare(f64),
}

fn hp_impl(
    params: PDParams,
    p: f64,
    rng: &mut RngStream,
    stop: HpStop,
    add_tail_mean: bool,
) -> Result<HpDraw> {
    let alpha = params.alpha();
    if !(p > alpha) {
        return Err(Error::Domain(format!(
            "H_p needs p > alpha (got p = {p}, alpha = {alpha})"
        )));
    }
    let base_var = match stop {
        HpStop::VarianceShare(_) => laws::cov_h(params, p, p)?,
        _ => 0.0,
    };
    let mut acc = Kahan::new();
    let mut residual = 1.0_f64;
    let mut i = 1usize;
    loop {
        let y = break_fraction(params, i, rng)?;
        let stick = y * residual;
        residual *= 1.0 - y;
        acc.add(stick.powf(p));
        if i % HP_CHECK_INTERVAL == 0 || residual < 1e-14 {
            let shifted = PDParams::new(alpha, params.theta() + i as f64 * alpha)?;
            let rem = residual.powf(p) * laws::h_p(shifted, p)?;
            let done = match stop {
                HpStop::ExpectedRemainder(tol) => rem < tol,
                HpStop::VarianceShare(share) => {
                    residual.powf(2.0 * p) * laws::cov_h(shifted, p, p)? < share * base_var
                }
            };
            if done || i >= STICK_CAP {
                let value = acc.value() + if add_tail_mean { rem } else { 0.0 };
                return Ok(HpDraw {
                    value,
                    expected_remainder: rem,
                    sticks_used: i,
                    converged: done,
                });
            }
        }
        i += 1;
    }
}

/// Joint (H_p, H_q) draw from one stick sequence, both tail-adjusted; the
/// stopping rule is the stricter of the two variance shares.
pub fn sample_hp_pair_tail_adjusted(
    params: PDParams,
    p: f64,
    q: f64,
    rng: &mut RngStream,
    var_share: f64,
) -> Result<(f64, f64)> {
    let alpha = params.alpha();
    if !(p > alpha) || !(q > alpha) {
        return Err(Error::Domain("pair draw needs p, q > alpha".into()));
    }
    let base_p = laws::cov_h(params, p, p)?;
    let base_q = laws::cov_h(params, q, q)?;
    let mut acc_p = Kahan::new();
    let mut acc_q = Kahan::new();
    let mut residual = 1.0_f64;
    let mut i = 1usize;
    loop {
        let y = break_fraction(params, i, rng)?;
        let stick = y * residual;
        residual *= 1.0 - y;
        acc_p.add(stick.powf(p));
        acc_q.add(stick.powf(q));
        if i % HP_CHECK_INTERVAL == 0 || residual < 1e-14 {
            let shifted = PDParams::new(alpha, params.theta() + i as f64 * alpha)?;
            let done_p = residual.powf(2.0 * p) * laws::cov_h(shifted, p, p)? < var_share * base_p;
            let done_q = residual.powf(2.0 * q) * laws::cov_h(shifted, q, q)? < var_share * base_q;
            if (done_p && done_q) || i >= STICK_CAP {
                let hp = acc_p.value() + residual.powf(p) * laws::h_p(shifted, p)?;
                let hq = acc_q.value() + residual.powf(q) * laws::h_p(shifted, q)?;
                return Ok((hp, hq));
            }
        }
        i += 1;
    }
}

/// What to do with the unallocated residual mass of a mean-functional draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailPolicy {
    /// Drop it; for bounded nu the distributional error is at most
    /// eps * sup|X| and is reported as `truncation_bound`.
    Drop,
    /// Assign the whole residual to one fresh X draw. The mean is then exact
    /// (E sum V_i = 1) and the law error is second order in eps.
    CompleteWithFreshDraw,
}

#[derive(Debug, Clone, Copy)]
pub struct MeanFunctionalDraw {
    pub value: f64,
    pub residual: f64,
    /// eps * sup|X| for bounded nu under `Drop`; None otherwise.
    pub truncation_bound: Option<f64>,
}

/// One draw of `M = sum X_i V_i` with X_i iid from nu, truncated at
/// residual < eps.
pub fn sample_mean_functional(
    params: PDParams,
    nu: &NuSpec,
    rng: &mut RngStream,
    eps: f64,
    policy: TailPolicy,
) -> Result<MeanFunctionalDraw> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} outside (0,1)")));
    }
    if !nu.has_alpha_moment(params.alpha()) {
        return Err(Error::Domain(
            "nu lacks the alpha-moment required for a.s. finite mean functionals".into(),
        ));
    }
    let cap = 100_000_000usize;
    let mut acc = Kahan::new();
    let mut residual = 1.0_f64;
    let mut i = 1usize;
    loop {
        let y = break_fraction(params, i, rng)?;
        let stick = y * residual;
        residual *= 1.0 - y;
        acc.add(nu.draw(rng) * stick);
        if residual < eps || i >= cap {
            break;
        }
        i += 1;
    }
    let (value, bound) = match policy {
        TailPolicy::Drop => (acc.value(), nu.support_bound().map(|b| residual * b)),
        TailPolicy::CompleteWithFreshDraw => {
            acc.add(residual * nu.draw(rng));
            (acc.value(), None)
        }
    };
    Ok(MeanFunctionalDraw { value, residual, truncation_bound: bound })
}

/// Runs `draw` for `replicates` independent draws, split into fixed chunks
/// with streams keyed (seed, chunk index); the reduction order is fixed, so
/// results are identical for any worker count.
pub fn parallel_draws<T, F>(replicates: usize, seed: u64, draw: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync + Send,
{
    const CHUNK: usize = 4096;
    let n_chunks = replicates.div_ceil(CHUNK);
    let chunks: Vec<Vec<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c as u64 + 1);
            let count = CHUNK.min(replicates - c * CHUNK);
            (0..count).map(|_| draw(&mut rng)).collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::{quad, EndpointWeights};
    use crate::params::validate_params;
    use crate::special::log_gamma;
    use crate::stats::{chi_square_gof, ks_distance_sorted, mean_and_se};
    use proptest::prelude::*;

    #[test]
    fn streams_reproduce_bit_exactly() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
        let mut c = RngStream::new(42, 8);
        let first: Vec<f64> = (0..8).map(|_| c.uniform()).collect();
        let mut d = RngStream::new(42, 7);
        let other: Vec<f64> = (0..8).map(|_| d.uniform()).collect();
        assert_ne!(first, other);
    }

    #[test]
    fn beta_determinism() {
        let mut a = RngStream::new(5, 1);
        let mut b = RngStream::new(5, 1);
        for _ in 0..100 {
            let x = beta_variate(0.7, 2.3, &mut a).unwrap();
            let y = beta_variate(0.7, 2.3, &mut b).unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn beta_1_1_is_uniform() {
        let mut rng = RngStream::new(11, 0);
        let mut draws: Vec<f64> = (0..100_000)
            .map(|_| beta_variate(1.0, 1.0, &mut rng).unwrap())
            .collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_distance_sorted(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn beta_mean_within_three_se() {
        // Beta(0.5, 1.5): mean 1/4, variance = ab/((a+b)^2(a+b+1)) = 1/16 / 3
        let mut rng = RngStream::new(12, 0);
        let n = 1_000_000;
        let mut acc = Kahan::new();
        for _ in 0..n {
            acc.add(beta_variate(0.5, 1.5, &mut rng).unwrap());
        }
        let mean = acc.value() / n as f64;
        let se = (0.25_f64 * 0.75 / 3.0 / n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn stick_mass_conservation() {
        let p = validate_params(0.5, 0.5).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..50 {
            let s = stick_breaking(p, StopRule::Count(200), &mut rng).unwrap();
            let total: f64 = s.sticks.iter().sum::<f64>() + s.residual;
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn stick_mass_conservation_prop(alpha in 0.0..0.9f64, theta_off in 0.05..4.0f64, seed in 0u64..1000) {
            let p = validate_params(alpha, -alpha + theta_off).unwrap();
            let mut rng = RngStream::new(seed, 0);
            let s = stick_breaking(p, StopRule::Count(100), &mut rng).unwrap();
            let total: f64 = s.sticks.iter().sum::<f64>() + s.residual;
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(s.sticks.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn first_stick_mean_examples() {
        // (0,1): E stick_1 = E Y_1 = 1/2; (0.5,0.5): E Y_1 = (1-a)/(1+theta) = 1/3
        for &(a, t, want) in &[(0.0, 1.0, 0.5), (0.5, 0.5, 1.0 / 3.0)] {
            let p = validate_params(a, t).unwrap();
            let n = 1_000_000usize;
            let draws = parallel_draws(n, 99, |rng| {
                Ok(stick_breaking(p, StopRule::Count(1), rng)?.sticks[0])
            })
            .unwrap();
            let (mean, se) = mean_and_se(&draws).unwrap();
            assert!((mean - want).abs() < 3.0 * se, "({a},{t}): {mean} vs {want} (se {se})");
        }
    }

    #[test]
    fn first_stick_size_biased_density() {
        // stick_1 ~ Beta(1-alpha, theta+alpha); chi-square GOF on 50 bins
        let p = validate_params(0.4, 0.8).unwrap();
        let (a, b) = (1.0 - 0.4, 0.8 + 0.4);
        let n = 1_000_000usize;
        let draws = parallel_draws(n, 1234, |rng| {
            Ok(stick_breaking(p, StopRule::Count(1), rng)?.sticks[0])
        })
        .unwrap();
        let bins = 50usize;
        let mut observed = vec![0.0; bins];
        for &v in &draws {
            observed[((v * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        let log_norm = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
        let expected: Vec<f64> = (0..bins)
            .map(|i| {
                let (lo, hi) = (i as f64 / bins as f64, (i + 1) as f64 / bins as f64);
                let w = EndpointWeights::new(
                    if i == 0 { a - 1.0 } else { 0.0 },
                    if i == bins - 1 { b - 1.0 } else { 0.0 },
                )
                .unwrap();
                let f = |v: f64| {
                    let mut g = 1.0;
                    if i != 0 {
                        g *= v.powf(a - 1.0);
                    }
                    if i != bins - 1 {
                        g *= (1.0 - v).powf(b - 1.0);
                    }
                    g
                };
                n as f64 * quad(f, lo, hi, w, 1e-10).unwrap() / log_norm.exp()
            })
            .collect();
        let (stat, dof, pval) = chi_square_gof(&observed, &expected, 10.0).unwrap();
        assert!(pval > 0.001, "chi2 = {stat}, dof = {dof}, p = {pval}");
    }

    #[test]
    fn top_m_certification_and_bounds() {
        let p = validate_params(0.3, 0.7).unwrap();
        let mut rng = RngStream::new(8, 0);
        for _ in 0..200 {
            let r = top_m(p, 3, &mut rng).unwrap();
            assert!(r.certified);
            assert_eq!(r.weights.len(), 3);
            for k in 0..3 {
                assert!(r.weights[k] <= 1.0 / (k as f64 + 1.0) + 1e-15);
            }
            assert!(r.weights[0] > r.weights[1] && r.weights[1] > r.weights[2]);
        }
    }

    #[test]
    fn top_one_matches_stick_breaking_brute_force() {
        // certified top_1 vs the max over a deep stick prefix (residual
        // below 1e-9, so the max is the true V_1 up to mass 1e-9)
        let p = validate_params(0.0, 1.0).unwrap();
        let n = 100_000usize;
        let mut a = parallel_draws(n, 41, |rng| Ok(top_m(p, 1, rng)?.weights[0])).unwrap();
        let mut b = parallel_draws(n, 42, |rng| {
            let s = stick_breaking(p, StopRule::ResidualBelow(1e-9), rng)?;
            Ok(s.sticks.iter().cloned().fold(0.0, f64::max))
        })
        .unwrap();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let d = crate::stats::two_sample_ks_sorted(&a, &b).unwrap();
        assert!(d < 0.01, "KS {d}");
    }

    #[test]
    fn top_one_matches_floor_prefix_max() {
        // the top_m stopping rule and the floor sampler agree in law; compare
        // empirical V_1 distributions by KS
        let p = validate_params(0.5, 0.5).unwrap();
        let n = 100_000usize;
        let mut a = parallel_draws(n, 21, |rng| Ok(top_m(p, 1, rng)?.weights[0])).unwrap();
        let mut b = parallel_draws(n, 22, |rng| {
            let f = ranked_prefix_above(p, 0.05, rng)?;
            // V_1 < 0.05 is rare enough to ignore at this sample size
            Ok(f.weights.first().copied().unwrap_or(0.04))
        })
        .unwrap();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let d = crate::stats::two_sample_ks_sorted(&a, &b).unwrap();
        assert!(d < 0.01, "KS {d}");
    }

    #[test]
    fn hp_p_one_is_total_mass() {
        let p = validate_params(0.3, 0.7).unwrap();
        let mut rng = RngStream::new(77, 0);
        let d = sample_hp(p, 1.0, &mut rng, 1e-10).unwrap();
        assert!(d.converged);
        assert!((d.value - 1.0).abs() < 1e-8, "{}", d.value);
    }

    #[test]
    fn hp_mean_alpha_zero() {
        // (0,1), p=2: E H_2 = 1/2
        let p = validate_params(0.0, 1.0).unwrap();
        let n = 200_000usize;
        let draws = parallel_draws(n, 31, |rng| Ok(sample_hp(p, 2.0, rng, 1e-10)?.value)).unwrap();
        let (mean, se) = mean_and_se(&draws).unwrap();
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn hp_tail_adjusted_matches_closed_form_mean() {
        let p = validate_params(0.5, 0.5).unwrap();
        let n = 200_000usize;
        let draws =
            parallel_draws(n, 32, |rng| Ok(sample_hp_tail_adjusted(p, 2.0, rng, 0.005)?.value))
                .unwrap();
        let (mean, se) = mean_and_se(&draws).unwrap();
        let want = laws::h_p(p, 2.0).unwrap();
        assert!((mean - want).abs() < 3.5 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn hp_below_alpha_rejected() {
        let p = validate_params(0.5, 0.5).unwrap();
        let mut rng = RngStream::new(1, 0);
        assert!(sample_hp(p, 0.4, &mut rng, 1e-8).is_err());
    }

    #[test]
    fn mean_functional_degenerate_nu() {
        let p = validate_params(0.3, 0.7).unwrap();
        let mut rng = RngStream::new(9, 0);
        let d = sample_mean_functional(p, &NuSpec::delta(3.0), &mut rng, 1e-9, TailPolicy::Drop)
            .unwrap();
        assert!((d.value - 3.0).abs() < 1e-7);
        assert!(d.truncation_bound.unwrap() <= 3.0 * 1e-9 * 1.0001);
    }

    #[test]
    fn mean_functional_preserves_nu_mean() {
        let p = validate_params(0.0, 1.0).unwrap();
        let nu = NuSpec::fair_coin();
        let n = 100_000usize;
        let draws = parallel_draws(n, 51, |rng| {
            Ok(sample_mean_functional(p, &nu, rng, 1e-9, TailPolicy::Drop)?.value)
        })
        .unwrap();
        let (mean, se) = mean_and_se(&draws).unwrap();
        assert!((mean - 0.5).abs() < 3.5 * se, "{mean} +- {se}");
    }

    #[test]
    fn parallel_draws_deterministic_and_ordered() {
        let a = parallel_draws(10_000, 5, |rng| Ok(rng.uniform())).unwrap();
        let b = parallel_draws(10_000, 5, |rng| Ok(rng.uniform())).unwrap();
        assert_eq!(a, b);
    }
}
