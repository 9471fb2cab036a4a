//! Test statistics shared by the verification suites: Kolmogorov-Smirnov
//! distances with asymptotic p-values, chi-square goodness of fit, and
//! compensated summation for order-independent parallel reductions.

use crate::error::{Error, Result};
use crate::special::chi_square_sf;

/// Kahan-Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums in decreasing magnitude with compensation; for short alternating
/// series where cancellation is mild but checked.
pub fn compensated_sum_by_magnitude(terms: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = terms.to_vec();
    sorted.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    let mut acc = Kahan::new();
    for t in sorted {
        acc.add(t);
    }
    acc.value()
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS distance of `sorted` against the CDF `f`.
pub fn ks_distance_sorted(sorted: &[f64], f: impl Fn(f64) -> f64) -> Result<f64> {
    let n = sorted.len();
    if n == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let c = f(x);
        d = d.max(((i + 1) as f64 / nf - c).abs());
        d = d.max((c - i as f64 / nf).abs());
    }
    Ok(d)
}

/// One-sample KS with asymptotic p-value (Stephens' effective-n correction).
pub fn ks_test_sorted(sorted: &[f64], f: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let d = ks_distance_sorted(sorted, f)?;
    let sn = (sorted.len() as f64).sqrt();
    let p = kolmogorov_sf(d * (sn + 0.12 + 0.11 / sn));
    Ok((d, p))
}

/// Two-sample KS distance between sorted samples.
pub fn two_sample_ks_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    let (mut i, mut j) = (0usize, 0usize);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Two-sample KS test returning (distance, asymptotic p-value).
pub fn two_sample_ks_test_sorted(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    let d = two_sample_ks_sorted(a, b)?;
    let ne = (a.len() as f64 * b.len() as f64) / (a.len() as f64 + b.len() as f64);
    let sn = ne.sqrt();
    let p = kolmogorov_sf(d * (sn + 0.12 + 0.11 / sn));
    Ok((d, p))
}

/// Chi-square goodness of fit. Bins with expected count below `min_expected`
/// are merged into their right neighbour (last bin merges left).
pub fn chi_square_gof(observed: &[f64], expected: &[f64], min_expected: f64) -> Result<(f64, usize, f64)> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::Domain("bin count mismatch".into()));
    }
    let mut obs_m = Vec::new();
    let mut exp_m = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= min_expected {
            obs_m.push(o_acc);
            exp_m.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match (obs_m.last_mut(), exp_m.last_mut()) {
            (Some(o), Some(e)) => {
                *o += o_acc;
                *e += e_acc;
            }
            _ => return Err(Error::Domain("all bins below the merge threshold".into())),
        }
    }
    if obs_m.len() < 2 {
        return Err(Error::Domain("fewer than two usable bins".into()));
    }
    let stat: f64 = obs_m
        .iter()
        .zip(&exp_m)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = obs_m.len() - 1;
    let p = chi_square_sf(stat, dof as f64)?;
    Ok((stat, dof, p))
}

/// Mean and standard error of a sample (n >= 2).
pub fn mean_and_se(data: &[f64]) -> Result<(f64, f64)> {
    if data.len() < 2 {
        return Err(Error::Domain("need at least two replicates".into()));
    }
    let n = data.len() as f64;
    let mut acc = Kahan::new();
    for &x in data {
        acc.add(x);
    }
    let mean = acc.value() / n;
    let mut var = Kahan::new();
    for &x in data {
        var.add((x - mean) * (x - mean));
    }
    let sd = (var.value() / (n - 1.0)).sqrt();
    Ok((mean, sd / n.sqrt()))
}

/// Sample variance (unbiased).
pub fn variance(data: &[f64]) -> Result<f64> {
    let (mean, _) = mean_and_se(data)?;
    let n = data.len() as f64;
    let mut var = Kahan::new();
    for &x in data {
        var.add((x - mean) * (x - mean));
    }
    Ok(var.value() / (n - 1.0))
}

/// Sample covariance (unbiased).
pub fn covariance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Domain("covariance needs equal-length samples".into()));
    }
    let (ma, _) = mean_and_se(a)?;
    let (mb, _) = mean_and_se(b)?;
    let mut acc = Kahan::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.add((x - ma) * (y - mb));
    }
    Ok(acc.value() / (a.len() as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_cancellation() {
        let mut k = Kahan::new();
        k.add(1e16);
        k.add(1.0);
        k.add(-1e16);
        assert_eq!(k.value(), 1.0);
    }

    #[test]
    fn kolmogorov_sf_anchors() {
        // Q(0.828...) ~ 0.5 (median of the Kolmogorov distribution)
        assert!((kolmogorov_sf(0.8275) - 0.5).abs() < 1e-3);
        assert!(kolmogorov_sf(2.0) < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_distance_uniform_grid() {
        // points at (i - 1/2)/n give distance 1/(2n) against U(0,1)
        let n = 100;
        let data: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance_sorted(&data, |x| x).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn two_sample_ks_identical_is_zero_peak() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let d = two_sample_ks_sorted(&a, &a).unwrap();
        assert!(d <= 0.02 + 1e-12);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let obs = vec![10.0, 20.0, 30.0, 40.0];
        let (stat, dof, p) = chi_square_gof(&obs, &obs, 5.0).unwrap();
        assert!(stat < 1e-12);
        assert_eq!(dof, 3);
        assert!(p > 0.999);
    }

    #[test]
    fn chi_square_merges_small_bins() {
        let obs = vec![10.0, 1.0, 1.0, 1.0, 1.0, 86.0];
        let exp = vec![10.0, 1.0, 1.0, 1.0, 1.0, 86.0];
        let (_, dof, _) = chi_square_gof(&obs, &exp, 5.0).unwrap();
        assert_eq!(dof, 1); // merged into [10] and [1+1+1+1+86]
    }

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((m - 2.5).abs() < 1e-15);
        let sd = (5.0_f64 / 3.0).sqrt();
        assert!((se - sd / 2.0).abs() < 1e-15);
    }
}
