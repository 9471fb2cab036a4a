//! Adaptive quadrature with algebraic endpoint singularities.
//!
//! `quad(f, a, b, w, tol)` computes `int_a^b (v-a)^L (b-v)^R f(v) dv` with
//! Gauss-Jacobi nodes matched to the declared exponents on panels touching a
//! singular endpoint, Gauss-Legendre inside, and bisection of the panel with
//! the largest error estimate until the global estimate meets `tol`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::special::log_gamma;

/// Declared integrable endpoint exponents; both must exceed -1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointWeights {
    left: f64,
    right: f64,
}

impl EndpointWeights {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left > -1.0) || !(right > -1.0) {
            return Err(Error::Domain(format!(
                "endpoint exponents must be > -1 (got left={left}, right={right})"
            )));
        }
        Ok(EndpointWeights { left, right })
    }

    pub fn none() -> Self {
        EndpointWeights { left: 0.0, right: 0.0 }
    }

    pub fn left(e: f64) -> Result<Self> {
        Self::new(e, 0.0)
    }

    pub fn right(e: f64) -> Result<Self> {
        Self::new(0.0, e)
    }

    pub fn left_exponent(&self) -> f64 {
        self.left
    }

    pub fn right_exponent(&self) -> f64 {
        self.right
    }
}

/// Nodes and weights on [-1, 1] for the weight (1-x)^A (1+x)^B.
#[derive(Debug)]
struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Symmetric tridiagonal QL with implicit shifts, accumulating only the first
/// row of the eigenvector matrix (all that Golub-Welsch weights need).
fn tridiag_eigen_first_row(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / denom;
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0_f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Golub-Welsch construction of the n-point Gauss-Jacobi rule for
/// (1-x)^A (1+x)^B on [-1, 1].
fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    let s = a + b;
    // zeroth moment: 2^{A+B+1} Beta(A+1, B+1)
    let mu0 = ((s + 1.0) * std::f64::consts::LN_2 + log_gamma(a + 1.0) + log_gamma(b + 1.0)
        - log_gamma(s + 2.0))
        .exp();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    diag[0] = (b - a) / (s + 2.0);
    for k in 1..n {
        let kf = k as f64;
        diag[k] = (b * b - a * a) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0));
        let beta_k = if k == 1 {
            4.0 * (a + 1.0) * (b + 1.0) / ((s + 2.0) * (s + 2.0) * (s + 3.0))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + s)
                / ((2.0 * kf + s) * (2.0 * kf + s) * (2.0 * kf + s + 1.0) * (2.0 * kf + s - 1.0))
        };
        off[k - 1] = beta_k.sqrt();
    }
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    tridiag_eigen_first_row(&mut diag, &mut off, &mut z)?;
    let mut pairs: Vec<(f64, f64)> = diag
        .iter()
        .zip(z.iter())
        .map(|(&x, &zi)| (x, mu0 * zi * zi))
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

static RULE_CACHE: Lazy<RwLock<HashMap<(u64, u64, usize), Arc<GaussRule>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

fn cached_rule(n: usize, a: f64, b: f64) -> Result<Arc<GaussRule>> {
    let key = (a.to_bits(), b.to_bits(), n);
    if let Some(r) = RULE_CACHE.read().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_jacobi(n, a, b)?);
    RULE_CACHE.write().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Scalar type that can be integrated (f64 or Complex64).
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const N_LO: usize = 15;
const N_HI: usize = 31;
const MAX_PANELS: usize = 3000;

struct Panel<T> {
    lo: f64,
    hi: f64,
    value: T,
    err: f64,
}

/// Evaluate one panel [c, d] of the full interval [a, b] at the given rule
/// size, folding non-singular weight factors into the integrand.
fn eval_panel<T: QuadValue>(
    f: &dyn Fn(f64) -> T,
    a: f64,
    b: f64,
    w: EndpointWeights,
    c: f64,
    d: f64,
    n: usize,
) -> Result<T> {
    let touches_left = c == a && w.left != 0.0;
    let touches_right = d == b && w.right != 0.0;
    let (ja, jb) = (
        if touches_right { w.right } else { 0.0 },
        if touches_left { w.left } else { 0.0 },
    );
    let rule = cached_rule(n, ja, jb)?;
    let half = 0.5 * (d - c);
    let mid = 0.5 * (c + d);
    let mut acc = T::zero();
    for (&x, &wt) in rule.nodes.iter().zip(rule.weights.iter()) {
        let v = mid + half * x;
        let mut g = f(v);
        if w.left != 0.0 && !touches_left {
            g = g.scale((v - a).powf(w.left));
        }
        if w.right != 0.0 && !touches_right {
            g = g.scale((b - v).powf(w.right));
        }
        acc = acc.add(g.scale(wt));
    }
    // scale: (half)^{1 + active exponents}
    let mut log_scale = half.ln();
    if touches_left {
        log_scale += w.left * half.ln();
    }
    if touches_right {
        log_scale += w.right * half.ln();
    }
    Ok(acc.scale(log_scale.exp()))
}

fn make_panel<T: QuadValue>(
    f: &dyn Fn(f64) -> T,
    a: f64,
    b: f64,
    w: EndpointWeights,
    c: f64,
    d: f64,
) -> Result<Panel<T>> {
    let lo = eval_panel(f, a, b, w, c, d, N_LO)?;
    let hi = eval_panel(f, a, b, w, c, d, N_HI)?;
    let err = hi.add(lo.scale(-1.0)).magnitude();
    Ok(Panel { lo: c, hi: d, value: hi, err })
}

fn quad_generic<T: QuadValue>(
    f: &dyn Fn(f64) -> T,
    a: f64,
    b: f64,
    w: EndpointWeights,
    rel_tol: f64,
) -> Result<T> {
    if !(a < b) {
        return Err(Error::Domain(format!("quad needs a < b (got {a}, {b})")));
    }
    let rel_tol = rel_tol.max(5e-15);
    let mut panels = vec![make_panel(f, a, b, w, a, b)?];
    loop {
        let mut total = T::zero();
        let mut err_sum = 0.0;
        let mut l1 = 0.0;
        for p in &panels {
            total = total.add(p.value);
            err_sum += p.err;
            l1 += p.value.magnitude();
        }
        let target = rel_tol * total.magnitude().max(1e-14 * l1).max(1e-300);
        if err_sum <= target {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadNoConverge {
                achieved: err_sum / total.magnitude().max(1e-300),
                requested: rel_tol,
            });
        }
        // split the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Panel { lo, hi, .. } = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid - lo < 1e-15 * (b - a).abs() {
            return Err(Error::QuadNoConverge {
                achieved: err_sum,
                requested: rel_tol,
            });
        }
        panels.push(make_panel(f, a, b, w, lo, mid)?);
        panels.push(make_panel(f, a, b, w, mid, hi)?);
    }
}

/// `int_a^b (v-a)^L (b-v)^R f(v) dv` to relative tolerance `rel_tol`.
pub fn quad<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    w: EndpointWeights,
    rel_tol: f64,
) -> Result<f64> {
    quad_generic(&f, a, b, w, rel_tol)
}

/// Complex-valued variant sharing the same panel machinery.
pub fn quad_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    w: EndpointWeights,
    rel_tol: f64,
) -> Result<Complex64> {
    quad_generic(&f, a, b, w, rel_tol)
}

/// `int_a^inf f(v) dv` for integrands with (at least) exponential decay:
/// doubling panels, stopping once two consecutive panels are negligible.
pub fn quad_exp_tail<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> Result<f64> {
    let mut acc = 0.0;
    let mut lo = a;
    let mut width = 2.0;
    let mut quiet = 0;
    while quiet < 2 {
        let hi = lo + width;
        let part = quad(&f, lo, hi, EndpointWeights::none(), rel_tol)?;
        acc += part;
        if part.abs() <= 0.01 * rel_tol * acc.abs().max(1e-300) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
        if lo > a + 5000.0 {
            return Err(Error::QuadNoConverge {
                achieved: part.abs(),
                requested: rel_tol,
            });
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_nodes_match_reference() {
        let r = gauss_jacobi(5, 0.0, 0.0).unwrap();
        let want_nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let want_weights = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for i in 0..5 {
            assert!((r.nodes[i] - want_nodes[i]).abs() < 1e-13);
            assert!((r.weights[i] - want_weights[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_rule_is_exact() {
        // A = B = -1/2 gives Gauss-Chebyshev: x_i = cos((2i-1)pi/2n), w = pi/n
        let n = 9;
        let r = gauss_jacobi(n, -0.5, -0.5).unwrap();
        for (i, &x) in r.nodes.iter().enumerate() {
            let want = (std::f64::consts::PI * (2.0 * (n - i) as f64 - 1.0) / (2.0 * n as f64)).cos();
            assert!((x - want).abs() < 1e-13, "node {i}: {x} vs {want}");
            assert!((r.weights[i] - std::f64::consts::PI / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn polynomial_exactness_under_jacobi_weights() {
        // n-point rule integrates degree <= 2n-1 exactly; reference moments
        // int_0^1 v^k v^L (1-v)^R dv = Beta(k+L+1, R+1)
        for &(l, r) in &[(0.0, 0.0), (-0.5, 0.0), (0.0, -0.5), (1.3, -0.7), (-0.9, 2.0)] {
            let w = EndpointWeights::new(l, r).unwrap();
            for k in 0..=(2 * N_LO - 1) {
                let f = |v: f64| v.powi(k as i32);
                let got = eval_panel(&f, 0.0, 1.0, w, 0.0, 1.0, N_LO).unwrap();
                let want = (log_gamma(k as f64 + l + 1.0) + log_gamma(r + 1.0)
                    - log_gamma(k as f64 + l + r + 2.0))
                    .exp();
                assert!(
                    (got - want).abs() <= 1e-13 * want.abs(),
                    "L={l} R={r} k={k}: {got} vs {want} (rel {:e})",
                    ((got - want) / want).abs()
                );
            }
        }
    }

    #[test]
    fn spec_examples() {
        // int_0^1 (1-v)^{-1/2} dv = 2
        let v = quad(|_| 1.0, 0.0, 1.0, EndpointWeights::right(-0.5).unwrap(), 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        // Beta(1/2, 1/2) = pi
        let v = quad(|_| 1.0, 0.0, 1.0, EndpointWeights::new(-0.5, -0.5).unwrap(), 1e-12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
        // int_0^1 v dv = 1/2
        let v = quad(|x| x, 0.0, 1.0, EndpointWeights::none(), 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn adaptivity_on_peaked_integrand() {
        // narrow Gaussian away from endpoints
        let v = quad(
            |x| (-(x - 0.37).powi(2) / 2e-6).exp(),
            0.0,
            1.0,
            EndpointWeights::none(),
            1e-10,
        )
        .unwrap();
        let want = (2.0 * std::f64::consts::PI * 1e-6).sqrt();
        assert!((v - want).abs() < 1e-12 * want.max(1.0), "{v} vs {want}");
    }

    #[test]
    fn off_interval_weight_composition() {
        // int_0^2 e^-x (2-x)^{-1/2} dx, checked against an independent value
        let v = quad(
            |x| (-x).exp(),
            0.0,
            2.0,
            EndpointWeights::right(-0.5).unwrap(),
            1e-12,
        )
        .unwrap();
        assert!((v - 0.905_079_814_807_444_9).abs() < 1e-11, "{v}");
    }

    #[test]
    fn exp_tail_integral() {
        let v = quad_exp_tail(|x| (-x).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = quad_exp_tail(|x| x * (-2.0 * x).exp(), 1.0, 1e-11).unwrap();
        // int_1^inf x e^{-2x} dx = 3/4 e^{-2}
        assert!((v - 0.75 * (-2.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn bad_exponent_rejected() {
        assert!(EndpointWeights::new(-1.0, 0.0).is_err());
        assert!(EndpointWeights::new(0.0, -1.2).is_err());
    }
}
