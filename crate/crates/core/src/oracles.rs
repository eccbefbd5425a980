//! Independent brute-force references for the acceptance tests: Monte Carlo
//! quantiles, the Weiszfeld fixed point, central finite differences, batch
//! Lloyd quantization, an inverse normal CDF and Kolmogorov-Smirnov helpers.
//!
//! Nothing here touches the SA engine beyond basic vector types, so these
//! references stay independent of the code paths they check.

use rand::Rng;

use crate::fields::kohonen::Dictionary;
use crate::kernels::Sampler;
use crate::{RunRng, SaError, EPS_ZERO};

/// Lower (type-1) empirical quantile of `values`, matching the `<=` indicator
/// convention of the quantile field.
pub fn empirical_quantile(values: &mut [f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let n = values.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    *values
        .select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).unwrap())
        .1
}

/// Empirical q-quantile of `n` fresh scores.
pub fn mc_quantile<X>(
    sampler: &impl Sampler<X>,
    score: impl Fn(&X) -> f64,
    q: f64,
    n: usize,
    rng: &mut RunRng,
) -> f64 {
    assert!(n >= 1);
    let mut values: Vec<f64> = (0..n).map(|_| score(&sampler.sample(rng))).collect();
    empirical_quantile(&mut values, q)
}

/// Reweighted-mean iteration for the geometric median. A sweep whose iterate
/// coincides with a sample drops that sample's weight term.
pub fn weiszfeld(samples: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<Vec<f64>, SaError> {
    if samples.is_empty() {
        return Err(SaError::EmptySamples);
    }
    let dim = samples[0].len();
    if samples.len() == 1 {
        return Ok(samples[0].clone());
    }
    // start from the coordinatewise mean
    let mut current = vec![0.0; dim];
    for s in samples {
        for (c, v) in current.iter_mut().zip(s) {
            *c += v;
        }
    }
    for c in &mut current {
        *c /= samples.len() as f64;
    }
    for _ in 0..max_iter {
        let mut numer = vec![0.0; dim];
        let mut denom = 0.0;
        for s in samples {
            let d: f64 = s
                .iter()
                .zip(&current)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d < EPS_ZERO {
                continue;
            }
            for (n, v) in numer.iter_mut().zip(s) {
                *n += v / d;
            }
            denom += 1.0 / d;
        }
        if denom == 0.0 {
            return Ok(current);
        }
        let next: Vec<f64> = numer.into_iter().map(|v| v / denom).collect();
        let step: f64 = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = current.iter().map(|c| c * c).sum::<f64>().sqrt().max(1.0);
        current = next;
        if step / scale < tol {
            return Ok(current);
        }
    }
    Err(SaError::NoConvergence)
}

/// Central finite differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_diff_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0);
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    grad
}

/// Batch Lloyd iteration. Empty cells are re-seeded at a random sample, which
/// keeps the codebook non-degenerate; distortion is non-increasing across
/// sweeps that trigger no re-seed.
pub fn lloyd(
    samples: &[Vec<f64>],
    n_codes: usize,
    iters: usize,
    rng: &mut RunRng,
) -> Result<Dictionary, SaError> {
    if samples.is_empty() {
        return Err(SaError::EmptySamples);
    }
    let dim = samples[0].len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(n_codes);
    let mut tries = 0;
    while centers.len() < n_codes {
        let c = samples[rng.gen_range(0..samples.len())].clone();
        if centers.iter().all(|e| sq_dist(e, &c) > 0.0) {
            centers.push(c);
        }
        tries += 1;
        if tries > 100 * n_codes + samples.len() {
            return Err(SaError::DegenerateDictionary);
        }
    }
    for _ in 0..iters {
        let mut sums = vec![vec![0.0; dim]; n_codes];
        let mut counts = vec![0usize; n_codes];
        for s in samples {
            let i = nearest(&centers, s);
            counts[i] += 1;
            for (acc, v) in sums[i].iter_mut().zip(s) {
                *acc += v;
            }
        }
        for i in 0..n_codes {
            if counts[i] == 0 {
                centers[i] = samples[rng.gen_range(0..samples.len())].clone();
            } else {
                for (c, acc) in centers[i].iter_mut().zip(&sums[i]) {
                    *c = acc / counts[i] as f64;
                }
            }
        }
    }
    let delta = samples
        .iter()
        .map(|s| s.iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(1.0);
    Dictionary::new(centers, delta, 0.0)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centers: &[Vec<f64>], s: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(c, s);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Inverse standard normal CDF (Acklam's rational approximation, refined with
/// one Halley step; absolute error well below 1e-9 on (0, 1)).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // one Halley refinement
    let e = 0.5 * erfc_scalar(-x / std::f64::consts::SQRT_2) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Standard normal CDF via `erfc`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc_scalar(-x / std::f64::consts::SQRT_2)
}

// erfc to near machine precision: Maclaurin series of erf for small arguments,
// the classical continued fraction (modified Lentz) for large ones.
fn erfc_scalar(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc_scalar(-x);
    }
    if x == 0.0 {
        return 1.0;
    }
    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    if x < 2.5 {
        // erf(x) = 2/sqrt(pi) sum (-1)^n x^{2n+1} / (n! (2n+1))
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 1.0f64;
        loop {
            term *= -x2 / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
            n += 1.0;
        }
        1.0 - two_over_sqrt_pi * sum
    } else {
        // erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let tiny = 1e-300;
        let mut f = x;
        let mut c = f;
        let mut d = 0.0f64;
        for k in 1..200 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// One-sample KS statistic against a CDF.
pub fn ks_one_sample(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).abs().max((f - i as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

pub fn ks_one_sample_critical(n: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}
