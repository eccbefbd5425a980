//! Stochastic-approximation cross-entropy for extreme quantiles: couples the
//! quantile iterate with a tilted Beta-product importance distribution whose
//! natural parameter is driven by sufficient statistics of a Gibbs chain on
//! the truncated support.

use std::cell::Cell;

use rand::Rng;

use crate::bridge::BridgeNetwork;
use crate::kernels::Sampler;
use crate::{Field, Kernel, Param, RunRng, SaError, EPS_ZERO};

/// Importance weights above this cap are clipped; clip events are counted and
/// reported in the run summary.
pub const WEIGHT_CLIP: f64 = 1e12;

/// Beta(nu_l, 1) product family on the unit cube in its canonical exponential
/// form: sufficient statistic `S(u) = (ln u_l)`, log-partition
/// `B(nu) = sum ln nu_l`, and maximizer `nu_hat(s)_l = -1/s_l`.
#[derive(Clone, Copy, Debug)]
pub struct BetaProductFamily {
    pub dim: usize,
}

impl BetaProductFamily {
    pub fn sufficient_stat(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&v| v.ln()).collect()
    }

    pub fn log_partition(&self, nu: &[f64]) -> f64 {
        nu.iter().map(|v| v.ln()).sum()
    }
}

/// `nu_l = -1/s_l`, defined only for componentwise-negative statistics.
pub fn nu_hat(s: &[f64]) -> Result<Vec<f64>, SaError> {
    if s.iter().any(|&v| v >= 0.0) {
        return Err(SaError::NonNegativeSufficientStat);
    }
    Ok(s.iter().map(|&v| -1.0 / v).collect())
}

/// Density ratio `p(z) / g_nu(z) = 1 / prod nu_l z_l^{nu_l - 1}` for the
/// uniform nominal law.
pub fn importance_weight(z: &[f64], nu: &[f64]) -> Result<f64, SaError> {
    if z.iter().any(|&v| v <= EPS_ZERO) {
        return Err(SaError::DegenerateDraw);
    }
    Ok((-log_density_ratio(z, nu)).exp())
}

/// `ln g_nu(z) - ln p(z) = sum (ln nu_l + (nu_l - 1) ln z_l)`.
fn log_density_ratio(z: &[f64], nu: &[f64]) -> f64 {
    z.iter()
        .zip(nu)
        .map(|(&zl, &nl)| nl.ln() + (nl - 1.0) * zl.ln())
        .sum()
}

/// Inverse-CDF draw from the Beta(nu_l, 1) product: `U^{1/nu_l}` per component.
pub fn sample_beta_product(nu: &[f64], rng: &mut RunRng) -> Vec<f64> {
    nu.iter()
        .map(|&nl| rng.gen::<f64>().powf(1.0 / nl))
        .collect()
}

/// The composite iterate of the cross-entropy loop.
#[derive(Clone, Debug, PartialEq)]
pub struct SaceState {
    pub theta: f64,
    pub sigma: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub n: usize,
}

/// One coupled update: draw `y' ~ Q_theta(y, .)` and `z' ~ g_{nu_hat(sigma)}`,
/// then move theta by the weighted tail indicator and sigma toward `S(y')`,
/// both with the same step.
pub fn sace_step(
    state: &SaceState,
    q: f64,
    net: &BridgeNetwork,
    step: f64,
    rng: &mut RunRng,
) -> Result<SaceState, SaError> {
    let nu = nu_hat(&state.sigma)?;
    let mut y = state.y.clone();
    net.sweep_relaxed(state.theta, &mut y, rng);
    let z = sample_beta_product(&nu, rng);
    let weight = importance_weight(&z, &nu)?.min(WEIGHT_CLIP);
    let indicator = if net.phi(&z) < state.theta { 1.0 } else { 0.0 };
    let theta = state.theta + step * (q - indicator * weight);
    let fam = BetaProductFamily { dim: net.dim() };
    let s_y = fam.sufficient_stat(&y);
    let sigma: Vec<f64> = state
        .sigma
        .iter()
        .zip(&s_y)
        .map(|(&s, &sy)| (1.0 - step) * s + step * sy)
        .collect();
    nu_hat(&sigma)?;
    Ok(SaceState {
        theta,
        sigma,
        y,
        z,
        n: state.n + 1,
    })
}

/// Chain state of the SA form of the cross-entropy loop.
#[derive(Clone, Debug, PartialEq)]
pub struct SaceChain {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

/// Controlled kernel: the Gibbs chain tracks the moving threshold while the
/// importance draw refreshes from the current tilted distribution. The sweep
/// tolerates the one-step lag where `phi(y)` sits just below the freshly
/// updated threshold.
#[derive(Clone, Debug)]
pub struct SaceKernel {
    pub net: BridgeNetwork,
}

impl Kernel<SaceChain> for SaceKernel {
    fn step(&self, theta: &Param, x: &SaceChain, rng: &mut RunRng) -> SaceChain {
        let coords = theta.as_slice();
        let threshold = coords[0];
        let sigma = &coords[1..];
        let mut y = x.y.clone();
        self.net.sweep_relaxed(threshold, &mut y, rng);
        let nu: Vec<f64> = sigma.iter().map(|&s| -1.0 / s.min(-EPS_ZERO)).collect();
        let z = sample_beta_product(&nu, rng);
        SaceChain { y, z }
    }
}

/// Field of the composite iterate `(theta, sigma)`:
/// `[(q - 1) + 1{phi(z) >= theta} w(z); S(y) - sigma]`.
///
/// The theta component is the complement form `q - 1{phi(z) < theta} w(z)`
/// plus the mean-zero control variate `w(z) - 1` (the weight is a normalized
/// density ratio, so `E_g[w] = 1` for every `nu`). Both have the same mean
/// field, `q - P(phi(U) < theta)`, but the complement form carries the weight
/// on the event the tilt pushes mass *away* from, where `w` is heavy-tailed
/// with tail index `nu/(nu - 1)`: its empirical mean never stabilizes once
/// the tilt is strong. On the tail event the weight is bounded by the
/// geometry of the support, so the control-variate form has finite variance
/// and the iterate actually settles at the quantile.
#[derive(Debug)]
pub struct SaceField {
    pub q: f64,
    pub net: BridgeNetwork,
    clip_events: Cell<u64>,
}

impl SaceField {
    pub fn new(q: f64, net: BridgeNetwork) -> Self {
        assert!(q > 0.0 && q < 1.0);
        SaceField {
            q,
            net,
            clip_events: Cell::new(0),
        }
    }

    pub fn clip_events(&self) -> u64 {
        self.clip_events.get()
    }
}

impl Field<SaceChain> for SaceField {
    fn eval(&self, theta: &Param, x: &SaceChain) -> Result<Param, SaError> {
        let coords = theta.as_slice();
        let d = self.net.dim();
        if coords.len() != 1 + d {
            return Err(SaError::DimensionMismatch {
                expected: 1 + d,
                got: coords.len(),
            });
        }
        let threshold = coords[0];
        let sigma = &coords[1..];
        let nu = nu_hat(sigma)?;
        let mut out = Vec::with_capacity(1 + d);
        let in_tail = self.net.phi(&x.z) >= threshold;
        let head = if in_tail {
            let log_w = -log_density_ratio(&x.z, &nu);
            let weight = if log_w > WEIGHT_CLIP.ln() {
                self.clip_events.set(self.clip_events.get() + 1);
                WEIGHT_CLIP
            } else {
                log_w.exp()
            };
            self.q - 1.0 + weight
        } else {
            self.q - 1.0
        };
        out.push(head);
        for (&s, &yl) in sigma.iter().zip(&x.y) {
            out.push(yl.ln() - s);
        }
        Param::new(out)
    }
}

/// Pilot initialization: `theta_0` is the empirical q-quantile of uniform
/// score draws, `sigma_0` the mean sufficient statistic over pilot draws in
/// the tail `phi >= theta_0`.
pub fn pilot_init(net: &BridgeNetwork, q: f64, rng: &mut RunRng) -> (f64, Vec<f64>) {
    let cube = crate::kernels::UniformCube { dim: net.dim() };
    let mut scores: Vec<f64> = (0..1000).map(|_| net.phi(&cube.sample(rng))).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((q * scores.len() as f64).ceil() as usize).clamp(1, scores.len()) - 1;
    let theta0 = scores[idx];

    let fam = BetaProductFamily { dim: net.dim() };
    let mut sum = vec![0.0; net.dim()];
    let mut accepted = 0usize;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..500_000 {
        let u = cube.sample(rng);
        let score = net.phi(&u);
        if score >= theta0 {
            for (acc, s) in sum.iter_mut().zip(fam.sufficient_stat(&u)) {
                *acc += s;
            }
            accepted += 1;
            if accepted >= 100 {
                break;
            }
        } else if accepted == 0 && best.len() < 100 {
            best.push((score, u));
        }
    }
    if accepted == 0 {
        // fall back to the highest-scoring pilot draws
        best.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for (_, u) in best.iter().take(100) {
            for (acc, s) in sum.iter_mut().zip(fam.sufficient_stat(u)) {
                *acc += s;
            }
            accepted += 1;
        }
    }
    let sigma0: Vec<f64> = sum.iter().map(|s| s / accepted.max(1) as f64).collect();
    (theta0, sigma0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn nu_hat_examples() {
        assert_eq!(nu_hat(&[-1.0, -1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(nu_hat(&[-2.0, -4.0]).unwrap(), vec![0.5, 0.25]);
        assert_eq!(
            nu_hat(&[0.0, -1.0]),
            Err(SaError::NonNegativeSufficientStat)
        );
    }

    #[test]
    fn importance_weight_examples() {
        assert!((importance_weight(&[0.3, 0.9], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((importance_weight(&[0.5], &[2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((importance_weight(&[0.25], &[2.0]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            importance_weight(&[0.0], &[2.0]),
            Err(SaError::DegenerateDraw)
        );
    }

    #[test]
    fn beta_product_inverse_cdf() {
        // the draw is the square root of the underlying uniform when nu = 2
        let mut rng = rng::stream(0, "beta");
        let u: f64 = {
            let mut probe = rng.clone();
            probe.gen::<f64>()
        };
        let z = sample_beta_product(&[2.0], &mut rng);
        assert!((z[0] - u.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn beta_mean_matches_closed_form() {
        let mut rng = rng::stream(5, "beta");
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_beta_product(&[2.0], &mut rng)[0];
        }
        let mean = sum / n as f64;
        // Beta(2,1) has mean 2/3, sd ~ 0.236
        let se = 0.236 / (n as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn beta_nu_one_is_uniform() {
        let mut rng = rng::stream(6, "beta");
        let n = 100_000usize;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_beta_product(&[1.0], &mut rng)[0]).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let fi = (i + 1) as f64 / n as f64;
                (fi - x).abs().max((x - i as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.628 / (n as f64).sqrt(), "ks {ks}");
    }

    #[test]
    fn sace_step_examples() {
        let net = BridgeNetwork::default_bridge();
        let mut rng = rng::stream(1, "sace");
        let state = SaceState {
            theta: 0.5,
            sigma: vec![-1.0; 5],
            y: vec![1.0; 5],
            z: vec![0.5; 5],
            n: 0,
        };
        // zero step: iterate unchanged, chain redrawn
        let s0 = sace_step(&state, 0.9, &net, 0.0, &mut rng).unwrap();
        assert_eq!(s0.theta, state.theta);
        assert_eq!(s0.sigma, state.sigma);
        assert_ne!(s0.y, state.y);
        // full step: sigma jumps to S(y')
        let s1 = sace_step(&state, 0.9, &net, 1.0, &mut rng).unwrap();
        for (s, y) in s1.sigma.iter().zip(&s1.y) {
            assert!((s - y.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn sace_step_tail_draw_moves_by_q_step() {
        // theta far below any draw: the indicator vanishes and theta moves by
        // step * q exactly.
        let net = BridgeNetwork::default_bridge();
        let mut rng = rng::stream(2, "sace");
        let state = SaceState {
            theta: -5.0,
            sigma: vec![-1.0; 5],
            y: vec![1.0; 5],
            z: vec![0.5; 5],
            n: 3,
        };
        let s = sace_step(&state, 0.99, &net, 0.1, &mut rng).unwrap();
        assert!((s.theta - (-5.0 + 0.1 * 0.99)).abs() < 1e-12);
        assert_eq!(s.n, 4);
    }

    #[test]
    fn sigma_stays_negative_over_long_runs() {
        let net = BridgeNetwork::default_bridge();
        let mut rng = rng::stream(3, "sace");
        let (theta0, sigma0) = pilot_init(&net, 0.9, &mut rng);
        let mut state = SaceState {
            theta: theta0,
            sigma: sigma0,
            y: vec![1.0; 5],
            z: vec![0.5; 5],
            n: 0,
        };
        for n in 1..=20_000 {
            let step = 1.0 / (n as f64 + 1.0).powf(0.6);
            state = sace_step(&state, 0.9, &net, step, &mut rng).unwrap();
            assert!(state.sigma.iter().all(|&s| s < 0.0));
        }
    }

    #[test]
    fn field_clips_extreme_weights() {
        let net = BridgeNetwork::default_bridge();
        let field = SaceField::new(0.99, net);
        // threshold below zero keeps the draw in the tail; nu = 10 > 1 and a
        // microscopic z component blow the weight past the cap
        let theta = Param::new(vec![-1.0, -0.1, -0.1, -0.1, -0.1, -0.1]).unwrap();
        let x = SaceChain {
            y: vec![0.5; 5],
            z: vec![1e-40, 0.5, 0.5, 0.5, 0.5],
        };
        let h = field.eval(&theta, &x).unwrap();
        assert_eq!(field.clip_events(), 1);
        assert!((h[0] - (0.99 - 1.0 + WEIGHT_CLIP)).abs() < 1.0);
    }

    #[test]
    fn pilot_init_gives_valid_state() {
        let net = BridgeNetwork::default_bridge();
        let mut rng = rng::stream(4, "pilot");
        let (theta0, sigma0) = pilot_init(&net, 0.999, &mut rng);
        assert!(theta0 > 0.0 && theta0 < 2.0);
        assert!(sigma0.iter().all(|&s| s < 0.0));
        assert!(nu_hat(&sigma0).is_ok());
    }
}
