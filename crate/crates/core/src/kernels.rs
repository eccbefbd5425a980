//! Stock Markov kernels for the experiments: i.i.d. refresh, Gaussian AR(1)
//! and random-walk Metropolis with boundary reflection on a bounded support.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Kernel, Param, RunRng};

/// Draw-fresh sampler interface used by [`IidKernel`] and the oracles.
pub trait Sampler<X> {
    fn sample(&self, rng: &mut RunRng) -> X;
}

#[derive(Clone, Copy, Debug)]
pub struct PointMass(pub f64);

impl Sampler<f64> for PointMass {
    fn sample(&self, _rng: &mut RunRng) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NormalSampler {
    pub mean: f64,
    pub sd: f64,
}

impl Sampler<f64> for NormalSampler {
    fn sample(&self, rng: &mut RunRng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * z
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Uniform01;

impl Sampler<f64> for Uniform01 {
    fn sample(&self, rng: &mut RunRng) -> f64 {
        rng.gen()
    }
}

/// Isotropic normal in `dim` dimensions.
#[derive(Clone, Copy, Debug)]
pub struct SphericalNormal {
    pub dim: usize,
    pub sd: f64,
}

impl Sampler<Vec<f64>> for SphericalNormal {
    fn sample(&self, rng: &mut RunRng) -> Vec<f64> {
        (0..self.dim)
            .map(|_| self.sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

/// Equal-weight mixture of isotropic normals around the given centers.
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    pub centers: Vec<Vec<f64>>,
    pub sd: f64,
}

impl Sampler<Vec<f64>> for GaussianMixture {
    fn sample(&self, rng: &mut RunRng) -> Vec<f64> {
        let k = rng.gen_range(0..self.centers.len());
        self.centers[k]
            .iter()
            .map(|c| c + self.sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

/// Product uniform on `[0,1]^dim`.
#[derive(Clone, Copy, Debug)]
pub struct UniformCube {
    pub dim: usize,
}

impl Sampler<Vec<f64>> for UniformCube {
    fn sample(&self, rng: &mut RunRng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen()).collect()
    }
}

/// Uniform on the closed ball of the given radius (rejection from the cube).
#[derive(Clone, Copy, Debug)]
pub struct UniformBall {
    pub dim: usize,
    pub radius: f64,
}

impl Sampler<Vec<f64>> for UniformBall {
    fn sample(&self, rng: &mut RunRng) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..self.dim)
                .map(|_| self.radius * (2.0 * rng.gen::<f64>() - 1.0))
                .collect();
            if x.iter().map(|c| c * c).sum::<f64>() <= self.radius * self.radius {
                return x;
            }
        }
    }
}

/// `P_theta(x, .) = pi(.)`: the chain refreshes independently of both the
/// state and the parameter.
#[derive(Clone, Debug)]
pub struct IidKernel<S> {
    sampler: S,
}

impl<S> IidKernel<S> {
    pub fn new(sampler: S) -> Self {
        IidKernel { sampler }
    }
}

impl<X, S: Sampler<X>> Kernel<X> for IidKernel<S> {
    fn step(&self, _theta: &Param, _x: &X, rng: &mut RunRng) -> X {
        self.sampler.sample(rng)
    }
}

/// `x' = rho x + sigma eps` componentwise, stationary `N(0, sigma^2/(1-rho^2))`.
pub fn ar1_step(rho: f64, sigma: f64, x: &[f64], rng: &mut RunRng) -> Vec<f64> {
    debug_assert!(rho.abs() < 1.0);
    x.iter()
        .map(|&xi| rho * xi + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct Ar1Kernel {
    pub rho: f64,
    pub sigma: f64,
}

impl Kernel<f64> for Ar1Kernel {
    fn step(&self, _theta: &Param, x: &f64, rng: &mut RunRng) -> f64 {
        ar1_step(self.rho, self.sigma, &[*x], rng)[0]
    }
}

/// Random-walk Metropolis on a target supported inside `[-delta, delta]^dim`.
/// Proposals are Gaussian and folded back into the box by triangle reflection,
/// which keeps the proposal symmetric; the Metropolis ratio then handles the
/// target density (zero outside its support, so the chain never leaves it).
#[derive(Clone)]
pub struct ReflectedRwmKernel {
    pub delta: f64,
    pub scale: f64,
    log_density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl ReflectedRwmKernel {
    pub fn new(
        delta: f64,
        scale: f64,
        log_density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(delta > 0.0 && scale > 0.0);
        ReflectedRwmKernel {
            delta,
            scale,
            log_density: Arc::new(log_density),
        }
    }

    /// Uniform target on the ball of radius `delta`.
    pub fn uniform_ball(delta: f64, scale: f64) -> Self {
        let d2 = delta * delta;
        Self::new(delta, scale, move |x: &[f64]| {
            if x.iter().map(|c| c * c).sum::<f64>() <= d2 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    /// Uniform target on `[0,1]^dim` (inside the enclosing box of radius 1).
    pub fn uniform_unit_cube(scale: f64) -> Self {
        Self::new(1.0, scale, move |x: &[f64]| {
            if x.iter().all(|&c| (0.0..=1.0).contains(&c)) {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    fn fold(&self, t: f64) -> f64 {
        let d = self.delta;
        let r = (t + d).rem_euclid(4.0 * d);
        if r <= 2.0 * d {
            r - d
        } else {
            3.0 * d - r
        }
    }
}

impl Kernel<Vec<f64>> for ReflectedRwmKernel {
    fn step(&self, _theta: &Param, x: &Vec<f64>, rng: &mut RunRng) -> Vec<f64> {
        let proposal: Vec<f64> = x
            .iter()
            .map(|&xi| self.fold(xi + self.scale * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let log_ratio = (self.log_density)(&proposal) - (self.log_density)(x);
        if log_ratio >= 0.0 || rng.gen::<f64>() < log_ratio.exp() {
            proposal
        } else {
            x.clone()
        }
    }
}
