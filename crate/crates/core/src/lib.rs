//! Truncation-stabilized stochastic approximation over controlled Markov chains.
//!
//! The engine iterates `theta <- theta + gamma * H(theta, x)` where `x` is driven
//! by a parameter-dependent Markov kernel, and stabilizes the iterate by
//! restarting from an anchor on a growing family of compact sets. Concrete mean
//! fields cover streaming quantiles, extreme quantiles via cross-entropy
//! importance sampling, the geometric median and penalized vector quantization.

pub mod bridge;
pub mod config;
pub mod error;
pub mod family;
pub mod fields;
pub mod kernels;
pub mod oracles;
pub mod param;
pub mod rng;
pub mod runner;
pub mod sace;
pub mod schedule;
pub mod stabilizer;
pub mod trace;

pub use error::SaError;
pub use param::Param;
pub use rng::RunRng;
pub use schedule::StepSchedule;
pub use stabilizer::{run_sa_until_exit, run_stable_sa, sa_step, SaExit, StableOptions};
pub use trace::{Trace, TraceRecord};

/// Norm threshold below which two points are treated as coincident.
pub const EPS_ZERO: f64 = 1e-12;

/// Interface for mean-field evaluators `H(theta, x)`.
pub trait Field<X> {
    fn eval(&self, theta: &Param, x: &X) -> Result<Param, SaError>;
}

/// Interface for controlled transition kernels `P_theta(x, .)`.
pub trait Kernel<X> {
    fn step(&self, theta: &Param, x: &X, rng: &mut RunRng) -> X;
}

/// A nested family of compact sets `K_0 ⊆ K_1 ⊆ ...` covering the parameter space.
pub trait CompactFamily {
    fn contains(&self, index: usize, theta: &Param) -> bool;
}

impl<F: Fn(usize, &Param) -> bool> CompactFamily for F {
    fn contains(&self, index: usize, theta: &Param) -> bool {
        self(index, theta)
    }
}
