//! Polynomial step schedules `gamma_n = gamma0 / (offset + n + 1)^beta` with an
//! index shift used after each truncation event.

use serde::{Deserialize, Serialize};

/// Step-size schedule. `beta` is restricted to `(1/2, 1]`: the theoretical
/// lower bound involves constants of the plugged-in field that are not
/// computable in general, while `beta > 1/2` is checkable and suffices for the
/// convergence regime the engine targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    gamma0: f64,
    beta: f64,
    offset: usize,
}

impl StepSchedule {
    /// Panics if `gamma0 <= 0` or `beta` is outside `(1/2, 1]`. Config-driven
    /// construction validates beforehand and reports field paths.
    pub fn new(gamma0: f64, beta: f64) -> Self {
        assert!(gamma0 > 0.0, "gamma0 must be positive");
        assert!(beta > 0.5 && beta <= 1.0, "beta must lie in (1/2, 1]");
        StepSchedule {
            gamma0,
            beta,
            offset: 0,
        }
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// `gamma0 / (offset + n + 1)^beta`.
    pub fn gamma_at(&self, n: usize) -> f64 {
        self.gamma0 / ((self.offset + n + 1) as f64).powf(self.beta)
    }

    /// The shifted schedule whose index starts `q` steps later.
    pub fn shift(&self, q: usize) -> StepSchedule {
        StepSchedule {
            offset: self.offset + q,
            ..*self
        }
    }
}
