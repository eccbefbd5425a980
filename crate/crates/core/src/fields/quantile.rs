//! Streaming quantile field: `H(theta, x) = q - 1{phi(x) <= theta}`.
//! The indicator uses `<=`, so a score sitting exactly on the boundary counts
//! as below.

use crate::{Field, Param, SaError};

/// `q - 1{score <= theta}`.
pub fn quantile_field(q: f64, score: f64, theta: f64) -> f64 {
    q - if score <= theta { 1.0 } else { 0.0 }
}

/// Monte Carlo estimate of the Lyapunov derivative
/// `w'(theta) = P(phi(Y) <= theta) - q` from stationary score samples.
pub fn quantile_lyap_deriv(q: f64, theta: f64, samples: &[f64]) -> Result<f64, SaError> {
    if samples.is_empty() {
        return Err(SaError::EmptySamples);
    }
    let below = samples.iter().filter(|&&s| s <= theta).count();
    Ok(below as f64 / samples.len() as f64 - q)
}

/// Field over an arbitrary chain state with a pluggable score function.
pub struct QuantileField<X, S: Fn(&X) -> f64> {
    q: f64,
    score: S,
    _marker: std::marker::PhantomData<fn(&X)>,
}

impl<X, S: Fn(&X) -> f64> QuantileField<X, S> {
    pub fn new(q: f64, score: S) -> Self {
        assert!(q > 0.0 && q < 1.0, "q must lie in (0, 1)");
        QuantileField {
            q,
            score,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<X, S: Fn(&X) -> f64> Field<X> for QuantileField<X, S> {
    fn eval(&self, theta: &Param, x: &X) -> Result<Param, SaError> {
        if theta.dim() != 1 {
            return Err(SaError::DimensionMismatch {
                expected: 1,
                got: theta.dim(),
            });
        }
        Param::new(vec![quantile_field(self.q, (self.score)(x), theta[0])])
    }
}
