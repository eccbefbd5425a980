//! Geometric median field: the unit vector from `theta` toward the
//! observation, and zero when the two coincide (within [`crate::EPS_ZERO`]).

use crate::{Field, Param, SaError, EPS_ZERO};

pub fn median_field(theta: &Param, x: &[f64]) -> Result<Param, SaError> {
    if x.len() != theta.dim() {
        return Err(SaError::DimensionMismatch {
            expected: theta.dim(),
            got: x.len(),
        });
    }
    let diff: Vec<f64> = x
        .iter()
        .zip(theta.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    let norm = diff.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm <= EPS_ZERO {
        return Ok(Param::zeros(theta.dim()));
    }
    Param::new(diff.into_iter().map(|c| c / norm).collect())
}

pub struct MedianField;

impl Field<Vec<f64>> for MedianField {
    fn eval(&self, theta: &Param, x: &Vec<f64>) -> Result<Param, SaError> {
        median_field(theta, x)
    }
}
