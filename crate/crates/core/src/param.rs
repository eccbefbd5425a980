use serde::{Deserialize, Serialize};

use crate::SaError;

/// Dense real parameter vector, the SA iterate. Every coordinate is finite and
/// the length is fixed for the duration of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param(Vec<f64>);

impl Param {
    pub fn new(coords: Vec<f64>) -> Result<Self, SaError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(SaError::NonFiniteField);
        }
        Ok(Param(coords))
    }

    /// All-zero parameter of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Param(vec![0.0; dim])
    }

    pub fn scalar(v: f64) -> Self {
        Param(vec![v])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `self + rho * delta`, failing if the result is non-finite or dimensions differ.
    pub fn step_by(&self, rho: f64, delta: &Param) -> Result<Param, SaError> {
        if delta.dim() != self.dim() {
            return Err(SaError::DimensionMismatch {
                expected: self.dim(),
                got: delta.dim(),
            });
        }
        let coords: Vec<f64> = self
            .0
            .iter()
            .zip(&delta.0)
            .map(|(a, b)| a + rho * b)
            .collect();
        Param::new(coords)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Param) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl std::ops::Index<usize> for Param {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
