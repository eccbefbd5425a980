//! Penalized 0-neighbor Kohonen quantization: competitive-learning field with a
//! pairwise repulsion term, plus the distortion and penalized Lyapunov
//! diagnostics. The penalty sums run over ordered pairs `i != j`, which makes
//! the field the exact negative gradient of the penalized Lyapunov function.

use crate::{Field, Param, SaError, EPS_ZERO};

/// A codebook of `N` pairwise-distinct points inside `ball(0, delta)` with the
/// repulsion strength `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    pub points: Vec<Vec<f64>>,
    pub delta: f64,
    pub lambda: f64,
}

impl Dictionary {
    pub fn new(points: Vec<Vec<f64>>, delta: f64, lambda: f64) -> Result<Self, SaError> {
        assert!(!points.is_empty());
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(SaError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        let dict = Dictionary {
            points,
            delta,
            lambda,
        };
        if dict.n_points() > 1 && dict.min_pairwise_dist() < EPS_ZERO {
            return Err(SaError::DegenerateDictionary);
        }
        Ok(dict)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn min_pairwise_dist(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                min = min.min(dist(&self.points[i], &self.points[j]));
            }
        }
        min
    }

    /// Rebuild a dictionary from a flattened parameter vector.
    pub fn from_param(theta: &Param, n_points: usize, dim: usize, delta: f64, lambda: f64) -> Result<Self, SaError> {
        if theta.dim() != n_points * dim {
            return Err(SaError::DimensionMismatch {
                expected: n_points * dim,
                got: theta.dim(),
            });
        }
        let points = theta
            .as_slice()
            .chunks(dim)
            .map(|c| c.to_vec())
            .collect();
        Dictionary::new(points, delta, lambda)
    }

    pub fn flatten(&self) -> Param {
        Param::new(self.points.iter().flatten().copied().collect()).expect("finite codebook")
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Index of the nearest codebook point; ties break toward the lowest index.
pub fn voronoi_index(dict: &Dictionary, u: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in dict.points.iter().enumerate() {
        let d = dist(p, u);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// The penalized field: block `i` is `-2 (theta^(i) - u)` on the winning cell
/// plus the repulsion `lambda * sum_{j != i} (theta^(i) - theta^(j)) / |.|^4`,
/// the exact negative gradient of [`penalized_lyap`]'s penalty.
pub fn kohonen_field(dict: &Dictionary, u: &[f64]) -> Result<Param, SaError> {
    if u.len() != dict.dim() {
        return Err(SaError::DimensionMismatch {
            expected: dict.dim(),
            got: u.len(),
        });
    }
    let n = dict.n_points();
    if n > 1 && dict.min_pairwise_dist() < EPS_ZERO {
        return Err(SaError::DegenerateDictionary);
    }
    let winner = voronoi_index(dict, u);
    let d = dict.dim();
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        let block = &mut out[i * d..(i + 1) * d];
        if i == winner {
            for (b, (p, x)) in block.iter_mut().zip(dict.points[i].iter().zip(u)) {
                *b = -2.0 * (p - x);
            }
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let r = dist(&dict.points[i], &dict.points[j]);
            let r4 = r.powi(4);
            for (b, (pi, pj)) in block
                .iter_mut()
                .zip(dict.points[i].iter().zip(&dict.points[j]))
            {
                *b += dict.lambda * (pi - pj) / r4;
            }
        }
    }
    Param::new(out)
}

/// Mean squared distance from each sample to its assigned codebook point.
pub fn distortion(dict: &Dictionary, samples: &[Vec<f64>]) -> Result<f64, SaError> {
    if samples.is_empty() {
        return Err(SaError::EmptySamples);
    }
    let mut sum = 0.0;
    for s in samples {
        let i = voronoi_index(dict, s);
        let d = dist(&dict.points[i], s);
        sum += d * d;
    }
    Ok(sum / samples.len() as f64)
}

/// `distortion + (lambda/4) * sum over ordered pairs i != j of |.|^{-2}`.
pub fn penalized_lyap(dict: &Dictionary, samples: &[Vec<f64>]) -> Result<f64, SaError> {
    let n = dict.n_points();
    if n > 1 && dict.min_pairwise_dist() < EPS_ZERO {
        return Err(SaError::DegenerateDictionary);
    }
    let mut penalty = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = dist(&dict.points[i], &dict.points[j]);
                penalty += 1.0 / (r * r);
            }
        }
    }
    Ok(distortion(dict, samples)? + dict.lambda / 4.0 * penalty)
}

/// [`Field`] adapter over a flattened codebook parameter.
#[derive(Clone, Copy, Debug)]
pub struct KohonenField {
    pub n_points: usize,
    pub dim: usize,
    pub delta: f64,
    pub lambda: f64,
}

impl Field<Vec<f64>> for KohonenField {
    fn eval(&self, theta: &Param, u: &Vec<f64>) -> Result<Param, SaError> {
        let dict = Dictionary::from_param(theta, self.n_points, self.dim, self.delta, self.lambda)?;
        kohonen_field(&dict, u)
    }
}
