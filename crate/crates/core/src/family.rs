//! Concrete compact-set families. All families are nested by construction
//! (radii grow strictly, separation floors shrink strictly), so each `K_i`
//! lies in the interior of `K_{i+1}`.

use crate::{CompactFamily, Param};

/// Closed balls around the origin with geometrically growing radii:
/// `K_i = ball(0, radius0 * growth^i)`. In dimension one these are the
/// symmetric intervals `[-r_i, r_i]`.
#[derive(Clone, Copy, Debug)]
pub struct BallFamily {
    pub radius0: f64,
    pub growth: f64,
}

impl BallFamily {
    pub fn new(radius0: f64, growth: f64) -> Self {
        assert!(radius0 > 0.0 && growth > 1.0);
        BallFamily { radius0, growth }
    }

    pub fn radius(&self, index: usize) -> f64 {
        self.radius0 * self.growth.powi(index as i32)
    }
}

impl CompactFamily for BallFamily {
    fn contains(&self, index: usize, theta: &Param) -> bool {
        theta.norm() <= self.radius(index)
    }
}

/// Dictionaries with a minimum pairwise separation:
/// `K_i = { theta : min_{i != j} |theta^(i) - theta^(j)| >= 1/(i + q0) }`
/// intersected with per-point balls of radius `delta`. `q0 >= 1` keeps `K_0`
/// non-degenerate.
#[derive(Clone, Copy, Debug)]
pub struct KohonenFamily {
    pub n_points: usize,
    pub dim: usize,
    pub delta: f64,
    pub q0: usize,
}

impl KohonenFamily {
    pub fn new(n_points: usize, dim: usize, delta: f64, q0: usize) -> Self {
        assert!(n_points >= 1 && dim >= 1 && delta > 0.0 && q0 >= 1);
        KohonenFamily {
            n_points,
            dim,
            delta,
            q0,
        }
    }

    /// Smallest `q0` such that `anchor` (flattened points) lies in `K_0`.
    pub fn fitting_q0(points: &[Vec<f64>]) -> usize {
        let mut min_dist = f64::INFINITY;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(d);
            }
        }
        if !min_dist.is_finite() || min_dist <= 0.0 {
            return 1;
        }
        ((1.0 / min_dist).ceil() as usize).max(1)
    }

    pub fn separation(&self, index: usize) -> f64 {
        1.0 / (index + self.q0) as f64
    }
}

impl CompactFamily for KohonenFamily {
    fn contains(&self, index: usize, theta: &Param) -> bool {
        let coords = theta.as_slice();
        if coords.len() != self.n_points * self.dim {
            return false;
        }
        let point = |i: usize| &coords[i * self.dim..(i + 1) * self.dim];
        for i in 0..self.n_points {
            let norm: f64 = point(i).iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > self.delta {
                return false;
            }
        }
        let sep = self.separation(index);
        for i in 0..self.n_points {
            for j in (i + 1)..self.n_points {
                let d: f64 = point(i)
                    .iter()
                    .zip(point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d < sep {
                    return false;
                }
            }
        }
        true
    }
}

/// Product boxes for the composite cross-entropy iterate `(theta, sigma)`:
/// `|theta| <= theta_max0 * (1 + growth * i)` and every `sigma_l` in
/// `[-smax_i, -1/smax_i]` with `smax_i = smax0 * (1 + growth * i)`.
///
/// The bounds grow linearly rather than geometrically on purpose: the
/// importance weights driving the theta component are heavy-tailed, and a
/// slowly growing box guarantees that an outlier jump keeps escaping the
/// active set (and so resets to the anchor) instead of being absorbed once
/// the set has inflated past it.
#[derive(Clone, Copy, Debug)]
pub struct SaceFamily {
    pub dim: usize,
    pub theta_max0: f64,
    pub smax0: f64,
    pub growth: f64,
}

impl SaceFamily {
    pub fn new(dim: usize, theta_max0: f64, smax0: f64, growth: f64) -> Self {
        assert!(dim >= 1 && theta_max0 > 0.0 && smax0 > 1.0 && growth > 0.0);
        SaceFamily {
            dim,
            theta_max0,
            smax0,
            growth,
        }
    }
}

impl CompactFamily for SaceFamily {
    fn contains(&self, index: usize, theta: &Param) -> bool {
        let coords = theta.as_slice();
        if coords.len() != 1 + self.dim {
            return false;
        }
        let g = 1.0 + self.growth * index as f64;
        if coords[0].abs() > self.theta_max0 * g {
            return false;
        }
        let smax = self.smax0 * g;
        coords[1..]
            .iter()
            .all(|&s| s >= -smax && s <= -1.0 / smax)
    }
}
