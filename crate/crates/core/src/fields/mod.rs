//! Concrete mean fields and their Lyapunov diagnostics.

pub mod kohonen;
pub mod median;
pub mod quantile;

pub use kohonen::{distortion, kohonen_field, penalized_lyap, voronoi_index, Dictionary, KohonenField};
pub use median::{median_field, MedianField};
pub use quantile::{quantile_field, quantile_lyap_deriv, QuantileField};
