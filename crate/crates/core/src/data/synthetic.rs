use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::error::{GeuError, Result};
use crate::rng::rng_from_seed;

/// Two isotropic Gaussian blobs in the plane centred at `(±separation/2, 0)`.
pub fn synthetic_two_class(n_per_class: usize, separation: f64, spread: f64, seed: u64) -> Result<Dataset> {
    synthetic_blobs(n_per_class, 2, separation, spread, seed)
}

/// Two isotropic Gaussian blobs in `dim` dimensions, separated along the
/// first axis. Class 0 rows come first.
pub fn synthetic_blobs(n_per_class: usize, dim: usize, separation: f64, spread: f64, seed: u64) -> Result<Dataset> {
    if n_per_class < 2 {
        return Err(GeuError::TooFewSamples { needed: 2, got: n_per_class });
    }
    if dim == 0 || !(spread >= 0.0) || !separation.is_finite() {
        return Err(GeuError::InvalidParameter(format!(
            "need dim >= 1, spread >= 0 and finite separation (dim {dim}, spread {spread}, separation {separation})"
        )));
    }
    let noise = Normal::new(0.0, spread).map_err(|e| GeuError::InvalidParameter(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let n = 2 * n_per_class;
    let mut x = DMatrix::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i / n_per_class;
        let centre = if class == 0 { -separation / 2.0 } else { separation / 2.0 };
        for j in 0..dim {
            let offset = if j == 0 { centre } else { 0.0 };
            x[(i, j)] = offset + noise.sample(&mut rng);
        }
        labels.push(class);
    }
    Dataset::new(x, labels)
}
