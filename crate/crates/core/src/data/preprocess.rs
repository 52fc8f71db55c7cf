use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::error::{GeuError, Result};
use crate::rng::rng_from_seed;

/// Per-feature affine map `(x - shift) / scale` fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation per feature. Constant features
    /// get shift 0 and scale 1, so they pass through unchanged.
    pub fn fit(train: &Dataset) -> Self {
        let mean = train.mean();
        let std = column_std(train.features(), &mean);
        let (shift, scale) = mean
            .iter()
            .zip(&std)
            .map(|(&m, &s)| if s > 0.0 { (m, s) } else { (0.0, 1.0) })
            .unzip();
        Self { shift, scale }
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.n_features() != self.shift.len() {
            return Err(GeuError::LengthMismatch { left: ds.n_features(), right: self.shift.len() });
        }
        let x = ds.features();
        let z = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.shift[j]) / self.scale[j]);
        ds.with_features(z)
    }
}

pub(crate) fn column_std(x: &DMatrix<f64>, mean: &[f64]) -> Vec<f64> {
    let n = x.nrows().max(1) as f64;
    (0..x.ncols())
        .map(|j| (x.column(j).iter().map(|v| (v - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect()
}

/// Fit z-scoring on `train` and apply the same statistics to every dataset.
pub fn zscore_fit_apply(train: &Dataset, others: &[&Dataset]) -> Result<(Dataset, Vec<Dataset>, Standardizer)> {
    if train.n_samples() == 0 {
        return Err(GeuError::TooFewSamples { needed: 1, got: 0 });
    }
    let st = Standardizer::fit(train);
    let train_z = st.apply(train)?;
    let others_z = others.iter().map(|o| st.apply(o)).collect::<Result<Vec<_>>>()?;
    Ok((train_z, others_z, st))
}

/// Add zero-mean Gaussian noise with per-feature std `level · s_j`, where `s_j`
/// is that feature's population std in `x`.
pub fn add_noise(x: &Dataset, level: f64, seed: u64) -> Result<Dataset> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(GeuError::InvalidParameter(format!("noise level must be >= 0, got {level}")));
    }
    if level == 0.0 {
        return Ok(x.clone());
    }
    let feats = x.features();
    let std = column_std(feats, &x.mean());
    let mut rng = rng_from_seed(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut noisy = feats.clone();
    // Row-major draw order, independent of storage layout.
    for i in 0..feats.nrows() {
        for j in 0..feats.ncols() {
            noisy[(i, j)] += level * std[j] * unit.sample(&mut rng);
        }
    }
    x.with_features(noisy)
}
