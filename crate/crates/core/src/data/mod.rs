//! Labeled datasets and everything that produces or reshapes them.

mod csv_io;
mod folds;
mod grid;
mod preprocess;
mod synthetic;

pub use csv_io::{load_csv, write_csv, ColumnRef, LoadOptions};
pub use folds::{kfold, stratified_subsample, write_folds_csv, FoldSplit};
pub use grid::{decision_grid, DecisionGrid, GridBounds};
pub use preprocess::{add_noise, zscore_fit_apply, Standardizer};
pub use synthetic::{synthetic_blobs, synthetic_two_class};

use nalgebra::DMatrix;

use crate::error::{GeuError, Result};

/// `N` samples of `D` features with class ids in `0..n_classes`.
///
/// Subsets keep the parent's class count, so ids stay comparable across
/// train/test splits even when a split happens to miss a class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    feature_names: Option<Vec<String>>,
    class_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(GeuError::LengthMismatch { left: features.nrows(), right: labels.len() });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            let n = features.nrows().max(1);
            return Err(GeuError::InvalidParameter(format!(
                "non-finite feature at sample {}, feature {}",
                pos % n,
                pos / n
            )));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Self { features, labels, n_classes, feature_names: None, class_names: None })
    }

    /// Same as [`Dataset::new`] but with an explicit class count (`>` every label).
    pub fn with_class_count(features: DMatrix<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let mut ds = Self::new(features, labels)?;
        if n_classes < ds.n_classes {
            return Err(GeuError::InvalidParameter(format!(
                "class count {n_classes} below largest label {}",
                ds.n_classes - 1
            )));
        }
        ds.n_classes = n_classes;
        Ok(ds)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(GeuError::LengthMismatch { left: names.len(), right: self.n_features() });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() < self.n_classes {
            return Err(GeuError::LengthMismatch { left: names.len(), right: self.n_classes });
        }
        self.n_classes = names.len();
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    /// Per-class sample counts, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }

    /// Number of classes with at least one sample.
    pub fn present_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    pub fn sample(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    /// Rows picked by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let features = DMatrix::from_fn(indices.len(), d, |r, c| self.features[(indices[r], c)]);
        Dataset {
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Same labels and names, new feature values of identical shape.
    pub fn with_features(&self, features: DMatrix<f64>) -> Result<Dataset> {
        if features.shape() != self.features.shape() {
            return Err(GeuError::ShapeMismatch { expected: self.features.shape(), got: features.shape() });
        }
        let mut out = Dataset::new(features, self.labels.clone())?;
        out.n_classes = self.n_classes;
        out.feature_names = self.feature_names.clone();
        out.class_names = self.class_names.clone();
        Ok(out)
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.n_samples().max(1) as f64;
        (0..self.n_features()).map(|j| self.features.column(j).sum() / n).collect()
    }
}

/// Squared Euclidean distances between all rows of `x`, computed from
/// explicit differences so equal inputs give bit-identical outputs.
pub(crate) fn pairwise_sq_distances(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows();
    let d = x.ncols();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..d).map(|j| x[(i, j)]).collect()).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, f64::NAN]);
        assert!(Dataset::new(x, vec![0, 1]).is_err());
    }

    #[test]
    fn subset_keeps_class_count() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let ds = Dataset::new(x, vec![0, 1, 2]).unwrap();
        let sub = ds.subset(&[2, 0]);
        assert_eq!(sub.n_classes(), 3);
        assert_eq!(sub.labels(), &[2, 0]);
        assert_eq!(sub.features()[(0, 0)], 3.0);
        assert_eq!(sub.present_classes(), 2);
    }
}
