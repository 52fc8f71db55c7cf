//! Brute-force k-nearest-neighbour classification.

use nalgebra::DMatrix;

use crate::error::{GeuError, Result};

#[derive(Debug, Clone)]
pub struct KnnModel {
    /// Row-major `N × dim`.
    points: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    k: usize,
}

impl KnnModel {
    pub fn new(train_points: &DMatrix<f64>, train_labels: Vec<usize>, k: usize) -> Result<Self> {
        let n = train_points.nrows();
        if n == 0 {
            return Err(GeuError::EmptyModel);
        }
        if train_labels.len() != n {
            return Err(GeuError::LengthMismatch { left: n, right: train_labels.len() });
        }
        if k == 0 || k > n {
            return Err(GeuError::KTooLarge { k, limit: n });
        }
        let dim = train_points.ncols();
        let points = (0..n).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| train_points[(i, j)]).collect();
        Ok(Self { points, dim, labels: train_labels, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, queries: &DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(self.predict_many_k(queries, &[self.k])?.remove(0))
    }

    /// Predictions for several neighbourhood sizes from one neighbour search.
    /// Every `k` must satisfy `1 <= k <= N`.
    pub fn predict_many_k(&self, queries: &DMatrix<f64>, ks: &[usize]) -> Result<Vec<Vec<usize>>> {
        if queries.ncols() != self.dim {
            return Err(GeuError::DimensionMismatch(format!(
                "k-NN model has dimension {}, queries have {}",
                self.dim,
                queries.ncols()
            )));
        }
        let n = self.len();
        if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > n) {
            return Err(GeuError::KTooLarge { k: bad, limit: n });
        }
        let kmax = ks.iter().copied().max().unwrap_or(0);
        let mut out = vec![Vec::with_capacity(queries.nrows()); ks.len()];
        let mut query = vec![0.0; self.dim];
        for q in 0..queries.nrows() {
            for (j, v) in query.iter_mut().enumerate() {
                *v = queries[(q, j)];
            }
            let dist: Vec<f64> = self
                .points
                .chunks_exact(self.dim.max(1))
                .take(n)
                .map(|p| p.iter().zip(&query).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            let neighbours = nearest_k(&dist, kmax);
            for (slot, &k) in ks.iter().enumerate() {
                out[slot].push(vote(&neighbours[..k], &dist, &self.labels));
            }
        }
        Ok(out)
    }
}

/// Indices of the `k` smallest distances, ordered by `(distance, index)`.
pub(crate) fn nearest_k(dist: &[f64], k: usize) -> Vec<usize> {
    let cmp = |a: &usize, b: &usize| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b));
    let mut idx: Vec<usize> = (0..dist.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k, cmp);
        idx.truncate(k);
    }
    idx.sort_by(cmp);
    idx
}

/// Majority vote; ties go to the label whose closest member is nearer,
/// then to the smaller label id.
pub(crate) fn vote(neighbours: &[usize], dist: &[f64], labels: &[usize]) -> usize {
    // (label, votes, closest distance); neighbours arrive sorted.
    let mut tally: Vec<(usize, usize, f64)> = Vec::new();
    for &i in neighbours {
        match tally.iter_mut().find(|t| t.0 == labels[i]) {
            Some(t) => t.1 += 1,
            None => tally.push((labels[i], 1, dist[i])),
        }
    }
    tally
        .into_iter()
        .min_by(|a, b| b.1.cmp(&a.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)))
        .map(|t| t.0)
        .expect("at least one neighbour")
}

/// k-NN votes from a precomputed row-major `queries × train` matrix of
/// squared distances, for several `k` at once.
pub fn predict_from_distances(dist: &[f64], train_labels: &[usize], ks: &[usize]) -> Result<Vec<Vec<usize>>> {
    let n = train_labels.len();
    if n == 0 {
        return Err(GeuError::EmptyModel);
    }
    if dist.len() % n != 0 {
        return Err(GeuError::LengthMismatch { left: dist.len(), right: n });
    }
    if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(GeuError::KTooLarge { k: bad, limit: n });
    }
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let mut out = vec![Vec::with_capacity(dist.len() / n); ks.len()];
    for row in dist.chunks_exact(n) {
        let neighbours = nearest_k(row, kmax);
        for (slot, &k) in ks.iter().enumerate() {
            out[slot].push(vote(&neighbours[..k], row, train_labels));
        }
    }
    Ok(out)
}

pub fn knn_predict(model: &KnnModel, queries: &DMatrix<f64>) -> Result<Vec<usize>> {
    model.predict(queries)
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(GeuError::LengthMismatch { left: predicted.len(), right: truth.len() });
    }
    if predicted.is_empty() {
        return Err(GeuError::TooFewSamples { needed: 1, got: 0 });
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predicted.len() as f64)
}
