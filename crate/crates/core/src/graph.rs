//! Intrinsic and penalty graphs for LDA and MFA.
//!
//! Weight matrices are dense `N × N`, exactly symmetric, with a zero
//! diagonal: every pairwise sum in the embedding criterion runs over `i ≠ j`.

use nalgebra::{DMatrix, DVector};

use crate::data::{pairwise_sq_distances, Dataset};
use crate::error::{GeuError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    w: DMatrix<f64>,
}

impl WeightMatrix {
    /// Wrap a square matrix. The diagonal is cleared and the result must be
    /// exactly symmetric.
    pub fn new(mut w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(GeuError::DimensionMismatch(format!("weight matrix must be square, got {:?}", w.shape())));
        }
        w.fill_diagonal(0.0);
        if w != w.transpose() {
            return Err(GeuError::NotSymmetric { asymmetry: (&w - w.transpose()).amax(), scale: w.amax() });
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.w.nrows() == 0
    }

    /// `D_ii = Σ_{j≠i} W_ij`.
    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.w.row_iter().map(|r| r.sum()))
    }

    /// `L = D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.w.clone();
        for (i, d) in self.degrees().iter().enumerate() {
            l[(i, i)] = *d;
        }
        l
    }
}

/// Intrinsic/penalty graphs with their degree vectors and Laplacians.
#[derive(Debug, Clone)]
pub struct GraphPair {
    pub intrinsic: WeightMatrix,
    pub penalty: WeightMatrix,
    pub degrees: DVector<f64>,
    pub penalty_degrees: DVector<f64>,
    pub laplacian: DMatrix<f64>,
    pub penalty_laplacian: DMatrix<f64>,
}

impl GraphPair {
    pub fn new(intrinsic: WeightMatrix, penalty: WeightMatrix) -> Result<Self> {
        if intrinsic.len() != penalty.len() {
            return Err(GeuError::LengthMismatch { left: intrinsic.len(), right: penalty.len() });
        }
        Ok(Self {
            degrees: intrinsic.degrees(),
            penalty_degrees: penalty.degrees(),
            laplacian: intrinsic.laplacian(),
            penalty_laplacian: penalty.laplacian(),
            intrinsic,
            penalty,
        })
    }

    pub fn len(&self) -> usize {
        self.intrinsic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intrinsic.is_empty()
    }
}

fn class_sizes(labels: &[usize]) -> Vec<usize> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0; n_classes];
    for &c in labels {
        counts[c] += 1;
    }
    counts
}

/// LDA as a graph embedding: `W_ij = 1/N_c` within a class, and
/// `Wᵖ_ij = 1/N - 1/N_c` within a class, `1/N` across classes.
pub fn lda_graphs(labels: &[usize]) -> Result<GraphPair> {
    let n = labels.len();
    if n < 2 {
        return Err(GeuError::TooFewSamples { needed: 2, got: n });
    }
    let sizes = class_sizes(labels);
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(GeuError::SingleClass);
    }
    let inv_n = 1.0 / n as f64;
    let mut w = DMatrix::zeros(n, n);
    let mut wp = DMatrix::zeros(n, n);
    for i in 0..n {
        let inv_ci = 1.0 / sizes[labels[i]] as f64;
        for j in 0..n {
            if i == j {
                continue;
            }
            if labels[i] == labels[j] {
                w[(i, j)] = inv_ci;
                wp[(i, j)] = inv_n - inv_ci;
            } else {
                wp[(i, j)] = inv_n;
            }
        }
    }
    GraphPair::new(WeightMatrix::new(w)?, WeightMatrix::new(wp)?)
}

fn by_distance_then_index(dist: &[f64]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    move |&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b))
}

/// MFA graphs. The intrinsic graph links each sample with its `k1` nearest
/// same-class neighbours (symmetrized with OR). The penalty graph links the
/// `k2` closest between-class pairs of every class, again OR-combined.
///
/// Distance ties are broken by the smaller sample index.
pub fn mfa_graphs(x: &Dataset, k1: usize, k2: usize) -> Result<GraphPair> {
    let n = x.n_samples();
    if n < 2 {
        return Err(GeuError::TooFewSamples { needed: 2, got: n });
    }
    if k1 == 0 || k2 == 0 {
        return Err(GeuError::InvalidParameter("k1 and k2 must be positive".to_string()));
    }
    let labels = x.labels();
    let sizes = class_sizes(labels);
    let present: Vec<usize> = (0..sizes.len()).filter(|&c| sizes[c] > 0).collect();
    if present.len() < 2 {
        return Err(GeuError::SingleClass);
    }
    // Singleton classes have no same-class neighbours and simply get no
    // intrinsic edges; every other class must supply k1 neighbours.
    let smallest = present.iter().map(|&c| sizes[c]).filter(|&s| s > 1).min().unwrap_or(1);
    if k1 >= smallest {
        return Err(GeuError::KTooLarge { k: k1, limit: smallest - 1 });
    }
    let pair_limit = present.iter().map(|&c| sizes[c] * (n - sizes[c])).min().unwrap_or(0);
    if k2 > pair_limit {
        return Err(GeuError::KTooLarge { k: k2, limit: pair_limit });
    }

    let dist = pairwise_sq_distances(x.features());
    let mut w = DMatrix::zeros(n, n);
    for j in 0..n {
        let row = &dist[j * n..(j + 1) * n];
        let mut same: Vec<usize> = (0..n).filter(|&i| i != j && labels[i] == labels[j]).collect();
        same.sort_by(by_distance_then_index(row));
        for &i in same.iter().take(k1) {
            w[(i, j)] = 1.0;
            w[(j, i)] = 1.0;
        }
    }

    let mut wp = DMatrix::zeros(n, n);
    for &c in &present {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(sizes[c] * (n - sizes[c]));
        for i in (0..n).filter(|&i| labels[i] == c) {
            for j in (0..n).filter(|&j| labels[j] != c) {
                pairs.push((dist[i * n + j], i.min(j), i.max(j)));
            }
        }
        let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        };
        if k2 < pairs.len() {
            pairs.select_nth_unstable_by(k2, cmp);
            pairs.truncate(k2);
        }
        for &(_, i, j) in &pairs {
            wp[(i, j)] = 1.0;
            wp[(j, i)] = 1.0;
        }
    }
    GraphPair::new(WeightMatrix::new(w)?, WeightMatrix::new(wp)?)
}

/// `|Σ_{i≠j} (y_i - y_j)² W_ij - 2 yᵀ L y|`: zero up to roundoff for any graph.
pub fn graph_sum_identity_check(y: &DVector<f64>, g: &WeightMatrix) -> Result<f64> {
    let n = g.len();
    if y.len() != n {
        return Err(GeuError::LengthMismatch { left: y.len(), right: n });
    }
    let w = g.matrix();
    let mut pairwise = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairwise += (y[i] - y[j]).powi(2) * w[(i, j)];
            }
        }
    }
    let quad = (y.transpose() * g.laplacian() * y)[0];
    Ok((pairwise - 2.0 * quad).abs())
}
