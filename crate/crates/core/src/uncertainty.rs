//! Per-sample Gaussian uncertainty with diagonal covariance.
//!
//! The estimators place `Σ_i = σ · diag(x_i - x_i*)²`, where `x_i*` is the
//! nearest other sample (unsupervised) or the nearest other sample of the
//! same class (supervised).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::data::{pairwise_sq_distances, Dataset};
use crate::error::{GeuError, Result};

/// Factor of the automatic floor, relative to the median nonzero variance.
pub const AUTO_FLOOR_FACTOR: f64 = 1e-8;

/// Lower bound applied to every variance entry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum VarianceFloor {
    /// `1e-8 ·` median of the nonzero scaled variances (0 when all vanish).
    #[default]
    Auto,
    Value(f64),
}

/// Diagonal covariances, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyModel {
    diag_covs: DMatrix<f64>,
    sigma_scale: f64,
    floor: f64,
}

impl UncertaintyModel {
    pub fn diag_covs(&self) -> &DMatrix<f64> {
        &self.diag_covs
    }

    pub fn sigma_scale(&self) -> f64 {
        self.sigma_scale
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn n_samples(&self) -> usize {
        self.diag_covs.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.diag_covs.ncols()
    }

    /// All-zero model: every sample is a point mass.
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { diag_covs: DMatrix::zeros(n, d), sigma_scale: 0.0, floor: 0.0 }
    }

    /// Multiply every variance (and the floor and scale) by `factor >= 0`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) || !factor.is_finite() {
            return Err(GeuError::InvalidParameter(format!("scale factor must be >= 0, got {factor}")));
        }
        Ok(Self {
            diag_covs: &self.diag_covs * factor,
            sigma_scale: self.sigma_scale * factor,
            floor: self.floor * factor,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| GeuError::io(path, e);
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
        let header: Vec<String> = (0..self.n_features()).map(|j| format!("var_{j}")).collect();
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for row in self.diag_covs.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", cells.join(",")).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Read a `var_0..var_{D-1}` file; the result is an explicit model.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| GeuError::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let width = reader
            .headers()
            .map_err(|e| GeuError::ParseError { line: 1, message: e.to_string() })?
            .len();
        let mut values = Vec::new();
        let mut rows = 0;
        for record in reader.records() {
            let record = record.map_err(|e| GeuError::ParseError {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != width {
                return Err(GeuError::ParseError { line, message: format!("expected {width} fields") });
            }
            for (j, cell) in record.iter().enumerate() {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| GeuError::NonNumericFeature { line, column: format!("var_{j}") })?;
                values.push(v);
            }
            rows += 1;
        }
        from_explicit(DMatrix::from_row_slice(rows, width, &values))
    }
}

fn nearest_partner(dist: &[f64], n: usize, i: usize, admissible: impl Fn(usize) -> bool) -> Option<usize> {
    let row = &dist[i * n..(i + 1) * n];
    (0..n)
        .filter(|&j| j != i && admissible(j))
        .min_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)))
}

fn check_scale(sigma_scale: f64) -> Result<()> {
    if !(sigma_scale >= 0.0) || !sigma_scale.is_finite() {
        return Err(GeuError::InvalidParameter(format!("sigma scale must be >= 0, got {sigma_scale}")));
    }
    Ok(())
}

fn build(x: &Dataset, partners: &[usize], sigma_scale: f64, floor: VarianceFloor) -> Result<UncertaintyModel> {
    let feats = x.features();
    let raw = DMatrix::from_fn(x.n_samples(), x.n_features(), |i, j| {
        let diff = feats[(i, j)] - feats[(partners[i], j)];
        sigma_scale * diff * diff
    });
    let floor = match floor {
        VarianceFloor::Value(v) if v >= 0.0 && v.is_finite() => v,
        VarianceFloor::Value(v) => {
            return Err(GeuError::InvalidParameter(format!("variance floor must be >= 0, got {v}")))
        }
        VarianceFloor::Auto => AUTO_FLOOR_FACTOR * median_nonzero(&raw),
    };
    let diag_covs = raw.map(|v| v.max(floor));
    Ok(UncertaintyModel { diag_covs, sigma_scale, floor })
}

fn median_nonzero(m: &DMatrix<f64>) -> f64 {
    let mut vals: Vec<f64> = m.iter().copied().filter(|&v| v > 0.0).collect();
    if vals.is_empty() {
        return 0.0;
    }
    vals.sort_by(f64::total_cmp);
    let mid = vals.len() / 2;
    if vals.len() % 2 == 1 {
        vals[mid]
    } else {
        0.5 * (vals[mid - 1] + vals[mid])
    }
}

/// Index of each sample's nearest other sample.
pub fn unsupervised_partners(x: &Dataset) -> Result<Vec<usize>> {
    let n = x.n_samples();
    if n < 2 {
        return Err(GeuError::TooFewSamples { needed: 2, got: n });
    }
    let dist = pairwise_sq_distances(x.features());
    Ok((0..n).map(|i| nearest_partner(&dist, n, i, |_| true).expect("n >= 2")).collect())
}

/// Index of each sample's nearest same-class sample, falling back to the
/// nearest sample overall for singleton classes.
pub fn supervised_partners(x: &Dataset) -> Result<Vec<usize>> {
    let n = x.n_samples();
    if n < 2 {
        return Err(GeuError::TooFewSamples { needed: 2, got: n });
    }
    let labels = x.labels();
    let dist = pairwise_sq_distances(x.features());
    Ok((0..n)
        .map(|i| {
            nearest_partner(&dist, n, i, |j| labels[j] == labels[i])
                .or_else(|| nearest_partner(&dist, n, i, |_| true))
                .expect("n >= 2")
        })
        .collect())
}

pub fn estimate_unsupervised(x: &Dataset, sigma_scale: f64, floor: VarianceFloor) -> Result<UncertaintyModel> {
    check_scale(sigma_scale)?;
    build(x, &unsupervised_partners(x)?, sigma_scale, floor)
}

pub fn estimate_supervised(x: &Dataset, sigma_scale: f64, floor: VarianceFloor) -> Result<UncertaintyModel> {
    check_scale(sigma_scale)?;
    build(x, &supervised_partners(x)?, sigma_scale, floor)
}

/// Wrap user-supplied variances verbatim (scale 1, floor 0).
pub fn from_explicit(diag_covs: DMatrix<f64>) -> Result<UncertaintyModel> {
    for i in 0..diag_covs.nrows() {
        for j in 0..diag_covs.ncols() {
            let v = diag_covs[(i, j)];
            if !(v >= 0.0) || !v.is_finite() {
                return Err(GeuError::NegativeVariance { row: i, col: j, value: v });
            }
        }
    }
    Ok(UncertaintyModel { diag_covs, sigma_scale: 1.0, floor: 0.0 })
}

/// [`from_explicit`] with a shape check against the dataset it describes.
pub fn from_explicit_for(x: &Dataset, diag_covs: DMatrix<f64>) -> Result<UncertaintyModel> {
    let expected = (x.n_samples(), x.n_features());
    if diag_covs.shape() != expected {
        return Err(GeuError::ShapeMismatch { expected, got: diag_covs.shape() });
    }
    from_explicit(diag_covs)
}
