//! Linear graph embeddings with and without per-sample uncertainty.
//!
//! For a graph pair and centred data `X` (`D × N`, one column per sample)
//! the minimized and constraint matrices are
//!
//! ```text
//! a = X L Xᵀ  + Σ_i D_ii  Σ_i
//! b = X Lᵖ Xᵀ + Σ_i Dᵖ_ii Σ_i
//! ```
//!
//! and the projection keeps the eigenvectors of `a v = λ b v` with the
//! smallest positive eigenvalues. Without uncertainty (or with all `Σ_i = 0`)
//! this is the plain graph embedding.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::eigsolve::{solve_pencil, EigenSolution, Ridge, SymmetricPencil};
use crate::error::{GeuError, Result};
use crate::graph::{lda_graphs, mfa_graphs, GraphPair};
use crate::rng::rng_from_seed;
use crate::uncertainty::UncertaintyModel;

/// Eigenvalues at or below `POSITIVITY_TOL · max(1, λ_max)` are treated as zero.
pub const POSITIVITY_TOL: f64 = 1e-10;

pub const DEFAULT_K1: usize = 5;
pub const DEFAULT_K2: usize = 20;

/// Graph family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lda,
    Mfa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodTag {
    Lda,
    Mfa,
    GeuLda,
    GeuMfa,
}

impl MethodTag {
    pub fn new(method: Method, with_uncertainty: bool) -> Self {
        match (method, with_uncertainty) {
            (Method::Lda, false) => MethodTag::Lda,
            (Method::Mfa, false) => MethodTag::Mfa,
            (Method::Lda, true) => MethodTag::GeuLda,
            (Method::Mfa, true) => MethodTag::GeuMfa,
        }
    }

    pub fn method(self) -> Method {
        match self {
            MethodTag::Lda | MethodTag::GeuLda => Method::Lda,
            MethodTag::Mfa | MethodTag::GeuMfa => Method::Mfa,
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodTag::Lda => "LDA",
            MethodTag::Mfa => "MFA",
            MethodTag::GeuLda => "GEU-LDA",
            MethodTag::GeuMfa => "GEU-MFA",
        })
    }
}

impl FromStr for MethodTag {
    type Err = GeuError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LDA" => Ok(MethodTag::Lda),
            "MFA" => Ok(MethodTag::Mfa),
            "GEU-LDA" => Ok(MethodTag::GeuLda),
            "GEU-MFA" => Ok(MethodTag::GeuMfa),
            other => Err(GeuError::MalformedModel(format!("unknown method tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub d: usize,
    pub k1: usize,
    pub k2: usize,
    pub ridge: Ridge,
}

impl Default for FitParams {
    fn default() -> Self {
        Self { d: 1, k1: DEFAULT_K1, k2: DEFAULT_K2, ridge: Ridge::Auto }
    }
}

/// Hyperparameters recorded with a fitted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSnapshot {
    pub sigma: f64,
    pub d: usize,
    pub k1: usize,
    pub k2: usize,
    /// Ridge actually added to the constraint matrix.
    pub ridge: f64,
}

/// A fitted linear map `y = Vᵀ (x - mean)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    projection: DMatrix<f64>,
    spectrum: DVector<f64>,
    method_tag: MethodTag,
    train_mean: DVector<f64>,
    config: FitSnapshot,
}

/// The matrix pair of one embedding problem.
#[derive(Debug, Clone)]
pub struct ScatterAssembly {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// `X L Xᵀ` for row-major samples `x` (`N × D`), i.e. `xᵀ L x`.
pub fn scatter_from_graph(x: &Dataset, lap: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    scatter_from_rows(x.features(), lap)
}

fn scatter_from_rows(rows: &DMatrix<f64>, lap: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = rows.nrows();
    if lap.shape() != (n, n) {
        return Err(GeuError::ShapeMismatch { expected: (n, n), got: lap.shape() });
    }
    let s = rows.transpose() * lap * rows;
    Ok((&s + s.transpose()) * 0.5)
}

/// Diagonal matrix with entries `Σ_i degrees[i] · diag_covs[i][j]`.
pub fn uncertainty_regularizer(u: &UncertaintyModel, degrees: &DVector<f64>) -> Result<DMatrix<f64>> {
    if u.n_samples() != degrees.len() {
        return Err(GeuError::LengthMismatch { left: u.n_samples(), right: degrees.len() });
    }
    let diag = u.diag_covs().transpose() * degrees;
    Ok(DMatrix::from_diagonal(&diag))
}

/// Graphs and plain scatters for one training set, reusable across
/// uncertainty models, ridges and output dimensions.
#[derive(Debug, Clone)]
pub struct ScatterProblem {
    method: Method,
    k1: usize,
    k2: usize,
    train_mean: DVector<f64>,
    graphs: GraphPair,
    plain: ScatterAssembly,
}

impl ScatterProblem {
    pub fn new(x: &Dataset, method: Method, k1: usize, k2: usize) -> Result<Self> {
        let graphs = match method {
            Method::Lda => lda_graphs(x.labels())?,
            Method::Mfa => mfa_graphs(x, k1, k2)?,
        };
        Self::with_graphs(x, method, graphs, k1, k2)
    }

    /// Use caller-built graphs (any graph embedding instance).
    pub fn with_graphs(x: &Dataset, method: Method, graphs: GraphPair, k1: usize, k2: usize) -> Result<Self> {
        if graphs.len() != x.n_samples() {
            return Err(GeuError::LengthMismatch { left: graphs.len(), right: x.n_samples() });
        }
        let train_mean = DVector::from_vec(x.mean());
        let centered = centered_rows(x.features(), &train_mean);
        let plain = ScatterAssembly {
            a: scatter_from_rows(&centered, &graphs.laplacian)?,
            b: scatter_from_rows(&centered, &graphs.penalty_laplacian)?,
        };
        Ok(Self { method, k1, k2, train_mean, graphs, plain })
    }

    pub fn graphs(&self) -> &GraphPair {
        &self.graphs
    }

    pub fn plain(&self) -> &ScatterAssembly {
        &self.plain
    }

    pub fn train_mean(&self) -> &DVector<f64> {
        &self.train_mean
    }

    pub fn dim(&self) -> usize {
        self.train_mean.len()
    }

    /// `(Σ D_ii Σ_i, Σ Dᵖ_ii Σ_i)`.
    pub fn regularizers(&self, u: &UncertaintyModel) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        if u.n_features() != self.dim() {
            return Err(GeuError::ShapeMismatch {
                expected: (self.graphs.len(), self.dim()),
                got: (u.n_samples(), u.n_features()),
            });
        }
        Ok((
            uncertainty_regularizer(u, &self.graphs.degrees)?,
            uncertainty_regularizer(u, &self.graphs.penalty_degrees)?,
        ))
    }

    pub fn assemble(&self, u: Option<&UncertaintyModel>) -> Result<ScatterAssembly> {
        match u {
            None => Ok(self.plain.clone()),
            Some(u) => {
                let (ra, rb) = self.regularizers(u)?;
                self.assemble_with(&ra, &rb)
            }
        }
    }

    /// Add precomputed aggregate regularizers (need not be diagonal).
    pub fn assemble_with(&self, reg_a: &DMatrix<f64>, reg_b: &DMatrix<f64>) -> Result<ScatterAssembly> {
        let dd = (self.dim(), self.dim());
        for r in [reg_a, reg_b] {
            if r.shape() != dd {
                return Err(GeuError::ShapeMismatch { expected: dd, got: r.shape() });
            }
        }
        Ok(ScatterAssembly { a: &self.plain.a + reg_a, b: &self.plain.b + reg_b })
    }

    /// Solve the pencil and keep every eigenpair above the positivity threshold.
    pub fn solve(&self, assembly: &ScatterAssembly, ridge: Ridge) -> Result<SpectralSolution> {
        let pencil = SymmetricPencil::new(assembly.a.clone(), assembly.b.clone())?;
        SpectralSolution::from_eigen(solve_pencil(&pencil, ridge)?)
    }

    /// Package the first `d` kept directions as a model.
    pub fn model(&self, sol: &SpectralSolution, d: usize, tag: MethodTag, sigma: f64) -> Result<EmbeddingModel> {
        if d == 0 || d > self.dim() {
            return Err(GeuError::InvalidParameter(format!("d must be in 1..={}, got {d}", self.dim())));
        }
        if d > sol.available() {
            return Err(GeuError::InsufficientPositiveEigenvalues { requested: d, available: sol.available() });
        }
        Ok(EmbeddingModel {
            projection: sol.kept.columns(0, d).into_owned(),
            spectrum: sol.spectrum.clone(),
            method_tag: tag,
            train_mean: self.train_mean.clone(),
            config: FitSnapshot { sigma, d, k1: self.k1, k2: self.k2, ridge: sol.ridge },
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }
}

/// Full spectrum plus the eigenvectors of its positive part, ascending.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub spectrum: DVector<f64>,
    pub kept: DMatrix<f64>,
    pub kept_values: DVector<f64>,
    pub ridge: f64,
}

impl SpectralSolution {
    fn from_eigen(eig: EigenSolution) -> Result<Self> {
        let max = eig.eigenvalues.max();
        let threshold = POSITIVITY_TOL * max.max(1.0);
        let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > threshold).collect();
        let kept = DMatrix::from_fn(eig.eigenvectors.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
        let kept_values = DVector::from_iterator(keep.len(), keep.iter().map(|&i| eig.eigenvalues[i]));
        Ok(Self { spectrum: eig.eigenvalues, kept, kept_values, ridge: eig.ridge })
    }

    pub fn available(&self) -> usize {
        self.kept.ncols()
    }
}

fn centered_rows(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - mean[j])
}

/// Fit LDA/MFA, or their uncertainty-aware variants when `u` is given.
pub fn fit(x: &Dataset, method: Method, u: Option<&UncertaintyModel>, params: &FitParams) -> Result<EmbeddingModel> {
    if let Some(u) = u {
        let expected = (x.n_samples(), x.n_features());
        if (u.n_samples(), u.n_features()) != expected {
            return Err(GeuError::ShapeMismatch { expected, got: (u.n_samples(), u.n_features()) });
        }
    }
    let problem = ScatterProblem::new(x, method, params.k1, params.k2)?;
    let assembly = problem.assemble(u)?;
    let sol = problem.solve(&assembly, params.ridge)?;
    let sigma = u.map_or(0.0, UncertaintyModel::sigma_scale);
    problem.model(&sol, params.d, MethodTag::new(method, u.is_some()), sigma)
}

/// Fit with caller-supplied aggregate regularizers `Σ D_ii Σ_i` and
/// `Σ Dᵖ_ii Σ_i`, for uncertainty models with full covariances. The
/// recorded sigma is 1, as for explicit models.
pub fn fit_with_regularizers(
    x: &Dataset,
    method: Method,
    reg_a: &DMatrix<f64>,
    reg_b: &DMatrix<f64>,
    params: &FitParams,
) -> Result<EmbeddingModel> {
    let problem = ScatterProblem::new(x, method, params.k1, params.k2)?;
    let assembly = problem.assemble_with(reg_a, reg_b)?;
    let sol = problem.solve(&assembly, params.ridge)?;
    problem.model(&sol, params.d, MethodTag::new(method, true), 1.0)
}

impl EmbeddingModel {
    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn spectrum(&self) -> &DVector<f64> {
        &self.spectrum
    }

    pub fn method_tag(&self) -> MethodTag {
        self.method_tag
    }

    pub fn train_mean(&self) -> &DVector<f64> {
        &self.train_mean
    }

    pub fn config(&self) -> &FitSnapshot {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.ncols()
    }

    /// Build a model from explicit parts; mainly for tests and tooling.
    pub fn from_parts(
        projection: DMatrix<f64>,
        spectrum: DVector<f64>,
        method_tag: MethodTag,
        train_mean: DVector<f64>,
        config: FitSnapshot,
    ) -> Result<Self> {
        if train_mean.len() != projection.nrows() {
            return Err(GeuError::LengthMismatch { left: train_mean.len(), right: projection.nrows() });
        }
        Ok(Self { projection, spectrum, method_tag, train_mean, config })
    }

    /// Keep only the first `d` directions.
    pub fn truncated(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.output_dim() {
            return Err(GeuError::InvalidParameter(format!("d must be in 1..={}, got {d}", self.output_dim())));
        }
        let mut out = self.clone();
        out.projection = self.projection.columns(0, d).into_owned();
        out.config.d = d;
        Ok(out)
    }

    /// Project row-major samples (`M × D`) to `M × d`.
    pub fn project_rows(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.input_dim() {
            return Err(GeuError::DimensionMismatch(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                rows.ncols()
            )));
        }
        Ok(centered_rows(rows, &self.train_mean) * &self.projection)
    }

    /// Mean projections `y_i = Vᵀ (x_i - mean)`.
    pub fn project(&self, x: &Dataset) -> Result<DMatrix<f64>> {
        self.project_rows(x.features())
    }

    /// Means and variances of the projected Gaussians; the variance of
    /// output `k` for sample `i` is `Σ_j V[j][k]² · Σ_i[j]`.
    pub fn project_with_variance(&self, x: &Dataset, u: &UncertaintyModel) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let means = self.project(x)?;
        let expected = (x.n_samples(), x.n_features());
        if (u.n_samples(), u.n_features()) != expected {
            return Err(GeuError::ShapeMismatch { expected, got: (u.n_samples(), u.n_features()) });
        }
        let squared = self.projection.map(|v| v * v);
        Ok((means, u.diag_covs() * squared))
    }

    /// Text format: a `key=value` header line, one line per projection
    /// column, then the training mean and the spectrum.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| GeuError::io(path, e);
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
        let c = &self.config;
        writeln!(
            out,
            "method={} D={} d={} sigma={:?} ridge={:?} k1={} k2={}",
            self.method_tag,
            self.input_dim(),
            self.output_dim(),
            c.sigma,
            c.ridge,
            c.k1,
            c.k2
        )
        .map_err(io)?;
        let line = |v: &mut dyn Iterator<Item = &f64>| v.map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        for col in self.projection.column_iter() {
            writeln!(out, "{}", line(&mut col.iter())).map_err(io)?;
        }
        writeln!(out, "{}", line(&mut self.train_mean.iter())).map_err(io)?;
        writeln!(out, "{}", line(&mut self.spectrum.iter())).map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| GeuError::io(path, e))?;
        let lines: Vec<String> = BufReader::new(file)
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| GeuError::io(path, e))?;
        let bad = |m: String| GeuError::MalformedModel(m);
        let header = lines.first().ok_or_else(|| bad("empty file".into()))?;
        let mut fields = std::collections::HashMap::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad(format!("bad header token {tok:?}")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(format!("missing header key {k}")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad value for {k}"))) };
        let int = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(format!("bad value for {k}"))) };
        let tag: MethodTag = get("method")?.parse()?;
        let (dim, d) = (int("D")?, int("d")?);
        let floats = |idx: usize, len: Option<usize>| -> Result<Vec<f64>> {
            let l = lines.get(idx).ok_or_else(|| bad(format!("missing line {}", idx + 1)))?;
            let v = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number {t:?} on line {}", idx + 1))))
                .collect::<Result<Vec<_>>>()?;
            match len {
                Some(n) if v.len() != n => Err(bad(format!("line {} has {} values, expected {n}", idx + 1, v.len()))),
                _ => Ok(v),
            }
        };
        let mut projection = DMatrix::zeros(dim, d);
        for k in 0..d {
            projection.set_column(k, &DVector::from_vec(floats(1 + k, Some(dim))?));
        }
        let train_mean = DVector::from_vec(floats(1 + d, Some(dim))?);
        let spectrum = DVector::from_vec(floats(2 + d, None)?);
        let config = FitSnapshot { sigma: num("sigma")?, d, k1: int("k1")?, k2: int("k2")?, ridge: num("ridge")? };
        Self::from_parts(projection, spectrum, tag, train_mean, config)
    }
}

/// Monte-Carlo estimate of `a` from replicated data: each sample is
/// replaced by `samples_per_point` draws from `N(x_i, Σ_i)` and replicate
/// pairs of distinct parents inherit the weight `W_ij / M²`.
///
/// The graph weights are read off the Laplacian's off-diagonal. In
/// expectation the result equals `x L xᵀ + Σ_i D_ii Σ_i`.
pub fn augmentation_scatter_oracle(
    x: &Dataset,
    u: &UncertaintyModel,
    lap: &DMatrix<f64>,
    degrees: &DVector<f64>,
    samples_per_point: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let (n, dim) = (x.n_samples(), x.n_features());
    if samples_per_point == 0 {
        return Err(GeuError::InvalidParameter("samples_per_point must be >= 1".into()));
    }
    if lap.shape() != (n, n) {
        return Err(GeuError::ShapeMismatch { expected: (n, n), got: lap.shape() });
    }
    if degrees.len() != n {
        return Err(GeuError::LengthMismatch { left: degrees.len(), right: n });
    }
    if (u.n_samples(), u.n_features()) != (n, dim) {
        return Err(GeuError::ShapeMismatch { expected: (n, dim), got: (u.n_samples(), u.n_features()) });
    }
    let m = samples_per_point as f64;
    let feats = x.features();
    let mut rng = rng_from_seed(seed);
    // Per-parent replicate sums and second-moment sums.
    let mut first = DMatrix::<f64>::zeros(n, dim);
    let mut second = vec![DMatrix::<f64>::zeros(dim, dim); n];
    let mut draw = DVector::zeros(dim);
    for i in 0..n {
        let std: Vec<f64> = u.diag_covs().row(i).iter().map(|v| v.sqrt()).collect();
        for _ in 0..samples_per_point {
            for j in 0..dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                draw[j] = feats[(i, j)] + std[j] * z;
            }
            second[i].ger(1.0, &draw, &draw, 1.0);
            for j in 0..dim {
                first[(i, j)] += draw[j];
            }
        }
    }
    let mut w = -lap.clone();
    w.fill_diagonal(0.0);
    let mut out: DMatrix<f64> = first.transpose() * w * &first * (-1.0 / (m * m));
    for i in 0..n {
        out += &second[i] * (degrees[i] / m);
    }
    Ok((&out + out.transpose()) * 0.5)
}
