//! Decision-boundary exports and small-sample experiments on synthetic
//! two-class Gaussian blobs.

use std::fs;
use std::path::Path;

use geu_core::data::{decision_grid, synthetic_blobs, write_csv, DecisionGrid, GridBounds};
use geu_core::embedding::{augmentation_scatter_oracle, ScatterAssembly, ScatterProblem};
use geu_core::rng::derive_seed;
use geu_core::{accuracy, fit, Dataset, EmbeddingModel, FitParams, GeuError, KnnModel, Method, MethodTag, Ridge};

use crate::config::{ExperimentConfig, UncertaintyKind};
use crate::error::CliError;
use crate::harness::estimate_uncertainty;

const TAG_BLOBS: u64 = 11;
const TAG_AUGMENT: u64 = 12;
const TAG_TEST_BLOBS: u64 = 13;
const GRID_MARGIN: f64 = 0.1;

/// Settings shared by the MFA variants of the boundary experiment.
#[derive(Debug, Clone, Copy)]
pub struct MfaSettings {
    pub kind: UncertaintyKind,
    pub sigma: f64,
    pub d: usize,
    pub k1: usize,
    pub k2: usize,
}

impl MfaSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            kind: cfg.boundary_uncertainty,
            sigma: cfg.boundary_sigma,
            d: cfg.boundary_d,
            k1: cfg.boundary_k1,
            k2: cfg.boundary_k2,
        }
    }

    fn params(&self) -> FitParams {
        FitParams { d: self.d, k1: self.k1, k2: self.k2, ridge: Ridge::Auto }
    }
}

pub fn fit_mfa(x: &Dataset, s: &MfaSettings) -> Result<EmbeddingModel, GeuError> {
    fit(x, Method::Mfa, None, &s.params())
}

pub fn fit_geu_mfa(x: &Dataset, s: &MfaSettings) -> Result<EmbeddingModel, GeuError> {
    let u = estimate_uncertainty(x, s.kind, s.sigma)?;
    fit(x, Method::Mfa, Some(&u), &s.params())
}

/// MFA on `samples_per_point` replicates of every point drawn from the
/// uncertainty model, with replicates inheriting their parents' graph
/// weights. `0` replicates means plain MFA.
pub fn fit_mfa_augmented(x: &Dataset, s: &MfaSettings, samples_per_point: usize, seed: u64) -> Result<EmbeddingModel, GeuError> {
    if samples_per_point == 0 {
        return fit_mfa(x, s);
    }
    let problem = ScatterProblem::new(x, Method::Mfa, s.k1, s.k2)?;
    let u = estimate_uncertainty(x, s.kind, s.sigma)?;
    let g = problem.graphs();
    let asm = ScatterAssembly {
        a: augmentation_scatter_oracle(x, &u, &g.laplacian, &g.degrees, samples_per_point, derive_seed(seed, &[0]))?,
        b: augmentation_scatter_oracle(x, &u, &g.penalty_laplacian, &g.penalty_degrees, samples_per_point, derive_seed(seed, &[1]))?,
    };
    let sol = problem.solve(&asm, Ridge::Auto)?;
    problem.model(&sol, s.d, MethodTag::Mfa, 0.0)
}

pub struct BoundaryReport {
    pub data: Dataset,
    /// `(name, grid)` in the order MFA, GEU-MFA, MFA-M for each `M`.
    pub grids: Vec<(String, DecisionGrid)>,
}

impl BoundaryReport {
    pub fn grid(&self, name: &str) -> Option<&DecisionGrid> {
        self.grids.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    /// `points.csv` plus one `grid_<name>.csv` per method.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        write_csv(&self.data, dir.join("points.csv"))?;
        for (name, grid) in &self.grids {
            grid.write_csv(dir.join(format!("grid_{name}.csv")))?;
        }
        Ok(())
    }
}

/// The blobs drawn by `boundary` for the configured seed.
pub fn boundary_dataset(cfg: &ExperimentConfig) -> Result<Dataset, GeuError> {
    synthetic_blobs(
        cfg.boundary_n_per_class,
        2,
        cfg.boundary_separation,
        cfg.boundary_spread,
        derive_seed(cfg.seed, &[TAG_BLOBS]),
    )
}

/// Decision grids of MFA, GEU-MFA and augmented MFA on a 2-D dataset.
pub fn run_boundary_on(cfg: &ExperimentConfig, data: Dataset) -> Result<BoundaryReport, CliError> {
    if data.n_features() != 2 {
        return Err(GeuError::NotTwoDimensional(data.n_features()).into());
    }
    let s = MfaSettings::from_config(cfg);
    let bounds = GridBounds::around(data.features(), GRID_MARGIN);
    let grid_for = |model: &EmbeddingModel| -> Result<DecisionGrid, GeuError> {
        let knn = KnnModel::new(&model.project(&data)?, data.labels().to_vec(), cfg.boundary_k)?;
        decision_grid(model, &knn, bounds, cfg.grid_resolution)
    };
    let mut grids = vec![
        ("MFA".to_string(), grid_for(&fit_mfa(&data, &s)?)?),
        ("GEU-MFA".to_string(), grid_for(&fit_geu_mfa(&data, &s)?)?),
    ];
    for &m in &cfg.augment_sizes {
        let model = fit_mfa_augmented(&data, &s, m, derive_seed(cfg.seed, &[TAG_AUGMENT, m as u64]))?;
        grids.push((format!("MFA-{m}"), grid_for(&model)?));
    }
    Ok(BoundaryReport { data, grids })
}

pub fn run_boundary(cfg: &ExperimentConfig) -> Result<BoundaryReport, CliError> {
    cfg.validate()?;
    run_boundary_on(cfg, boundary_dataset(cfg)?)
}

/// Test accuracy of MFA and GEU-MFA trained on a small sample of
/// overlapping blobs and tested on a large fresh sample from the same
/// distribution. Returns `(mfa, geu_mfa)`.
#[allow(clippy::too_many_arguments)]
pub fn small_sample_accuracy(
    n_per_class: usize,
    dim: usize,
    separation: f64,
    spread: f64,
    test_per_class: usize,
    k: usize,
    s: &MfaSettings,
    seed: u64,
) -> Result<(f64, f64), GeuError> {
    let train = synthetic_blobs(n_per_class, dim, separation, spread, derive_seed(seed, &[TAG_BLOBS]))?;
    let test = synthetic_blobs(test_per_class, dim, separation, spread, derive_seed(seed, &[TAG_TEST_BLOBS]))?;
    let score = |model: EmbeddingModel| -> Result<f64, GeuError> {
        let knn = KnnModel::new(&model.project(&train)?, train.labels().to_vec(), k)?;
        accuracy(&knn.predict(&model.project(&test)?)?, test.labels())
    };
    Ok((score(fit_mfa(&train, s)?)?, score(fit_geu_mfa(&train, s)?)?))
}
