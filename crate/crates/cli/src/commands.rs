//! Single-shot subcommands: fit a model, dump an uncertainty model, project.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use geu_core::data::Standardizer;
use geu_core::{Dataset, EmbeddingModel, GeuError, UncertaintyModel};
use nalgebra::DMatrix;

use crate::config::{ExperimentConfig, MethodSpec};
use crate::error::CliError;
use crate::harness::{estimate_uncertainty, PreparedMethod};

fn standardized(cfg: &ExperimentConfig, data: &Dataset) -> Result<(Dataset, Option<Standardizer>), GeuError> {
    if !cfg.standardize {
        return Ok((data.clone(), None));
    }
    let st = Standardizer::fit(data);
    Ok((st.apply(data)?, Some(st)))
}

/// Rewrite a model fitted on standardized features so it applies to raw
/// features: `Vᵀ((x - shift)/scale - m) = (diag(1/scale) V)ᵀ (x - (shift + scale⊙m))`.
pub fn fold_standardizer(model: &EmbeddingModel, st: &Standardizer) -> Result<EmbeddingModel, GeuError> {
    let v = model.projection();
    let projection = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / st.scale[i]);
    let mean = model.train_mean().map_with_location(|i, _, m| st.shift[i] + st.scale[i] * m);
    EmbeddingModel::from_parts(projection, model.spectrum().clone(), model.method_tag(), mean, model.config().clone())
}

/// Fit `cfg.method` on the whole dataset with `cfg.sigma` (or
/// `cfg.ridge_factor` for RLDA) and `cfg.d`. The returned model takes raw
/// features; standardization, if enabled, is folded into it.
pub fn fit_model(cfg: &ExperimentConfig, data: &Dataset) -> Result<EmbeddingModel, GeuError> {
    let (x, st) = standardized(cfg, data)?;
    let prepared = PreparedMethod::new(&x, cfg.method, cfg)?;
    let param = match cfg.method {
        MethodSpec::Rlda => cfg.ridge_factor,
        m if m.uncertainty().is_some() => cfg.sigma,
        _ => 0.0,
    };
    let sol = prepared.solve(param)?;
    let model = prepared.problem().model(&sol, cfg.d, prepared.tag(), param)?;
    match st {
        Some(st) => fold_standardizer(&model, &st),
        None => Ok(model),
    }
}

/// Uncertainty model of kind `cfg.uncertainty` at `cfg.sigma`, on the
/// standardized features when standardization is enabled.
pub fn uncertainty_for(cfg: &ExperimentConfig, data: &Dataset) -> Result<UncertaintyModel, GeuError> {
    let (x, _) = standardized(cfg, data)?;
    estimate_uncertainty(&x, cfg.uncertainty, cfg.sigma)
}

/// `y_0..y_{d-1},label` rows for every sample.
pub fn projections_csv(model: &EmbeddingModel, data: &Dataset) -> Result<String, GeuError> {
    let y = model.project(data)?;
    let mut s = String::new();
    let header: Vec<String> = (0..y.ncols()).map(|j| format!("y{j}")).collect();
    let _ = writeln!(s, "{},label", header.join(","));
    for i in 0..y.nrows() {
        for j in 0..y.ncols() {
            let _ = write!(s, "{:?},", y[(i, j)]);
        }
        let label = data.labels()[i];
        match data.class_names() {
            Some(names) => {
                let _ = writeln!(s, "{}", names[label]);
            }
            None => {
                let _ = writeln!(s, "{label}");
            }
        }
    }
    Ok(s)
}

pub fn write_projections(model: &EmbeddingModel, data: &Dataset, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, projections_csv(model, data)?)?;
    Ok(())
}
