//! Cross-validated method comparison and training-size curves.
//!
//! Every random draw derives from `(master seed, cell key)`, and cells are
//! merged in job order, so reports do not depend on the thread count.

use std::time::Instant;

use geu_core::data::{add_noise, kfold, stratified_subsample, zscore_fit_apply, FoldSplit};
use geu_core::embedding::{ScatterAssembly, ScatterProblem, SpectralSolution};
use geu_core::rng::derive_seed;
use geu_core::uncertainty::{estimate_supervised, estimate_unsupervised, VarianceFloor};
use geu_core::{accuracy, predict_from_distances, Dataset, GeuError, KnnModel, MethodTag, Ridge, UncertaintyModel};
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, MethodSpec, UncertaintyKind};
use crate::error::CliError;
use crate::report::{ExperimentReport, FoldOutcome, RawEntry, ReportKind, Selection};

// Seed-path tags; the values only need to be distinct.
const TAG_FOLDS: u64 = 1;
const TAG_NOISE_TRAIN: u64 = 2;
const TAG_NOISE_TEST: u64 = 3;
const TAG_INNER: u64 = 4;
const TAG_SIZE_TEST: u64 = 5;
const TAG_SUBSAMPLE: u64 = 6;

/// Estimate an uncertainty model of the given kind at `sigma_scale`.
pub fn estimate_uncertainty(x: &Dataset, kind: UncertaintyKind, sigma_scale: f64) -> Result<UncertaintyModel, GeuError> {
    match kind {
        UncertaintyKind::Unsupervised => estimate_unsupervised(x, sigma_scale, VarianceFloor::Auto),
        UncertaintyKind::Supervised => estimate_supervised(x, sigma_scale, VarianceFloor::Auto),
    }
}

/// Graphs, plain scatters and unit-σ regularizers for one training set.
///
/// The regularizer is linear in σ (the automatic floor scales with σ), so
/// one estimate at σ = 1 serves the whole σ grid.
pub struct PreparedMethod {
    method: MethodSpec,
    problem: ScatterProblem,
    unit_regularizers: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl PreparedMethod {
    pub fn new(train: &Dataset, method: MethodSpec, cfg: &ExperimentConfig) -> Result<Self, GeuError> {
        let problem = ScatterProblem::new(train, method.graph(), cfg.k1, cfg.k2)?;
        let unit_regularizers = match method.uncertainty() {
            Some(kind) => Some(problem.regularizers(&estimate_uncertainty(train, kind, 1.0)?)?),
            None => None,
        };
        Ok(Self { method, problem, unit_regularizers })
    }

    pub fn problem(&self) -> &ScatterProblem {
        &self.problem
    }

    /// Solve for one grid parameter: σ for GEU methods, the ridge factor
    /// (times `trace(b) / D`) for RLDA; ignored otherwise.
    pub fn solve(&self, param: f64) -> Result<SpectralSolution, GeuError> {
        let plain = self.problem.plain();
        match (&self.unit_regularizers, self.method) {
            (Some((ra, rb)), _) => {
                let asm = ScatterAssembly { a: &plain.a + ra * param, b: &plain.b + rb * param };
                self.problem.solve(&asm, Ridge::Auto)
            }
            (None, MethodSpec::Rlda) => {
                let ridge = param * plain.b.trace() / self.problem.dim() as f64;
                self.problem.solve(plain, Ridge::Value(ridge))
            }
            (None, _) => self.problem.solve(plain, Ridge::Auto),
        }
    }

    pub fn tag(&self) -> MethodTag {
        MethodTag::new(self.method.graph(), self.unit_regularizers.is_some())
    }
}

/// Candidate values of the method's continuous hyperparameter.
pub fn param_grid(method: MethodSpec, cfg: &ExperimentConfig) -> Vec<f64> {
    let mut grid = match method {
        _ if method.uncertainty().is_some() => cfg.sigma_grid.clone(),
        MethodSpec::Rlda => cfg.ridge_grid.clone(),
        _ => vec![0.0],
    };
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn sorted_unique(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Correct-prediction counts on `valid` for every `(param, d, k)`;
/// `None` marks combinations that could not be evaluated.
fn grid_counts(
    train: &Dataset,
    valid: &Dataset,
    method: MethodSpec,
    cfg: &ExperimentConfig,
    params: &[f64],
    ds: &[usize],
    ks: &[usize],
) -> Vec<Option<usize>> {
    let mut counts = vec![None; params.len() * ds.len() * ks.len()];
    let Ok(prepared) = PreparedMethod::new(train, method, cfg) else {
        return counts;
    };
    let (n_tr, n_va) = (train.n_samples(), valid.n_samples());
    let usable_ks: Vec<usize> = ks.iter().copied().filter(|&k| k <= n_tr).collect();
    let mean = prepared.problem().train_mean();
    let center = |x: &Dataset| DMatrix::from_fn(x.n_samples(), x.n_features(), |i, j| x.features()[(i, j)] - mean[j]);
    let (c_tr, c_va) = (center(train), center(valid));

    for (pi, &p) in params.iter().enumerate() {
        let Ok(sol) = prepared.solve(p) else { continue };
        let dmax = ds.last().copied().unwrap_or(0).min(sol.available());
        if dmax == 0 || usable_ks.is_empty() {
            continue;
        }
        let basis = sol.kept.columns(0, dmax);
        let (y_tr, y_va) = (&c_tr * basis, &c_va * basis);
        // Squared distances accumulated one output dimension at a time.
        let mut dist = vec![0.0; n_va * n_tr];
        let mut done = 0;
        for (di, &d) in ds.iter().enumerate() {
            if d > dmax {
                break;
            }
            for c in done..d {
                for q in 0..n_va {
                    let yq = y_va[(q, c)];
                    let row = &mut dist[q * n_tr..(q + 1) * n_tr];
                    for (t, slot) in row.iter_mut().enumerate() {
                        let diff = yq - y_tr[(t, c)];
                        *slot += diff * diff;
                    }
                }
            }
            done = d;
            let Ok(preds) = predict_from_distances(&dist, train.labels(), &usable_ks) else { continue };
            for (pred, &k) in preds.iter().zip(&usable_ks) {
                let ki = ks.iter().position(|&kk| kk == k).expect("k from grid");
                let hits = pred.iter().zip(valid.labels()).filter(|(a, b)| a == b).count();
                counts[(pi * ds.len() + di) * ks.len() + ki] = Some(hits);
            }
        }
    }
    counts
}

/// Inner cross-validation over `(param, d, k)`; ties go to the smaller
/// `d`, then the smaller parameter, then the smaller `k`.
pub fn select_hyperparameters(
    train: &Dataset,
    method: MethodSpec,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Selection, GeuError> {
    let params = param_grid(method, cfg);
    let ds = sorted_unique(&cfg.d_grid);
    let ks = sorted_unique(&cfg.k_grid);
    let split = kfold(train, cfg.inner_folds, seed, true)?;
    let mut total: Vec<Option<usize>> = vec![Some(0); params.len() * ds.len() * ks.len()];
    for fold in 0..split.k {
        let (tr, va) = split.train_test(fold);
        let counts = grid_counts(&train.subset(&tr), &train.subset(&va), method, cfg, &params, &ds, &ks);
        for (t, c) in total.iter_mut().zip(counts) {
            *t = match (*t, c) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
    }
    let mut best: Option<(usize, usize, usize, usize)> = None; // (hits, di, pi, ki)
    for di in 0..ds.len() {
        for pi in 0..params.len() {
            for ki in 0..ks.len() {
                if let Some(hits) = total[(pi * ds.len() + di) * ks.len() + ki] {
                    // Strictly better only; iteration order encodes the tie-break.
                    if best.is_none_or(|b| hits > b.0) {
                        best = Some((hits, di, pi, ki));
                    }
                }
            }
        }
    }
    let (_, di, pi, ki) = best.ok_or(GeuError::InsufficientPositiveEigenvalues {
        requested: ds[0],
        available: 0,
    })?;
    Ok(Selection { param: params[pi], d: ds[di], k: ks[ki] })
}

/// Fit with a fixed selection on `train` and score on `test`.
pub fn evaluate_selection(
    train: &Dataset,
    test: &Dataset,
    method: MethodSpec,
    cfg: &ExperimentConfig,
    sel: Selection,
) -> Result<f64, GeuError> {
    let prepared = PreparedMethod::new(train, method, cfg)?;
    let sol = prepared.solve(sel.param)?;
    let model = prepared.problem().model(&sol, sel.d, prepared.tag(), sel.param)?;
    let knn = KnnModel::new(&model.project(train)?, train.labels().to_vec(), sel.k)?;
    accuracy(&knn.predict(&model.project(test)?)?, test.labels())
}

/// Noise, standardization, inner selection, final fit and test score for
/// one outer split.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_split(
    data: &Dataset,
    train_idx: &[usize],
    test_idx: &[usize],
    method: MethodSpec,
    noise: f64,
    cfg: &ExperimentConfig,
    noise_seeds: (u64, u64),
    inner_seed: u64,
) -> Result<FoldOutcome, GeuError> {
    let train = add_noise(&data.subset(train_idx), noise, noise_seeds.0)?;
    let test = data.subset(test_idx);
    let test = if cfg.noise_on_test { add_noise(&test, noise, noise_seeds.1)? } else { test };
    let (train, test) = if cfg.standardize {
        let (tr, mut others, _) = zscore_fit_apply(&train, &[&test])?;
        (tr, others.remove(0))
    } else {
        (train, test)
    };
    let selection = select_hyperparameters(&train, method, cfg, inner_seed)?;
    let accuracy = evaluate_selection(&train, &test, method, cfg, selection)?;
    Ok(FoldOutcome { accuracy, selection })
}

struct Job {
    method_idx: usize,
    noise_idx: usize,
    train_size: Option<usize>,
    repeat: usize,
    fold: usize,
}

fn run_jobs<F>(jobs: &[Job], eval: F) -> Vec<(Result<FoldOutcome, String>, f64)>
where
    F: Fn(&Job) -> Result<FoldOutcome, GeuError> + Sync,
{
    jobs.par_iter()
        .map(|job| {
            let start = Instant::now();
            let out = eval(job).map_err(|e| e.to_string());
            (out, start.elapsed().as_secs_f64())
        })
        .collect()
}

/// Repeated stratified K-fold comparison of the configured methods.
///
/// Folds are drawn once per repeat and shared by every method and noise
/// level; noise corrupts the training folds only unless `noise_on_test`.
pub fn run_compare(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    cfg.validate_for(data.n_features())?;
    let splits: Vec<FoldSplit> = (0..cfg.repeats)
        .map(|r| kfold(data, cfg.folds, derive_seed(cfg.seed, &[TAG_FOLDS, r as u64]), true))
        .collect::<Result<_, _>>()?;

    let mut jobs = Vec::new();
    for method_idx in 0..cfg.methods.len() {
        for noise_idx in 0..cfg.noise_levels.len() {
            for repeat in 0..cfg.repeats {
                for fold in 0..cfg.folds {
                    jobs.push(Job { method_idx, noise_idx, train_size: None, repeat, fold });
                }
            }
        }
    }
    let results = run_jobs(&jobs, |job| {
        let (train, test) = splits[job.repeat].train_test(job.fold);
        let key = [job.repeat as u64, job.fold as u64, job.noise_idx as u64];
        evaluate_split(
            data,
            &train,
            &test,
            cfg.methods[job.method_idx],
            cfg.noise_levels[job.noise_idx],
            cfg,
            (derive_seed(cfg.seed, &[&[TAG_NOISE_TRAIN], &key[..]].concat()), derive_seed(cfg.seed, &[&[TAG_NOISE_TEST], &key[..]].concat())),
            derive_seed(cfg.seed, &[&[TAG_INNER], &key[..]].concat()),
        )
    });
    let raw = jobs
        .iter()
        .zip(results)
        .map(|(job, (outcome, seconds))| RawEntry {
            method: cfg.methods[job.method_idx],
            noise: cfg.noise_levels[job.noise_idx],
            train_size: job.train_size,
            repeat: job.repeat,
            fold: job.fold,
            split_hash: splits[job.repeat].fingerprint(),
            outcome,
            seconds,
        })
        .collect();
    Ok(ExperimentReport::from_raw(ReportKind::Compare, raw, splits))
}

/// The fixed test set and training pool used by [`run_size_curve`]:
/// fold 0 of a seeded stratified K-fold split is the test set.
pub fn size_curve_split(cfg: &ExperimentConfig, data: &Dataset) -> Result<(Vec<usize>, Vec<usize>), GeuError> {
    let split = kfold(data, cfg.folds, derive_seed(cfg.seed, &[TAG_SIZE_TEST]), true)?;
    let (pool, test) = split.train_test(0);
    Ok((pool, test))
}

fn index_hash(indices: &[usize]) -> u64 {
    // FNV-1a over the little-endian index bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &i in indices {
        for b in (i as u64).to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Accuracy on a fixed test set as a function of the training-set size.
pub fn run_size_curve(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    cfg.validate_for(data.n_features())?;
    if cfg.train_sizes.is_empty() {
        return Err(CliError::Config("train_sizes must not be empty for size-curve".into()));
    }
    let (pool, test) = size_curve_split(cfg, data)?;
    // Subsamples keyed by (size, repeat); sizes out of range fail up front.
    let mut subsamples = Vec::new();
    for &size in &cfg.train_sizes {
        let per_repeat: Vec<Vec<usize>> = (0..cfg.repeats)
            .map(|r| stratified_subsample(data, &pool, size, derive_seed(cfg.seed, &[TAG_SUBSAMPLE, size as u64, r as u64])))
            .collect::<Result<_, _>>()?;
        subsamples.push(per_repeat);
    }

    let mut jobs = Vec::new();
    for method_idx in 0..cfg.methods.len() {
        for noise_idx in 0..cfg.noise_levels.len() {
            for (size_idx, &size) in cfg.train_sizes.iter().enumerate() {
                for repeat in 0..cfg.repeats {
                    jobs.push(Job { method_idx, noise_idx, train_size: Some(size), repeat, fold: size_idx });
                }
            }
        }
    }
    let results = run_jobs(&jobs, |job| {
        let train = &subsamples[job.fold][job.repeat];
        let key = [job.train_size.unwrap_or(0) as u64, job.repeat as u64, job.noise_idx as u64];
        evaluate_split(
            data,
            train,
            &test,
            cfg.methods[job.method_idx],
            cfg.noise_levels[job.noise_idx],
            cfg,
            (derive_seed(cfg.seed, &[&[TAG_NOISE_TRAIN], &key[..]].concat()), derive_seed(cfg.seed, &[&[TAG_NOISE_TEST], &key[..]].concat())),
            derive_seed(cfg.seed, &[&[TAG_INNER], &key[..]].concat()),
        )
    });
    let raw = jobs
        .iter()
        .zip(results)
        .map(|(job, (outcome, seconds))| RawEntry {
            method: cfg.methods[job.method_idx],
            noise: cfg.noise_levels[job.noise_idx],
            train_size: job.train_size,
            repeat: job.repeat,
            fold: 0,
            split_hash: index_hash(&subsamples[job.fold][job.repeat]),
            outcome,
            seconds,
        })
        .collect();
    Ok(ExperimentReport::from_raw(ReportKind::SizeCurve, raw, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use geu_core::data::synthetic_blobs;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            d_grid: vec![1, 2],
            k_grid: vec![1, 3],
            sigma_grid: vec![0.1, 1.0],
            k1: 3,
            k2: 5,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn param_grid_per_method() {
        let cfg = ExperimentConfig::default();
        assert_eq!(param_grid(MethodSpec::Lda, &cfg), vec![0.0]);
        assert_eq!(param_grid(MethodSpec::Rlda, &cfg), vec![1e-4, 1e-3, 1e-2, 1e-1]);
        assert_eq!(param_grid(MethodSpec::GeuMfaS, &cfg).len(), 7);
    }

    #[test]
    fn selection_on_separable_data_is_perfect() {
        let data = synthetic_blobs(15, 3, 8.0, 1.0, 3).unwrap();
        let cfg = small_cfg();
        for m in [MethodSpec::Lda, MethodSpec::Mfa, MethodSpec::GeuLdaU, MethodSpec::GeuMfaS, MethodSpec::Rlda] {
            let sel = select_hyperparameters(&data, m, &cfg, 1).unwrap();
            // Everything scores 100%, so the tie-break picks the first grid point.
            assert_eq!(sel.d, 1, "{m}");
            assert_eq!(sel.k, 1, "{m}");
            assert_eq!(sel.param, param_grid(m, &cfg)[0], "{m}");
        }
    }

    #[test]
    fn grid_counts_match_direct_evaluation() {
        let data = synthetic_blobs(12, 3, 1.5, 1.0, 9).unwrap();
        let tr: Vec<usize> = (0..24).filter(|i| i % 3 != 0).collect();
        let va: Vec<usize> = (0..24).filter(|i| i % 3 == 0).collect();
        let (train, valid) = (data.subset(&tr), data.subset(&va));
        let cfg = small_cfg();
        let params = param_grid(MethodSpec::GeuMfaS, &cfg);
        let (ds, ks) = (vec![1, 2], vec![1, 3]);
        let counts = grid_counts(&train, &valid, MethodSpec::GeuMfaS, &cfg, &params, &ds, &ks);
        for (pi, &p) in params.iter().enumerate() {
            for (di, &d) in ds.iter().enumerate() {
                for (ki, &k) in ks.iter().enumerate() {
                    let acc = evaluate_selection(&train, &valid, MethodSpec::GeuMfaS, &cfg, Selection { param: p, d, k })
                        .unwrap();
                    let hits = counts[(pi * ds.len() + di) * ks.len() + ki].unwrap();
                    assert_eq!(hits, (acc * valid.n_samples() as f64).round() as usize);
                }
            }
        }
    }

    #[test]
    fn selection_respects_d_grid() {
        let data = synthetic_blobs(10, 3, 3.0, 1.0, 2).unwrap();
        let cfg = ExperimentConfig { d_grid: vec![3, 2], ..small_cfg() };
        let sel = select_hyperparameters(&data, MethodSpec::Lda, &cfg, 0).unwrap();
        assert!([2, 3].contains(&sel.d));
    }

    #[test]
    fn index_hash_is_order_sensitive() {
        assert_ne!(index_hash(&[1, 2]), index_hash(&[2, 1]));
        assert_eq!(index_hash(&[1, 2]), index_hash(&[1, 2]));
    }
}
