//! Flat `key = value` experiment configuration (TOML syntax).
//!
//! Every key has a default and unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use geu_core::data::{ColumnRef, LoadOptions};
use geu_core::embedding::{Method, DEFAULT_K1, DEFAULT_K2};
use serde::Deserialize;

use crate::error::CliError;

/// Methods the harness can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodSpec {
    Lda,
    Rlda,
    Mfa,
    GeuLdaU,
    GeuLdaS,
    GeuMfaU,
    GeuMfaS,
}

/// Which admissible set the uncertainty estimate searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyKind {
    Unsupervised,
    Supervised,
}

impl MethodSpec {
    pub const ALL: [MethodSpec; 7] = [
        MethodSpec::Lda,
        MethodSpec::Rlda,
        MethodSpec::Mfa,
        MethodSpec::GeuLdaU,
        MethodSpec::GeuLdaS,
        MethodSpec::GeuMfaU,
        MethodSpec::GeuMfaS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodSpec::Lda => "LDA",
            MethodSpec::Rlda => "RLDA",
            MethodSpec::Mfa => "MFA",
            MethodSpec::GeuLdaU => "GEU-LDA-U",
            MethodSpec::GeuLdaS => "GEU-LDA-S",
            MethodSpec::GeuMfaU => "GEU-MFA-U",
            MethodSpec::GeuMfaS => "GEU-MFA-S",
        }
    }

    pub fn graph(self) -> Method {
        match self {
            MethodSpec::Lda | MethodSpec::Rlda | MethodSpec::GeuLdaU | MethodSpec::GeuLdaS => Method::Lda,
            MethodSpec::Mfa | MethodSpec::GeuMfaU | MethodSpec::GeuMfaS => Method::Mfa,
        }
    }

    pub fn uncertainty(self) -> Option<UncertaintyKind> {
        match self {
            MethodSpec::GeuLdaU | MethodSpec::GeuMfaU => Some(UncertaintyKind::Unsupervised),
            MethodSpec::GeuLdaS | MethodSpec::GeuMfaS => Some(UncertaintyKind::Supervised),
            _ => None,
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        MethodSpec::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown method {s:?}")))
    }
}

impl<'de> Deserialize<'de> for MethodSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ColumnKey {
    Index(usize),
    Name(String),
}

impl From<&ColumnKey> for ColumnRef {
    fn from(k: &ColumnKey) -> Self {
        match k {
            ColumnKey::Index(i) => ColumnRef::Index(*i),
            ColumnKey::Name(n) => ColumnRef::Name(n.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    // dataset
    pub dataset: Option<PathBuf>,
    pub label_column: ColumnKey,
    pub delimiter: char,
    pub has_header: bool,
    pub drop_columns: Vec<ColumnKey>,
    pub standardize: bool,

    // protocol
    pub methods: Vec<MethodSpec>,
    pub sigma_grid: Vec<f64>,
    pub d_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    /// RLDA ridge candidates, as multiples of `trace(b) / D`.
    pub ridge_grid: Vec<f64>,
    pub k1: usize,
    pub k2: usize,
    pub noise_levels: Vec<f64>,
    pub noise_on_test: bool,
    pub folds: usize,
    pub inner_folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub threads: usize,

    // size curve
    pub train_sizes: Vec<usize>,

    // single fits (fit / estimate-uncertainty)
    pub method: MethodSpec,
    pub sigma: f64,
    /// RLDA ridge for `fit`, as a multiple of `trace(b) / D`.
    pub ridge_factor: f64,
    pub d: usize,
    pub uncertainty: UncertaintyKind,

    // boundary export
    pub boundary_n_per_class: usize,
    pub boundary_separation: f64,
    pub boundary_spread: f64,
    pub boundary_sigma: f64,
    pub boundary_uncertainty: UncertaintyKind,
    pub boundary_d: usize,
    pub boundary_k: usize,
    pub boundary_k1: usize,
    pub boundary_k2: usize,
    pub grid_resolution: usize,
    pub augment_sizes: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            label_column: ColumnKey::Name("label".to_string()),
            delimiter: ',',
            has_header: true,
            drop_columns: Vec::new(),
            standardize: true,
            methods: MethodSpec::ALL.to_vec(),
            sigma_grid: vec![0.001, 0.1, 0.2, 0.4, 0.8, 1.0, 2.0],
            d_grid: vec![1, 2, 4, 8],
            k_grid: vec![1, 3, 5],
            ridge_grid: vec![1e-4, 1e-3, 1e-2, 1e-1],
            k1: DEFAULT_K1,
            k2: DEFAULT_K2,
            noise_levels: vec![0.0, 0.1, 0.2],
            noise_on_test: false,
            folds: 5,
            inner_folds: 3,
            repeats: 10,
            seed: 0,
            threads: 0,
            train_sizes: Vec::new(),
            method: MethodSpec::GeuMfaS,
            sigma: 1.0,
            ridge_factor: 1e-3,
            d: 2,
            uncertainty: UncertaintyKind::Supervised,
            boundary_n_per_class: 20,
            boundary_separation: 2.0,
            boundary_spread: 1.0,
            boundary_sigma: 1.0,
            boundary_uncertainty: UncertaintyKind::Supervised,
            boundary_d: 1,
            boundary_k: 1,
            boundary_k1: 3,
            boundary_k2: 10,
            grid_resolution: 100,
            augment_sizes: vec![100, 1000],
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn load_options(&self) -> Result<LoadOptions, CliError> {
        if !self.delimiter.is_ascii() {
            return Err(CliError::Config(format!("delimiter {:?} is not ASCII", self.delimiter)));
        }
        Ok(LoadOptions {
            label_column: (&self.label_column).into(),
            delimiter: self.delimiter as u8,
            has_header: self.has_header,
            drop_columns: self.drop_columns.iter().map(ColumnRef::from).collect(),
        })
    }

    /// Checks that do not depend on the dataset.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        for (name, empty) in [
            ("sigma_grid", self.sigma_grid.is_empty()),
            ("d_grid", self.d_grid.is_empty()),
            ("k_grid", self.k_grid.is_empty()),
            ("ridge_grid", self.ridge_grid.is_empty()),
            ("noise_levels", self.noise_levels.is_empty()),
        ] {
            if empty {
                return bad(format!("{name} must not be empty"));
            }
        }
        if self.sigma_grid.iter().chain(&self.ridge_grid).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return bad("sigma_grid and ridge_grid entries must be finite and >= 0".into());
        }
        if self.noise_levels.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return bad("noise levels must be finite and >= 0".into());
        }
        if self.d_grid.contains(&0) || self.k_grid.contains(&0) || self.d == 0 {
            return bad("d and k values must be positive".into());
        }
        if self.k1 == 0 || self.k2 == 0 || self.boundary_k1 == 0 || self.boundary_k2 == 0 {
            return bad("k1 and k2 must be positive".into());
        }
        if self.folds < 2 || self.inner_folds < 2 {
            return bad("folds and inner_folds must be >= 2".into());
        }
        if self.repeats == 0 {
            return bad("repeats must be >= 1".into());
        }
        if self.grid_resolution == 0 || self.boundary_d == 0 || self.boundary_k == 0 {
            return bad("grid_resolution, boundary_d and boundary_k must be positive".into());
        }
        if !(self.sigma >= 0.0) || !(self.boundary_sigma >= 0.0) || !(self.ridge_factor >= 0.0) {
            return bad("sigma and ridge_factor must be >= 0".into());
        }
        Ok(())
    }

    /// Checks against the loaded dataset's feature count.
    pub fn validate_for(&self, n_features: usize) -> Result<(), CliError> {
        if let Some(&d) = self.d_grid.iter().find(|&&d| d > n_features) {
            return Err(CliError::Config(format!("d_grid entry {d} exceeds the feature count {n_features}")));
        }
        Ok(())
    }

    pub fn sorted_d_grid(&self) -> Vec<usize> {
        let mut g = self.d_grid.clone();
        g.sort_unstable();
        g.dedup();
        g
    }
}
