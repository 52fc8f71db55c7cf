//! Spectral subspace learning in the graph embedding framework, extended to
//! inputs modelled as Gaussians with per-sample diagonal covariance.
//!
//! The pipeline is: build intrinsic and penalty [`graph`]s (LDA or MFA),
//! optionally estimate per-sample [`uncertainty`], assemble and solve the
//! generalized eigenproblem in [`embedding`] (via [`eigsolve`]), then
//! classify projected means with [`classify`].

pub mod classify;
pub mod data;
pub mod eigsolve;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod rng;
pub mod uncertainty;

pub use classify::{accuracy, knn_predict, predict_from_distances, KnnModel};
pub use data::Dataset;
pub use eigsolve::{numeric_rank, solve_pencil, EigenSolution, Ridge, SymmetricPencil};
pub use embedding::{fit, EmbeddingModel, FitParams, Method, MethodTag, ScatterProblem};
pub use error::{ErrorCategory, GeuError, Result};
pub use graph::{lda_graphs, mfa_graphs, GraphPair, WeightMatrix};
pub use uncertainty::{estimate_supervised, estimate_unsupervised, UncertaintyModel, VarianceFloor};
