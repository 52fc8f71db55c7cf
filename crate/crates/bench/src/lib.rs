//! Benchmarks for the subspace-learning pipeline live in `benches/`.
