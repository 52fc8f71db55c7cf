//! Symmetric-definite generalized eigenproblems `A v = λ B v`.
//!
//! Every method in this crate reduces to such a pencil. The solver factors
//! `B + ridge·I = L Lᵀ`, solves the standard symmetric problem on
//! `L⁻¹ A L⁻ᵀ` and maps the eigenvectors back with `v = L⁻ᵀ u`, so the
//! returned vectors are B-orthonormal up to roundoff.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{GeuError, Result};

/// Relative asymmetry accepted by [`SymmetricPencil::new`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Scale factor of the automatic ridge, relative to `trace(b) / D`.
pub const AUTO_RIDGE_FACTOR: f64 = 1e-8;

/// Diagonal loading applied to the constraint matrix before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Ridge {
    /// `1e-8 · trace(b) / D`.
    #[default]
    Auto,
    Value(f64),
}

impl Ridge {
    pub fn resolve(self, b: &DMatrix<f64>) -> f64 {
        match self {
            Ridge::Auto => auto_ridge(b),
            Ridge::Value(v) => v,
        }
    }
}

pub fn auto_ridge(b: &DMatrix<f64>) -> f64 {
    let dim = b.nrows().max(1) as f64;
    (AUTO_RIDGE_FACTOR * b.trace() / dim).max(0.0)
}

/// A pair `(a, b)` of equally sized symmetric matrices.
#[derive(Debug, Clone)]
pub struct SymmetricPencil {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl SymmetricPencil {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || !b.is_square() || a.nrows() == 0 || a.shape() != b.shape() {
            return Err(GeuError::DimensionMismatch(format!(
                "pencil matrices must be square and equal-sized, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        check_symmetric(&a)?;
        check_symmetric(&b)?;
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax();
    let asymmetry = (m - m.transpose()).amax();
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(GeuError::NotSymmetric { asymmetry, scale });
    }
    Ok(())
}

/// All eigenpairs of a pencil, ascending by eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub eigenvalues: DVector<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
    /// Ridge actually added to `b`.
    pub ridge: f64,
}

/// Solve `a v = λ (b + ridge·I) v` for all eigenpairs.
///
/// Eigenvectors are B-orthonormal and sign-normalized so that the entry of
/// largest magnitude is positive.
pub fn solve_pencil(pencil: &SymmetricPencil, ridge: Ridge) -> Result<EigenSolution> {
    let ridge = ridge.resolve(&pencil.b);
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(GeuError::InvalidParameter(format!("ridge must be finite and >= 0, got {ridge}")));
    }
    let dim = pencil.dim();
    let mut b = pencil.b.clone();
    for i in 0..dim {
        b[(i, i)] += ridge;
    }
    let b_reg = b.clone();
    let l = Cholesky::new(b)
        .ok_or(GeuError::NotPositiveDefinite { ridge })?
        .unpack();
    if (0..dim).any(|i| !(l[(i, i)] > 0.0)) {
        return Err(GeuError::NotPositiveDefinite { ridge });
    }

    // C = L⁻¹ A L⁻ᵀ
    let y = l
        .solve_lower_triangular(&pencil.a)
        .ok_or(GeuError::NotPositiveDefinite { ridge })?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(GeuError::NotPositiveDefinite { ridge })?;
    let c = (&c + c.transpose()) * 0.5;

    let eig = SymmetricEigen::new(c);
    let lt = l.transpose();
    let raw_vectors = lt
        .solve_upper_triangular(&eig.eigenvectors)
        .ok_or(GeuError::NotPositiveDefinite { ridge })?;
    // Back-substitution loses B-orthonormality in proportion to cond(B);
    // one Newton-Schulz step V(3I - VᵀBV)/2 restores it quadratically.
    let gram = raw_vectors.transpose() * &b_reg * &raw_vectors;
    let raw_vectors = &raw_vectors * (DMatrix::identity(dim, dim) * 1.5 - gram * 0.5);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = raw_vectors.column(src).clone_owned();
        normalize_sign(&mut col);
        eigenvectors.set_column(dst, &col);
    }
    Ok(EigenSolution { eigenvalues, eigenvectors, ridge })
}

/// Flip `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn normalize_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.len() > 0 && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Number of eigenvalues of the symmetric matrix `m` above `rel_tol · max|λ|`.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    if !m.is_square() {
        return Err(GeuError::DimensionMismatch(format!("expected a square matrix, got {:?}", m.shape())));
    }
    if !(rel_tol > 0.0) {
        return Err(GeuError::InvalidParameter(format!("rel_tol must be > 0, got {rel_tol}")));
    }
    if m.nrows() == 0 {
        return Ok(0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let values = SymmetricEigen::new(sym).eigenvalues;
    let max = values.amax();
    if max == 0.0 {
        return Ok(0);
    }
    Ok(values.iter().filter(|&&v| v > rel_tol * max).count())
}
