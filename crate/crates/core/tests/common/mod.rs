#![allow(dead_code)]

use geu_core::rng::rng_from_seed;
use geu_core::Dataset;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

pub fn normal_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

/// Random dataset with balanced classes (sizes differ by at most one);
/// class `c` is shifted by `c` along every axis so classes overlap but differ.
pub fn random_dataset(n: usize, d: usize, classes: usize, seed: u64) -> Dataset {
    assert!(n >= 2 * classes);
    let mut labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    labels.sort_unstable();
    let noise = normal_matrix(n, d, seed);
    let x = DMatrix::from_fn(n, d, |i, j| noise[(i, j)] + labels[i] as f64);
    Dataset::new(x, labels).unwrap()
}

pub fn random_spd(d: usize, seed: u64) -> DMatrix<f64> {
    let g = normal_matrix(d, d, seed);
    &g * g.transpose() + DMatrix::identity(d, d) * (d as f64 * 0.1)
}

pub fn random_symmetric(d: usize, seed: u64) -> DMatrix<f64> {
    let g = normal_matrix(d, d, seed);
    (&g + g.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 * a.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Angle between the lines spanned by `u` and `v`.
pub fn line_angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.dot(v).abs() / (u.norm() * v.norm())).min(1.0).acos()
}

/// Largest principal angle between the column spaces of `a` and `b`.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let s = (qa.transpose() * qb).singular_values();
    s.iter().map(|c| c.min(1.0).acos()).fold(0.0, f64::max)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
