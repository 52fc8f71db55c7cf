mod common;

use common::normal_matrix;
use geu_core::uncertainty::{estimate_supervised, estimate_unsupervised, from_explicit, UncertaintyModel, VarianceFloor};
use geu_core::Dataset;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn integer_dataset(n: usize, d: usize, seed: u64) -> Dataset {
    // Small integers keep every squared difference exact in f64.
    let g = normal_matrix(n, d, seed);
    let x = g.map(|v| (v * 10.0).round());
    let labels = (0..n).map(|i| i % 2).collect();
    Dataset::new(x, labels).unwrap()
}

type Estimator = fn(&Dataset, f64, VarianceFloor) -> geu_core::Result<UncertaintyModel>;
const ESTIMATORS: [Estimator; 2] = [estimate_unsupervised, estimate_supervised];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear_in_sigma(n in 4usize..20, d in 1usize..5, seed in any::<u64>(), sigma in 0.01f64..3.0) {
        let x = integer_dataset(n, d, seed);
        for est in ESTIMATORS {
            let one = est(&x, sigma, VarianceFloor::Value(0.0)).unwrap();
            let two = est(&x, 2.0 * sigma, VarianceFloor::Value(0.0)).unwrap();
            prop_assert_eq!(two.diag_covs(), &(one.diag_covs() * 2.0));
        }
    }

    #[test]
    fn auto_floor_keeps_linearity(n in 4usize..20, d in 1usize..5, seed in any::<u64>()) {
        let x = integer_dataset(n, d, seed);
        let one = estimate_supervised(&x, 1.0, VarianceFloor::Auto).unwrap();
        let two = estimate_supervised(&x, 2.0, VarianceFloor::Auto).unwrap();
        prop_assert_eq!(two.diag_covs(), &(one.diag_covs() * 2.0));
        prop_assert!(one.diag_covs().iter().all(|&v| v >= one.floor()));
    }

    #[test]
    fn translation_invariant(n in 3usize..20, d in 1usize..5, seed in any::<u64>(), shift in -50i32..50) {
        let x = integer_dataset(n, d, seed);
        let moved = x.with_features(x.features().map(|v| v + shift as f64)).unwrap();
        for est in ESTIMATORS {
            let a = est(&x, 1.0, VarianceFloor::Value(0.0)).unwrap();
            let b = est(&moved, 1.0, VarianceFloor::Value(0.0)).unwrap();
            prop_assert_eq!(a.diag_covs(), b.diag_covs());
        }
    }

    #[test]
    fn supervised_partner_is_no_closer(n in 4usize..25, d in 1usize..5, seed in any::<u64>()) {
        let x = integer_dataset(n, d, seed);
        let u = estimate_unsupervised(&x, 1.0, VarianceFloor::Value(0.0)).unwrap();
        let s = estimate_supervised(&x, 1.0, VarianceFloor::Value(0.0)).unwrap();
        // Row sums are squared distances to the respective partner.
        for i in 0..n {
            prop_assert!(s.diag_covs().row(i).sum() >= u.diag_covs().row(i).sum());
        }
    }

    #[test]
    fn explicit_csv_round_trip(n in 1usize..10, d in 1usize..5, seed in any::<u64>()) {
        let m = normal_matrix(n, d, seed).map(|v| v * v * 1e3);
        let u = from_explicit(m.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        u.write_csv(&path).unwrap();
        let back = UncertaintyModel::read_csv(&path).unwrap();
        prop_assert_eq!(back.diag_covs(), &m);
    }
}

#[test]
fn supervised_rows_need_not_dominate_entrywise() {
    // Sample 0's nearest point (class 1) differs only in y; its same-class
    // partner is farther overall but closer in y.
    let x = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 0.0, 3.0, 2.0, 2.5]);
    let ds = Dataset::new(x, vec![0, 1, 0]).unwrap();
    let u = estimate_unsupervised(&ds, 1.0, VarianceFloor::Value(0.0)).unwrap();
    let s = estimate_supervised(&ds, 1.0, VarianceFloor::Value(0.0)).unwrap();
    assert_eq!(u.diag_covs().row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 9.0]);
    assert_eq!(s.diag_covs().row(0).iter().copied().collect::<Vec<_>>(), vec![4.0, 6.25]);
    assert!(s.diag_covs()[(0, 1)] < u.diag_covs()[(0, 1)]);
}
