use std::path::PathBuf;

use geu_core::data::{
    add_noise, decision_grid, kfold, load_csv, synthetic_two_class, write_csv, ColumnRef, GridBounds, LoadOptions,
};
use geu_core::{fit, Dataset, FitParams, KnnModel, Method, Ridge};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn wdbc_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wdbc.csv")
}

#[test]
fn wdbc_loads_with_id_dropped() {
    let opts = LoadOptions {
        label_column: ColumnRef::Name("diagnosis".into()),
        drop_columns: vec![ColumnRef::Name("id".into())],
        ..LoadOptions::default()
    };
    let ds = load_csv(wdbc_path(), &opts).unwrap();
    assert_eq!((ds.n_samples(), ds.n_features(), ds.n_classes()), (569, 30, 2));
    assert_eq!(ds.class_names().unwrap(), ["B", "M"]);
    assert_eq!(ds.class_counts(), vec![357, 212]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn csv_round_trip(n in 2usize..20, d in 1usize..5, seed in any::<u64>()) {
        let x = synthetic_two_class(n, 1.0, 3.7, seed).unwrap();
        let x = Dataset::new(DMatrix::from_fn(2 * n, d, |i, j| x.features()[(i, j % 2)] * (j + 1) as f64 / 3.0), x.labels().to_vec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_csv(&x, &path).unwrap();
        let back = load_csv(&path, &LoadOptions::default()).unwrap();
        prop_assert_eq!(back.features(), x.features());
        prop_assert_eq!(back.labels(), x.labels());
    }

    #[test]
    fn noise_preserves_shape_and_labels(level in 0.0f64..1.0, seed in any::<u64>()) {
        let x = synthetic_two_class(10, 2.0, 1.0, seed).unwrap();
        let y = add_noise(&x, level, seed).unwrap();
        prop_assert_eq!(y.features().shape(), x.features().shape());
        prop_assert_eq!(y.labels(), x.labels());
    }
}

#[test]
fn separated_blobs_leave_one_out_is_perfect() {
    let x = synthetic_two_class(25, 10.0, 0.1, 3).unwrap();
    let n = x.n_samples();
    for i in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let train = x.subset(&rest);
        let knn = KnnModel::new(train.features(), train.labels().to_vec(), 1).unwrap();
        assert_eq!(knn.predict(&x.features().rows(i, 1).into_owned()).unwrap()[0], x.labels()[i]);
    }
}

#[test]
fn folds_are_fixed_by_seed() {
    let x = synthetic_two_class(23, 1.0, 1.0, 0).unwrap();
    let a = kfold(&x, 5, 9, true).unwrap();
    assert_eq!(a.assignments, kfold(&x, 5, 9, true).unwrap().assignments);
    assert_ne!(a.assignments, kfold(&x, 5, 10, true).unwrap().assignments);
}

/// Labels of a 4-connected component flood fill from `start`.
fn component(grid: &[usize], res: usize, start: usize) -> Vec<bool> {
    let mut seen = vec![false; grid.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(p) = stack.pop() {
        let (x, y) = (p % res, p / res);
        let mut nbrs = Vec::new();
        if x > 0 { nbrs.push(p - 1); }
        if x + 1 < res { nbrs.push(p + 1); }
        if y > 0 { nbrs.push(p - res); }
        if y + 1 < res { nbrs.push(p + res); }
        for q in nbrs {
            if !seen[q] && grid[q] == grid[p] {
                seen[q] = true;
                stack.push(q);
            }
        }
    }
    seen
}

#[test]
fn separable_blobs_give_two_connected_regions() {
    let x: Dataset = synthetic_two_class(20, 8.0, 0.5, 1).unwrap();
    let model = fit(&x, Method::Mfa, None, &FitParams { d: 1, k1: 3, k2: 10, ridge: Ridge::Auto }).unwrap();
    let knn = KnnModel::new(&model.project(&x).unwrap(), x.labels().to_vec(), 1).unwrap();
    let res = 60;
    let grid = decision_grid(&model, &knn, GridBounds::around(x.features(), 0.1), res).unwrap();
    for label in [0, 1] {
        let cells: Vec<usize> = (0..res * res).filter(|&p| grid.labels[p] == label).collect();
        assert!(!cells.is_empty());
        let reached = component(&grid.labels, res, cells[0]);
        assert!(cells.iter().all(|&p| reached[p]), "label {label} region is split");
    }
}
