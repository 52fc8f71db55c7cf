use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{GeuError, Result};
use crate::rng::rng_from_seed;

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub assignments: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldSplit {
    /// `(train, test)` indices for holding out `fold`, both ascending.
    pub fn train_test(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// FNV-1a over the assignment vector; cheap identity check for logs.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &a in &self.assignments {
            for byte in (a as u64).to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// Random k-fold split, optionally stratified by class. Fold sizes differ
/// by at most one, and within each class by at most one when stratified.
pub fn kfold(x: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<FoldSplit> {
    let n = x.n_samples();
    if k < 2 {
        return Err(GeuError::InvalidParameter(format!("fold count must be >= 2, got {k}")));
    }
    if k > n {
        return Err(GeuError::TooFewSamples { needed: k, got: n });
    }
    let mut rng = rng_from_seed(seed);
    let order: Vec<usize> = if stratified {
        let counts = x.class_counts();
        if let Some((class, &count)) = counts.iter().enumerate().find(|(_, &c)| c > 0 && c < k) {
            return Err(GeuError::ClassTooSmall { class, count, k });
        }
        let mut order = Vec::with_capacity(n);
        for class in 0..x.n_classes() {
            let mut members: Vec<usize> = (0..n).filter(|&i| x.labels()[i] == class).collect();
            members.shuffle(&mut rng);
            order.extend(members);
        }
        order
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    };
    let mut assignments = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = pos % k;
    }
    Ok(FoldSplit { assignments, k, seed })
}

/// Draw `size` indices from `pool`, allocating classes proportionally with at
/// least one sample each (largest-remainder rounding). Result is ascending.
pub fn stratified_subsample(x: &Dataset, pool: &[usize], size: usize, seed: u64) -> Result<Vec<usize>> {
    if size > pool.len() {
        return Err(GeuError::SizeTooLarge { size, available: pool.len() });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); x.n_classes()];
    for &i in pool {
        by_class[x.labels()[i]].push(i);
    }
    let present: Vec<usize> = (0..by_class.len()).filter(|&c| !by_class[c].is_empty()).collect();
    if size < present.len() {
        return Err(GeuError::SizeTooSmall { size, classes: present.len() });
    }
    let total = pool.len() as f64;
    let mut quota = vec![0usize; by_class.len()];
    let mut remainders = Vec::new();
    for &c in &present {
        let exact = size as f64 * by_class[c].len() as f64 / total;
        quota[c] = (exact.floor() as usize).max(1).min(by_class[c].len());
        remainders.push((exact - exact.floor(), c));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut assigned: usize = quota.iter().sum();
    // Trim over-allocation caused by the one-per-class minimum.
    while assigned > size {
        let c = (0..quota.len())
            .filter(|&c| quota[c] > 1)
            .max_by_key(|&c| (quota[c], std::cmp::Reverse(c)))
            .expect("size >= class count");
        quota[c] -= 1;
        assigned -= 1;
    }
    let mut idx = 0;
    while assigned < size {
        let c = remainders[idx % remainders.len()].1;
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            assigned += 1;
        }
        idx += 1;
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = Vec::with_capacity(size);
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        picked.extend_from_slice(&members[..quota[c]]);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// `sample_index,fold` file.
pub fn write_folds_csv(split: &FoldSplit, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| GeuError::io(path, e);
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "sample_index,fold").map_err(io)?;
    for (i, f) in split.assignments.iter().enumerate() {
        writeln!(out, "{i},{f}").map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn labeled(labels: Vec<usize>) -> Dataset {
        let n = labels.len();
        Dataset::new(DMatrix::from_fn(n, 1, |i, _| i as f64), labels).unwrap()
    }

    #[test]
    fn ten_samples_five_folds() {
        let ds = labeled(vec![0; 10]);
        let split = kfold(&ds, 5, 3, false).unwrap();
        assert_eq!(split.fold_sizes(), vec![2; 5]);
    }

    #[test]
    fn stratification_spreads_minority() {
        let ds = labeled([vec![0; 8], vec![1; 2]].concat());
        let split = kfold(&ds, 2, 1, true).unwrap();
        for fold in 0..2 {
            let (_, test) = split.train_test(fold);
            assert_eq!(test.iter().filter(|&&i| ds.labels()[i] == 1).count(), 1);
        }
    }

    #[test]
    fn seeded_and_reproducible() {
        let ds = labeled((0..30).map(|i| i % 3).collect());
        assert_eq!(kfold(&ds, 5, 42, true).unwrap(), kfold(&ds, 5, 42, true).unwrap());
        assert_ne!(kfold(&ds, 5, 42, true).unwrap().assignments, kfold(&ds, 5, 43, true).unwrap().assignments);
    }

    #[test]
    fn class_too_small() {
        let ds = labeled(vec![0, 0, 0, 1]);
        assert!(matches!(kfold(&ds, 2, 0, true), Err(GeuError::ClassTooSmall { class: 1, .. })));
        assert!(kfold(&ds, 2, 0, false).is_ok());
    }

    #[test]
    fn subsample_proportions_and_bounds() {
        let ds = labeled([vec![0; 30], vec![1; 10]].concat());
        let pool: Vec<usize> = (0..40).collect();
        let pick = stratified_subsample(&ds, &pool, 8, 1).unwrap();
        assert_eq!(pick.len(), 8);
        assert_eq!(pick.iter().filter(|&&i| ds.labels()[i] == 1).count(), 2);
        let tiny = stratified_subsample(&ds, &pool, 2, 1).unwrap();
        assert_eq!(tiny.iter().filter(|&&i| ds.labels()[i] == 1).count(), 1);
        assert!(matches!(stratified_subsample(&ds, &pool, 1, 1), Err(GeuError::SizeTooSmall { .. })));
        assert!(matches!(stratified_subsample(&ds, &pool, 41, 1), Err(GeuError::SizeTooLarge { .. })));
        assert_eq!(stratified_subsample(&ds, &pool, 40, 1).unwrap(), pool);
    }

    proptest::proptest! {
        #[test]
        fn fold_sizes_differ_by_at_most_one(n in 4usize..60, k in 2usize..5, seed in 0u64..1000, strat in proptest::bool::ANY) {
            let ds = labeled((0..n).map(|i| i % 2).collect());
            if let Ok(split) = kfold(&ds, k, seed, strat) {
                let sizes = split.fold_sizes();
                let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
                proptest::prop_assert!(hi - lo <= 1);
                proptest::prop_assert!(lo >= 1);
            }
        }
    }
}
