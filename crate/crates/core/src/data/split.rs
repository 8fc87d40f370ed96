//! Seeded, stratified train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Stratified split over bare labels; returns (train, test) index lists,
/// each sorted ascending.
///
/// Every class keeps at least one row on each side, so classes need at
/// least two members. Deterministic for a fixed seed.
pub fn stratified_split_indices(
    labels: &[usize],
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) || test_fraction <= 0.0 {
        return Err(Error::invalid(format!(
            "test_fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..n_classes {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            return Err(Error::EmptyClass(class));
        }
        if members.len() < 2 {
            return Err(Error::invalid(format!(
                "class {class} has fewer than 2 members; stratified split impossible"
            )));
        }
        members.shuffle(&mut rng);
        let raw = (test_fraction * members.len() as f64).round() as usize;
        let n_test = raw.clamp(1, members.len() - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified dataset split; disjoint parts whose union is the input.
pub fn split(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train_idx, test_idx) =
        stratified_split_indices(ds.labels(), ds.n_classes(), test_fraction, seed)?;
    Ok((ds.subset(&train_idx)?, ds.subset(&test_idx)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;
    use ndarray::Array2;

    fn balanced(n: usize) -> LabeledDataset {
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let labels = (0..n).map(|i| i % 2).collect();
        LabeledDataset::new(
            features,
            labels,
            Provenance::new("t", 0, serde_json::json!({})),
        )
        .unwrap()
    }

    #[test]
    fn thousand_rows_fraction_point_two() {
        let ds = balanced(1000);
        let (train, test) = split(&ds, 0.2, 7).unwrap();
        assert_eq!(train.n_rows(), 800);
        assert_eq!(test.n_rows(), 200);
        let counts = test.class_counts();
        assert_eq!(counts, vec![100, 100]);
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = balanced(100);
        let a = stratified_split_indices(ds.labels(), 2, 0.3, 5).unwrap();
        let b = stratified_split_indices(ds.labels(), 2, 0.3, 5).unwrap();
        assert_eq!(a, b);
        let c = stratified_split_indices(ds.labels(), 2, 0.3, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn smallest_stratified_case() {
        let ds = balanced(4);
        let (train, test) = split(&ds, 0.5, 1).unwrap();
        assert_eq!(train.n_rows(), 2);
        assert_eq!(test.n_rows(), 2);
        assert_eq!(train.class_counts(), vec![1, 1]);
    }

    #[test]
    fn partition_property() {
        let ds = balanced(33);
        let (train_idx, test_idx) = stratified_split_indices(ds.labels(), 2, 0.25, 11).unwrap();
        assert_eq!(train_idx.len() + test_idx.len(), 33);
        let mut all: Vec<usize> = train_idx.iter().chain(test_idx.iter()).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 33);
    }

    #[test]
    fn tiny_class_rejected() {
        let features = Array2::from_shape_fn((3, 1), |(i, _)| i as f64);
        let ds = LabeledDataset::new(
            features,
            vec![0, 0, 1],
            Provenance::new("t", 0, serde_json::json!({})),
        )
        .unwrap();
        assert!(split(&ds, 0.5, 0).is_err());
    }

    #[test]
    fn fraction_bounds_enforced() {
        let ds = balanced(10);
        assert!(split(&ds, 0.0, 0).is_err());
        assert!(split(&ds, 1.0, 0).is_err());
    }
}
