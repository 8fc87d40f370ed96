//! Greedy k-center coreset construction with per-class quotas, covering
//! radii, and coverage-count weights, plus the empirical coreset-error
//! measurement.
//!
//! Construction runs independently per class: the first center is a seeded
//! uniform pick, every following center is the class point farthest from
//! its nearest already-chosen center (ties broken toward the smallest
//! index). The per-class covering radius is the largest nearest-center
//! distance, and a center's weight counts the same-class points inside
//! that radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::qsim::{hilbert_schmidt_distance, trace_distance, DensityMatrix, StateVector};

/// Point-space distance used for selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Euclidean distance between feature vectors.
    Euclidean,
    /// Frobenius distance between density matrices.
    HilbertSchmidt,
    /// sqrt(1 - |<x|y>|^2) between unit statevectors.
    Infidelity,
}

impl Metric {
    pub fn features(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Metric::Euclidean => Ok(a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()),
            other => Err(Error::invalid(format!(
                "{other:?} is not defined for feature vectors"
            ))),
        }
    }
}

/// How weighted averages are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Divide by the sum of weights; the consistent estimator of the full
    /// empirical risk (the default).
    #[default]
    Normalized,
    /// Divide by the coreset size, with raw coverage counts.
    Paper,
}

/// A selected, weighted coreset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coreset {
    /// Indices into the source dataset, grouped by class in class order.
    pub center_indices: Vec<usize>,
    /// Coverage counts, aligned with `center_indices`.
    pub weights: Vec<u64>,
    /// Covering radius per class.
    pub class_radii: Vec<f64>,
    /// Overall covering radius: the per-class maximum.
    pub radius: f64,
    /// Selected size over source size.
    pub prune_rate: f64,
    pub seed: u64,
    pub metric: Metric,
}

impl Coreset {
    pub fn len(&self) -> usize {
        self.center_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_indices.is_empty()
    }

    pub fn weight_sum(&self) -> u64 {
        self.weights.iter().sum()
    }
}

fn class_members(labels: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    let mut members = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= n_classes {
            return Err(Error::invalid(format!(
                "label {l} out of range for {n_classes} classes"
            )));
        }
        members[l].push(i);
    }
    for (c, m) in members.iter().enumerate() {
        if m.is_empty() {
            return Err(Error::EmptyClass(c));
        }
    }
    Ok(members)
}

/// Per-class center quotas: ceil(|S_j|/|S| * k), clamped at the class
/// size, with any clamped surplus pushed to the largest class that still
/// has room (ties toward the smaller index).
pub(crate) fn class_quotas(class_sizes: &[usize], total: usize, k: usize) -> Vec<usize> {
    let mut quotas: Vec<usize> = class_sizes
        .iter()
        .map(|&n| (n * k).div_ceil(total))
        .collect();
    let mut surplus = 0usize;
    for (q, &n) in quotas.iter_mut().zip(class_sizes.iter()) {
        if *q > n {
            surplus += *q - n;
            *q = n;
        }
    }
    while surplus > 0 {
        let candidate = (0..quotas.len())
            .filter(|&c| quotas[c] < class_sizes[c])
            .max_by_key(|&c| class_sizes[c]);
        match candidate {
            Some(c) => {
                let room = class_sizes[c] - quotas[c];
                let take = room.min(surplus);
                quotas[c] += take;
                surplus -= take;
            }
            None => break,
        }
    }
    quotas
}

/// Greedy k-center over an index-addressed point set.
///
/// `dist(i, j)` must be a symmetric metric over point indices. When
/// `forced_first` is given it overrides the seeded first pick per class
/// (test hook).
pub(crate) fn greedy_core<D>(
    n_points: usize,
    labels: &[usize],
    n_classes: usize,
    k: usize,
    dist: &D,
    metric: Metric,
    seed: u64,
    forced_first: Option<&[usize]>,
) -> Result<Coreset>
where
    D: Fn(usize, usize) -> f64 + ?Sized,
{
    if labels.len() != n_points {
        return Err(Error::DimMismatch {
            expected: n_points,
            got: labels.len(),
        });
    }
    if k < n_classes || k > n_points {
        return Err(Error::invalid(format!(
            "k = {k} outside n_classes ({n_classes}) ..= N_t ({n_points})"
        )));
    }
    let members = class_members(labels, n_classes)?;
    let sizes: Vec<usize> = members.iter().map(|m| m.len()).collect();
    let quotas = class_quotas(&sizes, n_points, k);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut center_indices: Vec<usize> = Vec::new();
    let mut class_radii = vec![0.0f64; n_classes];
    let mut per_class_centers: Vec<Vec<usize>> = Vec::with_capacity(n_classes);

    for class in 0..n_classes {
        let pts = &members[class];
        // One draw per class regardless of the quota, so the pick sequence
        // is identical across different k.
        let pick = rng.random_range(0..pts.len());
        let first = match forced_first {
            Some(f) => f[class],
            None => pts[pick],
        };
        if labels[first] != class {
            return Err(Error::invalid(format!(
                "forced first center {first} is not in class {class}"
            )));
        }

        let mut selected = vec![first];
        let mut nearest: Vec<f64> = pts.iter().map(|&p| dist(p, first)).collect();
        while selected.len() < quotas[class] {
            let mut best = 0usize;
            for (i, &d) in nearest.iter().enumerate() {
                if d > nearest[best] {
                    best = i;
                }
            }
            let new_center = pts[best];
            selected.push(new_center);
            for (i, &p) in pts.iter().enumerate() {
                let d = dist(p, new_center);
                if d < nearest[i] {
                    nearest[i] = d;
                }
            }
        }
        class_radii[class] = nearest.iter().copied().fold(0.0, f64::max);
        per_class_centers.push(selected.clone());
        center_indices.extend(selected);
    }

    // Coverage weights with the per-class radius.
    let mut weights = Vec::with_capacity(center_indices.len());
    for (class, selected) in per_class_centers.iter().enumerate() {
        let radius = class_radii[class];
        for &s in selected {
            let count = members[class]
                .iter()
                .filter(|&&p| dist(p, s) <= radius)
                .count() as u64;
            weights.push(count);
        }
    }

    let radius = class_radii.iter().copied().fold(0.0, f64::max);
    let size = center_indices.len();
    Ok(Coreset {
        center_indices,
        weights,
        class_radii,
        radius,
        prune_rate: size as f64 / n_points as f64,
        seed,
        metric,
    })
}

/// Greedy k-center coreset over a feature dataset (Euclidean metric).
pub fn greedy_k_center(
    ds: &LabeledDataset,
    k: usize,
    metric: Metric,
    seed: u64,
) -> Result<Coreset> {
    if metric != Metric::Euclidean {
        return Err(Error::invalid(
            "feature datasets use the euclidean metric; hilbert-schmidt and infidelity apply to quantum inputs",
        ));
    }
    let feats = ds.features();
    let dist = move |i: usize, j: usize| {
        feats
            .row(i)
            .iter()
            .zip(feats.row(j).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    greedy_core(
        ds.n_rows(),
        ds.labels(),
        ds.n_classes(),
        k,
        &dist,
        metric,
        seed,
        None,
    )
}

/// Greedy k-center over density matrices (Hilbert-Schmidt metric).
pub fn greedy_k_center_densities(
    states: &[DensityMatrix],
    labels: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
) -> Result<Coreset> {
    let dist = move |i: usize, j: usize| {
        hilbert_schmidt_distance(&states[i], &states[j]).expect("uniform dimensions")
    };
    greedy_core(
        states.len(),
        labels,
        n_classes,
        k,
        &dist,
        Metric::HilbertSchmidt,
        seed,
        None,
    )
}

/// Greedy k-center over unit statevectors (infidelity metric).
pub fn greedy_k_center_states(
    states: &[StateVector],
    labels: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
) -> Result<Coreset> {
    let dist = move |i: usize, j: usize| {
        trace_distance(&states[i], &states[j]).expect("uniform dimensions")
    };
    greedy_core(
        states.len(),
        labels,
        n_classes,
        k,
        &dist,
        Metric::Infidelity,
        seed,
        None,
    )
}

/// Covering radius of one class: the largest distance from a class point
/// to its nearest same-class center.
pub fn covering_radius(
    ds: &LabeledDataset,
    centers: &[usize],
    metric: Metric,
    class: usize,
) -> Result<f64> {
    let feats = ds.features();
    let dist = move |i: usize, j: usize| {
        metric
            .features(
                feats.row(i).to_slice().expect("contiguous rows"),
                feats.row(j).to_slice().expect("contiguous rows"),
            )
            .expect("euclidean features")
    };
    covering_radius_core(ds.labels(), centers, class, &dist)
}

pub(crate) fn covering_radius_core<D>(
    labels: &[usize],
    centers: &[usize],
    class: usize,
    dist: &D,
) -> Result<f64>
where
    D: Fn(usize, usize) -> f64 + ?Sized,
{
    let class_centers: Vec<usize> = centers
        .iter()
        .copied()
        .filter(|&c| labels[c] == class)
        .collect();
    if class_centers.is_empty() {
        return Err(Error::EmptyClass(class));
    }
    let mut radius = 0.0f64;
    for (p, &l) in labels.iter().enumerate() {
        if l != class {
            continue;
        }
        let nearest = class_centers
            .iter()
            .map(|&c| dist(p, c))
            .fold(f64::INFINITY, f64::min);
        radius = radius.max(nearest);
    }
    Ok(radius)
}

/// Coverage counts for explicit centers and per-class radii.
pub fn compute_weights(
    ds: &LabeledDataset,
    centers: &[usize],
    class_radii: &[f64],
    metric: Metric,
) -> Result<Vec<u64>> {
    if class_radii.len() != ds.n_classes() {
        return Err(Error::DimMismatch {
            expected: ds.n_classes(),
            got: class_radii.len(),
        });
    }
    let feats = ds.features();
    let mut weights = Vec::with_capacity(centers.len());
    for &s in centers {
        let class = ds.labels()[s];
        let radius = class_radii[class];
        let mut count = 0u64;
        for (p, &l) in ds.labels().iter().enumerate() {
            if l != class {
                continue;
            }
            let d = metric.features(
                feats.row(p).to_slice().expect("contiguous rows"),
                feats.row(s).to_slice().expect("contiguous rows"),
            )?;
            if d <= radius {
                count += 1;
            }
        }
        weights.push(count);
    }
    Ok(weights)
}

/// Weighted mean of coreset losses under the given mode.
pub fn weighted_mean(losses: &[f64], weights: &[u64], mode: WeightMode) -> Result<f64> {
    if losses.is_empty() {
        return Err(Error::invalid("empty loss sequence"));
    }
    if losses.len() != weights.len() {
        return Err(Error::DimMismatch {
            expected: losses.len(),
            got: weights.len(),
        });
    }
    let weighted: f64 = losses
        .iter()
        .zip(weights.iter())
        .map(|(&l, &g)| l * g as f64)
        .sum();
    let z = match mode {
        WeightMode::Paper => losses.len() as f64,
        WeightMode::Normalized => {
            let sum: u64 = weights.iter().sum();
            if sum == 0 {
                return Err(Error::invalid("weights sum to zero"));
            }
            sum as f64
        }
    };
    Ok(weighted / z)
}

/// |mean(full losses) - weighted mean(coreset losses)|.
pub fn coreset_error(
    full_losses: &[f64],
    coreset_losses: &[f64],
    weights: &[u64],
    mode: WeightMode,
) -> Result<f64> {
    if full_losses.is_empty() {
        return Err(Error::invalid("empty loss sequence"));
    }
    let full = full_losses.iter().sum::<f64>() / full_losses.len() as f64;
    let weighted = weighted_mean(coreset_losses, weights, mode)?;
    Ok((full - weighted).abs())
}
