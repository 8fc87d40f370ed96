//! Experiment harness: coreset-vs-random sweeps with paired seeds,
//! metric aggregation, and CSV persistence.
//!
//! Each sweep point runs both selections with the same trial seed so the
//! comparison is paired. Random baselines are uniform subsets redrawn
//! until every class is present (the models need all classes to train).

mod compile;
mod correlation;
mod synthetic;

pub use compile::{run_compile, CompileBenchConfig};
pub use correlation::{run_correlation, CorrelationBenchConfig};
pub use synthetic::{build_synthetic_dataset, run_synthetic, SyntheticBenchConfig};

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Coreset,
    Random,
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selection::Coreset => write!(f, "coreset"),
            Selection::Random => write!(f, "random"),
        }
    }
}

/// One (task, selection, size, trial) measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub task: String,
    pub selection: Selection,
    pub size: usize,
    pub zeta: f64,
    pub trial: usize,
    pub seed: u64,
    /// Test accuracy, or the compile success fraction.
    pub accuracy: f64,
    pub sel_ms: f64,
    pub kernel_ms: f64,
    pub train_ms: f64,
    pub coreset_error: f64,
    pub bound_sum: f64,
}

/// Training sizes given directly or as prune rates of the training set.
#[derive(Debug, Clone)]
pub enum SizeSpec {
    Sizes(Vec<usize>),
    Zetas(Vec<f64>),
}

impl SizeSpec {
    pub fn from_options(sizes: &Option<Vec<usize>>, zetas: &Option<Vec<f64>>) -> Result<SizeSpec> {
        match (sizes, zetas) {
            (Some(s), None) if !s.is_empty() => Ok(SizeSpec::Sizes(s.clone())),
            (None, Some(z)) if !z.is_empty() => {
                if z.iter().any(|&z| !(z > 0.0 && z <= 1.0)) {
                    return Err(Error::invalid("prune rates must lie in (0, 1]"));
                }
                Ok(SizeSpec::Zetas(z.clone()))
            }
            _ => Err(Error::invalid(
                "exactly one of `sizes` or `zetas` must be given and nonempty",
            )),
        }
    }

    /// Concrete subset sizes against a training-pool size.
    pub fn resolve(&self, n_train: usize) -> Result<Vec<usize>> {
        let sizes: Vec<usize> = match self {
            SizeSpec::Sizes(s) => s.clone(),
            SizeSpec::Zetas(z) => z
                .iter()
                .map(|&z| ((z * n_train as f64).round() as usize).clamp(1, n_train))
                .collect(),
        };
        if sizes.iter().any(|&s| s == 0 || s > n_train) {
            return Err(Error::invalid(format!(
                "subset sizes {sizes:?} must lie in 1..={n_train}"
            )));
        }
        Ok(sizes)
    }
}

/// Per-trial seed derivation: deterministic, well-spread.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Uniform subset of the given size with every class present; redrawn a
/// bounded number of times before giving up.
pub fn random_subset_indices(
    labels: &[usize],
    n_classes: usize,
    size: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if size < n_classes || size > labels.len() {
        return Err(Error::invalid(format!(
            "subset size {size} outside n_classes..=N"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..labels.len()).collect();
    for _ in 0..100 {
        pool.shuffle(&mut rng);
        let mut pick: Vec<usize> = pool[..size].to_vec();
        pick.sort_unstable();
        let mut seen = vec![false; n_classes];
        for &i in &pick {
            seen[labels[i]] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(pick);
        }
    }
    Err(Error::invalid(
        "could not draw a random subset covering every class",
    ))
}

/// One-sided sign test: probability of at least the observed number of
/// positive differences under a fair coin; zero differences are dropped.
pub fn sign_test_p(diffs: &[f64]) -> f64 {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return 1.0;
    }
    let k = nonzero.iter().filter(|d| **d > 0.0).count();
    let mut tail = 0.0f64;
    for i in k..=n {
        tail += binomial(n, i);
    }
    tail / 2.0f64.powi(n as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Aggregated cell of the sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub task: String,
    pub selection: Selection,
    pub size: usize,
    pub zeta: f64,
    pub trials: usize,
    pub mean_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
    pub mean_sel_ms: f64,
    pub mean_kernel_ms: f64,
    pub mean_train_ms: f64,
    pub mean_coreset_error: f64,
}

/// Group results by (task, selection, size) and summarize.
pub fn aggregate(results: &[RunResult]) -> Result<Vec<SummaryRow>> {
    if results.is_empty() {
        return Err(Error::invalid("no results to aggregate"));
    }
    let mut keys: Vec<(String, Selection, usize)> = results
        .iter()
        .map(|r| (r.task.clone(), r.selection, r.size))
        .collect();
    keys.sort_by(|a, b| (&a.0, format!("{}", a.1), a.2).cmp(&(&b.0, format!("{}", b.1), b.2)));
    keys.dedup();

    let mut rows = Vec::with_capacity(keys.len());
    for (task, selection, size) in keys {
        let cell: Vec<&RunResult> = results
            .iter()
            .filter(|r| r.task == task && r.selection == selection && r.size == size)
            .collect();
        let n = cell.len() as f64;
        let mean = |f: &dyn Fn(&RunResult) -> f64| cell.iter().map(|r| f(r)).sum::<f64>() / n;
        rows.push(SummaryRow {
            task: task.clone(),
            selection,
            size,
            zeta: mean(&|r| r.zeta),
            trials: cell.len(),
            mean_accuracy: mean(&|r| r.accuracy),
            min_accuracy: cell.iter().map(|r| r.accuracy).fold(f64::INFINITY, f64::min),
            max_accuracy: cell
                .iter()
                .map(|r| r.accuracy)
                .fold(f64::NEG_INFINITY, f64::max),
            mean_sel_ms: mean(&|r| r.sel_ms),
            mean_kernel_ms: mean(&|r| r.kernel_ms),
            mean_train_ms: mean(&|r| r.train_ms),
            mean_coreset_error: mean(&|r| r.coreset_error),
        });
    }
    Ok(rows)
}

pub fn write_results_csv(mut w: impl Write, results: &[RunResult]) -> Result<()> {
    writeln!(
        w,
        "task,selection,size,zeta,trial,seed,accuracy,sel_ms,kernel_ms,train_ms,coreset_error,bound_sum"
    )?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.task,
            r.selection,
            r.size,
            r.zeta,
            r.trial,
            r.seed,
            r.accuracy,
            r.sel_ms,
            r.kernel_ms,
            r.train_ms,
            r.coreset_error,
            r.bound_sum
        )?;
    }
    Ok(())
}

pub fn write_summary_csv(mut w: impl Write, rows: &[SummaryRow]) -> Result<()> {
    writeln!(
        w,
        "task,selection,size,zeta,trials,mean_accuracy,min_accuracy,max_accuracy,mean_sel_ms,mean_kernel_ms,mean_train_ms,mean_coreset_error"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.task,
            r.selection,
            r.size,
            r.zeta,
            r.trials,
            r.mean_accuracy,
            r.min_accuracy,
            r.max_accuracy,
            r.mean_sel_ms,
            r.mean_kernel_ms,
            r.mean_train_ms,
            r.mean_coreset_error
        )?;
    }
    Ok(())
}

/// Top-level experiment description, tagged by task.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Synthetic(SyntheticBenchConfig),
    Correlation(CorrelationBenchConfig),
    Compile(CompileBenchConfig),
}

impl ExperimentConfig {
    pub fn run(&self, jobs: usize) -> Result<Vec<RunResult>> {
        match self {
            ExperimentConfig::Synthetic(cfg) => run_synthetic(cfg, jobs),
            ExperimentConfig::Correlation(cfg) => run_correlation(cfg, jobs),
            ExperimentConfig::Compile(cfg) => run_compile(cfg, jobs),
        }
    }
}

/// Run one closure per (size, trial) cell, optionally on a rayon pool,
/// merging deterministically by (size, trial) key.
pub(crate) fn run_cells<F>(sizes: &[usize], trials: usize, jobs: usize, cell: F) -> Result<Vec<RunResult>>
where
    F: Fn(usize, usize) -> Result<Vec<RunResult>> + Sync,
{
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for &size in sizes {
        for trial in 0..trials {
            keys.push((size, trial));
        }
    }
    let mut chunks: Vec<((usize, usize), Vec<RunResult>)> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Numerical(e.to_string()))?;
        pool.install(|| {
            keys.par_iter()
                .map(|&(size, trial)| cell(size, trial).map(|r| ((size, trial), r)))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        keys.iter()
            .map(|&(size, trial)| cell(size, trial).map(|r| ((size, trial), r)))
            .collect::<Result<Vec<_>>>()?
    };
    chunks.sort_by_key(|(key, _)| *key);
    Ok(chunks.into_iter().flat_map(|(_, r)| r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(selection: Selection, size: usize, trial: usize, acc: f64) -> RunResult {
        RunResult {
            task: "synthetic".into(),
            selection,
            size,
            zeta: size as f64 / 100.0,
            trial,
            seed: trial as u64,
            accuracy: acc,
            sel_ms: 1.0,
            kernel_ms: 2.0,
            train_ms: 3.0,
            coreset_error: 0.1,
            bound_sum: 5.0,
        }
    }

    #[test]
    fn aggregate_single_and_known_values() {
        let rows = aggregate(&[result(Selection::Coreset, 10, 0, 0.8)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_accuracy, 0.8);
        assert_eq!(rows[0].min_accuracy, 0.8);
        assert_eq!(rows[0].max_accuracy, 0.8);

        let rows = aggregate(&[
            result(Selection::Coreset, 10, 0, 0.5),
            result(Selection::Coreset, 10, 1, 0.6),
            result(Selection::Coreset, 10, 2, 0.7),
        ])
        .unwrap();
        assert!((rows[0].mean_accuracy - 0.6).abs() < 1e-15);
        assert_eq!(rows[0].min_accuracy, 0.5);
        assert_eq!(rows[0].max_accuracy, 0.7);
    }

    #[test]
    fn aggregate_row_count_is_cells() {
        let mut results = Vec::new();
        for &size in &[10usize, 20] {
            for sel in [Selection::Coreset, Selection::Random] {
                for trial in 0..3 {
                    results.push(result(sel, size, trial, 0.5));
                }
            }
        }
        let rows = aggregate(&results).unwrap();
        assert_eq!(rows.len(), 4); // |selections| x |sizes|
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn csv_headers_and_shape() {
        let results = vec![result(Selection::Random, 5, 0, 0.25)];
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &results).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "task,selection,size,zeta,trial,seed,accuracy,sel_ms,kernel_ms,train_ms,coreset_error,bound_sum"
        ));
        assert_eq!(text.lines().count(), 2);

        let rows = aggregate(&results).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn sign_test_values() {
        // All positive: p = 2^-n.
        assert!((sign_test_p(&[1.0, 0.5, 0.1]) - 0.125).abs() < 1e-12);
        // Mixed: k=1 of n=2 -> 3/4.
        assert!((sign_test_p(&[1.0, -1.0]) - 0.75).abs() < 1e-12);
        // Zeros dropped; empty -> 1.
        assert_eq!(sign_test_p(&[0.0, 0.0]), 1.0);
    }

    #[test]
    fn random_subset_covers_classes() {
        let labels = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let idx = random_subset_indices(&labels, 2, 3, 7).unwrap();
        assert_eq!(idx.len(), 3);
        let classes: std::collections::HashSet<usize> =
            idx.iter().map(|&i| labels[i]).collect();
        assert_eq!(classes.len(), 2);
        // Deterministic under seed.
        assert_eq!(idx, random_subset_indices(&labels, 2, 3, 7).unwrap());
    }

    #[test]
    fn size_spec_resolution() {
        let spec = SizeSpec::from_options(&None, &Some(vec![0.25, 0.5])).unwrap();
        assert_eq!(spec.resolve(100).unwrap(), vec![25, 50]);
        let spec = SizeSpec::from_options(&Some(vec![10, 20]), &None).unwrap();
        assert_eq!(spec.resolve(100).unwrap(), vec![10, 20]);
        assert!(SizeSpec::from_options(&None, &None).is_err());
        assert!(SizeSpec::from_options(&Some(vec![1]), &Some(vec![0.5])).is_err());
        assert!(spec.resolve(15).is_err()); // 20 > 15
    }

    #[test]
    fn trial_seeds_distinct() {
        let a = trial_seed(42, 0);
        let b = trial_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, trial_seed(42, 0));
    }
}
