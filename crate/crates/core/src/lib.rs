//! Coreset selection for quantum machine learning models.
//!
//! This crate implements the full pipeline for training quantum machine
//! learning models on weighted coresets instead of complete datasets:
//!
//! - [`coreset`]: greedy k-center coreset construction with per-class
//!   quotas, covering radii, and coverage-count weights.
//! - [`qsim`]: an exact statevector / density-matrix simulator used as the
//!   numerical substrate for every quantum object in the crate.
//! - [`qnn`]: a data-reuploading quantum neural network with weighted
//!   empirical risk, parameter-shift gradients, and a per-sample trainer;
//!   also hosts the variational unitary compiler.
//! - [`qkernel`]: quantum feature maps, Gram matrices, and the classical
//!   RBF kernel, with an on-disk kernel cache.
//! - [`wsvm`]: a weighted soft-margin SVM dual solver (SMO) with
//!   per-sample box constraints.
//! - [`relabel`]: geometric-difference relabeling that constructs labels
//!   favoring the quantum kernel, plus the supporting symmetric linear
//!   algebra (Jacobi eigendecomposition, PSD square root, regularized
//!   inverse).
//! - [`bounds`]: computable evaluators for the generalization-bound terms
//!   of models trained on coresets.
//! - [`data`]: dataset ingestion, PCA, feature scaling, stratified
//!   splitting, and analytic generators for the correlation-identification
//!   and unitary-compiling tasks.
//! - [`bench`]: the experiment harness (coreset-vs-random sweeps, paired
//!   seeding, aggregation, CSV persistence).

pub mod bench;
pub mod bounds;
pub mod coreset;
pub mod data;
pub mod error;
pub mod qkernel;
pub mod qnn;
pub mod qsim;
pub mod relabel;
pub mod wsvm;

pub use error::{Error, Result};
