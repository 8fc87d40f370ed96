//! Dataset ingestion, preprocessing, splitting, and the analytic data
//! generators for the quantum-correlation and unitary-compiling tasks.

mod compiling;
mod correlation;
mod dataset;
mod pca;
mod scale;
mod split;
mod synthetic;

pub use compiling::{
    gen_compiling_dataset, random_target_unitary, CompileDatasetFile, StatePairDataset,
    TargetUnitary,
};
pub use correlation::{
    correlation_label, correlation_state, gen_correlation_dataset, load_correlation_json,
    save_correlation_json, CorrelationClass, CorrelationSample,
};
pub use dataset::{
    dataset_sha256, load_csv, load_dataset_json, save_csv, save_dataset_json, FeatureVector,
    LabeledDataset, Provenance,
};
pub use pca::{pca_fit_transform, PcaModel};
pub use scale::{scale_features, ScalerParams};
pub use split::{split, stratified_split_indices};
pub use synthetic::{gen_gaussian_mixture, GaussianMixtureConfig};
