//! Noise-injection validation and corpus scanning.

pub mod corpus;
pub mod metrics;
pub mod noise;
pub mod render;
pub mod synthetic;
pub mod validation;

pub use corpus::{
    flag_table, scan_corpus, FlagRow, FlagTable, ScanReport, ScoredReport, UnscorableReport,
    DEFAULT_LEVELS,
};
pub use metrics::{ConfusionMatrix, F1PerClass};
pub use noise::{inject_noise, NoiseSpec, SignPolicy};
pub use synthetic::SyntheticCorpus;
pub use validation::{
    run_validation, DatasetVerdict, ExcludedDataset, Truth, ValidationConfig, ValidationResult,
    DEFAULT_THRESHOLD,
};
