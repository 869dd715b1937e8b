//! Transaction data: raw loading, feature engineering, sampling and splits.

mod engineer;
mod raw;
mod sampling;
mod stats;
mod synth;

use thiserror::Error;

pub use engineer::{
    engineer, write_engineered_csv, EngineeredSample, FraudRateEncoder, GroupKey, RateTables,
    FEATURE_NAMES, NUM_FEATURES,
};
pub use raw::{load_raw, read_raw, write_raw, RawTransaction, RAW_COLUMNS};
pub use sampling::{
    kfold, split, subsample_to_ratio, DatasetSplit, Standardizer, CLIP, DEFAULT_TEST_FRACTION,
};
pub use stats::{cramers_v, pearson_corr};
pub use synth::synth_generate;

/// One rejected input row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("{} invalid row(s); first: {}", .0.len(), .0[0])]
    InvalidRows(Vec<RowError>),
    #[error("fit set is empty")]
    EmptyFitSet,
    #[error("need equal lengths, got {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("degenerate contingency table ({rows}×{cols})")]
    Degenerate { rows: usize, cols: usize },
    #[error("anomaly ratio must lie in (0, 1], got {0}")]
    BadRatio(f64),
    #[error("insufficient {kind} samples: need {needed}, have {have}")]
    InsufficientPool {
        kind: &'static str,
        needed: usize,
        have: usize,
    },
    #[error("cannot split {n} samples: {reason}")]
    BadSplit { n: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
