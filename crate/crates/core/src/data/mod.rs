//! Raw microdata to model-ready dataset.
//!
//! The pipeline keeps the configured feature columns, binarizes the target at
//! its median, replaces missing markers with the column mode, and one-hot
//! encodes every feature column. [`stratified_split`] and
//! [`partition_by_school`] then derive the centralized and federated views.

mod dataset;
mod partition;
mod pipeline;
mod split;
mod synthetic;
mod table;

pub use dataset::{BinaryMatrix, Dataset, LABEL_COLUMN, PROCESSED_DELIMITER};
pub use partition::{partition_by_school, ClientPartition};
pub use pipeline::{
    binarize_target, drop_missing_target, impute_mode, one_hot_encode, preprocess, preprocess_file, ColumnCategories,
    OneHotEncoder, PipelineSpec, Preprocessed, DEFAULT_FEATURE_COLUMNS, DEFAULT_SCHOOL_COLUMN, DEFAULT_TARGET_COLUMN,
};
pub use split::{stratified_split, SplitDataset};
pub use synthetic::{generate_synthetic, SyntheticSpec, DEFAULT_CATEGORY_COUNTS};
pub use table::RawTable;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("no scores")]
    NoScores,
    #[error("cannot impute column `{0}`: no observed values")]
    CannotImpute(String),
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("column `{column}`, row {row}: {message}")]
    Schema {
        column: String,
        row: usize,
        message: String,
    },
    #[error("invalid pipeline spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("class {class} has {count} rows; at least 2 are required")]
    ClassTooSmall { class: u8, count: usize },
    #[error("fewer eligible schools than sample_size: {eligible} eligible, {requested} requested")]
    NotEnoughSchools { eligible: usize, requested: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("cannot open {}: {source}", path.display())]
    Open {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn open(path: &std::path::Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| DataError::Open {
        path: path.to_path_buf(),
        source,
    })
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;
