use std::path::PathBuf;

use chrono::NaiveDate;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{file}: {reason}")]
    Format { file: String, reason: String },

    #[error("{file}: row {row}, column {column:?}: cannot parse {value:?}")]
    BadCell {
        file: String,
        row: usize,
        column: String,
        value: String,
    },

    #[error(
        "date {date} is present in the {present_in} file but missing from the {missing_from} file"
    )]
    DateMismatch {
        date: String,
        present_in: &'static str,
        missing_from: &'static str,
    },

    #[error("duplicate row for {country} on {date}")]
    DuplicateRow { country: String, date: NaiveDate },

    #[error("unknown region label {0:?}")]
    UnknownRegion(String),

    #[error("cannot impute {field} in region {region:?}: no country in the region reports it")]
    NoDonors { region: String, field: &'static str },

    #[error("{index} score {value} is outside its range [{min}, {max}]")]
    ScoreOutOfRange {
        index: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("alias table: {0}")]
    Alias(String),

    #[error(
        "design matrix is rank deficient: column {0:?} is collinear with the preceding columns"
    )]
    RankDeficient(String),

    #[error("need more observations than columns (n = {n}, k = {k})")]
    TooFewObservations { n: usize, k: usize },

    #[error("cluster-robust covariance needs at least two clusters, got {0}")]
    TooFewClusters(usize),

    #[error("first significant digit is undefined for {0}")]
    NonPositive(i64),

    #[error("digit histogram is empty")]
    EmptyHistogram,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
