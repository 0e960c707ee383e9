//! Core data model for the fan-beam process dataset: 500 Hz sample frames,
//! bit-exact CSV I/O, min-max scaling and sliding-window extraction for
//! supervised forecasting.

mod csv;
mod frame;
mod mat;
mod rng;
mod scaler;
mod window;

pub use csv::{read_csv, write_csv, CSV_HEADER};
pub use frame::{Dataset, SampleFrame, Variable, REPLICATED_VARS, VAR_COUNT};
pub use mat::Mat;
pub use rng::SplitMix64;
pub use scaler::{fit_scaler, ScalerParams};
pub use window::{make_windows, split, WindowPair};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {position}: expected '{expected}', found '{found}'")]
    MissingColumn {
        position: usize,
        expected: &'static str,
        found: String,
    },
    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    MalformedRow {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("row {row}: time is not monotonically increasing at the sample rate")]
    NonMonotoneTime { row: usize },
    #[error("i/o failure")]
    IoFailure(#[from] std::io::Error),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has {len} frames, need at least {needed} for L={lookback}, H={lookahead}")]
    DatasetTooShort {
        len: usize,
        needed: usize,
        lookback: usize,
        lookahead: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
