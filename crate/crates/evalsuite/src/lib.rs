//! Evaluation of generated trajectories against recorded ones.
//!
//! Three pieces: per-segment RMSE on normalized values, a protocol that
//! aggregates RMSE quantiles over many randomly seeded trajectories, and a
//! wall-clock benchmark of the segment computation itself.

mod bench;
mod protocol;
mod rmse;

pub use bench::{bench_producer, bench_producer_with_clock, Clock, FakeClock, MonotonicClock, TimingStats};
pub use protocol::{evaluate, quantile, write_rmse_csv, QuantileBand, RmseTable};
pub use rmse::segment_rmse;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("validation set has {len} frames, need at least {needed}")]
    ValidationTooShort { len: usize, needed: usize },
    #[error(transparent)]
    Generator(#[from] generator::Error),
    #[error("i/o failure")]
    IoFailure(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
