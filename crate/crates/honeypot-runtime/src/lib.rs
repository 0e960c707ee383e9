//! The deployed decoy.
//!
//! Three concurrent roles make up a running honeypot: a producer thread that
//! extends the learned trajectory one segment at a time, a consumer thread
//! that publishes those segments into the protocol address space one row
//! every 1/rate seconds, and the protocol front-end serving clients. The
//! producer and consumer meet only at a bounded queue, so memory stays
//! fixed and the producer is paced purely by backpressure: at 500 Hz and
//! 200-row segments the consumer drains 2.5 segments per second, which is
//! exactly the rate the producer settles into.

mod config;
mod consumer;
mod producer;
mod queue;
mod seed;
mod serve;

pub use config::RuntimeConfig;
pub use consumer::{consumer_loop, ConsumerReport, ManualPacer, MonotonicPacer, Pacer};
pub use producer::producer_loop;
pub use queue::{PopResult, PushResult, SegmentQueue};
pub use seed::{init_lookback, SeedSource};
pub use serve::{serve, RunningDecoy};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("seed source provides {have} samples but the look-back needs {need}")]
    SeedTooShort { have: usize, need: usize },
    #[error("seed source rejected: {0}")]
    SeedSchemaMismatch(#[source] timeseries_core::Error),
    #[error("seed simulation failed: {0}")]
    SeedSimulation(#[from] cps_sim::Error),
    #[error(transparent)]
    Generation(#[from] generator::Error),
    #[error("invalid runtime configuration: {0}")]
    Config(String),
    #[error("cannot parse runtime configuration: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error(transparent)]
    IoFailure(#[from] std::io::Error),
    #[error("a runtime worker thread panicked")]
    WorkerPanicked,
}

pub type Result<T> = std::result::Result<T, Error>;
