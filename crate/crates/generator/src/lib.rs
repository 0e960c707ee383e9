//! Multivariate trajectory generation from eight single-output models.
//!
//! Each trained model forecasts one of the replicated variables; running all
//! eight on the same look-back window and stacking their outputs column-wise
//! yields the next multivariate segment. Feeding generated segments back into
//! the look-back extends a single seed window into an arbitrarily long
//! trajectory.

mod compose;
mod manifest;

pub use compose::{segments_to_dataset, CompositeGenerator, Segment, Strategy};
pub use manifest::{load_composite, save_composite, GeneratorManifest, ModelPaths, MANIFEST_FILE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("model set mismatch: {0}")]
    ModelOrderMismatch(String),
    #[error("look-back value at row {row}, column {column} is not finite")]
    NonFiniteInput { row: usize, column: usize },
    #[error("model for {variable} produced a non-finite output at step {step}")]
    NonFiniteOutput { variable: &'static str, step: usize },
    #[error("cannot read manifest: {0}")]
    ManifestRead(std::io::Error),
    #[error("cannot parse manifest: {0}")]
    ManifestParse(#[from] toml::de::Error),
    #[error("cannot write manifest: {0}")]
    ManifestWrite(std::io::Error),
    #[error("model file {path}: {source}")]
    ModelLoad {
        path: String,
        source: ed_lstm::Error,
    },
    #[error(transparent)]
    Model(#[from] ed_lstm::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
