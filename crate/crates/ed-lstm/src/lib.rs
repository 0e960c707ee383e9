//! Encoder-decoder LSTM for single-variable multi-step forecasting, written
//! against plain slices of f64 with no numerics dependency.
//!
//! The encoder reads an L×8 normalized look-back window; its final hidden
//! and cell state seed a decoder that rolls forward H steps, feeding each
//! scalar prediction back in as the next input. Training is full
//! backpropagation through time (including that feedback path) under MSE
//! with the Adam optimizer.

mod adam;
mod cell;
mod io;
mod model;
mod train;

pub use adam::{adam_step, AdamState};
pub use cell::{cell_forward, CellCache, CellGradients, LstmCellWeights};
pub use io::{load_model, save_model};
pub use model::{backward, forward, EncoderDecoderModel, ModelGradients, Projection};
pub use train::{train, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("model file is truncated")]
    TruncatedFile,
    #[error("model file header is inconsistent with its contents")]
    ShapeHeaderMismatch,
    #[error("i/o failure")]
    IoFailure(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
