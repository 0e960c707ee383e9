//! Per-variable RMSE between a generated segment and the recorded truth.

use generator::Segment;
use timeseries_core::{Mat, ScalerParams, VAR_COUNT};

use crate::{Error, Result};

/// Root mean squared error per variable, computed on min-max-normalized
/// values so the eight variables share one scale. `reference` holds the H
/// recorded (denormalized) rows the segment tried to predict.
pub fn segment_rmse(
    estimated: &Segment,
    reference: &Mat,
    scaler: &ScalerParams,
) -> Result<[f64; VAR_COUNT]> {
    let est = &estimated.values;
    if est.rows() != reference.rows() || est.cols() != reference.cols() {
        return Err(Error::ShapeMismatch {
            context: "segment vs reference",
            expected: (est.rows(), est.cols()),
            found: (reference.rows(), reference.cols()),
        });
    }
    let h = est.rows();
    let mut out = [0.0; VAR_COUNT];
    for k in 0..VAR_COUNT {
        let mut acc = 0.0;
        for r in 0..h {
            let d = scaler.normalize(k, est[(r, k)]) - scaler.normalize(k, reference[(r, k)]);
            acc += d * d;
        }
        out[k] = (acc / h as f64).sqrt();
    }
    Ok(out)
}
