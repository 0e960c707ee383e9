//! Per-variable min-max scaling over the 8 replicated variables.

use serde::{Deserialize, Serialize};

use crate::{Dataset, Error, Result, VAR_COUNT};

/// Fitted (min, max) per replicated variable, in the fixed variable order.
///
/// A constant channel has max == min; by convention such a variable
/// normalizes to 0.0 and denormalizes back to min, so training never trips
/// over a division by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mins: [f64; VAR_COUNT],
    pub maxs: [f64; VAR_COUNT],
}

impl ScalerParams {
    /// Maps one raw value of variable `var` into [0, 1].
    pub fn normalize(&self, var: usize, x: f64) -> f64 {
        let (min, max) = (self.mins[var], self.maxs[var]);
        if max == min {
            0.0
        } else {
            (x - min) / (max - min)
        }
    }

    /// Inverse of `normalize` on non-degenerate variables.
    pub fn denormalize(&self, var: usize, x: f64) -> f64 {
        let (min, max) = (self.mins[var], self.maxs[var]);
        if max == min {
            min
        } else {
            min + x * (max - min)
        }
    }

    pub fn normalize_row(&self, raw: &[f64; VAR_COUNT]) -> [f64; VAR_COUNT] {
        std::array::from_fn(|i| self.normalize(i, raw[i]))
    }

    pub fn denormalize_row(&self, norm: &[f64; VAR_COUNT]) -> [f64; VAR_COUNT] {
        std::array::from_fn(|i| self.denormalize(i, norm[i]))
    }
}

/// Scans the dataset once and records per-variable extrema.
pub fn fit_scaler(dataset: &Dataset) -> Result<ScalerParams> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut mins = [f64::INFINITY; VAR_COUNT];
    let mut maxs = [f64::NEG_INFINITY; VAR_COUNT];
    for frame in dataset.frames() {
        let row = frame.replicated();
        for i in 0..VAR_COUNT {
            mins[i] = mins[i].min(row[i]);
            maxs[i] = maxs[i].max(row[i]);
        }
    }
    Ok(ScalerParams { mins, maxs })
}
