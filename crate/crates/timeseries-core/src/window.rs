//! Sliding-window extraction and the temporal train/validation split.

use crate::{Dataset, Error, Mat, Result, ScalerParams, VAR_COUNT};

/// One supervised example: L normalized rows of context and the H normalized
/// rows that follow.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPair {
    pub lookback: Mat,
    pub lookahead: Mat,
    pub origin_index: usize,
}

/// Extracts every window starting at `0, stride, 2*stride, ...`; the count is
/// `floor((N − L − H)/stride) + 1`. Rows are normalized with `params`.
pub fn make_windows(
    dataset: &Dataset,
    lookback: usize,
    lookahead: usize,
    stride: usize,
    params: &ScalerParams,
) -> Result<Vec<WindowPair>> {
    assert!(lookback >= 1 && lookahead >= 1 && stride >= 1);
    let n = dataset.len();
    let needed = lookback + lookahead;
    if n < needed {
        return Err(Error::DatasetTooShort {
            len: n,
            needed,
            lookback,
            lookahead,
        });
    }

    let count = (n - needed) / stride + 1;
    let mut windows = Vec::with_capacity(count);
    for w in 0..count {
        let origin = w * stride;
        let lb = Mat::from_fn(lookback, VAR_COUNT, |r, c| {
            params.normalize(c, dataset.replicated_row(origin + r)[c])
        });
        let la = Mat::from_fn(lookahead, VAR_COUNT, |r, c| {
            params.normalize(c, dataset.replicated_row(origin + lookback + r)[c])
        });
        windows.push(WindowPair {
            lookback: lb,
            lookahead: la,
            origin_index: origin,
        });
    }
    Ok(windows)
}

/// Contiguous prefix/suffix split; no shuffling, the data is temporal.
/// The prefix gets `round(N * train_fraction)` frames (half rounds up),
/// clamped so both halves are nonempty.
pub fn split(dataset: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must be in (0, 1)"
    );
    let n = dataset.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let train_len = ((n as f64 * train_fraction + 0.5).floor() as usize).clamp(1, n.max(2) - 1);
    let rate = dataset.rate_hz();
    let train = Dataset::new(dataset.frames()[..train_len].to_vec(), rate)?;
    let val = Dataset::new(dataset.frames()[train_len..].to_vec(), rate)?;
    Ok((train, val))
}
