//! Initial look-back acquisition.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use timeseries_core::{read_csv, Mat, ScalerParams, VAR_COUNT};

use crate::{Error, Result};

/// Where the initial look-back samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeedSource {
    /// Replay the tail of a recorded run.
    Csv { path: PathBuf },
    /// Run the built-in plant simulation with its default schedule.
    Simulator { seed: u64 },
}

/// Builds the L x 8 look-back window from a seed source, normalized with the
/// composite generator's scaler. Only the last L samples of the source are
/// kept; shorter sources are rejected.
pub fn init_lookback(
    source: &SeedSource,
    lookback: usize,
    rate_hz: f64,
    scaler: &ScalerParams,
) -> Result<Mat> {
    let dataset = match source {
        SeedSource::Csv { path } => read_csv(path).map_err(Error::SeedSchemaMismatch)?,
        SeedSource::Simulator { seed } => {
            let config = cps_sim::SimConfig::default();
            // A few spare samples absorb the floor in the sample count.
            let duration = (lookback as f64 + 8.0) / rate_hz;
            cps_sim::run_cycle(&config.plant, &config.schedule()?, duration, rate_hz, *seed)?
        }
    };

    if dataset.len() < lookback {
        return Err(Error::SeedTooShort {
            have: dataset.len(),
            need: lookback,
        });
    }

    let start = dataset.len() - lookback;
    Ok(Mat::from_fn(lookback, VAR_COUNT, |r, c| {
        scaler.normalize(c, dataset.replicated_row(start + r)[c])
    }))
}
