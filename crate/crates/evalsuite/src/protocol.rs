//! Quantile aggregation of per-segment RMSE over many seeded trajectories.

use std::io::Write;

use generator::CompositeGenerator;
use timeseries_core::{Dataset, Mat, SplitMix64, REPLICATED_VARS, VAR_COUNT};

use crate::{segment_rmse, Error, Result};

/// Median and quartile band of one (segment step, variable) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileBand {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// RMSE quantiles per segment step and variable, aggregated over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseTable {
    cells: Vec<[QuantileBand; VAR_COUNT]>,
}

impl RmseTable {
    /// Number of segment steps S.
    pub fn steps(&self) -> usize {
        self.cells.len()
    }

    /// The band of segment step `step` (0-based) and variable `var`.
    pub fn cell(&self, step: usize, var: usize) -> QuantileBand {
        self.cells[step][var]
    }

    /// True when every cell is non-negative and lower <= median <= upper.
    pub fn invariants_hold(&self) -> bool {
        self.cells.iter().flatten().all(|b| {
            b.lower >= 0.0 && b.lower <= b.median && b.median <= b.upper
        })
    }
}

/// Linearly interpolated quantile of a sorted slice, `p` in [0, 1]; with
/// n points the rank is `(n - 1) * p` and fractional ranks interpolate
/// between the two neighboring order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let rank = (sorted.len() - 1) as f64 * p;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

fn aggregate(values: &mut Vec<f64>) -> QuantileBand {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    QuantileBand {
        lower: quantile(values, 0.25),
        median: quantile(values, 0.5),
        upper: quantile(values, 0.75),
    }
}

/// Draws `t_seeds` random seed positions from `validation`, generates
/// `s_segments` per seed and aggregates the per-step, per-variable RMSE into
/// median and 25th/75th percentile. Deterministic in `rng_seed`; seed
/// positions may overlap.
pub fn evaluate(
    gen: &CompositeGenerator,
    validation: &Dataset,
    t_seeds: usize,
    s_segments: usize,
    rng_seed: u64,
) -> Result<RmseTable> {
    assert!(t_seeds >= 1 && s_segments >= 1);
    let (l, h) = (gen.lookback(), gen.lookahead());
    let needed = l + s_segments * h;
    if validation.len() < needed {
        return Err(Error::ValidationTooShort {
            len: validation.len(),
            needed,
        });
    }
    let max_origin = validation.len() - needed;
    let mut rng = SplitMix64::new(rng_seed);

    let mut samples = vec![vec![Vec::with_capacity(t_seeds); VAR_COUNT]; s_segments];
    for _ in 0..t_seeds {
        let origin = rng.next_below(max_origin + 1);
        let lookback = Mat::from_fn(l, VAR_COUNT, |r, c| {
            gen.scaler().normalize(c, validation.replicated_row(origin + r)[c])
        });
        let segments = gen.generate_trajectory(&lookback, s_segments)?;
        for (s, segment) in segments.iter().enumerate() {
            let reference = Mat::from_fn(h, VAR_COUNT, |r, c| {
                validation.replicated_row(origin + l + s * h + r)[c]
            });
            let rmse = segment_rmse(segment, &reference, gen.scaler())?;
            for k in 0..VAR_COUNT {
                samples[s][k].push(rmse[k]);
            }
        }
    }

    let cells = samples
        .into_iter()
        .map(|mut per_var| std::array::from_fn(|k| aggregate(&mut per_var[k])))
        .collect();
    Ok(RmseTable { cells })
}

/// Long-form CSV for external plotting: one row per (step, variable), steps
/// numbered from 1.
pub fn write_rmse_csv(table: &RmseTable, out: &mut impl Write) -> Result<()> {
    writeln!(out, "step,variable,median,q_low,q_high")?;
    for (s, row) in table.cells.iter().enumerate() {
        for (k, band) in row.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                s + 1,
                REPLICATED_VARS[k].name(),
                band.median,
                band.lower,
                band.upper
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ed_lstm::EncoderDecoderModel;
    use generator::Strategy;
    use timeseries_core::{SampleFrame, ScalerParams};

    fn tiny_generator(l: usize, h: usize) -> CompositeGenerator {
        let models = (0..VAR_COUNT)
            .map(|k| EncoderDecoderModel::init(3, l, h, k, 60 + k as u64))
            .collect();
        let scaler = ScalerParams {
            mins: [-1.0; VAR_COUNT],
            maxs: [1.0; VAR_COUNT],
        };
        CompositeGenerator::new(models, scaler, Strategy::MultiStep).unwrap()
    }

    fn wave_dataset(n: usize) -> Dataset {
        let frames = (0..n)
            .map(|i| {
                let t = i as f64 / 500.0;
                SampleFrame {
                    t,
                    voltage0: (3.0 * t).sin() * 0.8,
                    voltage1: (2.0 * t).cos() * 0.6,
                    yaw: (1.0 * t).sin() * 0.5,
                    pitch: (1.5 * t).cos() * 0.4,
                    target_yaw: 0.3,
                    target_pitch: -0.2,
                    yaw_dot: (1.0 * t).cos() * 0.5,
                    pitch_dot: (1.5 * t).sin() * 0.3,
                    ..SampleFrame::default()
                }
            })
            .collect();
        Dataset::new(frames, 500.0).unwrap()
    }

    #[test]
    fn quantiles_interpolate_between_order_statistics() {
        assert_eq!(quantile(&[1.0, 2.0, 4.0], 0.25), 1.5);
        assert_eq!(quantile(&[1.0, 2.0, 4.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0, 4.0], 0.75), 3.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 10.0], 0.25), 1.75);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 10.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 10.0], 0.75), 4.75);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
        assert_eq!(quantile(&[1.0, 9.0], 1.0), 9.0);
    }

    #[test]
    fn single_seed_collapses_the_band_onto_the_median() {
        let gen = tiny_generator(6, 2);
        let table = evaluate(&gen, &wave_dataset(40), 1, 3, 7).unwrap();
        assert_eq!(table.steps(), 3);
        for s in 0..3 {
            for k in 0..VAR_COUNT {
                let band = table.cell(s, k);
                assert_eq!(band.lower, band.median);
                assert_eq!(band.upper, band.median);
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic_in_the_seed() {
        let gen = tiny_generator(6, 2);
        let data = wave_dataset(60);
        let a = evaluate(&gen, &data, 5, 4, 11).unwrap();
        let b = evaluate(&gen, &data, 5, 4, 11).unwrap();
        let c = evaluate(&gen, &data, 5, 4, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bands_are_ordered_and_non_negative() {
        let gen = tiny_generator(6, 2);
        let table = evaluate(&gen, &wave_dataset(80), 9, 5, 3).unwrap();
        assert!(table.invariants_hold());
    }

    #[test]
    fn too_short_validation_is_rejected() {
        let gen = tiny_generator(6, 2);
        let err = evaluate(&gen, &wave_dataset(9), 2, 2, 1).unwrap_err();
        assert!(matches!(
            err,
            Error::ValidationTooShort { len: 9, needed: 10 }
        ));
    }

    #[test]
    fn csv_is_long_form_with_one_row_per_cell() {
        let gen = tiny_generator(6, 2);
        let table = evaluate(&gen, &wave_dataset(40), 2, 3, 5).unwrap();
        let mut buf = Vec::new();
        write_rmse_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,variable,median,q_low,q_high");
        assert_eq!(lines.len(), 1 + 3 * VAR_COUNT);
        assert!(lines[1].starts_with("1,voltage0,"));
        assert!(lines[VAR_COUNT].starts_with("1,pitch_dot,"));
        assert!(lines[1 + VAR_COUNT].starts_with("2,voltage0,"));
    }
}
