//! The composite generator and its recursive multi-step loop.

use ed_lstm::EncoderDecoderModel;
use serde::{Deserialize, Serialize};
use timeseries_core::{Dataset, Mat, SampleFrame, ScalerParams, Variable, VAR_COUNT};

use crate::{Error, Result};

/// How the H look-ahead rows of one segment are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// One forward pass per model; the decoder rolls out all H steps.
    #[default]
    MultiStep,
    /// H forward passes per model, keeping only the first decoder output and
    /// sliding the look-back by one sample each time. Kept for comparison;
    /// errors compound much faster over repeated recursions.
    SingleStep,
}

/// One generated block of H consecutive samples, denormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// H x 8 values in the fixed variable order.
    pub values: Mat,
    /// Position of this segment within its trajectory, starting at 0.
    pub seq: u64,
}

/// The eight single-output models plus the scaler they were trained with.
///
/// `models[k]` predicts replicated variable `k`; all share one look-back
/// length L and look-ahead length H. The generator is immutable after
/// construction and can be shared across threads.
#[derive(Debug, Clone)]
pub struct CompositeGenerator {
    models: Vec<EncoderDecoderModel>,
    scaler: ScalerParams,
    strategy: Strategy,
    lookback: usize,
    lookahead: usize,
}

impl CompositeGenerator {
    /// Accepts the eight models in any order and files them by target index.
    /// The target indices must cover every variable exactly once and all
    /// models must agree on (L, H).
    pub fn new(
        models: Vec<EncoderDecoderModel>,
        scaler: ScalerParams,
        strategy: Strategy,
    ) -> Result<CompositeGenerator> {
        if models.len() != VAR_COUNT {
            return Err(Error::ModelOrderMismatch(format!(
                "expected {VAR_COUNT} models, got {}",
                models.len()
            )));
        }
        let mut slots: Vec<Option<EncoderDecoderModel>> = (0..VAR_COUNT).map(|_| None).collect();
        for model in models {
            let k = model.target_index;
            if k >= VAR_COUNT {
                return Err(Error::ModelOrderMismatch(format!(
                    "target index {k} is out of range"
                )));
            }
            if slots[k].is_some() {
                return Err(Error::ModelOrderMismatch(format!(
                    "two models predict {}",
                    var_name(k)
                )));
            }
            slots[k] = Some(model);
        }
        let models: Vec<EncoderDecoderModel> = slots.into_iter().map(|s| s.unwrap()).collect();
        let (lookback, lookahead) = (models[0].lookback, models[0].lookahead);
        for m in &models[1..] {
            if (m.lookback, m.lookahead) != (lookback, lookahead) {
                return Err(Error::ModelOrderMismatch(format!(
                    "model for {} has window ({}, {}) but {} uses ({}, {})",
                    var_name(m.target_index),
                    m.lookback,
                    m.lookahead,
                    var_name(0),
                    lookback,
                    lookahead
                )));
            }
        }
        Ok(CompositeGenerator {
            models,
            scaler,
            strategy,
            lookback,
            lookahead,
        })
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn lookahead(&self) -> usize {
        self.lookahead
    }

    pub fn scaler(&self) -> &ScalerParams {
        &self.scaler
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn models(&self) -> &[EncoderDecoderModel] {
        &self.models
    }

    /// Runs all eight models on one normalized look-back window and returns
    /// the denormalized segment. Normalized outputs are clamped to [0, 1]
    /// before denormalizing, so every generated value stays inside its
    /// variable's training range; clamping is logged when it triggers.
    pub fn generate_segment(&self, lookback: &Mat) -> Result<Segment> {
        self.check_lookback(lookback)?;
        let mut window = lookback.clone();
        let rows = self.next_rows(&mut window)?;
        Ok(self.denormalize_segment(rows, 0))
    }

    /// Seeds a rolling window and generates `n_segments` consecutive
    /// segments; after each one the oldest H look-back samples are dropped
    /// and the H generated samples appended.
    pub fn generate_trajectory(&self, seed_lookback: &Mat, n_segments: usize) -> Result<Vec<Segment>> {
        self.check_lookback(seed_lookback)?;
        let mut window = seed_lookback.clone();
        let mut segments = Vec::with_capacity(n_segments);
        for seq in 0..n_segments {
            let rows = self.next_rows(&mut window)?;
            segments.push(self.denormalize_segment(rows, seq as u64));
        }
        Ok(segments)
    }

    /// Generates one segment from `window` and slides the window past it, so
    /// callers can stream segments indefinitely without re-seeding. One call
    /// is exactly one iteration of [`generate_trajectory`](Self::generate_trajectory);
    /// `seq` is the number stamped on the produced segment.
    pub fn step_window(&self, window: &mut Mat, seq: u64) -> Result<Segment> {
        self.check_lookback(window)?;
        let rows = self.next_rows(window)?;
        Ok(self.denormalize_segment(rows, seq))
    }

    fn check_lookback(&self, lookback: &Mat) -> Result<()> {
        if lookback.rows() != self.lookback || lookback.cols() != VAR_COUNT {
            return Err(Error::ShapeMismatch {
                context: "look-back window",
                expected: (self.lookback, VAR_COUNT),
                found: (lookback.rows(), lookback.cols()),
            });
        }
        for r in 0..lookback.rows() {
            for (c, v) in lookback.row(r).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput { row: r, column: c });
                }
            }
        }
        Ok(())
    }

    /// Produces the next H normalized rows and slides `window` past them.
    fn next_rows(&self, window: &mut Mat) -> Result<Mat> {
        let h = self.lookahead;
        let mut rows = Mat::zeros(h, VAR_COUNT);
        let mut clamped = 0usize;
        match self.strategy {
            Strategy::MultiStep => {
                for (k, model) in self.models.iter().enumerate() {
                    let out = ed_lstm::forward(model, window)?;
                    for (t, y) in out.into_iter().enumerate() {
                        rows[(t, k)] = clamp_unit(y, k, t, &mut clamped)?;
                    }
                }
                advance(window, &rows);
            }
            Strategy::SingleStep => {
                for t in 0..h {
                    let mut row = [0.0; VAR_COUNT];
                    for (k, model) in self.models.iter().enumerate() {
                        let out = ed_lstm::forward(model, window)?;
                        row[k] = clamp_unit(out[0], k, t, &mut clamped)?;
                    }
                    rows.row_mut(t).copy_from_slice(&row);
                    advance_one(window, &row);
                }
            }
        }
        if clamped > 0 {
            log::debug!(
                "clamped {clamped} of {} normalized outputs into [0, 1]",
                h * VAR_COUNT
            );
        }
        Ok(rows)
    }

    fn denormalize_segment(&self, mut rows: Mat, seq: u64) -> Segment {
        for r in 0..rows.rows() {
            let row = rows.row_mut(r);
            for k in 0..VAR_COUNT {
                row[k] = self.scaler.denormalize(k, row[k]);
            }
        }
        Segment { values: rows, seq }
    }
}

fn var_name(k: usize) -> &'static str {
    Variable::from_index(k).map_or("?", Variable::name)
}

fn clamp_unit(y: f64, var: usize, step: usize, clamped: &mut usize) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::NonFiniteOutput {
            variable: var_name(var),
            step,
        });
    }
    if y < 0.0 {
        *clamped += 1;
        Ok(0.0)
    } else if y > 1.0 {
        *clamped += 1;
        Ok(1.0)
    } else {
        Ok(y)
    }
}

/// Drops the oldest `rows.rows()` window samples and appends the new ones;
/// when a segment is longer than the window, only its tail survives.
fn advance(window: &mut Mat, rows: &Mat) {
    let l = window.rows();
    let h = rows.rows();
    if h >= l {
        for r in 0..l {
            window.row_mut(r).copy_from_slice(rows.row(h - l + r));
        }
    } else {
        window.data_mut().copy_within(h * VAR_COUNT.., 0);
        for r in 0..h {
            window.row_mut(l - h + r).copy_from_slice(rows.row(r));
        }
    }
}

fn advance_one(window: &mut Mat, row: &[f64; VAR_COUNT]) {
    let l = window.rows();
    window.data_mut().copy_within(VAR_COUNT.., 0);
    window.row_mut(l - 1).copy_from_slice(row);
}

/// Lays generated segments out as frames for CSV export, starting at
/// `start_time` on the `rate_hz` grid. Motor currents and speeds are not
/// replicated and stay at zero.
pub fn segments_to_dataset(segments: &[Segment], rate_hz: f64, start_time: f64) -> Dataset {
    let mut frames = Vec::new();
    for segment in segments {
        for r in 0..segment.values.rows() {
            let row = segment.values.row(r);
            let i = frames.len();
            frames.push(SampleFrame {
                t: start_time + i as f64 / rate_hz,
                voltage0: row[0],
                voltage1: row[1],
                yaw: row[2],
                pitch: row[3],
                target_yaw: row[4],
                target_pitch: row[5],
                yaw_dot: row[6],
                pitch_dot: row[7],
                ..SampleFrame::default()
            });
        }
    }
    Dataset::new(frames, rate_hz).expect("synthesized frames sit on the exact time grid")
}
