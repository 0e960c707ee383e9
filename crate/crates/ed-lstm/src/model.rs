//! The encoder-decoder model: sequence forward pass and full BPTT.

use timeseries_core::{Mat, SplitMix64};

use crate::cell::{cell_backward, cell_forward, CellCache, CellGradients, LstmCellWeights};
use crate::{cell, Error, Result};

pub const INPUT_VARS: usize = 8;

/// Scalar readout y = w·h + b applied to each decoder hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderDecoderModel {
    /// Reads the 8-variable look-back window.
    pub encoder: LstmCellWeights,
    /// Rolls the forecast forward on its own scalar output.
    pub decoder: LstmCellWeights,
    pub projection: Projection,
    pub lookback: usize,
    pub lookahead: usize,
    pub hidden: usize,
    /// Which of the 8 variables this model predicts.
    pub target_index: usize,
}

impl EncoderDecoderModel {
    /// Fresh model with seeded initialization. Draw order: encoder weights,
    /// decoder weights, projection weights.
    pub fn init(
        hidden: usize,
        lookback: usize,
        lookahead: usize,
        target_index: usize,
        seed: u64,
    ) -> EncoderDecoderModel {
        assert!(hidden >= 1 && lookback >= 1 && lookahead >= 1);
        assert!(target_index < INPUT_VARS);
        let mut rng = SplitMix64::new(seed);
        let encoder = LstmCellWeights::init(INPUT_VARS, hidden, &mut rng);
        let decoder = LstmCellWeights::init(1, hidden, &mut rng);
        let bound = 1.0 / (hidden as f64).sqrt();
        let projection = Projection {
            w: (0..hidden).map(|_| rng.next_range(-bound, bound)).collect(),
            b: 0.0,
        };
        EncoderDecoderModel {
            encoder,
            decoder,
            projection,
            lookback,
            lookahead,
            hidden,
            target_index,
        }
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.decoder.param_count() + self.projection.w.len() + 1
    }

    /// Copies all parameters into one flat vector; order is encoder
    /// (w, r, b), decoder (w, r, b), projection (w, b).
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for cellw in [&self.encoder, &self.decoder] {
            out.extend_from_slice(cellw.w.data());
            out.extend_from_slice(cellw.r.data());
            out.extend_from_slice(&cellw.b);
        }
        out.extend_from_slice(&self.projection.w);
        out.push(self.projection.b);
        out
    }

    /// Inverse of `flatten_params`.
    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch {
                context: "set_params",
                expected: self.param_count(),
                found: flat.len(),
            });
        }
        let mut at = 0;
        let mut take = |len: usize| {
            let s = &flat[at..at + len];
            at += len;
            s
        };
        for cellw in [&mut self.encoder, &mut self.decoder] {
            let wl = cellw.w.data().len();
            cellw.w.data_mut().copy_from_slice(take(wl));
            let rl = cellw.r.data().len();
            cellw.r.data_mut().copy_from_slice(take(rl));
            let bl = cellw.b.len();
            cellw.b.copy_from_slice(take(bl));
        }
        let pl = self.projection.w.len();
        self.projection.w.copy_from_slice(take(pl));
        self.projection.b = take(1)[0];
        Ok(())
    }
}

/// Gradients with the same layout as the model parameters.
#[derive(Debug, Clone)]
pub struct ModelGradients {
    pub encoder: CellGradients,
    pub decoder: CellGradients,
    pub projection_w: Vec<f64>,
    pub projection_b: f64,
}

impl ModelGradients {
    pub fn zeros_like(model: &EncoderDecoderModel) -> ModelGradients {
        ModelGradients {
            encoder: CellGradients::zeros_like(&model.encoder),
            decoder: CellGradients::zeros_like(&model.decoder),
            projection_w: vec![0.0; model.hidden],
            projection_b: 0.0,
        }
    }

    /// Same flat order as `EncoderDecoderModel::flatten_params`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in [&self.encoder, &self.decoder] {
            out.extend_from_slice(g.w.data());
            out.extend_from_slice(g.r.data());
            out.extend_from_slice(&g.b);
        }
        out.extend_from_slice(&self.projection_w);
        out.push(self.projection_b);
        out
    }

    pub fn add_scaled(&mut self, other: &ModelGradients, scale: f64) {
        for (mine, theirs) in [
            (&mut self.encoder, &other.encoder),
            (&mut self.decoder, &other.decoder),
        ] {
            for (a, b) in mine.w.data_mut().iter_mut().zip(theirs.w.data()) {
                *a += scale * b;
            }
            for (a, b) in mine.r.data_mut().iter_mut().zip(theirs.r.data()) {
                *a += scale * b;
            }
            for (a, b) in mine.b.iter_mut().zip(&theirs.b) {
                *a += scale * b;
            }
        }
        for (a, b) in self.projection_w.iter_mut().zip(&other.projection_w) {
            *a += scale * b;
        }
        self.projection_b += scale * other.projection_b;
    }
}

struct ForwardTrace {
    encoder_caches: Vec<CellCache>,
    decoder_caches: Vec<CellCache>,
    outputs: Vec<f64>,
}

fn check_lookback(model: &EncoderDecoderModel, lookback: &Mat) -> Result<()> {
    if lookback.rows() != model.lookback {
        return Err(Error::ShapeMismatch {
            context: "forward lookback rows",
            expected: model.lookback,
            found: lookback.rows(),
        });
    }
    if lookback.cols() != INPUT_VARS {
        return Err(Error::ShapeMismatch {
            context: "forward lookback cols",
            expected: INPUT_VARS,
            found: lookback.cols(),
        });
    }
    Ok(())
}

fn run_forward(model: &EncoderDecoderModel, lookback: &Mat, keep: bool) -> Result<ForwardTrace> {
    check_lookback(model, lookback)?;
    let hs = model.hidden;

    let mut h = vec![0.0; hs];
    let mut c = vec![0.0; hs];
    let mut encoder_caches = Vec::with_capacity(if keep { model.lookback } else { 0 });
    for t in 0..model.lookback {
        let (h2, c2, cache) = cell_forward(lookback.row(t), &h, &c, &model.encoder)?;
        h = h2;
        c = c2;
        if keep {
            encoder_caches.push(cache);
        }
    }

    let mut outputs = Vec::with_capacity(model.lookahead);
    let mut decoder_caches = Vec::with_capacity(if keep { model.lookahead } else { 0 });
    let mut y = lookback[(model.lookback - 1, model.target_index)];
    for _ in 0..model.lookahead {
        let (h2, c2, cache) = cell_forward(&[y], &h, &c, &model.decoder)?;
        h = h2;
        c = c2;
        y = cell::dot(&model.projection.w, &h) + model.projection.b;
        outputs.push(y);
        if keep {
            decoder_caches.push(cache);
        }
    }

    Ok(ForwardTrace {
        encoder_caches,
        decoder_caches,
        outputs,
    })
}

/// Predicts H normalized values of the target variable from an L×8 window.
pub fn forward(model: &EncoderDecoderModel, lookback: &Mat) -> Result<Vec<f64>> {
    Ok(run_forward(model, lookback, false)?.outputs)
}

/// MSE gradients for one window via backpropagation through time. The
/// decoder is unrolled on its own outputs, so each residual also flows back
/// through every later step's input.
pub fn backward(model: &EncoderDecoderModel, lookback: &Mat, target: &[f64]) -> Result<ModelGradients> {
    Ok(backward_with_loss(model, lookback, target)?.1)
}

pub(crate) fn backward_with_loss(
    model: &EncoderDecoderModel,
    lookback: &Mat,
    target: &[f64],
) -> Result<(f64, ModelGradients)> {
    if target.len() != model.lookahead {
        return Err(Error::ShapeMismatch {
            context: "backward target",
            expected: model.lookahead,
            found: target.len(),
        });
    }
    let trace = run_forward(model, lookback, true)?;
    let hs = model.hidden;
    let hn = model.lookahead as f64;
    let loss = trace
        .outputs
        .iter()
        .zip(target)
        .map(|(y, t)| (y - t) * (y - t))
        .sum::<f64>()
        / hn;

    let mut grads = ModelGradients::zeros_like(model);
    let mut dh = vec![0.0; hs];
    let mut dc = vec![0.0; hs];
    let mut dfeed = 0.0;

    for t in (0..model.lookahead).rev() {
        let cache = &trace.decoder_caches[t];
        let dy = 2.0 / hn * (trace.outputs[t] - target[t]) + dfeed;

        // y = w·h' + b, where h' = o ⊙ tanh(c') of this step.
        grads.projection_b += dy;
        for j in 0..hs {
            let h_j = cache.o[j] * cache.tanh_c[j];
            grads.projection_w[j] += dy * h_j;
            dh[j] += dy * model.projection.w[j];
        }

        let (dh_prev, dc_prev, dx) = cell_backward(&model.decoder, cache, &dh, &dc, &mut grads.decoder);
        dh = dh_prev;
        dc = dc_prev;
        dfeed = dx[0];
    }
    // dfeed now sits on the seed input (the look-back's last target value),
    // which is data, not a parameter.

    for t in (0..model.lookback).rev() {
        let cache = &trace.encoder_caches[t];
        let (dh_prev, dc_prev, _dx) = cell_backward(&model.encoder, cache, &dh, &dc, &mut grads.encoder);
        dh = dh_prev;
        dc = dc_prev;
    }

    Ok((loss, grads))
}
