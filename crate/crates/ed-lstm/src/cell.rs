//! Single LSTM cell: forward step, cached activations, and the matching
//! backward step.
//!
//! Weights are packed with the four gates stacked in (i, f, g, o) order:
//! W is 4h×d, R is 4h×h, b is 4h. Row block [0,h) is the input gate,
//! [h,2h) forget, [2h,3h) candidate, [3h,4h) output.

use timeseries_core::{Mat, SplitMix64};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellWeights {
    pub input_size: usize,
    pub hidden_size: usize,
    /// 4h × d input weights.
    pub w: Mat,
    /// 4h × h recurrent weights.
    pub r: Mat,
    /// 4h biases.
    pub b: Vec<f64>,
}

impl LstmCellWeights {
    /// Weights uniform in [−1/√h, +1/√h]; biases zero except the forget
    /// gate block, which starts at 1.0. Draw order: w row-major, then r
    /// row-major.
    pub fn init(input_size: usize, hidden_size: usize, rng: &mut SplitMix64) -> LstmCellWeights {
        let bound = 1.0 / (hidden_size as f64).sqrt();
        let w = Mat::from_fn(4 * hidden_size, input_size, |_, _| rng.next_range(-bound, bound));
        let r = Mat::from_fn(4 * hidden_size, hidden_size, |_, _| rng.next_range(-bound, bound));
        let mut b = vec![0.0; 4 * hidden_size];
        b[hidden_size..2 * hidden_size].fill(1.0);
        LstmCellWeights {
            input_size,
            hidden_size,
            w,
            r,
            b,
        }
    }

    pub fn zeros(input_size: usize, hidden_size: usize) -> LstmCellWeights {
        LstmCellWeights {
            input_size,
            hidden_size,
            w: Mat::zeros(4 * hidden_size, input_size),
            r: Mat::zeros(4 * hidden_size, hidden_size),
            b: vec![0.0; 4 * hidden_size],
        }
    }

    pub fn param_count(&self) -> usize {
        self.w.data().len() + self.r.data().len() + self.b.len()
    }
}

/// Activations of one forward step, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct CellCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// Gradient accumulator with the same shapes as the weights.
#[derive(Debug, Clone)]
pub struct CellGradients {
    pub w: Mat,
    pub r: Mat,
    pub b: Vec<f64>,
}

impl CellGradients {
    pub fn zeros_like(weights: &LstmCellWeights) -> CellGradients {
        CellGradients {
            w: Mat::zeros(4 * weights.hidden_size, weights.input_size),
            r: Mat::zeros(4 * weights.hidden_size, weights.hidden_size),
            b: vec![0.0; 4 * weights.hidden_size],
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Dot product with four accumulators; the fixed summation order keeps
/// results reproducible while letting the compiler pipeline the multiplies.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let quads = a.len() / 4;
    let mut acc = [0.0f64; 4];
    for k in 0..quads {
        let i = k * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in quads * 4..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// One LSTM step:
///   i = σ(Wi x + Ri h + bi)    f = σ(Wf x + Rf h + bf)
///   g = tanh(Wg x + Rg h + bg) o = σ(Wo x + Ro h + bo)
///   c' = f⊙c + i⊙g             h' = o⊙tanh(c')
pub fn cell_forward(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    weights: &LstmCellWeights,
) -> Result<(Vec<f64>, Vec<f64>, CellCache)> {
    let hs = weights.hidden_size;
    check("cell_forward x", weights.input_size, x.len())?;
    check("cell_forward h", hs, h.len())?;
    check("cell_forward c", hs, c.len())?;

    // Pre-activations for all four gates in one pass over the rows.
    let mut z = vec![0.0; 4 * hs];
    for (row, zr) in z.iter_mut().enumerate() {
        *zr = dot(weights.w.row(row), x) + dot(weights.r.row(row), h) + weights.b[row];
    }

    let mut gi = vec![0.0; hs];
    let mut gf = vec![0.0; hs];
    let mut gg = vec![0.0; hs];
    let mut go = vec![0.0; hs];
    let mut c_new = vec![0.0; hs];
    let mut tanh_c = vec![0.0; hs];
    let mut h_new = vec![0.0; hs];
    for j in 0..hs {
        gi[j] = sigmoid(z[j]);
        gf[j] = sigmoid(z[hs + j]);
        gg[j] = z[2 * hs + j].tanh();
        go[j] = sigmoid(z[3 * hs + j]);
        c_new[j] = gf[j] * c[j] + gi[j] * gg[j];
        tanh_c[j] = c_new[j].tanh();
        h_new[j] = go[j] * tanh_c[j];
    }

    let cache = CellCache {
        x: x.to_vec(),
        h_prev: h.to_vec(),
        c_prev: c.to_vec(),
        i: gi,
        f: gf,
        g: gg,
        o: go,
        tanh_c,
    };
    Ok((h_new, c_new, cache))
}

/// Backward step. `dh` and `dc` are the gradients flowing into this step's
/// outputs h' and c'; returns (dh_prev, dc_prev, dx) and accumulates weight
/// gradients into `grads`.
pub(crate) fn cell_backward(
    weights: &LstmCellWeights,
    cache: &CellCache,
    dh: &[f64],
    dc: &[f64],
    grads: &mut CellGradients,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hs = weights.hidden_size;
    let mut dz = vec![0.0; 4 * hs];
    let mut dc_prev = vec![0.0; hs];

    for j in 0..hs {
        let (i, f, g, o) = (cache.i[j], cache.f[j], cache.g[j], cache.o[j]);
        let tc = cache.tanh_c[j];
        let dc_total = dc[j] + dh[j] * o * (1.0 - tc * tc);
        dz[j] = dc_total * g * i * (1.0 - i);
        dz[hs + j] = dc_total * cache.c_prev[j] * f * (1.0 - f);
        dz[2 * hs + j] = dc_total * i * (1.0 - g * g);
        dz[3 * hs + j] = dh[j] * tc * o * (1.0 - o);
        dc_prev[j] = dc_total * f;
    }

    // dW += dz xᵀ, dR += dz h_prevᵀ, db += dz; dx = Wᵀ dz, dh_prev = Rᵀ dz.
    let mut dx = vec![0.0; weights.input_size];
    let mut dh_prev = vec![0.0; hs];
    for row in 0..4 * hs {
        let dzr = dz[row];
        grads.b[row] += dzr;
        let wrow = weights.w.row(row);
        let gw = grads.w.row_mut(row);
        for col in 0..weights.input_size {
            gw[col] += dzr * cache.x[col];
            dx[col] += dzr * wrow[col];
        }
        let rrow = weights.r.row(row);
        let gr = grads.r.row_mut(row);
        for col in 0..hs {
            gr[col] += dzr * cache.h_prev[col];
            dh_prev[col] += dzr * rrow[col];
        }
    }
    (dh_prev, dc_prev, dx)
}

fn check(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::ShapeMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
