//! Model files: magic "EDL1", five little-endian u32 header fields
//! (input size, hidden size, look-back, look-ahead, target index), then all
//! weight arrays as little-endian f64 in a fixed order. Loading a saved
//! model reproduces it bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use timeseries_core::Mat;

use crate::cell::LstmCellWeights;
use crate::model::{EncoderDecoderModel, Projection, INPUT_VARS};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"EDL1";

/// Array order: encoder w, r, b; decoder w, r, b; projection w, b.
/// Matrices are row-major.
pub fn save_model(model: &EncoderDecoderModel, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(4 + 5 * 4 + model.param_count() * 8);
    out.extend_from_slice(MAGIC);
    for v in [
        INPUT_VARS as u32,
        model.hidden as u32,
        model.lookback as u32,
        model.lookahead as u32,
        model.target_index as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for value in model.flatten_params() {
        out.extend_from_slice(&value.to_le_bytes());
    }
    let mut file = std::fs::File::create(path.as_ref())?;
    file.write_all(&out)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EncoderDecoderModel> {
    let mut bytes = Vec::new();
    std::fs::File::open(path.as_ref())?.read_to_end(&mut bytes)?;

    if bytes.len() < 4 {
        return Err(Error::TruncatedFile);
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 4 + 5 * 4 {
        return Err(Error::TruncatedFile);
    }
    let mut header = [0u32; 5];
    for (i, h) in header.iter_mut().enumerate() {
        let at = 4 + i * 4;
        *h = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    }
    let [d, hidden, lookback, lookahead, target_index] = header.map(|v| v as usize);
    if d != INPUT_VARS || hidden == 0 || lookback == 0 || lookahead == 0 || target_index >= d {
        return Err(Error::ShapeHeaderMismatch);
    }

    let count = {
        let cell = |input: usize| 4 * hidden * input + 4 * hidden * hidden + 4 * hidden;
        cell(d) + cell(1) + hidden + 1
    };
    let body = &bytes[4 + 5 * 4..];
    if body.len() < count * 8 {
        return Err(Error::TruncatedFile);
    }
    if body.len() > count * 8 {
        return Err(Error::ShapeHeaderMismatch);
    }
    let mut values = Vec::with_capacity(count);
    for chunk in body.chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }

    let mut model = EncoderDecoderModel {
        encoder: LstmCellWeights {
            input_size: d,
            hidden_size: hidden,
            w: Mat::zeros(4 * hidden, d),
            r: Mat::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        },
        decoder: LstmCellWeights {
            input_size: 1,
            hidden_size: hidden,
            w: Mat::zeros(4 * hidden, 1),
            r: Mat::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        },
        projection: Projection {
            w: vec![0.0; hidden],
            b: 0.0,
        },
        lookback,
        lookahead,
        hidden,
        target_index,
    };
    model.set_params(&values).expect("header and body sizes were checked");
    Ok(model)
}
