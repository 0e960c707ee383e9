//! CSV reader/writer for the 13-column recording schema.
//!
//! Field separator is a comma, decimal separator a period, line endings LF.
//! Numbers are written in the shortest decimal form that round-trips the
//! underlying f64, so `read_csv(write_csv(d))` reproduces `d` bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::{Dataset, Error, Result, SampleFrame};

/// Column names in file order, as published with the recorded dataset.
pub const CSV_HEADER: [&str; 13] = [
    "Time",
    "Voltage0",
    "Voltage1",
    "Current0",
    "Current1",
    "MotorSpeed0",
    "MotorSpeed1",
    "Yaw",
    "Pitch",
    "TargetYaw",
    "TargetPitch",
    "YawDot",
    "PitchDot",
];

/// Reads a recording. The header must name exactly the 13 known columns in
/// order; the sample rate is inferred from the median time delta.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    let mut lines = BufReader::new(file).lines();

    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::MissingColumn {
            position: 0,
            expected: CSV_HEADER[0],
            found: String::new(),
        }),
    };
    check_header(&header)?;

    let mut frames = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        frames.push(parse_row(row, line)?);
    }

    let rate_hz = infer_rate(&frames);
    // Monotonicity re-checked against the inferred rate.
    for i in 1..frames.len() {
        let step = frames[i].t - frames[i - 1].t;
        if step <= 0.0 || (rate_hz > 0.0 && (step - 1.0 / rate_hz).abs() > crate::frame::TIME_STEP_TOLERANCE) {
            return Err(Error::NonMonotoneTime { row: i });
        }
    }
    Ok(Dataset::new(frames, rate_hz)?)
}

fn check_header(line: &str) -> Result<()> {
    let line = line.trim_end_matches('\r');
    let mut fields = line.split(',');
    for (position, expected) in CSV_HEADER.iter().enumerate() {
        let found = fields.next().unwrap_or("").trim();
        if found != *expected {
            return Err(Error::MissingColumn {
                position,
                expected,
                found: found.to_string(),
            });
        }
    }
    if let Some(extra) = fields.next() {
        return Err(Error::MissingColumn {
            position: CSV_HEADER.len(),
            expected: "",
            found: extra.trim().to_string(),
        });
    }
    Ok(())
}

fn parse_row(row: usize, line: &str) -> Result<SampleFrame> {
    let mut values = [0.0f64; 13];
    let mut fields = line.split(',');
    for (i, slot) in values.iter_mut().enumerate() {
        let raw = fields.next().unwrap_or("").trim();
        *slot = raw.parse::<f64>().map_err(|_| Error::MalformedRow {
            row,
            column: CSV_HEADER[i],
            value: raw.to_string(),
        })?;
        if !slot.is_finite() {
            return Err(Error::MalformedRow {
                row,
                column: CSV_HEADER[i],
                value: raw.to_string(),
            });
        }
    }
    Ok(SampleFrame {
        t: values[0],
        voltage0: values[1],
        voltage1: values[2],
        current0: values[3],
        current1: values[4],
        motor_speed0: values[5],
        motor_speed1: values[6],
        yaw: values[7],
        pitch: values[8],
        target_yaw: values[9],
        target_pitch: values[10],
        yaw_dot: values[11],
        pitch_dot: values[12],
    })
}

fn infer_rate(frames: &[SampleFrame]) -> f64 {
    if frames.len() < 2 {
        return 0.0;
    }
    let mut deltas: Vec<f64> = frames.windows(2).map(|w| w[1].t - w[0].t).collect();
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = deltas[deltas.len() / 2];
    if median <= 0.0 {
        return 0.0;
    }
    let rate = 1.0 / median;
    // Recording rates are integer-valued; snap away the inference rounding.
    let snapped = rate.round();
    if snapped >= 1.0 && (rate - snapped).abs() < 1e-6 * snapped {
        snapped
    } else {
        rate
    }
}

/// Writes a dataset. The time column is regenerated as `t0 + i/rate_hz` so
/// the monotone-step invariant survives round trips bit-exactly.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut out = BufWriter::new(file);
    write!(out, "{}", CSV_HEADER.join(","))?;
    out.write_all(b"\n")?;

    let t0 = dataset.frames().first().map_or(0.0, |f| f.t);
    let rate = dataset.rate_hz();
    for (i, frame) in dataset.frames().iter().enumerate() {
        let t = if rate > 0.0 { t0 + i as f64 / rate } else { frame.t };
        let cols = frame.as_columns();
        write!(out, "{}", t)?;
        for value in &cols[1..] {
            write!(out, ",{}", value)?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
