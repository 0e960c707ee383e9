use crate::{Error, Result};

/// One 500 Hz snapshot of the 13 dataset columns.
///
/// Units: seconds, volts, amperes, rpm, radians, rad/s. Fan voltages are
/// limited to the ±24 V actuator range.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleFrame {
    pub t: f64,
    pub voltage0: f64,
    pub voltage1: f64,
    pub current0: f64,
    pub current1: f64,
    pub motor_speed0: f64,
    pub motor_speed1: f64,
    pub yaw: f64,
    pub pitch: f64,
    pub target_yaw: f64,
    pub target_pitch: f64,
    pub yaw_dot: f64,
    pub pitch_dot: f64,
}

impl SampleFrame {
    pub fn is_finite(&self) -> bool {
        self.as_columns().iter().all(|v| v.is_finite())
    }

    /// All 13 column values in file order (Time first).
    pub fn as_columns(&self) -> [f64; 13] {
        [
            self.t,
            self.voltage0,
            self.voltage1,
            self.current0,
            self.current1,
            self.motor_speed0,
            self.motor_speed1,
            self.yaw,
            self.pitch,
            self.target_yaw,
            self.target_pitch,
            self.yaw_dot,
            self.pitch_dot,
        ]
    }

    /// The 8 replicated variables in generator order.
    pub fn replicated(&self) -> [f64; VAR_COUNT] {
        [
            self.voltage0,
            self.voltage1,
            self.yaw,
            self.pitch,
            self.target_yaw,
            self.target_pitch,
            self.yaw_dot,
            self.pitch_dot,
        ]
    }
}

/// Number of variables replicated by the generative model (motor currents
/// and speeds are recorded but not replicated).
pub const VAR_COUNT: usize = 8;

/// The replicated variables, in the fixed order used everywhere: model
/// indices, scaler slots and generated segment columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Voltage0,
    Voltage1,
    Yaw,
    Pitch,
    TargetYaw,
    TargetPitch,
    YawDot,
    PitchDot,
}

pub const REPLICATED_VARS: [Variable; VAR_COUNT] = [
    Variable::Voltage0,
    Variable::Voltage1,
    Variable::Yaw,
    Variable::Pitch,
    Variable::TargetYaw,
    Variable::TargetPitch,
    Variable::YawDot,
    Variable::PitchDot,
];

impl Variable {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Variable> {
        REPLICATED_VARS.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::Voltage0 => "voltage0",
            Variable::Voltage1 => "voltage1",
            Variable::Yaw => "yaw",
            Variable::Pitch => "pitch",
            Variable::TargetYaw => "target_yaw",
            Variable::TargetPitch => "target_pitch",
            Variable::YawDot => "yaw_dot",
            Variable::PitchDot => "pitch_dot",
        }
    }

    pub fn of(self, frame: &SampleFrame) -> f64 {
        frame.replicated()[self.index()]
    }
}

/// An ordered sequence of frames sampled at a fixed rate.
///
/// Time is strictly increasing with step `1/rate_hz` (within 1e-9 s); a
/// dataset with fewer than two frames carries `rate_hz = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    frames: Vec<SampleFrame>,
    rate_hz: f64,
}

/// Allowed absolute deviation of each time step from 1/rate, in seconds.
pub const TIME_STEP_TOLERANCE: f64 = 1e-9;

impl Dataset {
    /// Builds a dataset, validating the monotone-time invariant.
    pub fn new(frames: Vec<SampleFrame>, rate_hz: f64) -> Result<Dataset> {
        if frames.len() >= 2 && rate_hz > 0.0 {
            let dt = 1.0 / rate_hz;
            for i in 1..frames.len() {
                let step = frames[i].t - frames[i - 1].t;
                if step <= 0.0 || (step - dt).abs() > TIME_STEP_TOLERANCE {
                    return Err(Error::NonMonotoneTime { row: i });
                }
            }
        }
        Ok(Dataset { frames, rate_hz })
    }

    pub fn frames(&self) -> &[SampleFrame] {
        &self.frames
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// The 8 replicated values of frame `i`.
    pub fn replicated_row(&self, i: usize) -> [f64; VAR_COUNT] {
        self.frames[i].replicated()
    }
}
