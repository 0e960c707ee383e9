//! Deterministic stand-in for the 2-DoF fan-beam rig: a linear plant with
//! two fans driving pitch and yaw, an LQR tracking controller saturated at
//! ±24 V, a cyclic pose schedule, and seeded sensor/actuator noise.
//!
//! A run is a pure function of (parameters, schedule, duration, rate, seed),
//! so every emitted dataset can be reproduced bit for bit.

mod config;
mod lqr;
mod plant;
mod schedule;
mod sim;

pub use config::{load_config, SimConfig};
pub use lqr::lqr_gain;
pub use plant::{controller_step, plant_step, PlantParams, PlantState};
pub use schedule::{ScheduleEntry, SequenceSchedule};
pub use sim::run_cycle;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Riccati integration did not converge within {steps} steps")]
    NoConvergence { steps: usize },
    #[error("config i/o: {0}")]
    ConfigRead(#[from] std::io::Error),
    #[error("config parse: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
