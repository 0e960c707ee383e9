//! Simulator configuration file: a `[plant]` table plus a `[[schedule]]`
//! array, TOML-encoded. `configs/sim-default.toml` ships the defaults and a
//! test pins it against `SimConfig::default()` so file and code cannot
//! drift apart.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{PlantParams, Result, ScheduleEntry, SequenceSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub plant: PlantParams,
    pub schedule: Vec<ScheduleEntry>,
}

impl Default for SimConfig {
    fn default() -> SimConfig {
        SimConfig {
            plant: PlantParams::default(),
            schedule: vec![
                ScheduleEntry { target_yaw: 0.9, target_pitch: 0.35, duration: 5.0 },
                ScheduleEntry { target_yaw: -0.7, target_pitch: 0.15, duration: 5.0 },
                ScheduleEntry { target_yaw: 0.5, target_pitch: -0.2, duration: 5.0 },
                ScheduleEntry { target_yaw: -0.3, target_pitch: 0.45, duration: 5.0 },
            ],
        }
    }
}

impl SimConfig {
    /// Validates and returns the schedule as a cyclic sequence.
    pub fn schedule(&self) -> Result<SequenceSchedule> {
        SequenceSchedule::new(self.schedule.clone())
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let config: SimConfig = toml::from_str(&text)?;
    config.schedule()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let config = SimConfig::default();
        let text = toml::to_string_pretty(&config).unwrap();
        let back: SimConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn shipped_default_file_matches_compiled_defaults() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/sim-default.toml");
        let config = load_config(path).unwrap();
        assert_eq!(config, SimConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[plant]\nwarp_drive = 1.0\nschedule = []\n";
        assert!(toml::from_str::<SimConfig>(text).is_err());
    }

    #[test]
    fn empty_schedule_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        let mut config = SimConfig::default();
        config.schedule.clear();
        std::fs::write(&path, toml::to_string(&config).unwrap()).unwrap();
        assert!(load_config(&path).is_err());
    }
}
