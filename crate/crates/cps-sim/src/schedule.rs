//! Cyclic pose schedule: the rig visits a fixed list of (yaw, pitch)
//! targets, each held for its duration, then starts over.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub target_yaw: f64,
    pub target_pitch: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSchedule {
    entries: Vec<ScheduleEntry>,
    total: f64,
}

impl SequenceSchedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Result<SequenceSchedule> {
        if entries.is_empty() {
            return Err(Error::BadConfig("schedule needs at least one entry".into()));
        }
        if let Some(bad) = entries.iter().find(|e| !(e.duration > 0.0)) {
            return Err(Error::BadConfig(format!(
                "schedule duration must be positive, got {}",
                bad.duration
            )));
        }
        let total = entries.iter().map(|e| e.duration).sum();
        Ok(SequenceSchedule { entries, total })
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    /// Length of one full cycle in seconds.
    pub fn cycle_duration(&self) -> f64 {
        self.total
    }

    /// Target pose (yaw, pitch) active at time `t`, cycling forever.
    pub fn target_at(&self, t: f64) -> (f64, f64) {
        let mut tc = t.rem_euclid(self.total);
        if !tc.is_finite() {
            tc = 0.0;
        }
        let mut acc = 0.0;
        for e in &self.entries {
            acc += e.duration;
            if tc < acc {
                return (e.target_yaw, e.target_pitch);
            }
        }
        let last = self.entries.last().unwrap();
        (last.target_yaw, last.target_pitch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_pose() -> SequenceSchedule {
        SequenceSchedule::new(vec![
            ScheduleEntry { target_yaw: 0.9, target_pitch: 0.35, duration: 5.0 },
            ScheduleEntry { target_yaw: -0.7, target_pitch: 0.15, duration: 5.0 },
            ScheduleEntry { target_yaw: 0.5, target_pitch: -0.2, duration: 5.0 },
            ScheduleEntry { target_yaw: -0.3, target_pitch: 0.45, duration: 5.0 },
        ])
        .unwrap()
    }

    #[test]
    fn walks_entries_and_wraps() {
        let s = four_pose();
        assert_eq!(s.target_at(0.0), (0.9, 0.35));
        assert_eq!(s.target_at(4.999), (0.9, 0.35));
        assert_eq!(s.target_at(5.0), (-0.7, 0.15));
        assert_eq!(s.target_at(14.0), (0.5, -0.2));
        assert_eq!(s.target_at(19.9), (-0.3, 0.45));
        assert_eq!(s.target_at(20.0), (0.9, 0.35));
        // 45 s = two full cycles + 5 s, right at the second pose boundary.
        assert_eq!(s.target_at(45.0), (-0.7, 0.15));
    }

    #[test]
    fn rejects_empty_and_nonpositive_durations() {
        assert!(SequenceSchedule::new(vec![]).is_err());
        assert!(SequenceSchedule::new(vec![ScheduleEntry {
            target_yaw: 0.0,
            target_pitch: 0.0,
            duration: 0.0,
        }])
        .is_err());
    }
}
