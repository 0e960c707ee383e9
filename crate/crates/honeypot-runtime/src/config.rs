//! Runtime configuration for the `serve` entry point.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SeedSource};

fn default_listen() -> String {
    format!("0.0.0.0:{}", opcua_wire::DEFAULT_PORT)
}

fn default_publish_rate() -> f64 {
    500.0
}

fn default_queue_capacity() -> usize {
    4
}

fn default_seed() -> SeedSource {
    SeedSource::Simulator { seed: 42 }
}

fn default_intrusion_log() -> PathBuf {
    PathBuf::from("intrusions.jsonl")
}

/// Everything a running decoy needs. Only the manifest path is mandatory;
/// the defaults reproduce the deployment described in the evaluation
/// (500 Hz publication, four segments of buffer, port 4840).
///
/// The segment rate is not a field: it is always `publish_rate_hz / H` with
/// H taken from the manifest, which keeps the rate algebra true by
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeConfig {
    /// Path to the trained generator manifest.
    pub manifest: PathBuf,
    /// Listen address for the protocol front-end.
    #[serde(default = "default_listen")]
    pub listen: String,
    /// Samples published per second.
    #[serde(default = "default_publish_rate")]
    pub publish_rate_hz: f64,
    /// Bounded queue size, in segments.
    #[serde(default = "default_queue_capacity")]
    pub queue_capacity: usize,
    /// Where the initial look-back comes from.
    #[serde(default = "default_seed")]
    pub seed: SeedSource,
    /// Append-only record of client write attempts.
    #[serde(default = "default_intrusion_log")]
    pub intrusion_log: PathBuf,
    /// Reserved: feed client writes back into the look-back window. The
    /// current decoy is observation-only, so enabling this is rejected.
    #[serde(default)]
    pub lookback_injection: bool,
}

impl RuntimeConfig {
    /// A config with every optional field at its default.
    pub fn new(manifest: impl Into<PathBuf>) -> RuntimeConfig {
        RuntimeConfig {
            manifest: manifest.into(),
            listen: default_listen(),
            publish_rate_hz: default_publish_rate(),
            queue_capacity: default_queue_capacity(),
            seed: default_seed(),
            intrusion_log: default_intrusion_log(),
            lookback_injection: false,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RuntimeConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: RuntimeConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.publish_rate_hz.is_finite() && self.publish_rate_hz > 0.0) {
            return Err(Error::Config(format!(
                "publish rate must be a positive number, got {}",
                self.publish_rate_hz
            )));
        }
        if self.queue_capacity == 0 {
            return Err(Error::Config("queue capacity must be at least 1".into()));
        }
        if self.lookback_injection {
            return Err(Error::Config(
                "look-back injection is reserved for a future release".into(),
            ));
        }
        Ok(())
    }

    /// Segments consumed (hence produced) per second for a given segment
    /// length H.
    pub fn segment_rate_hz(&self, lookahead: usize) -> f64 {
        self.publish_rate_hz / lookahead as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_bare_manifest_line_gets_full_defaults() {
        let config: RuntimeConfig = toml::from_str("manifest = \"models/generator.toml\"").unwrap();
        assert_eq!(config, RuntimeConfig::new("models/generator.toml"));
        assert_eq!(config.listen, "0.0.0.0:4840");
        assert_eq!(config.publish_rate_hz, 500.0);
        assert_eq!(config.queue_capacity, 4);
        assert_eq!(config.seed, SeedSource::Simulator { seed: 42 });
        assert!(!config.lookback_injection);
        config.validate().unwrap();
    }

    #[test]
    fn every_field_round_trips_through_toml() {
        let config = RuntimeConfig {
            manifest: "m/generator.toml".into(),
            listen: "127.0.0.1:14840".into(),
            publish_rate_hz: 50.0,
            queue_capacity: 2,
            seed: SeedSource::Csv { path: "tail.csv".into() },
            intrusion_log: "log.jsonl".into(),
            lookback_injection: false,
        };
        let text = toml::to_string(&config).unwrap();
        assert_eq!(toml::from_str::<RuntimeConfig>(&text).unwrap(), config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RuntimeConfig>(
            "manifest = \"g.toml\"\nsegment_rate_hz = 2.5\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("segment_rate_hz"));
    }

    #[test]
    fn validation_catches_nonsense() {
        let mut config = RuntimeConfig::new("g.toml");
        config.publish_rate_hz = 0.0;
        assert!(matches!(config.validate(), Err(Error::Config(_))));

        let mut config = RuntimeConfig::new("g.toml");
        config.queue_capacity = 0;
        assert!(matches!(config.validate(), Err(Error::Config(_))));

        let mut config = RuntimeConfig::new("g.toml");
        config.lookback_injection = true;
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rate_algebra_holds_for_the_deployment_defaults() {
        let config = RuntimeConfig::new("g.toml");
        assert_eq!(config.segment_rate_hz(200), 2.5);
        assert_eq!(config.segment_rate_hz(200) * 200.0, config.publish_rate_hz);
    }
}
