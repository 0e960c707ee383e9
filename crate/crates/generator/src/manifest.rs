//! The on-disk manifest tying the eight model files and the scaler together.

use std::fs;
use std::path::{Path, PathBuf};

use ed_lstm::{load_model, save_model};
use serde::{Deserialize, Serialize};
use timeseries_core::{ScalerParams, REPLICATED_VARS, VAR_COUNT};

use crate::{CompositeGenerator, Error, Result, Strategy};

/// Default file name used when a composite is saved into a directory.
pub const MANIFEST_FILE: &str = "generator.toml";

/// Serialized description of a trained composite generator.
///
/// Model paths are resolved relative to the manifest's own directory, so a
/// model directory can be moved or copied as a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorManifest {
    pub lookback: usize,
    pub lookahead: usize,
    #[serde(default)]
    pub strategy: Strategy,
    pub scaler: ScalerParams,
    pub models: ModelPaths,
}

/// One model file per replicated variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelPaths {
    pub voltage0: PathBuf,
    pub voltage1: PathBuf,
    pub yaw: PathBuf,
    pub pitch: PathBuf,
    pub target_yaw: PathBuf,
    pub target_pitch: PathBuf,
    pub yaw_dot: PathBuf,
    pub pitch_dot: PathBuf,
}

impl ModelPaths {
    /// Paths in the fixed variable order.
    pub fn in_order(&self) -> [&Path; VAR_COUNT] {
        [
            &self.voltage0,
            &self.voltage1,
            &self.yaw,
            &self.pitch,
            &self.target_yaw,
            &self.target_pitch,
            &self.yaw_dot,
            &self.pitch_dot,
        ]
    }

    /// `<variable>.edl1` next to the manifest, for each variable.
    pub fn flat_layout() -> ModelPaths {
        let p = |i: usize| PathBuf::from(format!("{}.edl1", REPLICATED_VARS[i].name()));
        ModelPaths {
            voltage0: p(0),
            voltage1: p(1),
            yaw: p(2),
            pitch: p(3),
            target_yaw: p(4),
            target_pitch: p(5),
            yaw_dot: p(6),
            pitch_dot: p(7),
        }
    }
}

impl GeneratorManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<GeneratorManifest> {
        let text = fs::read_to_string(path).map_err(Error::ManifestRead)?;
        Ok(toml::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = toml::to_string_pretty(self).expect("manifest serializes to TOML");
        fs::write(path, text).map_err(Error::ManifestWrite)
    }
}

/// Writes the eight model files plus `generator.toml` into `dir` and returns
/// the manifest path.
pub fn save_composite(gen: &CompositeGenerator, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let paths = ModelPaths::flat_layout();
    for (model, rel) in gen.models().iter().zip(paths.in_order()) {
        save_model(model, dir.join(rel))?;
    }
    let manifest = GeneratorManifest {
        lookback: gen.lookback(),
        lookahead: gen.lookahead(),
        strategy: gen.strategy(),
        scaler: gen.scaler().clone(),
        models: paths,
    };
    let path = dir.join(MANIFEST_FILE);
    manifest.save(&path)?;
    Ok(path)
}

/// Loads the manifest and all eight models, checking that each file predicts
/// the variable its slot names and matches the manifest's window sizes.
pub fn load_composite(manifest_path: impl AsRef<Path>) -> Result<CompositeGenerator> {
    let manifest_path = manifest_path.as_ref();
    let manifest = GeneratorManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut models = Vec::with_capacity(VAR_COUNT);
    for (k, rel) in manifest.models.in_order().into_iter().enumerate() {
        let full = if rel.is_absolute() {
            rel.to_path_buf()
        } else {
            base.join(rel)
        };
        let model = load_model(&full).map_err(|source| Error::ModelLoad {
            path: full.display().to_string(),
            source,
        })?;
        let slot = REPLICATED_VARS[k].name();
        if model.target_index != k {
            return Err(Error::ModelOrderMismatch(format!(
                "file for {slot} predicts variable index {}",
                model.target_index
            )));
        }
        if (model.lookback, model.lookahead) != (manifest.lookback, manifest.lookahead) {
            return Err(Error::ModelOrderMismatch(format!(
                "file for {slot} has window ({}, {}) but the manifest declares ({}, {})",
                model.lookback, model.lookahead, manifest.lookback, manifest.lookahead
            )));
        }
        models.push(model);
    }
    CompositeGenerator::new(models, manifest.scaler, manifest.strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ed_lstm::EncoderDecoderModel;
    use timeseries_core::{Mat, SplitMix64};

    fn scaler() -> ScalerParams {
        ScalerParams {
            mins: [-24.0, -24.0, -1.5, -0.8, -1.5, -0.8, -6.0, -4.0],
            maxs: [24.0, 24.0, 1.5, 0.8, 1.5, 0.8, 6.0, 4.0],
        }
    }

    fn build_generator(l: usize, h: usize) -> CompositeGenerator {
        let models = (0..VAR_COUNT)
            .map(|k| EncoderDecoderModel::init(3, l, h, k, 50 + k as u64))
            .collect();
        CompositeGenerator::new(models, scaler(), Strategy::MultiStep).unwrap()
    }

    #[test]
    fn manifest_round_trips_through_toml() {
        let manifest = GeneratorManifest {
            lookback: 200,
            lookahead: 20,
            strategy: Strategy::SingleStep,
            scaler: scaler(),
            models: ModelPaths::flat_layout(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        manifest.save(&path).unwrap();
        assert_eq!(GeneratorManifest::load(&path).unwrap(), manifest);
    }

    #[test]
    fn saved_composite_loads_back_identically() {
        let gen = build_generator(6, 3);
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = save_composite(&gen, dir.path()).unwrap();
        assert_eq!(manifest_path.file_name().unwrap(), MANIFEST_FILE);

        let loaded = load_composite(&manifest_path).unwrap();
        assert_eq!(loaded.models(), gen.models());
        assert_eq!(loaded.scaler(), gen.scaler());
        assert_eq!(loaded.strategy(), Strategy::MultiStep);

        let mut rng = SplitMix64::new(5);
        let window = Mat::from_fn(6, VAR_COUNT, |_, _| rng.next_f64());
        assert_eq!(
            loaded.generate_segment(&window).unwrap(),
            gen.generate_segment(&window).unwrap()
        );
    }

    #[test]
    fn strategy_defaults_to_multi_step_when_absent() {
        let text = r#"
lookback = 4
lookahead = 2

[scaler]
mins = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
maxs = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]

[models]
voltage0 = "voltage0.edl1"
voltage1 = "voltage1.edl1"
yaw = "yaw.edl1"
pitch = "pitch.edl1"
target_yaw = "target_yaw.edl1"
target_pitch = "target_pitch.edl1"
yaw_dot = "yaw_dot.edl1"
pitch_dot = "pitch_dot.edl1"
"#;
        let manifest: GeneratorManifest = toml::from_str(text).unwrap();
        assert_eq!(manifest.strategy, Strategy::MultiStep);
    }

    #[test]
    fn unknown_manifest_keys_are_rejected() {
        let err = toml::from_str::<GeneratorManifest>("lookback = 4\nsmoothing = true\n");
        assert!(err.is_err());
    }

    #[test]
    fn model_in_the_wrong_slot_is_rejected() {
        let gen = build_generator(6, 3);
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = save_composite(&gen, dir.path()).unwrap();

        let yaw = dir.path().join("yaw.edl1");
        let pitch = dir.path().join("pitch.edl1");
        fs::copy(&pitch, &yaw).unwrap();
        let err = load_composite(&manifest_path).unwrap_err();
        assert!(matches!(err, Error::ModelOrderMismatch(_)));
    }

    #[test]
    fn window_disagreement_with_manifest_is_rejected() {
        let gen = build_generator(6, 3);
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = save_composite(&gen, dir.path()).unwrap();

        let mut manifest = GeneratorManifest::load(&manifest_path).unwrap();
        manifest.lookahead = 4;
        manifest.save(&manifest_path).unwrap();
        let err = load_composite(&manifest_path).unwrap_err();
        assert!(matches!(err, Error::ModelOrderMismatch(_)));
    }

    #[test]
    fn missing_model_file_names_the_path() {
        let gen = build_generator(6, 3);
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = save_composite(&gen, dir.path()).unwrap();
        fs::remove_file(dir.path().join("target_yaw.edl1")).unwrap();

        match load_composite(&manifest_path).unwrap_err() {
            Error::ModelLoad { path, .. } => assert!(path.contains("target_yaw.edl1")),
            other => panic!("unexpected error: {other}"),
        }
    }
}
