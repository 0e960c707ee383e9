use std::path::PathBuf;

use anyhow::Context;
use generator::{load_composite, segments_to_dataset};
use honeypot_runtime::{init_lookback, SeedSource};
use serde::Serialize;
use timeseries_core::write_csv;

use super::print_resolved;
use crate::args::GenerateArgs;

#[derive(Serialize)]
struct Resolved {
    manifest: PathBuf,
    seed: SeedSource,
    segments: usize,
    rate_hz: f64,
    out: PathBuf,
}

pub fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let seed = match (args.seed_data, args.seed_sim) {
        (Some(path), _) => SeedSource::Csv { path },
        (None, Some(seed)) => SeedSource::Simulator { seed },
        (None, None) => SeedSource::Simulator { seed: 42 },
    };
    let resolved = Resolved {
        manifest: args.manifest,
        seed,
        segments: args.segments,
        rate_hz: args.rate.unwrap_or_else(|| args.profile.sample_rate()),
        out: args.out,
    };
    print_resolved("generate", &resolved)?;

    let gen = load_composite(&resolved.manifest)
        .with_context(|| format!("loading {}", resolved.manifest.display()))?;
    let window = init_lookback(&resolved.seed, gen.lookback(), resolved.rate_hz, gen.scaler())?;
    let segments = gen.generate_trajectory(&window, resolved.segments)?;
    let dataset = segments_to_dataset(&segments, resolved.rate_hz, 1.0 / resolved.rate_hz);
    write_csv(&dataset, &resolved.out)
        .with_context(|| format!("writing {}", resolved.out.display()))?;
    println!(
        "wrote {} samples ({} s at {} Hz) to {}",
        dataset.len(),
        dataset.len() as f64 / resolved.rate_hz,
        resolved.rate_hz,
        resolved.out.display()
    );
    Ok(())
}
