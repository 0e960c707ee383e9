use std::path::PathBuf;

use anyhow::Context;
use evalsuite::bench_producer;
use generator::load_composite;
use serde::Serialize;
use timeseries_core::{Mat, SplitMix64, VAR_COUNT};

use super::print_resolved;
use crate::args::BenchArgs;

#[derive(Serialize)]
struct Resolved {
    manifest: PathBuf,
    n: usize,
    seed: u64,
    json: bool,
}

#[derive(Serialize)]
struct JsonStats {
    n: usize,
    min_s: f64,
    mean_s: f64,
    max_s: f64,
}

pub fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let resolved = Resolved {
        manifest: args.manifest,
        n: args.n,
        seed: args.seed,
        json: args.json,
    };
    print_resolved("bench", &resolved)?;

    let gen = load_composite(&resolved.manifest)
        .with_context(|| format!("loading {}", resolved.manifest.display()))?;
    // Timing depends only on the window shape, so any finite fill works.
    let mut rng = SplitMix64::new(resolved.seed);
    let lookback = Mat::from_fn(gen.lookback(), VAR_COUNT, |_, _| rng.next_f64());
    let stats = bench_producer(&gen, &lookback, resolved.n)?;
    println!(
        "segment computation over {} runs: min {:.6} s, mean {:.6} s, max {:.6} s",
        resolved.n, stats.min, stats.mean, stats.max
    );
    if resolved.json {
        let json = JsonStats {
            n: resolved.n,
            min_s: stats.min,
            mean_s: stats.mean,
            max_s: stats.max,
        };
        println!("{}", serde_json::to_string_pretty(&json)?);
    }
    Ok(())
}
