use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::Context;
use evalsuite::write_rmse_csv;
use generator::load_composite;
use serde::Serialize;
use timeseries_core::{read_csv, REPLICATED_VARS, VAR_COUNT};

use super::print_resolved;
use crate::args::EvaluateArgs;

#[derive(Serialize)]
struct Resolved {
    manifest: PathBuf,
    data: PathBuf,
    seeds: usize,
    segments: usize,
    draw_seed: u64,
    out: PathBuf,
    json: bool,
}

#[derive(Serialize)]
struct JsonRow {
    step: usize,
    variable: &'static str,
    median: f64,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct JsonSummary {
    seeds: usize,
    segments: usize,
    rows: Vec<JsonRow>,
}

pub fn evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let resolved = Resolved {
        manifest: args.manifest,
        data: args.data,
        seeds: args.seeds,
        segments: args.segments,
        draw_seed: args.seed,
        out: args.out,
        json: args.json,
    };
    print_resolved("evaluate", &resolved)?;

    let gen = load_composite(&resolved.manifest)
        .with_context(|| format!("loading {}", resolved.manifest.display()))?;
    let validation =
        read_csv(&resolved.data).with_context(|| format!("reading {}", resolved.data.display()))?;
    let table = evalsuite::evaluate(
        &gen,
        &validation,
        resolved.seeds,
        resolved.segments,
        resolved.draw_seed,
    )?;

    let mut out = BufWriter::new(
        File::create(&resolved.out)
            .with_context(|| format!("creating {}", resolved.out.display()))?,
    );
    write_rmse_csv(&table, &mut out)?;
    println!(
        "wrote RMSE quantiles for {} steps x {} variables to {}",
        table.steps(),
        VAR_COUNT,
        resolved.out.display()
    );

    if resolved.json {
        let mut rows = Vec::with_capacity(table.steps() * VAR_COUNT);
        for step in 0..table.steps() {
            for (k, var) in REPLICATED_VARS.iter().enumerate() {
                let band = table.cell(step, k);
                rows.push(JsonRow {
                    step: step + 1,
                    variable: var.name(),
                    median: band.median,
                    lower: band.lower,
                    upper: band.upper,
                });
            }
        }
        let summary = JsonSummary {
            seeds: resolved.seeds,
            segments: resolved.segments,
            rows,
        };
        println!("{}", serde_json::to_string_pretty(&summary)?);
    }
    Ok(())
}
