use std::path::PathBuf;

use anyhow::Context;
use cps_sim::{run_cycle, PlantParams, ScheduleEntry, SimConfig};
use serde::Serialize;
use timeseries_core::write_csv;

use super::print_resolved;
use crate::args::SimulateArgs;

#[derive(Serialize)]
struct Resolved {
    duration: f64,
    rate_hz: f64,
    noise_seed: u64,
    out: PathBuf,
    plant: PlantParams,
    schedule: Vec<ScheduleEntry>,
}

pub fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let sim = match &args.config {
        Some(path) => cps_sim::load_config(path)
            .with_context(|| format!("loading plant config {}", path.display()))?,
        None => SimConfig::default(),
    };
    let resolved = Resolved {
        duration: args.duration.unwrap_or_else(|| args.profile.sim_duration()),
        rate_hz: args.rate.unwrap_or_else(|| args.profile.sample_rate()),
        noise_seed: args.seed,
        out: args.out,
        plant: sim.plant.clone(),
        schedule: sim.schedule.clone(),
    };
    print_resolved("simulate", &resolved)?;

    let dataset = run_cycle(
        &resolved.plant,
        &sim.schedule()?,
        resolved.duration,
        resolved.rate_hz,
        resolved.noise_seed,
    )?;
    write_csv(&dataset, &resolved.out)
        .with_context(|| format!("writing {}", resolved.out.display()))?;
    println!(
        "wrote {} samples ({} s at {} Hz) to {}",
        dataset.len(),
        resolved.duration,
        resolved.rate_hz,
        resolved.out.display()
    );
    Ok(())
}
