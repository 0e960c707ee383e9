use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use ed_lstm::EncoderDecoderModel;
use generator::{save_composite, CompositeGenerator, Strategy};
use serde::Serialize;
use timeseries_core::{fit_scaler, make_windows, read_csv, split, REPLICATED_VARS, VAR_COUNT};

use super::print_resolved;
use crate::args::TrainArgs;

#[derive(Serialize, Clone)]
struct Resolved {
    data: PathBuf,
    out: PathBuf,
    lookback: usize,
    lookahead: usize,
    hidden: usize,
    epochs: usize,
    lr: f64,
    batch_size: usize,
    stride: usize,
    train_fraction: f64,
    seed: u64,
    strategy: String,
}

#[derive(Serialize)]
struct VariableCurves {
    variable: &'static str,
    train_mse: Vec<f64>,
    val_mse: Vec<f64>,
}

/// `training.json`: the resolved config plus full loss curves, written next
/// to the model files. Deliberately free of timestamps so that identical
/// runs produce identical bytes.
#[derive(Serialize)]
struct TrainingSummary {
    config: Resolved,
    variables: Vec<VariableCurves>,
}

pub fn train(args: TrainArgs) -> anyhow::Result<()> {
    let p = args.profile;
    let strategy = if args.single_step { Strategy::SingleStep } else { Strategy::MultiStep };
    let resolved = Resolved {
        data: args.data,
        out: args.out,
        lookback: args.lookback.unwrap_or_else(|| p.lookback()),
        lookahead: args.lookahead.unwrap_or_else(|| p.lookahead()),
        hidden: args.hidden.unwrap_or_else(|| p.hidden()),
        epochs: args.epochs.unwrap_or_else(|| p.epochs()),
        lr: args.lr.unwrap_or(1e-3),
        batch_size: args.batch_size.unwrap_or(16),
        stride: args.stride.unwrap_or_else(|| p.stride()),
        train_fraction: args.train_fraction,
        seed: args.seed,
        strategy: match strategy {
            Strategy::MultiStep => "multi-step".into(),
            Strategy::SingleStep => "single-step".into(),
        },
    };
    print_resolved("train", &resolved)?;

    let dataset =
        read_csv(&resolved.data).with_context(|| format!("reading {}", resolved.data.display()))?;
    let (train_set, val_set) = split(&dataset, resolved.train_fraction)?;
    let scaler = fit_scaler(&train_set)?;
    let train_windows = make_windows(
        &train_set,
        resolved.lookback,
        resolved.lookahead,
        resolved.stride,
        &scaler,
    )?;
    let val_windows = if val_set.len() >= resolved.lookback + resolved.lookahead {
        make_windows(
            &val_set,
            resolved.lookback,
            resolved.lookahead,
            resolved.stride,
            &scaler,
        )?
    } else {
        log::warn!("validation split too short for a single window; tracking train MSE only");
        Vec::new()
    };
    println!(
        "{} training windows, {} validation windows",
        train_windows.len(),
        val_windows.len()
    );

    fs::create_dir_all(&resolved.out)?;
    let mut models = Vec::with_capacity(VAR_COUNT);
    let mut curves = Vec::with_capacity(VAR_COUNT);
    for k in 0..VAR_COUNT {
        let started = Instant::now();
        let mut model = EncoderDecoderModel::init(
            resolved.hidden,
            resolved.lookback,
            resolved.lookahead,
            k,
            resolved.seed + k as u64,
        );
        let report = ed_lstm::train(
            &mut model,
            &train_windows,
            &val_windows,
            resolved.epochs,
            resolved.lr,
            resolved.batch_size,
            resolved.seed + 100 + k as u64,
        )?;
        let name = REPLICATED_VARS[k].name();
        println!(
            "{name}: train MSE {:.3e} -> {:.3e} over {} epochs ({:.1} s)",
            report.train_mse[0],
            report.train_mse[report.epochs - 1],
            report.epochs,
            started.elapsed().as_secs_f64()
        );
        models.push(model);
        curves.push(VariableCurves {
            variable: name,
            train_mse: report.train_mse,
            val_mse: report.val_mse,
        });
    }

    let gen = CompositeGenerator::new(models, scaler, strategy)?;
    let manifest_path = save_composite(&gen, &resolved.out)?;
    let summary = TrainingSummary { config: resolved.clone(), variables: curves };
    let summary_path = resolved.out.join("training.json");
    fs::write(&summary_path, serde_json::to_vec_pretty(&summary)?)?;
    println!(
        "wrote manifest {} and curves {}",
        manifest_path.display(),
        summary_path.display()
    );
    Ok(())
}
