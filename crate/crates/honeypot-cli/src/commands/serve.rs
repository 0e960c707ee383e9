use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

use clap::CommandFactory;
use honeypot_runtime::{RuntimeConfig, SeedSource};

use super::print_resolved;
use crate::args::{Cli, ServeArgs};

static STOP: OnceLock<Arc<AtomicBool>> = OnceLock::new();

extern "C" fn on_signal(_: libc::c_int) {
    if let Some(stop) = STOP.get() {
        stop.store(true, Ordering::SeqCst);
    }
}

fn install_signal_handlers(stop: &Arc<AtomicBool>) {
    STOP.set(Arc::clone(stop)).ok();
    let handler = on_signal as extern "C" fn(libc::c_int) as libc::sighandler_t;
    unsafe {
        libc::signal(libc::SIGTERM, handler);
        libc::signal(libc::SIGINT, handler);
    }
}

pub fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let mut config = match (&args.config, &args.manifest) {
        (Some(path), _) => RuntimeConfig::load(path)?,
        (None, Some(manifest)) => RuntimeConfig::new(manifest),
        (None, None) => {
            Cli::command()
                .error(
                    clap::error::ErrorKind::MissingRequiredArgument,
                    "serve needs --manifest or a --config file naming one",
                )
                .exit();
        }
    };
    if let Some(manifest) = args.manifest {
        config.manifest = manifest;
    }
    if let Some(listen) = args.listen {
        config.listen = listen;
    }
    if let Some(rate) = args.publish_rate {
        config.publish_rate_hz = rate;
    }
    if let Some(capacity) = args.queue_capacity {
        config.queue_capacity = capacity;
    }
    match (args.seed_data, args.seed_sim) {
        (Some(path), _) => config.seed = SeedSource::Csv { path },
        (None, Some(seed)) => config.seed = SeedSource::Simulator { seed },
        (None, None) => {}
    }
    if let Some(path) = args.intrusion_log {
        config.intrusion_log = path;
    }
    config.validate()?;
    print_resolved("serve", &config)?;

    let stop = Arc::new(AtomicBool::new(false));
    install_signal_handlers(&stop);
    let report = honeypot_runtime::serve(&config, stop)?;
    println!(
        "published {} rows in {} segments ({} underruns)",
        report.rows_published, report.segments_consumed, report.underruns
    );
    Ok(())
}
