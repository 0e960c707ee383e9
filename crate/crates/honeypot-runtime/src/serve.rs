//! Wiring: seed, producer, consumer, and protocol front-end as one decoy.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use opcua_wire::{now_ticks, AddressSpace, IntrusionLog, Server, ServerHandle};
use sha2::{Digest, Sha256};
use timeseries_core::VAR_COUNT;

use crate::consumer::{consumer_loop, ConsumerReport, MonotonicPacer};
use crate::producer::producer_loop;
use crate::queue::SegmentQueue;
use crate::seed::init_lookback;
use crate::{Error, Result, RuntimeConfig};

/// A fully started decoy: three worker roles plus the listener.
///
/// Dropping the handle without calling [`shutdown`](Self::shutdown) leaks the
/// worker threads, so hold on to it; `serve` does this for the CLI.
pub struct RunningDecoy {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    queue: Arc<SegmentQueue>,
    producer: JoinHandle<Result<u64>>,
    consumer: JoinHandle<ConsumerReport>,
    server: ServerHandle,
    manifest_hash: String,
    publish_rate_hz: f64,
    segment_rate_hz: f64,
    lookahead: usize,
}

impl RunningDecoy {
    /// Loads the composite, seeds the look-back, publishes the seed's final
    /// row so early clients see plausible values, and starts all three
    /// roles. `stop` is shared: raising it from anywhere begins shutdown.
    pub fn start(config: &RuntimeConfig, stop: Arc<AtomicBool>) -> Result<RunningDecoy> {
        config.validate()?;
        let gen = generator::load_composite(&config.manifest)?;
        let manifest_hash = file_sha256(&config.manifest)?;

        let mut window = init_lookback(
            &config.seed,
            gen.lookback(),
            config.publish_rate_hz,
            gen.scaler(),
        )?;

        let space = Arc::new(AddressSpace::honeypot());
        let mut seed_row = [0.0; VAR_COUNT];
        seed_row.copy_from_slice(window.row(gen.lookback() - 1));
        space.set_replicated(&gen.scaler().denormalize_row(&seed_row), now_ticks());

        let log = Arc::new(IntrusionLog::to_file(&config.intrusion_log)?);
        let server = Server::bind(config.listen.as_str(), Arc::clone(&space), log)?;
        let addr = server.local_addr();

        let lookahead = gen.lookahead();
        let queue = Arc::new(SegmentQueue::new(config.queue_capacity));
        let producer = {
            let (queue, stop) = (Arc::clone(&queue), Arc::clone(&stop));
            thread::spawn(move || {
                let result =
                    producer_loop(|seq| Ok(gen.step_window(&mut window, seq)?), &queue, &stop);
                if let Err(e) = &result {
                    log::error!("segment production failed: {e}");
                    stop.store(true, Ordering::Relaxed);
                }
                result
            })
        };
        let consumer = {
            let (queue, stop, space) = (Arc::clone(&queue), Arc::clone(&stop), space);
            let rate = config.publish_rate_hz;
            thread::spawn(move || {
                consumer_loop(&queue, &space, rate, &stop, &mut MonotonicPacer::new())
            })
        };

        Ok(RunningDecoy {
            addr,
            stop,
            queue,
            producer,
            consumer,
            server: server.spawn(),
            manifest_hash,
            publish_rate_hz: config.publish_rate_hz,
            segment_rate_hz: config.segment_rate_hz(lookahead),
            lookahead,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn manifest_hash(&self) -> &str {
        &self.manifest_hash
    }

    /// True once shutdown has begun, whether externally or because a worker
    /// failed.
    pub fn stopping(&self) -> bool {
        self.stop.load(Ordering::Relaxed)
    }

    pub fn status_line(&self) -> String {
        format!(
            "decoy listening on {} | manifest sha256 {} | publish {} Hz | segments {} Hz (H = {})",
            self.addr,
            self.manifest_hash,
            self.publish_rate_hz,
            self.segment_rate_hz,
            self.lookahead
        )
    }

    /// Stops all three roles and waits for them. Queued segments are
    /// discarded, connections are dropped, and a generation failure that
    /// ended production early surfaces here.
    pub fn shutdown(mut self) -> Result<ConsumerReport> {
        self.stop.store(true, Ordering::Relaxed);
        self.queue.close();
        let produced = self.producer.join().map_err(|_| Error::WorkerPanicked)?;
        let report = self.consumer.join().map_err(|_| Error::WorkerPanicked)?;
        self.server.shutdown();
        produced?;
        Ok(report)
    }
}

/// Runs a decoy in the foreground until `stop` is raised, then shuts it
/// down. Prints the startup status line; returns what the consumer did.
pub fn serve(config: &RuntimeConfig, stop: Arc<AtomicBool>) -> Result<ConsumerReport> {
    let decoy = RunningDecoy::start(config, Arc::clone(&stop))?;
    println!("{}", decoy.status_line());
    // Reaches pipes promptly too, not only terminals.
    let _ = std::io::Write::flush(&mut std::io::stdout());

    while !stop.load(Ordering::Relaxed) {
        thread::sleep(Duration::from_millis(25));
    }
    let report = decoy.shutdown()?;
    log::info!(
        "decoy stopped: {} rows in {} segments, {} underruns",
        report.rows_published,
        report.segments_consumed,
        report.underruns
    );
    Ok(report)
}

fn file_sha256(path: &std::path::Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
