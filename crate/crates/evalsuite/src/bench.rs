//! Wall-clock benchmark of the segment computation.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use generator::CompositeGenerator;
use timeseries_core::Mat;

use crate::Result;

/// Spread of the per-segment computation time over a benchmark run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Monotonic time source, injectable so the stats path is testable.
pub trait Clock {
    fn now(&mut self) -> Duration;
}

/// The real clock, counting from its construction.
#[derive(Debug)]
pub struct MonotonicClock {
    base: Instant,
}

impl MonotonicClock {
    pub fn new() -> MonotonicClock {
        MonotonicClock {
            base: Instant::now(),
        }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock::new()
    }
}

impl Clock for MonotonicClock {
    fn now(&mut self) -> Duration {
        self.base.elapsed()
    }
}

/// Replays a scripted list of clock readings; panics when exhausted.
#[derive(Debug)]
pub struct FakeClock {
    readings: VecDeque<Duration>,
}

impl FakeClock {
    /// `readings` are absolute instants in seconds, returned in order.
    pub fn new(readings: impl IntoIterator<Item = f64>) -> FakeClock {
        FakeClock {
            readings: readings
                .into_iter()
                .map(Duration::from_secs_f64)
                .collect(),
        }
    }
}

impl Clock for FakeClock {
    fn now(&mut self) -> Duration {
        self.readings.pop_front().expect("fake clock ran dry")
    }
}

/// Times `n` consecutive segment computations on `lookback` after three
/// untimed warm-up calls. The cost is data-independent (dense arithmetic),
/// so a fixed look-back measures the steady-state producer step.
pub fn bench_producer(gen: &CompositeGenerator, lookback: &Mat, n: usize) -> Result<TimingStats> {
    bench_producer_with_clock(gen, lookback, n, &mut MonotonicClock::new())
}

pub fn bench_producer_with_clock(
    gen: &CompositeGenerator,
    lookback: &Mat,
    n: usize,
    clock: &mut dyn Clock,
) -> Result<TimingStats> {
    assert!(n >= 1);
    for _ in 0..3 {
        gen.generate_segment(lookback)?;
    }
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for _ in 0..n {
        let t0 = clock.now();
        gen.generate_segment(lookback)?;
        let t1 = clock.now();
        let sample = (t1 - t0).as_secs_f64();
        min = min.min(sample);
        max = max.max(sample);
        sum += sample;
    }
    Ok(TimingStats {
        min,
        mean: sum / n as f64,
        max,
    })
}
