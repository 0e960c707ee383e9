//! The 500 Hz publication loop.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use opcua_wire::{now_ticks, AddressSpace, PUBLISHED_VAR_COUNT};

use crate::queue::{PopResult, SegmentQueue};

/// How long one pop attempt waits before re-checking the stop flag.
const POP_POLL: Duration = Duration::from_millis(50);

/// Supplies the publication instants. Production code uses the monotonic
/// clock; tests inject a manual pacer to pin the schedule down exactly.
pub trait Pacer {
    /// Time elapsed since an epoch fixed at construction.
    fn now(&mut self) -> Duration;
    /// Blocks until `deadline`; returns immediately if it already passed.
    fn sleep_until(&mut self, deadline: Duration);
}

/// Wall-clock pacer anchored at construction time.
pub struct MonotonicPacer {
    base: Instant,
}

impl MonotonicPacer {
    pub fn new() -> MonotonicPacer {
        MonotonicPacer { base: Instant::now() }
    }
}

impl Default for MonotonicPacer {
    fn default() -> MonotonicPacer {
        MonotonicPacer::new()
    }
}

impl Pacer for MonotonicPacer {
    fn now(&mut self) -> Duration {
        self.base.elapsed()
    }

    fn sleep_until(&mut self, deadline: Duration) {
        let now = self.base.elapsed();
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
    }
}

/// Test pacer: time advances only when the consumer sleeps, and every
/// requested deadline is recorded.
#[derive(Default)]
pub struct ManualPacer {
    now: Duration,
    deadlines: Vec<Duration>,
}

impl ManualPacer {
    pub fn new() -> ManualPacer {
        ManualPacer::default()
    }

    /// Every deadline passed to `sleep_until`, in order.
    pub fn deadlines(&self) -> &[Duration] {
        &self.deadlines
    }
}

impl Pacer for ManualPacer {
    fn now(&mut self) -> Duration {
        self.now
    }

    fn sleep_until(&mut self, deadline: Duration) {
        self.deadlines.push(deadline);
        if deadline > self.now {
            self.now = deadline;
        }
    }
}

/// Source timestamps follow the clock but never repeat, even when two rows
/// land inside the same 100 ns tick.
fn next_stamp(now: i64, last: i64) -> i64 {
    now.max(last + 1)
}

/// What one consumer run did, for logs and assertions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConsumerReport {
    pub rows_published: u64,
    pub segments_consumed: u64,
    /// Starvation episodes that exceeded the grace period.
    pub underruns: u64,
    /// Segments that arrived with a non-increasing sequence number.
    pub missequenced: u64,
}

/// Pops segments and publishes one row of 8 values every 1/rate seconds.
///
/// Deadlines are absolute multiples of the tick on the pacer's clock, so
/// scheduler jitter on one row never accumulates into drift. When the queue
/// starves for more than two segment periods the episode is logged once and
/// the address space simply keeps its last values; once data returns after
/// such an episode the schedule re-anchors at the current instant instead of
/// burst-publishing the backlog of missed ticks.
///
/// Returns when the queue is closed or the stop flag is raised; rows of a
/// half-published segment are abandoned on stop.
pub fn consumer_loop(
    queue: &SegmentQueue,
    space: &AddressSpace,
    rate_hz: f64,
    stop: &AtomicBool,
    pacer: &mut impl Pacer,
) -> ConsumerReport {
    assert!(rate_hz > 0.0, "publish rate must be positive");
    let tick = Duration::from_secs_f64(1.0 / rate_hz);

    let mut report = ConsumerReport::default();
    let mut next_deadline: Option<Duration> = None;
    let mut last_seq: Option<u64> = None;
    let mut last_stamp: i64 = 0;
    let mut segment_period: Option<Duration> = None;
    let mut starving_since: Option<Duration> = None;
    let mut episode_logged = false;

    'segments: while !stop.load(Ordering::Relaxed) {
        let segment = match queue.pop_timeout(POP_POLL) {
            PopResult::Popped(segment) => segment,
            PopResult::Closed => break,
            PopResult::TimedOut => {
                // Before the first segment there is no period to starve
                // against; that is startup, not an underrun.
                if let Some(period) = segment_period {
                    let now = pacer.now();
                    let since = *starving_since.get_or_insert(now);
                    if !episode_logged && now.saturating_sub(since) > 2 * period {
                        log::warn!(
                            "publication underrun: no segment for {:?}; holding last values",
                            now - since
                        );
                        report.underruns += 1;
                        episode_logged = true;
                    }
                }
                continue;
            }
        };

        if episode_logged {
            next_deadline = None;
        }
        starving_since = None;
        episode_logged = false;

        if let Some(prev) = last_seq {
            if segment.seq <= prev {
                log::warn!("segment {} arrived after {}", segment.seq, prev);
                report.missequenced += 1;
            }
        }
        last_seq = Some(segment.seq);

        let rows = segment.values.rows();
        segment_period = Some(tick.saturating_mul(rows as u32));

        for r in 0..rows {
            if stop.load(Ordering::Relaxed) {
                break 'segments;
            }
            let deadline = next_deadline.unwrap_or_else(|| pacer.now());
            pacer.sleep_until(deadline);
            next_deadline = Some(deadline + tick);

            let mut row = [0.0; PUBLISHED_VAR_COUNT];
            row.copy_from_slice(segment.values.row(r));
            last_stamp = next_stamp(now_ticks(), last_stamp);
            space.set_replicated(&row, last_stamp);
            report.rows_published += 1;
        }
        report.segments_consumed += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use generator::Segment;
    use std::sync::Arc;
    use std::thread;
    use timeseries_core::{Mat, VAR_COUNT};

    fn seg(seq: u64, rows: usize) -> Segment {
        Segment {
            values: Mat::from_fn(rows, VAR_COUNT, |r, c| {
                seq as f64 * 100.0 + r as f64 + 0.001 * c as f64
            }),
            seq,
        }
    }

    fn ms(n: u64) -> Duration {
        Duration::from_millis(n)
    }

    #[test]
    fn a_three_row_segment_lands_on_exact_two_millisecond_ticks() {
        let queue = SegmentQueue::new(4);
        queue.push(seg(0, 3)).unwrap();
        queue.close();

        let space = AddressSpace::honeypot();
        let mut pacer = ManualPacer::new();
        let report = consumer_loop(&queue, &space, 500.0, &AtomicBool::new(false), &mut pacer);

        assert_eq!(report.rows_published, 3);
        assert_eq!(report.segments_consumed, 1);
        assert_eq!(pacer.deadlines(), &[ms(0), ms(2), ms(4)]);
    }

    #[test]
    fn rows_appear_in_order_and_the_last_one_sticks() {
        let queue = SegmentQueue::new(8);
        for i in 0..5 {
            queue.push(seg(i, 2)).unwrap();
        }
        queue.close();

        let space = AddressSpace::honeypot();
        let mut pacer = ManualPacer::new();
        let report = consumer_loop(&queue, &space, 500.0, &AtomicBool::new(false), &mut pacer);

        assert_eq!(report.rows_published, 10);
        assert_eq!(report.segments_consumed, 5);
        assert_eq!(report.missequenced, 0);
        assert_eq!(report.underruns, 0);

        let last = seg(4, 2);
        let nodes = opcua_wire::published_nodes();
        for (k, id) in nodes.iter().enumerate() {
            let (value, _) = space.read_value(id).unwrap();
            assert_eq!(value, last.values[(1, k)], "variable {k}");
        }
    }

    #[test]
    fn source_timestamps_never_repeat_even_under_a_frozen_clock() {
        assert_eq!(next_stamp(100, 5), 100);
        assert_eq!(next_stamp(5, 5), 6);
        let mut last = 40;
        for _ in 0..10 {
            let stamp = next_stamp(40, last);
            assert!(stamp > last);
            last = stamp;
        }

        // End to end: after a run the published stamp is a plausible tick.
        let queue = SegmentQueue::new(4);
        queue.push(seg(0, 2)).unwrap();
        queue.close();
        let space = AddressSpace::honeypot();
        let before = now_ticks();
        consumer_loop(&queue, &space, 500.0, &AtomicBool::new(false), &mut ManualPacer::new());
        let nodes = opcua_wire::published_nodes();
        let (_, stamp) = space.read_value(&nodes[2]).unwrap();
        assert!(stamp >= before);
    }

    #[test]
    fn starvation_beyond_two_periods_logs_one_underrun_and_holds_values() {
        let queue = Arc::new(SegmentQueue::new(4));
        let feeder = {
            let queue = Arc::clone(&queue);
            thread::spawn(move || {
                queue.push(seg(0, 2)).unwrap();
                // Period at 100 Hz and 2 rows is 20 ms, so 250 ms of silence
                // is far past the 40 ms grace.
                thread::sleep(Duration::from_millis(250));
                queue.push(seg(1, 2)).unwrap();
                queue.close();
            })
        };

        let space = AddressSpace::honeypot();
        let mut pacer = MonotonicPacer::new();
        let report = consumer_loop(&queue, &space, 100.0, &AtomicBool::new(false), &mut pacer);
        feeder.join().unwrap();

        assert_eq!(report.rows_published, 4);
        assert_eq!(report.underruns, 1, "one episode, logged once");

        let nodes = opcua_wire::published_nodes();
        let last = seg(1, 2);
        assert_eq!(space.read_value(&nodes[3]).unwrap().0, last.values[(1, 3)]);
    }

    #[test]
    fn stop_abandons_the_rest_of_the_segment() {
        let queue = SegmentQueue::new(4);
        queue.push(seg(0, 1000)).unwrap();

        let stop = Arc::new(AtomicBool::new(false));
        let stopper = {
            let stop = Arc::clone(&stop);
            thread::spawn(move || {
                thread::sleep(Duration::from_millis(40));
                stop.store(true, Ordering::Relaxed);
            })
        };

        let space = AddressSpace::honeypot();
        let started = Instant::now();
        let report = consumer_loop(&queue, &space, 100.0, &stop, &mut MonotonicPacer::new());
        stopper.join().unwrap();

        assert!(report.rows_published < 1000);
        assert!(
            started.elapsed() < Duration::from_millis(500),
            "stop must cut a 10 s segment short, took {:?}",
            started.elapsed()
        );
    }
}
