//! The segment production loop.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use generator::Segment;

use crate::queue::{PushResult, SegmentQueue};
use crate::Result;

/// How long one push attempt waits before re-checking the stop flag.
const PUSH_POLL: Duration = Duration::from_millis(50);

/// Generates segments and feeds the queue until stopped.
///
/// `step` produces the segment with the given sequence number; the loop
/// itself never sleeps, so production is paced entirely by queue
/// backpressure. The queue is closed on every exit path: the consumer drains
/// whatever was enqueued and then stops too. A generation failure closes the
/// queue and is returned to the caller.
///
/// Returns the number of segments pushed.
pub fn producer_loop(
    mut step: impl FnMut(u64) -> Result<Segment>,
    queue: &SegmentQueue,
    stop: &AtomicBool,
) -> Result<u64> {
    let mut pushed = 0u64;
    'produce: while !stop.load(Ordering::Relaxed) {
        let mut segment = match step(pushed) {
            Ok(segment) => segment,
            Err(e) => {
                queue.close();
                return Err(e);
            }
        };
        // A stop raised during generation discards the fresh segment; the
        // consumer abandons half-published segments the same way.
        if stop.load(Ordering::Relaxed) {
            break;
        }
        loop {
            match queue.push_timeout(segment, PUSH_POLL) {
                PushResult::Pushed => {
                    pushed += 1;
                    continue 'produce;
                }
                PushResult::Closed(_) => break 'produce,
                PushResult::TimedOut(rejected) => {
                    if stop.load(Ordering::Relaxed) {
                        break 'produce;
                    }
                    segment = rejected;
                }
            }
        }
    }
    queue.close();
    Ok(pushed)
}
