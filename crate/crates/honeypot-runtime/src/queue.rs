//! The bounded segment queue between producer and consumer.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use generator::Segment;

/// Outcome of [`SegmentQueue::pop_timeout`].
#[derive(Debug)]
pub enum PopResult {
    Popped(Segment),
    TimedOut,
    /// The queue is closed and fully drained.
    Closed,
}

/// Outcome of [`SegmentQueue::push_timeout`]. The rejected segment is handed
/// back so the caller can retry or drop it without cloning.
#[derive(Debug)]
pub enum PushResult {
    Pushed,
    TimedOut(Segment),
    Closed(Segment),
}

struct Inner {
    items: VecDeque<Segment>,
    closed: bool,
}

/// A bounded FIFO of generated segments.
///
/// `push` blocks while the queue is full and `pop` blocks while it is empty,
/// so the producer can run flat out and still never buffer more than
/// `capacity` segments. Closing the queue wakes every blocked thread;
/// segments already enqueued can still be drained afterwards.
pub struct SegmentQueue {
    inner: Mutex<Inner>,
    not_full: Condvar,
    not_empty: Condvar,
    capacity: usize,
}

impl SegmentQueue {
    pub fn new(capacity: usize) -> SegmentQueue {
        assert!(capacity > 0, "queue capacity must be positive");
        SegmentQueue {
            inner: Mutex::new(Inner {
                items: VecDeque::with_capacity(capacity),
                closed: false,
            }),
            not_full: Condvar::new(),
            not_empty: Condvar::new(),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_closed(&self) -> bool {
        self.inner.lock().unwrap().closed
    }

    /// Closes the queue, waking all blocked pushers and poppers. Idempotent.
    pub fn close(&self) {
        self.inner.lock().unwrap().closed = true;
        self.not_full.notify_all();
        self.not_empty.notify_all();
    }

    /// Blocks until there is room, then enqueues. Returns the segment back
    /// if the queue is (or becomes) closed.
    pub fn push(&self, segment: Segment) -> Result<(), Segment> {
        let mut inner = self.inner.lock().unwrap();
        loop {
            if inner.closed {
                return Err(segment);
            }
            if inner.items.len() < self.capacity {
                inner.items.push_back(segment);
                self.not_empty.notify_one();
                return Ok(());
            }
            inner = self.not_full.wait(inner).unwrap();
        }
    }

    /// Like [`push`](Self::push) but gives up after `timeout`, so a blocked
    /// producer can still notice an external stop signal.
    pub fn push_timeout(&self, segment: Segment, timeout: Duration) -> PushResult {
        let deadline = Instant::now() + timeout;
        let mut inner = self.inner.lock().unwrap();
        loop {
            if inner.closed {
                return PushResult::Closed(segment);
            }
            if inner.items.len() < self.capacity {
                inner.items.push_back(segment);
                self.not_empty.notify_one();
                return PushResult::Pushed;
            }
            let now = Instant::now();
            if now >= deadline {
                return PushResult::TimedOut(segment);
            }
            inner = self.not_full.wait_timeout(inner, deadline - now).unwrap().0;
        }
    }

    /// Blocks until a segment is available. Returns `None` only once the
    /// queue is closed and empty.
    pub fn pop(&self) -> Option<Segment> {
        let mut inner = self.inner.lock().unwrap();
        loop {
            if let Some(segment) = inner.items.pop_front() {
                self.not_full.notify_one();
                return Some(segment);
            }
            if inner.closed {
                return None;
            }
            inner = self.not_empty.wait(inner).unwrap();
        }
    }

    /// Like [`pop`](Self::pop) but gives up after `timeout`.
    pub fn pop_timeout(&self, timeout: Duration) -> PopResult {
        let deadline = Instant::now() + timeout;
        let mut inner = self.inner.lock().unwrap();
        loop {
            if let Some(segment) = inner.items.pop_front() {
                self.not_full.notify_one();
                return PopResult::Popped(segment);
            }
            if inner.closed {
                return PopResult::Closed;
            }
            let now = Instant::now();
            if now >= deadline {
                return PopResult::TimedOut;
            }
            inner = self.not_empty.wait_timeout(inner, deadline - now).unwrap().0;
        }
    }
}
