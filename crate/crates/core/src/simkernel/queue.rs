use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::{Error, Result};

/// What an event represents; used for tracing and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    FrameArrival,
    SliceArrival,
    TimerExpiry,
    SlotBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent<P> {
    pub fire_time: f64,
    /// Insertion counter; breaks ties between events at the same instant.
    pub sequence: u64,
    pub kind: EventKind,
    pub payload: P,
}

/// Monotone virtual time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VirtualClock {
    now: f64,
}

impl VirtualClock {
    pub fn now(&self) -> f64 {
        self.now
    }

    fn advance_to(&mut self, t: f64) -> Result<()> {
        if t < self.now || t.is_nan() {
            return Err(Error::logic(format!(
                "clock would move backward from {} to {}",
                self.now, t
            )));
        }
        self.now = t;
        Ok(())
    }
}

struct Entry<P>(SimEvent<P>);

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<P> Eq for Entry<P> {}

impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Entry<P> {
    // BinaryHeap is a max-heap; invert so the earliest (time, sequence) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .fire_time
            .total_cmp(&self.0.fire_time)
            .then_with(|| other.0.sequence.cmp(&self.0.sequence))
    }
}

/// Outcome of [`Scheduler::run_until`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub events_processed: u64,
    pub final_time: f64,
}

/// A handler failed; the run stopped at the offending event.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAborted<E> {
    pub at_time: f64,
    pub sequence: u64,
    pub kind: EventKind,
    /// Events fully handled before the failure.
    pub events_processed: u64,
    pub source: E,
}

impl<E: fmt::Display> fmt::Display for RunAborted<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted at t={}s on {:?} event #{} after {} events: {}",
            self.at_time, self.kind, self.sequence, self.events_processed, self.source
        )
    }
}

impl<E: fmt::Debug + fmt::Display> std::error::Error for RunAborted<E> {}

/// Event queue plus the clock it drives.
pub struct Scheduler<P> {
    heap: BinaryHeap<Entry<P>>,
    clock: VirtualClock,
    next_sequence: u64,
    processed: u64,
}

impl<P> Default for Scheduler<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> Scheduler<P> {
    pub fn new() -> Self {
        Scheduler {
            heap: BinaryHeap::new(),
            clock: VirtualClock::default(),
            next_sequence: 0,
            processed: 0,
        }
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    pub fn clock(&self) -> VirtualClock {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Total events dequeued over the scheduler's lifetime.
    pub fn events_processed(&self) -> u64 {
        self.processed
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.0.fire_time)
    }

    /// Enqueues an event and returns its sequence number.
    ///
    /// Scheduling before the current clock reading is a simulator bug.
    pub fn schedule(&mut self, fire_time: f64, kind: EventKind, payload: P) -> Result<u64> {
        if fire_time.is_nan() || fire_time < self.clock.now() {
            return Err(Error::logic(format!(
                "{kind:?} event scheduled at {fire_time} but clock reads {}",
                self.clock.now()
            )));
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(Entry(SimEvent {
            fire_time,
            sequence,
            kind,
            payload,
        }));
        Ok(sequence)
    }

    pub fn schedule_in(&mut self, delay: f64, kind: EventKind, payload: P) -> Result<u64> {
        self.schedule(self.clock.now() + delay, kind, payload)
    }

    /// Dequeues the next event and advances the clock to its fire time.
    pub fn pop(&mut self) -> Result<Option<SimEvent<P>>> {
        let Some(Entry(event)) = self.heap.pop() else {
            return Ok(None);
        };
        self.clock.advance_to(event.fire_time)?;
        self.processed += 1;
        Ok(Some(event))
    }

    /// Processes every event with `fire_time <= stop_time` in order.
    ///
    /// When `stop_time` is finite the clock finishes at `stop_time`; when it
    /// is infinite the queue is drained and the clock stays at the last fire
    /// time.
    pub fn run_until<E, F>(
        &mut self,
        stop_time: f64,
        mut handler: F,
    ) -> Result<RunSummary, RunAborted<E>>
    where
        F: FnMut(&mut Scheduler<P>, SimEvent<P>) -> Result<(), E>,
        E: From<Error>,
    {
        if stop_time.is_nan() || stop_time < self.clock.now() {
            return Err(self.abort_without_event(Error::logic(format!(
                "stop time {stop_time} precedes clock {}",
                self.clock.now()
            ))));
        }
        let mut handled = 0u64;
        while self.peek_time().is_some_and(|t| t <= stop_time) {
            let event = match self.pop() {
                Ok(Some(event)) => event,
                Ok(None) => break,
                Err(e) => return Err(self.abort_without_event(e)),
            };
            let (at_time, sequence, kind) = (event.fire_time, event.sequence, event.kind);
            if let Err(source) = handler(self, event) {
                return Err(RunAborted {
                    at_time,
                    sequence,
                    kind,
                    events_processed: handled,
                    source,
                });
            }
            handled += 1;
        }
        if stop_time.is_finite() {
            // Nothing left fires at or before stop_time, so this cannot skip an event.
            self.clock
                .advance_to(stop_time)
                .map_err(|e| self.abort_without_event(e))?;
        }
        Ok(RunSummary {
            events_processed: handled,
            final_time: self.clock.now(),
        })
    }

    fn abort_without_event<E: From<Error>>(&self, err: Error) -> RunAborted<E> {
        RunAborted {
            at_time: self.clock.now(),
            sequence: self.next_sequence,
            kind: EventKind::TimerExpiry,
            events_processed: 0,
            source: err.into(),
        }
    }
}
