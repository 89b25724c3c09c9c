use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::sack::{sack_level_for, SliceAckLevel};
use super::{FRAME_BITS, SACK_BITS, SLICES_PER_FRAME, SLICE_BITS, SLICE_BYTES};
use crate::analytic::{bilateral_efficiency, BilateralInputs};
use crate::error::{Error, Result};
use crate::simkernel::{Duplex, EventKind, LinkModel, Scheduler, SimRng, UnitFault};

/// Column header of the OAE trace format.
pub const OAE_TRACE_HEADER: &str = "time_us,direction,frame_id,slice_or_sack,detail";

/// When the receiver emits a SACK.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SackGranularity {
    /// Once per level, when its byte threshold is first reached (4 per frame).
    #[default]
    PerThreshold,
    /// After every intact slice, carrying the level reached so far.
    PerSlice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetransmitPolicy {
    /// Whole-frame retransmissions allowed after a stalled ladder.
    pub retries: u32,
    /// Time from frame start until a missing SACK 11 counts as a stall.
    /// `None` means frame time + 2*tau + total receiver processing.
    pub stall_timeout_s: Option<f64>,
}

impl Default for RetransmitPolicy {
    fn default() -> Self {
        RetransmitPolicy {
            retries: 5,
            stall_timeout_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OaeConfig {
    pub policy: RetransmitPolicy,
    /// Receiver processing delay per level, indexed by level.
    pub processing_s: [f64; 4],
    pub granularity: SackGranularity,
}

impl Default for OaeConfig {
    fn default() -> Self {
        OaeConfig {
            policy: RetransmitPolicy::default(),
            processing_s: [0.0; 4],
            granularity: SackGranularity::PerThreshold,
        }
    }
}

impl OaeConfig {
    fn validate(&self) -> Result<()> {
        if self
            .processing_s
            .iter()
            .any(|p| !(p.is_finite() && *p >= 0.0))
        {
            return Err(Error::domain("SACK processing delays must be non-negative"));
        }
        if let Some(t) = self.policy.stall_timeout_s {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::domain(format!(
                    "stall timeout must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    fn processing_total(&self) -> f64 {
        self.processing_s.iter().sum()
    }

    /// Transaction window measured from frame start.
    pub fn stall_window(&self, link: &LinkModel) -> f64 {
        self.policy.stall_timeout_s.unwrap_or_else(|| {
            link.serialization_time(FRAME_BITS) + 2.0 * link.propagation_s + self.processing_total()
        })
    }
}

/// One logical frame to transmit. `forced_corrupt` marks slices the channel
/// damages on the first attempt regardless of the fault draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OaeFrame {
    pub frame_id: u64,
    pub forced_corrupt: [bool; SLICES_PER_FRAME],
}

impl OaeFrame {
    pub fn new(frame_id: u64) -> Self {
        OaeFrame {
            frame_id,
            forced_corrupt: [false; SLICES_PER_FRAME],
        }
    }

    /// Damages slice `n`, counting from 1.
    pub fn with_corrupt_slice(mut self, n: usize) -> Self {
        assert!(
            (1..=SLICES_PER_FRAME).contains(&n),
            "slice {n} out of range"
        );
        self.forced_corrupt[n - 1] = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceVerdict {
    Pending,
    Intact,
    Corrupted,
    Lost,
}

/// A SACK as seen by the sender.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SackEvent {
    pub attempt: u32,
    pub level: SliceAckLevel,
    pub emitted_at: f64,
    pub observed_at: f64,
}

/// Per-frame outcome; timings refer to the last attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub committed: bool,
    pub attempts: u32,
    pub t_start: f64,
    /// Arrival of the final slice at the receiver, intact or not.
    pub t_forward_done: Option<f64>,
    /// Sender observed SACK 11.
    pub t_commit: Option<f64>,
    pub highest_sack: Option<SliceAckLevel>,
    pub sack_events: Vec<SackEvent>,
    pub slice_verdicts: [SliceVerdict; SLICES_PER_FRAME],
}

impl FrameRecord {
    pub fn commit_overhead(&self) -> Option<f64> {
        Some(self.t_commit? - self.t_forward_done?)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SackCounts {
    pub sack00: u64,
    pub sack01: u64,
    pub sack10: u64,
    pub sack11: u64,
}

impl SackCounts {
    fn bump(&mut self, level: SliceAckLevel) {
        match level {
            SliceAckLevel::Sack00Information => self.sack00 += 1,
            SliceAckLevel::Sack01Knowledge => self.sack01 += 1,
            SliceAckLevel::Sack10Semantics => self.sack10 += 1,
            SliceAckLevel::Sack11Understanding => self.sack11 += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OaeRunReport {
    pub frames_attempted: u64,
    pub frames_committed: u64,
    /// Forward serialization time of one frame.
    pub payload_time_s: f64,
    /// Mean per-frame link time not overlapped with forward delivery.
    pub delta_t_commit_s: f64,
    pub e_b_oae: f64,
    /// SACKs observed by the sender, by level.
    pub sack_counts: SackCounts,
    pub retransmissions: u64,
    pub stream_duration_s: f64,
    pub forward_busy_s: f64,
    pub return_busy_s: f64,
}

impl OaeRunReport {
    pub fn inputs(&self) -> BilateralInputs {
        BilateralInputs {
            n_committed: self.frames_committed,
            n_attempted: self.frames_attempted,
            payload_time_s: self.payload_time_s,
            commit_overhead_s: self.delta_t_commit_s,
        }
    }
}

/// One line of the OAE trace: `time_us,direction,frame_id,slice_or_sack,detail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OaeTraceEntry {
    pub time_s: f64,
    /// `fwd` for slices, `ret` for SACKs and sender verdicts on them.
    pub direction: &'static str,
    pub frame_id: u64,
    pub slice_or_sack: String,
    pub detail: String,
}

impl fmt::Display for OaeTraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.3},{},{},{},{}",
            self.time_s * 1e6,
            self.direction,
            self.frame_id,
            self.slice_or_sack,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OaeStreamRun {
    pub report: OaeRunReport,
    pub frames: Vec<FrameRecord>,
    pub trace: Vec<OaeTraceEntry>,
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    SenderFree,
    Slice {
        frame: usize,
        attempt: u32,
        index: usize,
        intact: bool,
    },
    Sack {
        frame: usize,
        attempt: u32,
        level: SliceAckLevel,
        emitted_at: f64,
    },
    Stall {
        frame: usize,
        attempt: u32,
        deferred: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pending,
    Committed,
    Failed,
}

#[derive(Debug, Clone)]
struct Ladder {
    attempt: u32,
    contiguous_bytes: u64,
    broken: bool,
    last_emit: f64,
}

impl Ladder {
    fn fresh(attempt: u32) -> Self {
        Ladder {
            attempt,
            contiguous_bytes: 0,
            broken: false,
            last_emit: f64::NEG_INFINITY,
        }
    }
}

struct FrameState {
    plan: OaeFrame,
    status: Status,
    attempt: u32,
    retries_left: u32,
    record: FrameRecord,
    ladder: Ladder,
}

struct Engine<'a> {
    link: &'a LinkModel,
    cfg: &'a OaeConfig,
    rng: SimRng,
    sched: Scheduler<Ev>,
    t0: f64,
    queue: VecDeque<usize>,
    sender_busy: bool,
    // Back-to-back transmissions are timed from an integer bit offset so
    // that n frames end at exactly base + (n * 512) / C.
    base: f64,
    bits_since_base: u64,
    frames: Vec<FrameState>,
    forward_bits: u64,
    return_bits: u64,
    sack_counts: SackCounts,
    retransmissions: u64,
    last_resolution: f64,
    trace: Option<Vec<OaeTraceEntry>>,
}

impl<'a> Engine<'a> {
    fn new(
        link: &'a LinkModel,
        cfg: &'a OaeConfig,
        frames: Vec<OaeFrame>,
        t0: f64,
        seed_rng: SimRng,
        traced: bool,
    ) -> Result<Self> {
        link.validate()?;
        cfg.validate()?;
        if link.duplex != Duplex::Full {
            return Err(Error::domain(
                "slice acknowledgment needs a full-duplex link",
            ));
        }
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(Error::domain(format!(
                "start time must be non-negative, got {t0}"
            )));
        }
        let stall_window = cfg.stall_window(link);
        link.check_causal_closure(stall_window)?;
        let states = frames
            .into_iter()
            .map(|plan| FrameState {
                plan,
                status: Status::Pending,
                attempt: 0,
                retries_left: cfg.policy.retries,
                record: FrameRecord {
                    frame_id: plan.frame_id,
                    committed: false,
                    attempts: 0,
                    t_start: t0,
                    t_forward_done: None,
                    t_commit: None,
                    highest_sack: None,
                    sack_events: Vec::new(),
                    slice_verdicts: [SliceVerdict::Pending; SLICES_PER_FRAME],
                },
                ladder: Ladder::fresh(0),
            })
            .collect::<Vec<_>>();
        Ok(Engine {
            link,
            cfg,
            rng: seed_rng,
            sched: Scheduler::new(),
            t0,
            queue: (0..states.len()).collect(),
            sender_busy: false,
            base: t0,
            bits_since_base: 0,
            frames: states,
            forward_bits: 0,
            return_bits: 0,
            sack_counts: SackCounts::default(),
            retransmissions: 0,
            last_resolution: t0,
            trace: traced.then(Vec::new),
        })
    }

    fn log(
        &mut self,
        time_s: f64,
        direction: &'static str,
        frame: usize,
        what: String,
        detail: String,
    ) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(OaeTraceEntry {
                time_s,
                direction,
                frame_id: self.frames[frame].plan.frame_id,
                slice_or_sack: what,
                detail,
            });
        }
    }

    fn offset_time(&self, bits: u64) -> f64 {
        self.base + self.link.serialization_time(bits)
    }

    fn wake_sender(&mut self) -> Result<()> {
        if self.sender_busy {
            return Ok(());
        }
        if let Some(frame) = self.queue.pop_front() {
            self.sender_busy = true;
            self.base = self.sched.now();
            self.bits_since_base = 0;
            self.transmit(frame)?;
        }
        Ok(())
    }

    fn transmit(&mut self, frame: usize) -> Result<()> {
        let tau = self.link.propagation_s;
        let attempt = self.frames[frame].attempt;
        let start_bits = self.bits_since_base;
        let start = self.offset_time(start_bits);
        {
            let f = &mut self.frames[frame];
            f.record.t_start = start;
            f.record.attempts = attempt + 1;
            f.record.t_forward_done = None;
            f.record.slice_verdicts = [SliceVerdict::Pending; SLICES_PER_FRAME];
        }
        for index in 0..SLICES_PER_FRAME {
            let end_bits = start_bits + (index as u64 + 1) * SLICE_BITS;
            let mut fault = self.link.draw_fault(&mut self.rng);
            if attempt == 0 && self.frames[frame].plan.forced_corrupt[index] {
                fault = UnitFault::Corrupted;
            }
            if fault == UnitFault::Lost {
                self.frames[frame].record.slice_verdicts[index] = SliceVerdict::Lost;
                let sent = self.offset_time(end_bits - SLICE_BITS);
                self.log(
                    sent,
                    "fwd",
                    frame,
                    format!("slice{}", index + 1),
                    format!("lost attempt={attempt}"),
                );
                continue;
            }
            let arrival = self.offset_time(end_bits) + tau;
            self.sched.schedule(
                arrival,
                EventKind::SliceArrival,
                Ev::Slice {
                    frame,
                    attempt,
                    index,
                    intact: fault == UnitFault::None,
                },
            )?;
        }
        self.bits_since_base = start_bits + FRAME_BITS;
        self.forward_bits += FRAME_BITS;
        let frame_end = self.offset_time(self.bits_since_base);
        self.sched
            .schedule(frame_end, EventKind::TimerExpiry, Ev::SenderFree)?;
        let deadline = match self.cfg.policy.stall_timeout_s {
            Some(window) => start + window,
            // same evaluation order as a SACK 11 leaving at the last slice's
            // arrival, so a clean frame lands exactly on its deadline
            None => (frame_end + tau) + tau + self.cfg.processing_total(),
        };
        self.sched.schedule(
            deadline,
            EventKind::TimerExpiry,
            Ev::Stall {
                frame,
                attempt,
                deferred: false,
            },
        )?;
        Ok(())
    }

    fn on_sender_free(&mut self) -> Result<()> {
        match self.queue.pop_front() {
            Some(frame) => self.transmit(frame),
            None => {
                self.sender_busy = false;
                Ok(())
            }
        }
    }

    fn on_slice(&mut self, frame: usize, attempt: u32, index: usize, intact: bool) -> Result<()> {
        let now = self.sched.now();
        if attempt != self.frames[frame].attempt {
            return Ok(());
        }
        if self.frames[frame].ladder.attempt != attempt {
            self.frames[frame].ladder = Ladder::fresh(attempt);
        }
        let f = &mut self.frames[frame];
        f.record.slice_verdicts[index] = if intact {
            SliceVerdict::Intact
        } else {
            SliceVerdict::Corrupted
        };
        if index + 1 == SLICES_PER_FRAME {
            f.record.t_forward_done = Some(now);
        }
        // The ladder is cumulative: one bad or missing slice blocks every
        // higher level for this attempt.
        let expected_bytes = index as u64 * SLICE_BYTES;
        let advanced = intact && !f.ladder.broken && f.ladder.contiguous_bytes == expected_bytes;
        if advanced {
            f.ladder.contiguous_bytes += SLICE_BYTES;
        } else {
            f.ladder.broken = true;
        }
        let bytes = f.ladder.contiguous_bytes;
        self.log(
            now,
            "fwd",
            frame,
            format!("slice{}", index + 1),
            format!(
                "{} attempt={attempt}",
                if intact { "intact" } else { "corrupt" }
            ),
        );
        if !advanced {
            return Ok(());
        }
        let level = match self.cfg.granularity {
            SackGranularity::PerThreshold => {
                sack_level_for(bytes)?.filter(|level| level.byte_threshold() == bytes)
            }
            SackGranularity::PerSlice => sack_level_for(bytes)?,
        };
        let Some(level) = level else {
            return Ok(());
        };
        let ladder = &mut self.frames[frame].ladder;
        let emitted_at = (now + self.cfg.processing_s[level.index()]).max(ladder.last_emit);
        ladder.last_emit = emitted_at;
        self.return_bits += SACK_BITS;
        self.sched.schedule(
            emitted_at + self.link.propagation_s,
            EventKind::FrameArrival,
            Ev::Sack {
                frame,
                attempt,
                level,
                emitted_at,
            },
        )?;
        Ok(())
    }

    fn on_sack(
        &mut self,
        frame: usize,
        attempt: u32,
        level: SliceAckLevel,
        emitted_at: f64,
    ) -> Result<()> {
        let now = self.sched.now();
        let f = &mut self.frames[frame];
        if f.status != Status::Pending || attempt != f.attempt {
            return Ok(());
        }
        let prior = f
            .record
            .sack_events
            .iter()
            .rev()
            .find(|e| e.attempt == attempt)
            .map(|e| e.level);
        let out_of_order = match self.cfg.granularity {
            SackGranularity::PerThreshold => prior.is_some_and(|p| p >= level),
            SackGranularity::PerSlice => prior.is_some_and(|p| p > level),
        };
        if out_of_order {
            return Err(Error::logic(format!(
                "frame {} observed {level} after {}",
                f.plan.frame_id,
                prior.unwrap()
            )));
        }
        f.record.sack_events.push(SackEvent {
            attempt,
            level,
            emitted_at,
            observed_at: now,
        });
        f.record.highest_sack = Some(level);
        self.sack_counts.bump(level);
        let committed = level == SliceAckLevel::Sack11Understanding;
        if committed {
            f.status = Status::Committed;
            f.record.committed = true;
            f.record.t_commit = Some(now);
            self.last_resolution = self.last_resolution.max(now);
        }
        self.log(
            now,
            "ret",
            frame,
            level.to_string(),
            format!(
                "{} attempt={attempt}",
                if committed { "commit" } else { "observed" }
            ),
        );
        Ok(())
    }

    fn on_stall(&mut self, frame: usize, attempt: u32, deferred: bool) -> Result<()> {
        let now = self.sched.now();
        {
            let f = &self.frames[frame];
            if f.status != Status::Pending || attempt != f.attempt {
                return Ok(());
            }
        }
        if !deferred {
            // Let any SACK arriving at this same instant be handled first.
            self.sched.schedule(
                now,
                EventKind::TimerExpiry,
                Ev::Stall {
                    frame,
                    attempt,
                    deferred: true,
                },
            )?;
            return Ok(());
        }
        let f = &mut self.frames[frame];
        if f.retries_left > 0 {
            f.retries_left -= 1;
            f.attempt += 1;
            self.retransmissions += 1;
            self.queue.push_back(frame);
            self.log(
                now,
                "ret",
                frame,
                "stall".into(),
                format!("retransmit attempt={}", attempt + 1),
            );
            self.wake_sender()
        } else {
            f.status = Status::Failed;
            self.last_resolution = self.last_resolution.max(now);
            self.log(
                now,
                "ret",
                frame,
                "stall".into(),
                format!("abandon attempt={attempt}"),
            );
            Ok(())
        }
    }

    fn run(&mut self) -> Result<()> {
        let budget = 64 * (self.frames.len() as u64 + 1) * (self.cfg.policy.retries as u64 + 1);
        self.sched
            .schedule(self.t0, EventKind::TimerExpiry, Ev::SenderFree)?;
        // The first SenderFree starts the stream at t0 with a fresh base.
        self.sender_busy = false;
        let first = self
            .sched
            .pop()?
            .ok_or_else(|| Error::logic("empty OAE queue"))?;
        debug_assert!(matches!(first.payload, Ev::SenderFree));
        self.wake_sender()?;
        while let Some(event) = self.sched.pop()? {
            if self.sched.events_processed() > budget {
                return Err(Error::logic(format!(
                    "OAE stream exceeded its budget of {budget} events"
                )));
            }
            match event.payload {
                Ev::SenderFree => self.on_sender_free()?,
                Ev::Slice {
                    frame,
                    attempt,
                    index,
                    intact,
                } => self.on_slice(frame, attempt, index, intact)?,
                Ev::Sack {
                    frame,
                    attempt,
                    level,
                    emitted_at,
                } => self.on_sack(frame, attempt, level, emitted_at)?,
                Ev::Stall {
                    frame,
                    attempt,
                    deferred,
                } => self.on_stall(frame, attempt, deferred)?,
            }
        }
        if let Some(f) = self.frames.iter().find(|f| f.status == Status::Pending) {
            return Err(Error::logic(format!(
                "queue drained with frame {} unresolved",
                f.plan.frame_id
            )));
        }
        Ok(())
    }

    fn report(&self) -> Result<OaeRunReport> {
        let n = self.frames.len() as u64;
        let committed = self
            .frames
            .iter()
            .filter(|f| f.status == Status::Committed)
            .count() as u64;
        let payload_time_s = self.link.serialization_time(FRAME_BITS);
        let stream_duration_s = self.last_resolution - self.t0;
        let forward_busy_s = self.link.serialization_time(self.forward_bits);
        // Delivery alone needs the forward busy time plus one propagation
        // delay; everything beyond that is the cost of commitment.
        let non_overlapped =
            (stream_duration_s - forward_busy_s - self.link.propagation_s).max(0.0);
        let delta_t_commit_s = non_overlapped / n as f64;
        let e_b_oae = if committed == 0 {
            0.0
        } else {
            bilateral_efficiency(&BilateralInputs {
                n_committed: committed,
                n_attempted: n,
                payload_time_s,
                commit_overhead_s: delta_t_commit_s,
            })?
        };
        Ok(OaeRunReport {
            frames_attempted: n,
            frames_committed: committed,
            payload_time_s,
            delta_t_commit_s,
            e_b_oae,
            sack_counts: self.sack_counts,
            retransmissions: self.retransmissions,
            stream_duration_s,
            forward_busy_s,
            return_busy_s: self.link.serialization_time(self.return_bits),
        })
    }
}

/// Sends a single frame at `start_t` with no retransmission and reports how
/// far up the SACK ladder it got.
pub fn run_frame(
    link: &LinkModel,
    frame: &OaeFrame,
    start_t: f64,
    cfg: &OaeConfig,
    rng: &mut SimRng,
) -> Result<FrameRecord> {
    let single = OaeConfig {
        policy: RetransmitPolicy {
            retries: 0,
            ..cfg.policy
        },
        ..cfg.clone()
    };
    let mut engine = Engine::new(link, &single, vec![*frame], start_t, rng.clone(), false)?;
    engine.run()?;
    *rng = engine.rng.clone();
    Ok(engine.frames.remove(0).record)
}

/// Streams `n_frames` back-to-back frames, retransmitting stalled ones per
/// the policy in `cfg`.
pub fn run_stream(
    n_frames: u64,
    link: &LinkModel,
    cfg: &OaeConfig,
    seed: u64,
) -> Result<OaeRunReport> {
    run_stream_inner(n_frames, link, cfg, seed, false).map(|r| r.report)
}

/// As [`run_stream`], also returning per-frame records and the trace.
pub fn run_stream_detailed(
    n_frames: u64,
    link: &LinkModel,
    cfg: &OaeConfig,
    seed: u64,
) -> Result<OaeStreamRun> {
    run_stream_inner(n_frames, link, cfg, seed, true)
}

fn run_stream_inner(
    n_frames: u64,
    link: &LinkModel,
    cfg: &OaeConfig,
    seed: u64,
    traced: bool,
) -> Result<OaeStreamRun> {
    if n_frames == 0 {
        return Err(Error::usage("stream needs at least one frame"));
    }
    let frames = (0..n_frames).map(OaeFrame::new).collect();
    let mut engine = Engine::new(link, cfg, frames, 0.0, SimRng::new(seed), traced)?;
    engine.run()?;
    let report = engine.report()?;
    Ok(OaeStreamRun {
        report,
        frames: engine.frames.into_iter().map(|f| f.record).collect(),
        trace: engine.trace.unwrap_or_default(),
    })
}

/// Bilateral efficiency of a finished stream.
pub fn measure_bilateral_efficiency_oae(report: &OaeRunReport) -> Result<f64> {
    if report.frames_committed == 0 {
        report.inputs().validate()?;
        return Ok(0.0);
    }
    bilateral_efficiency(&report.inputs())
}
