use serde::{Deserialize, Serialize};

use super::machine::{
    receiver_step, sender_step, EftpReceiverState, EftpSenderState, ReceiverAction, ReceiverEvent,
    ReceiverPhase, SenderAction, SenderEvent, SenderPhase,
};
use super::trace::{Actor, TraceEntry};
use crate::error::{Error, Result};
use crate::simkernel::{DeliveryVerdict, EventKind, LinkModel, Scheduler, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PacketKind {
    Data,
    Ack,
    End,
    EndReply,
    Echo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EftpConfig {
    /// Size of ACK, END, ENDREPLY, and echo packets.
    pub control_bits: u64,
    /// Retransmissions allowed per DATA packet and for END.
    pub retries: u32,
    /// Retransmission timeout; `None` means `4 * (P/C + 2*tau)`.
    pub timeout_s: Option<f64>,
    pub dally_s: f64,
    /// Packet kinds the channel drops unconditionally (targeted faults).
    pub forced_loss: Vec<PacketKind>,
    /// Upper bound on events per transfer; exceeding it is a bug.
    pub event_budget: u64,
}

impl Default for EftpConfig {
    fn default() -> Self {
        EftpConfig {
            control_bits: 48,
            retries: 5,
            timeout_s: None,
            dally_s: 10.0,
            forced_loss: Vec::new(),
            event_budget: 1_000_000,
        }
    }
}

impl EftpConfig {
    pub fn effective_timeout(&self, packet_bits: u64, link: &LinkModel) -> f64 {
        self.timeout_s.unwrap_or_else(|| {
            4.0 * (link.serialization_time(packet_bits) + 2.0 * link.propagation_s)
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.dally_s.is_finite() && self.dally_s >= 0.0) {
            return Err(Error::domain(format!(
                "dally must be non-negative, got {}",
                self.dally_s
            )));
        }
        if let Some(t) = self.timeout_s {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::domain(format!("timeout must be positive, got {t}")));
            }
        }
        if self.event_budget == 0 {
            return Err(Error::usage("event budget must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Committed,
    SenderOnlyAssured,
    ReceiverOnlyAssured,
    Failed,
}

impl Outcome {
    pub fn classify(sender_assured: bool, receiver_assured: bool) -> Self {
        match (sender_assured, receiver_assured) {
            (true, true) => Outcome::Committed,
            (true, false) => Outcome::SenderOnlyAssured,
            (false, true) => Outcome::ReceiverOnlyAssured,
            (false, false) => Outcome::Failed,
        }
    }
}

/// One attempted file transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub attempt_id: u64,
    pub bytes_transferred: u64,
    pub sender_assured: bool,
    pub receiver_assured: bool,
    pub outcome: Outcome,
    pub t_start: f64,
    /// Arrival of the last bit of the final DATA packet at the receiver.
    pub t_forward_done: Option<f64>,
    /// Instant the receiver became assured; set only for committed transfers.
    pub t_commit: Option<f64>,
    /// Instant the last party left.
    pub t_end: f64,
    pub retransmissions: u64,
    pub sender_phase: SenderPhase,
    pub receiver_phase: ReceiverPhase,
}

impl TransactionRecord {
    /// Link time spent reaching mutual knowledge after forward delivery.
    pub fn commit_overhead(&self) -> Option<f64> {
        Some(self.t_commit? - self.t_forward_done?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferRun {
    pub record: TransactionRecord,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy)]
enum Payload {
    Sender(SenderEvent),
    Receiver(ReceiverEvent),
    SenderTimer(u64),
    ReceiverDeadline(f64),
}

struct Transfer<'a> {
    link: &'a LinkModel,
    cfg: &'a EftpConfig,
    file_bits: u64,
    packet_bits: u64,
    total_packets: u32,
    timeout_s: f64,
    rng: SimRng,
    sched: Scheduler<Payload>,
    sender: EftpSenderState,
    receiver: EftpReceiverState,
    trace: Option<Vec<TraceEntry>>,
    delivered_bits: u64,
    retransmissions: u64,
    sender_assured: bool,
    receiver_assured: bool,
    t_forward_done: Option<f64>,
    t_commit: Option<f64>,
}

impl<'a> Transfer<'a> {
    fn data_bits(&self, seq: u32) -> u64 {
        if seq + 1 < self.total_packets {
            self.packet_bits
        } else {
            self.file_bits - self.packet_bits * (self.total_packets as u64 - 1)
        }
    }

    fn log(
        &mut self,
        actor: Actor,
        event: String,
        seq: Option<u32>,
        before: String,
        after: String,
    ) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEntry {
                time_s: self.sched.now(),
                actor,
                event,
                seq,
                phase_before: before,
                phase_after: after,
            });
        }
    }

    fn send(&mut self, kind: PacketKind, seq: u32, bits: u64) -> Result<()> {
        let now = self.sched.now();
        let mut verdict = self.link.transmit(bits, now, &mut self.rng);
        if self.cfg.forced_loss.contains(&kind) {
            verdict = DeliveryVerdict::Lost;
        }
        let (at, intact) = match verdict {
            DeliveryVerdict::Lost => {
                self.log(
                    Actor::Link,
                    format!("Lost{kind:?}"),
                    Some(seq),
                    "-".into(),
                    "-".into(),
                );
                return Ok(());
            }
            DeliveryVerdict::Corrupted { at } => (at, false),
            DeliveryVerdict::Delivered { at } => (at, true),
        };
        let payload = match (kind, intact) {
            (PacketKind::Data, ok) => Payload::Receiver(ReceiverEvent::DataArrived { seq, ok }),
            (_, false) => {
                // Damaged control packets fail their checksum at the NIC.
                if let Some(trace) = &mut self.trace {
                    trace.push(TraceEntry {
                        time_s: at,
                        actor: Actor::Link,
                        event: format!("Damaged{kind:?}"),
                        seq: Some(seq),
                        phase_before: "-".into(),
                        phase_after: "-".into(),
                    });
                }
                return Ok(());
            }
            (PacketKind::Ack, true) => Payload::Sender(SenderEvent::AckArrived(seq)),
            (PacketKind::EndReply, true) => Payload::Sender(SenderEvent::EndReplyArrived(seq)),
            (PacketKind::End, true) => Payload::Receiver(ReceiverEvent::EndArrived(seq)),
            (PacketKind::Echo, true) => Payload::Receiver(ReceiverEvent::EchoArrived(seq)),
        };
        self.sched.schedule(at, EventKind::FrameArrival, payload)?;
        Ok(())
    }

    fn feed_sender(&mut self, event: SenderEvent) -> Result<()> {
        let before = self.sender.phase;
        let prior_timer = self.sender.armed_timer;
        let t = sender_step(&self.sender, event);
        let (name, seq) = match event {
            SenderEvent::Start => ("Start", None),
            SenderEvent::AckArrived(s) => ("Ack", Some(s)),
            SenderEvent::EndReplyArrived(s) => ("EndReply", Some(s)),
            SenderEvent::Timeout => ("Timeout", None),
        };
        let label = if t.dropped {
            format!("{name}(dropped)")
        } else {
            name.to_string()
        };
        self.log(
            Actor::Sender,
            label,
            seq,
            before.to_string(),
            t.state.phase.to_string(),
        );
        self.sender = t.state;

        if let Some(handle) = self
            .sender
            .armed_timer
            .filter(|_| self.sender.armed_timer != prior_timer)
        {
            self.sched.schedule_in(
                self.timeout_s,
                EventKind::TimerExpiry,
                Payload::SenderTimer(handle),
            )?;
        }
        for action in t.actions {
            match action {
                SenderAction::SendData(s) => {
                    if event == SenderEvent::Timeout {
                        self.retransmissions += 1;
                    }
                    let bits = self.data_bits(s);
                    self.send(PacketKind::Data, s, bits)?;
                }
                SenderAction::SendEnd(s) => {
                    if event == SenderEvent::Timeout {
                        self.retransmissions += 1;
                    }
                    self.send(PacketKind::End, s, self.cfg.control_bits)?;
                }
                SenderAction::SendEcho(s) => {
                    self.send(PacketKind::Echo, s, self.cfg.control_bits)?
                }
                SenderAction::Depart(assured) => self.sender_assured = assured,
            }
        }
        Ok(())
    }

    fn feed_receiver(&mut self, event: ReceiverEvent) -> Result<()> {
        let now = self.sched.now();
        let before = self.receiver.phase;
        let prior_deadline = self.receiver.dally_deadline;
        let t = receiver_step(&self.receiver, event, now);
        let (name, seq) = match event {
            ReceiverEvent::DataArrived { seq, ok: true } => ("Data", Some(seq)),
            ReceiverEvent::DataArrived { seq, ok: false } => ("DataDamaged", Some(seq)),
            ReceiverEvent::EndArrived(s) => ("End", Some(s)),
            ReceiverEvent::EchoArrived(s) => ("Echo", Some(s)),
            ReceiverEvent::DallyDeadline => ("DallyDeadline", None),
        };
        let label = if t.dropped {
            format!("{name}(dropped)")
        } else {
            name.to_string()
        };
        self.log(
            Actor::Receiver,
            label,
            seq,
            before.to_string(),
            t.state.phase.to_string(),
        );
        self.receiver = t.state;

        if let Some(deadline) = self
            .receiver
            .dally_deadline
            .filter(|d| Some(*d) != prior_deadline)
        {
            self.sched.schedule(
                deadline,
                EventKind::TimerExpiry,
                Payload::ReceiverDeadline(deadline),
            )?;
        }
        for action in t.actions {
            match action {
                ReceiverAction::Deliver(s) => {
                    self.delivered_bits += self.data_bits(s);
                    if s + 1 == self.total_packets {
                        self.t_forward_done = Some(now);
                    }
                }
                ReceiverAction::SendAck(s) => {
                    self.send(PacketKind::Ack, s, self.cfg.control_bits)?
                }
                ReceiverAction::SendEndReply(s) => {
                    self.send(PacketKind::EndReply, s, self.cfg.control_bits)?
                }
                ReceiverAction::Depart(assured) => {
                    self.receiver_assured = assured;
                    if assured {
                        self.t_commit = Some(now);
                    }
                }
            }
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        self.sched.schedule(
            0.0,
            EventKind::TimerExpiry,
            Payload::Sender(SenderEvent::Start),
        )?;
        if let Some(deadline) = self.receiver.dally_deadline {
            self.sched.schedule(
                deadline,
                EventKind::TimerExpiry,
                Payload::ReceiverDeadline(deadline),
            )?;
        }
        while let Some(event) = self.sched.pop()? {
            if self.sched.events_processed() > self.cfg.event_budget {
                return Err(Error::logic(format!(
                    "transfer exceeded its budget of {} events at t={}s",
                    self.cfg.event_budget,
                    self.sched.now()
                )));
            }
            match event.payload {
                Payload::Sender(e) => self.feed_sender(e)?,
                Payload::SenderTimer(handle) => {
                    if self.sender.armed_timer == Some(handle) {
                        self.feed_sender(SenderEvent::Timeout)?;
                    }
                }
                Payload::Receiver(e) => self.feed_receiver(e)?,
                Payload::ReceiverDeadline(deadline) => {
                    if self.receiver.dally_deadline == Some(deadline) {
                        self.feed_receiver(ReceiverEvent::DallyDeadline)?;
                    }
                }
            }
            if self.sender.phase.has_departed() && self.receiver.phase.has_departed() {
                break;
            }
        }
        if !(self.sender.phase.has_departed() && self.receiver.phase.has_departed()) {
            return Err(Error::logic(format!(
                "event queue drained with sender {} and receiver {}",
                self.sender.phase, self.receiver.phase
            )));
        }
        Ok(())
    }
}

fn validate_transfer(file_bits: u64, packet_bits: u64, link: &LinkModel) -> Result<u32> {
    link.validate()?;
    if packet_bits == 0 {
        return Err(Error::domain("packet size must be positive"));
    }
    if file_bits < packet_bits {
        return Err(Error::domain(format!(
            "file of {file_bits} bits is smaller than one {packet_bits}-bit packet"
        )));
    }
    u32::try_from(file_bits.div_ceil(packet_bits))
        .map_err(|_| Error::domain("file needs more than 2^32 packets"))
}

fn execute(
    attempt_id: u64,
    file_bits: u64,
    packet_bits: u64,
    link: &LinkModel,
    cfg: &EftpConfig,
    seed: u64,
    traced: bool,
) -> Result<TransferRun> {
    cfg.validate()?;
    let total_packets = validate_transfer(file_bits, packet_bits, link)?;
    let mut transfer = Transfer {
        link,
        cfg,
        file_bits,
        packet_bits,
        total_packets,
        timeout_s: cfg.effective_timeout(packet_bits, link),
        rng: SimRng::new(seed),
        sched: Scheduler::new(),
        sender: EftpSenderState::new(total_packets, cfg.retries),
        receiver: EftpReceiverState::new(cfg.dally_s),
        trace: traced.then(Vec::new),
        delivered_bits: 0,
        retransmissions: 0,
        sender_assured: false,
        receiver_assured: false,
        t_forward_done: None,
        t_commit: None,
    };
    transfer.run()?;
    let outcome = Outcome::classify(transfer.sender_assured, transfer.receiver_assured);
    let record = TransactionRecord {
        attempt_id,
        bytes_transferred: transfer.delivered_bits / 8,
        sender_assured: transfer.sender_assured,
        receiver_assured: transfer.receiver_assured,
        outcome,
        t_start: 0.0,
        t_forward_done: transfer.t_forward_done,
        t_commit: transfer.t_commit.filter(|_| outcome == Outcome::Committed),
        t_end: transfer.sched.now(),
        retransmissions: transfer.retransmissions,
        sender_phase: transfer.sender.phase,
        receiver_phase: transfer.receiver.phase,
    };
    Ok(TransferRun {
        record,
        trace: transfer.trace.unwrap_or_default(),
    })
}

/// Runs one complete transfer of `file_bits` in `packet_bits` packets and
/// classifies it by mutual assurance.
pub fn run_transfer(
    file_bits: u64,
    packet_bits: u64,
    link: &LinkModel,
    cfg: &EftpConfig,
    seed: u64,
) -> Result<TransactionRecord> {
    execute(0, file_bits, packet_bits, link, cfg, seed, false).map(|r| r.record)
}

/// As [`run_transfer`], also returning the per-event trace.
pub fn run_transfer_traced(
    attempt_id: u64,
    file_bits: u64,
    packet_bits: u64,
    link: &LinkModel,
    cfg: &EftpConfig,
    seed: u64,
) -> Result<TransferRun> {
    execute(attempt_id, file_bits, packet_bits, link, cfg, seed, true)
}

pub(super) fn run_transfer_with_id(
    attempt_id: u64,
    file_bits: u64,
    packet_bits: u64,
    link: &LinkModel,
    cfg: &EftpConfig,
    seed: u64,
) -> Result<TransactionRecord> {
    execute(attempt_id, file_bits, packet_bits, link, cfg, seed, false).map(|r| r.record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkernel::Duplex;

    fn link(loss: f64, tau: f64) -> LinkModel {
        LinkModel::new(3e6, tau, loss, 0.0, Duplex::Half).unwrap()
    }

    #[test]
    fn perfect_channel_commits() {
        let r = run_transfer(4096 * 4, 4096, &link(0.0, 8e-6), &EftpConfig::default(), 1).unwrap();
        assert_eq!(r.outcome, Outcome::Committed);
        assert_eq!(r.retransmissions, 0);
        assert!(r.sender_assured && r.receiver_assured);
        assert_eq!(r.bytes_transferred, 2048);
        assert_eq!(r.sender_phase, SenderPhase::EchoSent);
        assert_eq!(r.receiver_phase, ReceiverPhase::DepartedAssured);
        let (start, fwd, commit) = (r.t_start, r.t_forward_done.unwrap(), r.t_commit.unwrap());
        assert!(start <= fwd && fwd <= commit);
    }

    #[test]
    fn lost_echo_leaves_only_the_sender_assured() {
        let cfg = EftpConfig {
            forced_loss: vec![PacketKind::Echo],
            ..EftpConfig::default()
        };
        let r = run_transfer(4096, 4096, &link(0.0, 8e-6), &cfg, 3).unwrap();
        assert_eq!(r.outcome, Outcome::SenderOnlyAssured);
        assert_eq!(r.receiver_phase, ReceiverPhase::DallyExpired);
        assert_eq!(r.t_commit, None);
    }

    #[test]
    fn dead_channel_fails_after_retry_budget() {
        let r = run_transfer(4096, 512, &link(1.0, 8e-6), &EftpConfig::default(), 3).unwrap();
        assert_eq!(r.outcome, Outcome::Failed);
        assert_eq!(r.retransmissions, 5);
        assert_eq!(r.sender_phase, SenderPhase::DepartedUnassured);
        assert_eq!(r.receiver_phase, ReceiverPhase::DallyExpired);
        assert_eq!(r.t_forward_done, None);
    }

    #[test]
    fn partial_last_packet_is_counted() {
        let r = run_transfer(1000, 512, &link(0.0, 0.0), &EftpConfig::default(), 1).unwrap();
        assert_eq!(r.bytes_transferred, 125);
    }

    #[test]
    fn rejects_file_smaller_than_packet() {
        assert!(run_transfer(100, 512, &link(0.0, 0.0), &EftpConfig::default(), 1).is_err());
    }

    #[test]
    fn tiny_budget_is_reported_as_logic_error() {
        let cfg = EftpConfig {
            event_budget: 3,
            ..EftpConfig::default()
        };
        let err = run_transfer(4096 * 8, 4096, &link(0.0, 8e-6), &cfg, 1).unwrap_err();
        assert!(matches!(err, Error::Logic(_)));
    }
}
