use std::fmt;

use serde::{Deserialize, Serialize};

/// Result of feeding one event to a state machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S, A> {
    pub state: S,
    pub actions: Vec<A>,
    /// The event was not legal in the prior phase and had no effect. Lossy
    /// channels deliver stale packets, so this is routine, not an error.
    pub dropped: bool,
}

impl<S, A> Transition<S, A> {
    fn to(state: S, actions: Vec<A>) -> Self {
        Transition {
            state,
            actions,
            dropped: false,
        }
    }

    fn drop(state: S) -> Self {
        Transition {
            state,
            actions: Vec::new(),
            dropped: true,
        }
    }
}

/// Sender phases.
///
/// `Sending` / `EndSent` mean the current DATA / END packet is out on its
/// first transmission; `AwaitingAck` / `AwaitingEndReply` mean it has been
/// retransmitted at least once. `EchoSent` is where the sender departs
/// assured; any later stray event retires it to `DepartedAssured`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SenderPhase {
    Sending,
    AwaitingAck,
    EndSent,
    AwaitingEndReply,
    EchoSent,
    DepartedAssured,
    DepartedUnassured,
}

impl SenderPhase {
    pub fn has_departed(self) -> bool {
        matches!(
            self,
            SenderPhase::EchoSent | SenderPhase::DepartedAssured | SenderPhase::DepartedUnassured
        )
    }

    pub fn is_assured(self) -> bool {
        matches!(self, SenderPhase::EchoSent | SenderPhase::DepartedAssured)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReceiverPhase {
    Receiving,
    /// ENDREPLY sent once; dally window open.
    EndReplySent,
    /// Dally window open and a duplicate END has been answered.
    Dallying,
    DepartedAssured,
    DallyExpired,
}

impl ReceiverPhase {
    pub fn has_departed(self) -> bool {
        matches!(
            self,
            ReceiverPhase::DepartedAssured | ReceiverPhase::DallyExpired
        )
    }

    pub fn is_dallying(self) -> bool {
        matches!(self, ReceiverPhase::EndReplySent | ReceiverPhase::Dallying)
    }
}

macro_rules! display_via_debug {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(self, f)
            }
        }
    )*};
}
display_via_debug!(SenderPhase, ReceiverPhase);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderEvent {
    Start,
    AckArrived(u32),
    EndReplyArrived(u32),
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderAction {
    SendData(u32),
    SendEnd(u32),
    SendEcho(u32),
    Depart(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverEvent {
    DataArrived { seq: u32, ok: bool },
    EndArrived(u32),
    EchoArrived(u32),
    DallyDeadline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverAction {
    /// Hand a newly accepted packet to the application.
    Deliver(u32),
    SendAck(u32),
    SendEndReply(u32),
    Depart(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EftpSenderState {
    pub phase: SenderPhase,
    /// Sequence number of the outstanding DATA packet, or of END once all
    /// data is acknowledged.
    pub next_seq: u32,
    pub total_packets: u32,
    pub retries_left: u32,
    pub retry_budget: u32,
    pub started: bool,
    /// Handle of the armed retransmission timer. A `Timeout` is only
    /// meaningful for the handle that is currently armed.
    pub armed_timer: Option<u64>,
    timers_issued: u64,
}

impl EftpSenderState {
    pub fn new(total_packets: u32, retry_budget: u32) -> Self {
        EftpSenderState {
            phase: SenderPhase::Sending,
            next_seq: 0,
            total_packets,
            retries_left: retry_budget,
            retry_budget,
            started: false,
            armed_timer: None,
            timers_issued: 0,
        }
    }

    fn arm(&mut self) {
        self.timers_issued += 1;
        self.armed_timer = Some(self.timers_issued);
    }

    fn first_transmission(mut self) -> (Self, SenderAction) {
        self.retries_left = self.retry_budget;
        self.arm();
        let seq = self.next_seq;
        if seq < self.total_packets {
            self.phase = SenderPhase::Sending;
            (self, SenderAction::SendData(seq))
        } else {
            self.phase = SenderPhase::EndSent;
            (self, SenderAction::SendEnd(seq))
        }
    }
}

/// Pure sender transition.
pub fn sender_step(
    state: &EftpSenderState,
    event: SenderEvent,
) -> Transition<EftpSenderState, SenderAction> {
    use SenderEvent::*;
    use SenderPhase::*;

    let mut next = state.clone();
    match (state.phase, event) {
        (DepartedAssured | DepartedUnassured, _) => Transition::drop(next),
        (EchoSent, _) => {
            next.phase = DepartedAssured;
            Transition::to(next, Vec::new())
        }
        (Sending, Start) if !state.started => {
            next.started = true;
            let (next, action) = next.first_transmission();
            Transition::to(next, vec![action])
        }
        (_, Start) => Transition::drop(next),
        (_, _) if !state.started => Transition::drop(next),

        (Sending | AwaitingAck, AckArrived(seq)) if seq == state.next_seq => {
            next.next_seq += 1;
            let (next, action) = next.first_transmission();
            Transition::to(next, vec![action])
        }
        (EndSent | AwaitingEndReply, EndReplyArrived(seq)) if seq == state.next_seq => {
            next.phase = EchoSent;
            next.armed_timer = None;
            Transition::to(
                next,
                vec![SenderAction::SendEcho(seq), SenderAction::Depart(true)],
            )
        }
        (Sending | AwaitingAck | EndSent | AwaitingEndReply, Timeout) => {
            if state.retries_left == 0 {
                next.phase = DepartedUnassured;
                next.armed_timer = None;
                return Transition::to(next, vec![SenderAction::Depart(false)]);
            }
            next.retries_left -= 1;
            next.arm();
            let action = if matches!(state.phase, Sending | AwaitingAck) {
                next.phase = AwaitingAck;
                SenderAction::SendData(state.next_seq)
            } else {
                next.phase = AwaitingEndReply;
                SenderAction::SendEnd(state.next_seq)
            };
            Transition::to(next, vec![action])
        }
        _ => Transition::drop(next),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EftpReceiverState {
    pub phase: ReceiverPhase,
    pub expected_seq: u32,
    /// While dallying, the end of the dally window. While receiving, the
    /// instant the receiver abandons an idle transfer.
    pub dally_deadline: Option<f64>,
    pub dally_s: f64,
    pub end_seq: Option<u32>,
}

impl EftpReceiverState {
    pub fn new(dally_s: f64) -> Self {
        EftpReceiverState {
            phase: ReceiverPhase::Receiving,
            expected_seq: 0,
            dally_deadline: Some(dally_s),
            dally_s,
            end_seq: None,
        }
    }
}

/// Pure receiver transition; `now` anchors the dally window.
pub fn receiver_step(
    state: &EftpReceiverState,
    event: ReceiverEvent,
    now: f64,
) -> Transition<EftpReceiverState, ReceiverAction> {
    use ReceiverAction::*;
    use ReceiverEvent::*;
    use ReceiverPhase::*;

    let mut next = state.clone();
    match (state.phase, event) {
        (DepartedAssured | DallyExpired, _) => Transition::drop(next),
        (Receiving, DataArrived { ok: false, .. }) => Transition::to(next, Vec::new()),
        (Receiving, DataArrived { seq, ok: true }) if seq == state.expected_seq => {
            next.expected_seq += 1;
            next.dally_deadline = Some(now + state.dally_s);
            Transition::to(next, vec![Deliver(seq), SendAck(seq)])
        }
        (Receiving, DataArrived { seq, ok: true }) if seq < state.expected_seq => {
            next.dally_deadline = Some(now + state.dally_s);
            Transition::to(next, vec![SendAck(seq)])
        }
        (Receiving, EndArrived(seq)) if seq == state.expected_seq => {
            next.phase = EndReplySent;
            next.end_seq = Some(seq);
            next.dally_deadline = Some(now + state.dally_s);
            Transition::to(next, vec![SendEndReply(seq)])
        }
        (EndReplySent | Dallying, EndArrived(seq)) if Some(seq) == state.end_seq => {
            next.phase = Dallying;
            Transition::to(next, vec![SendEndReply(seq)])
        }
        (EndReplySent | Dallying, EchoArrived(seq)) if Some(seq) == state.end_seq => {
            next.phase = DepartedAssured;
            next.dally_deadline = None;
            Transition::to(next, vec![Depart(true)])
        }
        (Receiving | EndReplySent | Dallying, DallyDeadline) => {
            next.phase = DallyExpired;
            next.dally_deadline = None;
            Transition::to(next, vec![Depart(false)])
        }
        _ => Transition::drop(next),
    }
}
