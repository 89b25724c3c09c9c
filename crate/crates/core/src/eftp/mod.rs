//! EFTP: stop-and-wait file transfer followed by the three-phase end-dally
//! (END, ENDREPLY, echoed ENDREPLY), classified by whether both sides end up
//! assured that the transfer succeeded.

mod machine;
mod measure;
mod run;
mod trace;

pub use machine::{
    receiver_step, sender_step, EftpReceiverState, EftpSenderState, ReceiverAction, ReceiverEvent,
    ReceiverPhase, SenderAction, SenderEvent, SenderPhase, Transition,
};
pub use measure::{measure_bilateral_efficiency_eftp, BilateralReport, OutcomeCounts};
pub use run::{
    run_transfer, run_transfer_traced, EftpConfig, Outcome, PacketKind, TransactionRecord,
    TransferRun,
};
pub use trace::{Actor, TraceEntry, TRACE_HEADER};
