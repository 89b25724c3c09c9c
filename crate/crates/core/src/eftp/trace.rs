use std::fmt;

use serde::{Deserialize, Serialize};

/// Column header of the EFTP trace format.
pub const TRACE_HEADER: &str = "time_us,actor,event,seq,phase_before,phase_after";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Sender,
    Receiver,
    /// Channel verdicts (losses, damaged control packets).
    Link,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Actor::Sender => "sender",
            Actor::Receiver => "receiver",
            Actor::Link => "link",
        })
    }
}

/// One line of an EFTP trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub time_s: f64,
    pub actor: Actor,
    pub event: String,
    pub seq: Option<u32>,
    pub phase_before: String,
    pub phase_after: String,
}

impl fmt::Display for TraceEntry {
    /// `time_us,actor,event,seq,phase_before,phase_after`; time has
    /// nanosecond resolution, missing fields print as `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seq = self.seq.map_or_else(|| "-".to_string(), |s| s.to_string());
        write!(
            f,
            "{:.3},{},{},{},{},{}",
            self.time_s * 1e6,
            self.actor,
            self.event,
            seq,
            self.phase_before,
            self.phase_after
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format_is_stable() {
        let e = TraceEntry {
            time_s: 1_373.333_333e-6,
            actor: Actor::Receiver,
            event: "Data".into(),
            seq: Some(0),
            phase_before: "Receiving".into(),
            phase_after: "Receiving".into(),
        };
        assert_eq!(
            e.to_string(),
            "1373.333,receiver,Data,0,Receiving,Receiving"
        );
        let t = TraceEntry {
            time_s: 0.0,
            actor: Actor::Sender,
            event: "Timeout".into(),
            seq: None,
            phase_before: "Sending".into(),
            phase_after: "AwaitingAck".into(),
        };
        assert_eq!(t.to_string(), "0.000,sender,Timeout,-,Sending,AwaitingAck");
    }
}
