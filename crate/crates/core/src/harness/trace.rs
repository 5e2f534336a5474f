use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{HarnessError, Outcome};
use crate::wire::{Entity, Interface, SessionId};

/// Event names of the faultless EAP-AKA' narrative, in order.
pub const AKA_PRIME_NARRATIVE: [&str; 12] = [
    "IdentityRequest",
    "IdentityResponse",
    "AuthRequest",
    "AuthInfoRequest",
    "MethodSelected",
    "AvGenerated",
    "XresStored",
    "AuthChallenge",
    "ChallengeResponse",
    "HresVerified",
    "XresVerified",
    "SuccessNotice",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFlags {
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dropped: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mutated: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub replayed: bool,
    /// Handler error raised while processing this event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// UE state after handling, recorded on every UE delivery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ue_state: Option<String>,
}

/// One delivery, drop or internal decision. Internal decisions have no interface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u64,
    pub session: SessionId,
    pub from: Entity,
    pub to: Entity,
    pub interface: Option<Interface>,
    pub event: String,
    /// Hex of the EAP packet carried, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default)]
    pub flags: TraceFlags,
}

impl TraceEvent {
    pub fn is_decision(&self) -> bool {
        self.interface.is_none()
    }
}

/// Delivered messages and decisions, in order, with drops and failed handling removed.
pub fn event_names(trace: &[TraceEvent]) -> Vec<&str> {
    trace.iter().filter(|e| !e.flags.dropped && e.flags.error.is_none()).map(|e| e.event.as_str()).collect()
}

/// Projection of a trace onto [`AKA_PRIME_NARRATIVE`] event names.
pub fn narrative(trace: &[TraceEvent]) -> Vec<&str> {
    event_names(trace).into_iter().filter(|n| AKA_PRIME_NARRATIVE.contains(n)).collect()
}

pub fn write_jsonl(trace: &[TraceEvent], mut w: impl Write) -> std::io::Result<()> {
    for e in trace {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn to_jsonl(trace: &[TraceEvent]) -> String {
    let mut buf = Vec::new();
    write_jsonl(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_jsonl(r: impl BufRead) -> Result<Vec<TraceEvent>, HarnessError> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| HarnessError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line).map_err(|e| HarnessError::Config(format!("trace line {}: {e}", n + 1)))?;
        out.push(ev);
    }
    Ok(out)
}

/// Re-derives the outcome from a stored trace.
///
/// Fails if ticks run backwards or the trace mixes sessions.
pub fn replay_verdict(trace: &[TraceEvent]) -> Result<Outcome, HarnessError> {
    if let Some(w) = trace.windows(2).find(|w| w[1].tick < w[0].tick) {
        return Err(HarnessError::Config(format!("tick goes backwards at {} -> {}", w[0].tick, w[1].tick)));
    }
    if let Some(first) = trace.first() {
        if trace.iter().any(|e| e.session != first.session) {
            return Err(HarnessError::Config("trace mixes sessions".into()));
        }
    }
    let last_state = trace.iter().rev().find_map(|e| e.flags.ue_state.as_deref());
    Ok(match last_state {
        Some(s) => Outcome::from_ue_state(s),
        None => Outcome::Timeout,
    })
}
