//! Protocol entities: UE, AMF/SEAF, AUSF and UDM state machines.
//!
//! Every handler consumes one envelope and returns the envelopes to send plus
//! any internal decisions worth tracing. Handlers never block and never touch
//! the network directly.

mod amf;
mod ausf;
mod policy;
mod subscriber;
mod udm;
mod ue;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use amf::{AmfSession, AmfState};
pub use ausf::{AusfSession, AusfState};
pub use policy::{AuthMethod, MethodInfo, MethodPolicy, NetworkType, REGISTRY};
pub use subscriber::{provision, Concealment, StoreError, SubscriberRecord, SubscriberStore};
pub use udm::Udm;
pub use ue::{SessionKeys, UeSession, UeState};

use crate::wire::{Entity, Envelope, EnvelopeError, FailureReason, SessionId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntityError {
    /// A message arrived in a state that does not expect it.
    #[error("{entity} in state {state} cannot handle {message}")]
    ProtocolViolation { entity: Entity, state: String, message: &'static str },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("authentication rejected: {0}")]
    AuthReject(FailureReason),
    #[error("subscriber not found: {0}")]
    SubscriberNotFound(String),
    #[error("concealed identity failed its integrity check")]
    IdentityIntegrity,
    #[error("method rejected: {0}")]
    MethodRejected(String),
}

impl EntityError {
    pub fn reason(&self) -> FailureReason {
        match self {
            EntityError::ProtocolViolation { .. } | EntityError::Validation(_) => FailureReason::ProtocolViolation,
            EntityError::AuthReject(r) => *r,
            EntityError::SubscriberNotFound(_) => FailureReason::SubscriberNotFound,
            EntityError::IdentityIntegrity => FailureReason::IdentityIntegrity,
            EntityError::MethodRejected(_) => FailureReason::MethodRejected,
        }
    }

    /// Out-of-state messages are dropped without failing the session.
    pub fn is_protocol_violation(&self) -> bool {
        matches!(self, EntityError::ProtocolViolation { .. })
    }
}

impl From<EnvelopeError> for EntityError {
    fn from(e: EnvelopeError) -> Self {
        EntityError::Validation(e.to_string())
    }
}

/// Internal step worth recording in a trace even though nothing is sent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision")]
pub enum Decision {
    MethodSelected {
        method: AuthMethod,
    },
    AvGenerated,
    /// AUSF stored XRES and derived HXRES.
    XresStored,
    /// AMF matched HRES against HXRES.
    HresVerified,
    /// AUSF matched RES against XRES.
    XresVerified,
}

impl Decision {
    pub fn name(&self) -> &'static str {
        match self {
            Decision::MethodSelected { .. } => "MethodSelected",
            Decision::AvGenerated => "AvGenerated",
            Decision::XresStored => "XresStored",
            Decision::HresVerified => "HresVerified",
            Decision::XresVerified => "XresVerified",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Reply {
    pub out: Vec<Envelope>,
    pub decisions: Vec<Decision>,
}

impl Reply {
    pub fn none() -> Self {
        Reply::default()
    }

    pub fn send(env: Envelope) -> Self {
        Reply { out: vec![env], decisions: Vec::new() }
    }

    pub fn with(mut self, d: Decision) -> Self {
        self.decisions.push(d);
        self
    }

    pub fn and_send(mut self, env: Envelope) -> Self {
        self.out.push(env);
        self
    }
}

/// Builds an envelope whose endpoints and payload are known-good by construction.
pub(crate) fn envelope(session: SessionId, from: Entity, to: Entity, payload: crate::wire::Payload) -> Envelope {
    Envelope::between(session, from, to, payload).expect("entity emits only legal envelopes")
}

pub(crate) fn violation(entity: Entity, state: impl fmt::Debug, env: &Envelope) -> EntityError {
    EntityError::ProtocolViolation { entity, state: format!("{state:?}"), message: env.payload.name() }
}
