//! EAP codec and the envelopes that carry it between entities.

pub mod eap;
pub mod envelope;

pub use eap::{
    attribute_value_range, decode_eap, encode_eap, seal_mac, verify_mac, AkaBody, Attribute, AttributeKind, EapCode,
    EapError, EapPacket, Subtype,
};
pub use envelope::{
    Entity, Envelope, EnvelopeError, FailureReason, FieldSelector, HomeKeys, Interface, Payload, SessionId, WireAv,
};
