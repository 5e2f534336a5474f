//! EAP-AKA' / 5G-AKA authentication simulator.
//!
//! Layers, bottom up: [`identity`] and [`crypto`] are pure functions,
//! [`wire`] encodes EAP and the envelopes entities exchange, [`entities`] holds
//! the UE/AMF/AUSF/UDM state machines, [`harness`] runs them over a simulated
//! network with fault injection, and [`federation`] routes roaming requests by
//! realm.

pub(crate) mod serde_hex;

pub mod crypto;
pub mod entities;
pub mod federation;
pub mod harness;
pub mod identity;
pub mod wire;

pub use crypto::{AuthenticationVector, Autn, CryptoError, KeyMaterial, RootCredential, Sqn};
pub use entities::{AuthMethod, EntityError, MethodPolicy, NetworkType, SubscriberRecord, SubscriberStore};
pub use identity::{Nai, ProtectionScheme, ServingNetworkContext, Suci, Supi};
pub use wire::{EapPacket, Entity, Envelope, FailureReason, Interface, Payload};
