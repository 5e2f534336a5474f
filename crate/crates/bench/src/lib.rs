//! Shared fixtures for the benchmarks.

use akaprime_core::crypto::{generate_av, usim_functions};
use akaprime_core::entities::provision;
use akaprime_core::harness::Scenario;
use akaprime_core::identity::derive_snn;
use akaprime_core::wire::eap::{seal_mac, Attribute, AttributeKind, Subtype};
use akaprime_core::{
    AuthMethod, AuthenticationVector, EapPacket, ProtectionScheme, RootCredential, Sqn, SubscriberStore,
};

pub const SNN: &str = "5G:mnc001.mcc001.3gppnetwork.org";
pub const IDENTITY: &str = "6001010123456789@wlan.mnc001.mcc001.3gppnetwork.org";

pub fn credential() -> RootCredential {
    RootCredential { k: [0x46; 16], sqn: Sqn::new(33).unwrap(), amf_field: [0x80, 0x00] }
}

pub fn vector() -> AuthenticationVector {
    debug_assert_eq!(derive_snn("001", "01").unwrap().snn, SNN);
    generate_av(&credential(), SNN, b"bench").unwrap().0
}

pub fn ck_ik() -> ([u8; 16], [u8; 16]) {
    let out = usim_functions(&credential(), &vector().rand);
    (out.ck, out.ik)
}

/// A sealed challenge shaped like the one the AUSF sends.
pub fn challenge() -> EapPacket {
    let av = vector();
    let p = EapPacket::request(
        1,
        Subtype::Challenge,
        vec![
            Attribute::new(AttributeKind::Rand, av.rand),
            Attribute::new(AttributeKind::Autn, av.autn.encode()),
            Attribute::new(AttributeKind::Kdf, [0, 1]),
            Attribute::new(AttributeKind::KdfInput, SNN.as_bytes()),
            Attribute::new(AttributeKind::Mac, [0; 16]),
        ],
    );
    seal_mac(&p, &[0x11; 32]).unwrap()
}

pub fn store() -> SubscriberStore {
    provision(8, 1, "001", "01", ProtectionScheme::Null).unwrap()
}

pub fn scenario(method: AuthMethod) -> Scenario {
    let mut sc = Scenario::new(format!("bench-{method}"), 1);
    sc.method = Some(method);
    sc
}
