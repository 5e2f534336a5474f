use proptest::prelude::*;

use akaprime_core::wire::eap::{decode_eap, encode_eap, seal_mac, verify_mac, Attribute, AttributeKind, Subtype};
use akaprime_core::EapPacket;

fn attribute() -> impl Strategy<Value = Attribute> {
    (any::<u8>(), prop::collection::vec(any::<u8>(), 0..80)).prop_map(|(k, mut value)| {
        let kind = AttributeKind::from_u8(k);
        if kind == AttributeKind::Mac {
            value.resize(16, 0);
        }
        Attribute::new(kind, value)
    })
}

fn packet() -> impl Strategy<Value = EapPacket> {
    let body = (any::<u8>(), any::<u8>(), any::<bool>(), prop::collection::vec(attribute(), 0..10)).prop_map(
        |(id, st, req, attrs)| {
            let st = Subtype::from_u8(st);
            if req {
                EapPacket::request(id, st, attrs)
            } else {
                EapPacket::response(id, st, attrs)
            }
        },
    );
    prop_oneof![any::<u8>().prop_map(EapPacket::success), any::<u8>().prop_map(EapPacket::failure), body]
}

proptest! {
    #[test]
    fn encode_decode_round_trip(p in packet()) {
        let raw = encode_eap(&p).unwrap();
        prop_assert_eq!(raw.len() % 4, 0);
        prop_assert_eq!(decode_eap(&raw).unwrap(), p);
    }

    #[test]
    fn decoding_garbage_never_panics(raw in prop::collection::vec(any::<u8>(), 0..200)) {
        if let Ok(p) = decode_eap(&raw) {
            prop_assert_eq!(encode_eap(&p).unwrap(), raw);
        }
    }

    #[test]
    fn any_bit_flip_breaks_the_mac(byte in 0usize..64, bit in 0u8..8) {
        let p = EapPacket::request(1, Subtype::Challenge, vec![
            Attribute::new(AttributeKind::Rand, vec![1; 20]),
            Attribute::new(AttributeKind::Autn, vec![2; 16]),
            Attribute::new(AttributeKind::Mac, vec![0; 16]),
        ]);
        let sealed = seal_mac(&p, &[9; 32]).unwrap();
        prop_assert!(verify_mac(&sealed, &[9; 32]));
        let mut raw = encode_eap(&sealed).unwrap();
        let i = byte % raw.len();
        raw[i] ^= 1 << bit;
        if let Ok(tampered) = decode_eap(&raw) {
            prop_assert!(!verify_mac(&tampered, &[9; 32]));
        }
    }
}

#[test]
fn success_and_failure_golden_bytes() {
    assert_eq!(encode_eap(&EapPacket::success(7)).unwrap(), [0x03, 0x07, 0x00, 0x04]);
    assert_eq!(encode_eap(&EapPacket::failure(1)).unwrap(), [0x04, 0x01, 0x00, 0x04]);
    let golden = include_str!("golden/eap_success_id7.hex").trim();
    assert_eq!(hex::encode(encode_eap(&EapPacket::success(7)).unwrap()), golden);
}
