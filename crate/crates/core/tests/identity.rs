use std::collections::BTreeSet;

use akaprime_core::entities::provision;
use akaprime_core::identity::{build_nai, conceal_supi, deconceal_suci, parse_nai, IdentityError, MethodHint};
use akaprime_core::{EntityError, ProtectionScheme, Suci, Supi};

#[test]
fn nai_round_trip_for_provisioned_subscribers() {
    for (mcc, mnc) in [("001", "01"), ("724", "31"), ("310", "410")] {
        let store = provision(100, 11, mcc, mnc, ProtectionScheme::Null).unwrap();
        for rec in store.records() {
            for hint in [MethodHint::EapAka, MethodHint::EapSim, MethodHint::EapAkaPrime] {
                let nai = build_nai(&rec.supi, hint).unwrap();
                let parsed = parse_nai(&nai.to_string()).unwrap();
                assert_eq!(parsed, nai);
                assert_eq!(parsed.supi, rec.supi);
            }
        }
    }
}

#[test]
fn eduroam_nai_decodes_to_its_subscriber() {
    let nai = parse_nai("6724313930974708@wlan.mnc031.mcc724.3gppnetwork.org").unwrap();
    assert_eq!(nai.method_hint, MethodHint::EapAkaPrime);
    assert_eq!(nai.supi, Supi::new("724", "31", "3930974708").unwrap());
}

#[test]
fn rejects_bad_nais() {
    for raw in [
        "6724313930974708",
        "6724313930974708@example.org",
        "6724313930974708@wlan.mnc032.mcc724.3gppnetwork.org",
        "67243139309747@wlan.mnc031.mcc724.3gppnetwork.org",
        "6a24313930974708@wlan.mnc031.mcc724.3gppnetwork.org",
    ] {
        assert!(parse_nai(raw).is_err(), "{raw} parsed");
    }
}

#[test]
fn suci_round_trip_through_text() {
    let store = provision(20, 3, "001", "01", ProtectionScheme::SymTest).unwrap();
    for (i, rec) in store.records().iter().enumerate() {
        let suci = conceal_supi(&rec.supi, &rec.concealment.home_key, [i as u8; 16], ProtectionScheme::SymTest);
        let text = suci.to_string();
        assert!(!text.contains(rec.supi.msin()));
        let back: Suci = text.parse().unwrap();
        assert_eq!(back, suci);
        assert_eq!(deconceal_suci(&back, &rec.concealment.home_key).unwrap(), rec.supi);
        assert_eq!(store.resolve_suci(&back).unwrap(), rec.supi);
    }
}

#[test]
fn corrupted_sucis_fail_integrity() {
    let store = provision(4, 9, "001", "01", ProtectionScheme::SymTest).unwrap();
    let rec = &store.records()[2];
    let suci = conceal_supi(&rec.supi, &rec.concealment.home_key, [7; 16], ProtectionScheme::SymTest);
    let mut seen = BTreeSet::new();
    for n in 0..64usize {
        let mut bad = suci.clone();
        // Field by n % 3, then distinct (byte, bit) positions within it.
        let k = n / 3;
        let pos = |len: usize| (k % len, 1u8 << (k / len));
        match n % 3 {
            0 => {
                let (i, bit) = pos(16);
                bad.nonce[i] ^= bit;
            }
            1 => {
                let (i, bit) = pos(bad.ciphertext.len());
                bad.ciphertext[i] ^= bit;
            }
            _ => {
                let (i, bit) = pos(16);
                bad.tag[i] ^= bit;
            }
        }
        assert!(seen.insert(bad.to_string()), "duplicate corruption {n}");
        assert_eq!(deconceal_suci(&bad, &rec.concealment.home_key), Err(IdentityError::Integrity));
        assert_eq!(store.resolve_suci(&bad), Err(EntityError::IdentityIntegrity));
    }
}

#[test]
fn null_scheme_suci_carries_msin_in_clear() {
    let supi = Supi::new("001", "01", "0123456789").unwrap();
    let suci = conceal_supi(&supi, &[0; 32], [0; 16], ProtectionScheme::Null);
    assert_eq!(suci.to_string(), "suci-0-001-01-0000-0-0-0123456789");
    assert_eq!(deconceal_suci(&suci, &[0; 32]).unwrap(), supi);
}
