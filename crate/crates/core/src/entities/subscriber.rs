//! Provisioned subscribers and the in-memory store the UDM works from.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AuthMethod, EntityError};
use crate::crypto::{RootCredential, Sqn};
use crate::identity::{deconceal_suci, parse_realm, IdentityError, ProtectionScheme, Suci, Supi};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concealment {
    pub scheme: ProtectionScheme,
    #[serde(with = "crate::serde_hex")]
    pub home_key: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubscriberRecord {
    pub supi: Supi,
    pub credential: RootCredential,
    pub allowed_methods: BTreeSet<AuthMethod>,
    pub realm: String,
    pub concealment: Concealment,
}

impl SubscriberRecord {
    /// Record with both public methods, home realm and no concealment.
    pub fn new(supi: Supi, k: [u8; 16], sqn: Sqn) -> Self {
        SubscriberRecord {
            realm: supi.realm(),
            supi,
            credential: RootCredential { k, sqn, amf_field: [0x80, 0x00] },
            allowed_methods: [AuthMethod::EapAkaPrime, AuthMethod::FiveGAka].into(),
            concealment: Concealment { scheme: ProtectionScheme::Null, home_key: [0; 32] },
        }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        let imsi = self.supi.imsi();
        if self.allowed_methods.is_empty() {
            return Err(StoreError::Invalid(format!("{imsi}: allowed_methods is empty")));
        }
        parse_realm(&self.realm).map_err(|e| StoreError::Invalid(format!("{imsi}: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed subscriber file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid subscriber record {0}")]
    Invalid(String),
    #[error("duplicate IMSI {0}")]
    Duplicate(String),
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    subscribers: Vec<SubscriberRecord>,
}

/// Subscribers in provisioning order, looked up by IMSI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubscriberStore {
    records: Vec<SubscriberRecord>,
}

impl SubscriberStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = SubscriberRecord>) -> Result<Self, StoreError> {
        let mut store = Self::new();
        for r in records {
            store.insert(r)?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, record: SubscriberRecord) -> Result<(), StoreError> {
        record.validate()?;
        let imsi = record.supi.imsi();
        if self.get(&imsi).is_some() {
            return Err(StoreError::Duplicate(imsi));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn get(&self, imsi: &str) -> Option<&SubscriberRecord> {
        self.records.iter().find(|r| r.supi.imsi() == imsi)
    }

    pub fn records(&self) -> &[SubscriberRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Persists the SQN to use for the subscriber's next challenge.
    pub fn set_sqn(&mut self, imsi: &str, next: Sqn) -> Result<(), EntityError> {
        let rec = self
            .records
            .iter_mut()
            .find(|r| r.supi.imsi() == imsi)
            .ok_or_else(|| EntityError::SubscriberNotFound(imsi.to_string()))?;
        rec.credential.sqn = next;
        Ok(())
    }

    /// Recovers the SUPI from a SUCI by trying the home keys of matching subscribers.
    pub fn resolve_suci(&self, suci: &Suci) -> Result<Supi, EntityError> {
        let mut tried = false;
        for rec in self
            .records
            .iter()
            .filter(|r| r.supi.mcc() == suci.mcc && r.supi.mnc() == suci.mnc && r.concealment.scheme == suci.scheme)
        {
            tried = true;
            match deconceal_suci(suci, &rec.concealment.home_key) {
                Ok(supi) => return Ok(supi),
                Err(IdentityError::Integrity) => continue,
                Err(e) => return Err(EntityError::Validation(e.to_string())),
            }
        }
        if tried {
            Err(EntityError::IdentityIntegrity)
        } else {
            Err(EntityError::SubscriberNotFound(suci.to_string()))
        }
    }

    pub fn from_json(text: &str) -> Result<Self, StoreError> {
        let file: StoreFile = serde_json::from_str(text)?;
        Self::from_records(file.subscribers)
    }

    pub fn to_json(&self) -> String {
        let file = StoreFile { subscribers: self.records.clone() };
        let mut s = serde_json::to_string_pretty(&file).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| StoreError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| StoreError::Io { path: path.display().to_string(), source })
    }
}

/// Deterministically provisions `count` subscribers of network `mcc`/`mnc`.
///
/// MSINs are consecutive from a seed-chosen base, so IMSIs are unique. Every
/// subscriber allows both public methods and starts at SQN 1.
pub fn provision(
    count: usize,
    seed: u64,
    mcc: &str,
    mnc: &str,
    scheme: ProtectionScheme,
) -> Result<SubscriberStore, StoreError> {
    if mcc.len() != 3 || !(2..=3).contains(&mnc.len()) {
        return Err(StoreError::Invalid(format!("network {mcc}/{mnc} needs a 3-digit MCC and 2-3 digit MNC")));
    }
    let msin_len = 15 - mcc.len() - mnc.len();
    let space = 10u64.pow(msin_len as u32);
    if count == 0 || count as u64 > space / 2 {
        return Err(StoreError::Invalid(format!("cannot provision {count} subscribers")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = rng.gen_range(0..space - count as u64);
    let mut store = SubscriberStore::new();
    for i in 0..count as u64 {
        let msin = format!("{:0width$}", base + i, width = msin_len);
        let supi = Supi::new(mcc, mnc, &msin).map_err(|e| StoreError::Invalid(e.to_string()))?;
        let mut rec = SubscriberRecord::new(supi, rng.gen(), Sqn::new(1).expect("in range"));
        rec.concealment = Concealment { scheme, home_key: rng.gen() };
        store.insert(rec)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::conceal_supi;

    fn rec(msin: &str) -> SubscriberRecord {
        SubscriberRecord::new(Supi::new("001", "01", msin).unwrap(), [1; 16], Sqn::new(1).unwrap())
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let store = SubscriberStore::from_records([rec("0000000001"), rec("0000000002")]).unwrap();
        let text = store.to_json();
        let back = SubscriberStore::from_json(&text).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rejects_duplicates_and_bad_records() {
        let mut store = SubscriberStore::new();
        store.insert(rec("0000000001")).unwrap();
        assert!(matches!(store.insert(rec("0000000001")), Err(StoreError::Duplicate(_))));
        let mut bad = rec("0000000003");
        bad.allowed_methods.clear();
        assert!(matches!(store.insert(bad), Err(StoreError::Invalid(_))));
        let mut bad = rec("0000000004");
        bad.realm = "example.org".into();
        assert!(matches!(store.insert(bad), Err(StoreError::Invalid(_))));
    }

    #[test]
    fn resolves_sym_test_suci() {
        let mut r = rec("0000000007");
        r.concealment = Concealment { scheme: ProtectionScheme::SymTest, home_key: [3; 32] };
        let store = SubscriberStore::from_records([rec("0000000001"), r.clone()]).unwrap();
        let suci = conceal_supi(&r.supi, &[3; 32], [8; 16], ProtectionScheme::SymTest);
        assert_eq!(store.resolve_suci(&suci).unwrap(), r.supi);
        let mut bad = suci.clone();
        bad.tag[5] ^= 0x80;
        assert_eq!(store.resolve_suci(&bad), Err(EntityError::IdentityIntegrity));
        let foreign =
            conceal_supi(&Supi::new("999", "99", "0000000001").unwrap(), &[3; 32], [8; 16], ProtectionScheme::SymTest);
        assert!(matches!(store.resolve_suci(&foreign), Err(EntityError::SubscriberNotFound(_))));
    }

    #[test]
    fn provisioning_is_deterministic_and_unique() {
        let a = provision(50, 7, "001", "01", ProtectionScheme::Null).unwrap();
        assert_eq!(a.to_json(), provision(50, 7, "001", "01", ProtectionScheme::Null).unwrap().to_json());
        assert_ne!(a.to_json(), provision(50, 8, "001", "01", ProtectionScheme::Null).unwrap().to_json());
        let imsis: BTreeSet<String> = a.records().iter().map(|r| r.supi.imsi()).collect();
        assert_eq!(imsis.len(), 50);
        assert!(imsis.iter().all(|i| i.len() == 15));
        assert!(provision(0, 7, "001", "01", ProtectionScheme::Null).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(SubscriberStore::load(Path::new("/nonexistent/subs.json")), Err(StoreError::Io { .. })));
    }
}
