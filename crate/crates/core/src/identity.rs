//! Subscriber identifiers: SUPI/IMSI, SUCI concealment, NAI and serving network names.
//!
//! NAI usernames follow the 3GPP prefix-digit convention: `0` EAP-AKA,
//! `1` EAP-SIM, `6` EAP-AKA'. Realms are always rendered with a zero-padded
//! three-digit MNC (`mnc031`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{ct_eq, hmac_sha256};

const REALM_SUFFIX: &str = ".3gppnetwork.org";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("{field} must be {expected} decimal digits, got {value:?}")]
    InvalidDigits { field: &'static str, expected: &'static str, value: String },
    #[error("IMSI must be 15 digits, got {0}")]
    ImsiLength(usize),
    #[error("no NAI prefix digit defined for method hint {0}")]
    NoPrefix(MethodHint),
    #[error("SUCI tag does not verify")]
    Integrity,
    #[error("unsupported SUCI protection scheme {0}")]
    UnsupportedScheme(String),
    #[error("malformed SUCI: {0}")]
    SuciFormat(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NaiError {
    #[error("missing '@' separator")]
    MissingSeparator,
    #[error("realm {0:?} does not match wlan.mncNNN.mccNNN.3gppnetwork.org")]
    RealmGrammar(String),
    #[error("username {0:?} is not all digits")]
    NonDigitUsername(String),
    #[error("IMSI in username has {0} digits, expected 15")]
    ImsiLength(usize),
    #[error("IMSI {imsi} does not belong to realm {realm}")]
    RealmMismatch { imsi: String, realm: String },
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn check_digits(
    field: &'static str,
    value: &str,
    range: std::ops::RangeInclusive<usize>,
    expected: &'static str,
) -> Result<(), IdentityError> {
    if all_digits(value) && range.contains(&value.len()) {
        Ok(())
    } else {
        Err(IdentityError::InvalidDigits { field, expected, value: value.to_string() })
    }
}

/// Subscription permanent identifier in IMSI form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SupiRepr", into = "SupiRepr")]
pub struct Supi {
    mcc: String,
    mnc: String,
    msin: String,
}

#[derive(Serialize, Deserialize)]
struct SupiRepr {
    mcc: String,
    mnc: String,
    msin: String,
}

impl TryFrom<SupiRepr> for Supi {
    type Error = IdentityError;
    fn try_from(r: SupiRepr) -> Result<Self, Self::Error> {
        Supi::new(&r.mcc, &r.mnc, &r.msin)
    }
}

impl From<Supi> for SupiRepr {
    fn from(s: Supi) -> Self {
        SupiRepr { mcc: s.mcc, mnc: s.mnc, msin: s.msin }
    }
}

impl Supi {
    pub fn new(mcc: &str, mnc: &str, msin: &str) -> Result<Self, IdentityError> {
        check_digits("mcc", mcc, 3..=3, "3")?;
        check_digits("mnc", mnc, 2..=3, "2-3")?;
        check_digits("msin", msin, 9..=10, "9-10")?;
        let total = mcc.len() + mnc.len() + msin.len();
        if total != 15 {
            return Err(IdentityError::ImsiLength(total));
        }
        Ok(Supi { mcc: mcc.into(), mnc: mnc.into(), msin: msin.into() })
    }

    /// Splits a 15-digit IMSI given the MNC length (2 or 3).
    pub fn from_imsi(imsi: &str, mnc_len: usize) -> Result<Self, IdentityError> {
        if !all_digits(imsi) || imsi.len() != 15 {
            return Err(IdentityError::ImsiLength(imsi.len()));
        }
        if !(2..=3).contains(&mnc_len) {
            return Err(IdentityError::InvalidDigits {
                field: "mnc",
                expected: "2-3",
                value: imsi[3..3 + mnc_len.min(12)].to_string(),
            });
        }
        Supi::new(&imsi[..3], &imsi[3..3 + mnc_len], &imsi[3 + mnc_len..])
    }

    pub fn mcc(&self) -> &str {
        &self.mcc
    }

    pub fn mnc(&self) -> &str {
        &self.mnc
    }

    pub fn msin(&self) -> &str {
        &self.msin
    }

    pub fn imsi(&self) -> String {
        format!("{}{}{}", self.mcc, self.mnc, self.msin)
    }

    pub fn mnc_padded(&self) -> String {
        format!("{:0>3}", self.mnc)
    }

    /// `wlan.mncNNN.mccNNN.3gppnetwork.org` for this subscriber's home network.
    pub fn realm(&self) -> String {
        format!("wlan.mnc{}.mcc{}{REALM_SUFFIX}", self.mnc_padded(), self.mcc)
    }
}

impl fmt::Display for Supi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "imsi-{}", self.imsi())
    }
}

/// EAP method implied by the NAI prefix digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MethodHint {
    EapAka,
    EapSim,
    EapAkaPrime,
    Unknown,
}

impl MethodHint {
    pub fn prefix_digit(self) -> Option<char> {
        match self {
            MethodHint::EapAka => Some('0'),
            MethodHint::EapSim => Some('1'),
            MethodHint::EapAkaPrime => Some('6'),
            MethodHint::Unknown => None,
        }
    }

    pub fn from_prefix(c: char) -> MethodHint {
        match c {
            '0' => MethodHint::EapAka,
            '1' => MethodHint::EapSim,
            '6' => MethodHint::EapAkaPrime,
            _ => MethodHint::Unknown,
        }
    }
}

impl fmt::Display for MethodHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodHint::EapAka => "EAP-AKA",
            MethodHint::EapSim => "EAP-SIM",
            MethodHint::EapAkaPrime => "EAP-AKA'",
            MethodHint::Unknown => "unknown",
        })
    }
}

/// `username@realm` with the username carrying prefix digit and IMSI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nai {
    pub username: String,
    pub realm: String,
    pub method_hint: MethodHint,
    pub supi: Supi,
}

impl fmt::Display for Nai {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.username, self.realm)
    }
}

pub fn build_nai(supi: &Supi, method_hint: MethodHint) -> Result<Nai, IdentityError> {
    let prefix = method_hint.prefix_digit().ok_or(IdentityError::NoPrefix(method_hint))?;
    Ok(Nai { username: format!("{prefix}{}", supi.imsi()), realm: supi.realm(), method_hint, supi: supi.clone() })
}

/// Extracts the (MNC, MCC) digit groups of a 3GPP WLAN realm.
pub fn parse_realm(realm: &str) -> Result<(String, String), NaiError> {
    let bad = || NaiError::RealmGrammar(realm.to_string());
    let rest = realm.strip_prefix("wlan.mnc").ok_or_else(bad)?;
    let rest = rest.strip_suffix(REALM_SUFFIX).ok_or_else(bad)?;
    let (mnc, mcc) = rest.split_once(".mcc").ok_or_else(bad)?;
    if mnc.len() != 3 || mcc.len() != 3 || !all_digits(mnc) || !all_digits(mcc) {
        return Err(bad());
    }
    Ok((mnc.to_string(), mcc.to_string()))
}

pub fn parse_nai(raw: &str) -> Result<Nai, NaiError> {
    let (username, realm) = raw.rsplit_once('@').ok_or(NaiError::MissingSeparator)?;
    let (mnc3, mcc) = parse_realm(realm)?;
    if !all_digits(username) {
        return Err(NaiError::NonDigitUsername(username.to_string()));
    }
    let mut chars = username.chars();
    let method_hint = MethodHint::from_prefix(chars.next().expect("non-empty"));
    let imsi = chars.as_str();
    if imsi.len() != 15 {
        return Err(NaiError::ImsiLength(imsi.len()));
    }
    let mismatch = || NaiError::RealmMismatch { imsi: imsi.to_string(), realm: realm.to_string() };
    if imsi[..3] != mcc {
        return Err(mismatch());
    }
    // The realm always pads the MNC to three digits; a two-digit MNC shows
    // up as a leading zero that is absent from the IMSI.
    let mnc_len = if imsi[3..6] == mnc3 {
        3
    } else if mnc3.starts_with('0') && imsi[3..5] == mnc3[1..] {
        2
    } else {
        return Err(mismatch());
    };
    let supi = Supi::from_imsi(imsi, mnc_len).map_err(|_| mismatch())?;
    Ok(Nai { username: username.to_string(), realm: realm.to_string(), method_hint, supi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProtectionScheme {
    Null,
    SymTest,
}

impl ProtectionScheme {
    /// Scheme identifier used in the textual SUCI (12 is an operator-specific value).
    pub fn id(self) -> u8 {
        match self {
            ProtectionScheme::Null => 0,
            ProtectionScheme::SymTest => 12,
        }
    }
}

/// Subscription concealed identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suci {
    pub scheme: ProtectionScheme,
    pub mcc: String,
    pub mnc: String,
    pub nonce: [u8; 16],
    pub ciphertext: Vec<u8>,
    pub tag: [u8; 16],
}

impl fmt::Display for Suci {
    /// `suci-0-<mcc>-<mnc>-0000-<scheme>-0-<output>`; the output is the MSIN for
    /// the null scheme and hex(nonce || ciphertext || tag) otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "suci-0-{}-{}-0000-{}-0-", self.mcc, self.mnc, self.scheme.id())?;
        match self.scheme {
            ProtectionScheme::Null => f.write_str(&String::from_utf8_lossy(&self.ciphertext)),
            ProtectionScheme::SymTest => {
                write!(f, "{}{}{}", hex::encode(self.nonce), hex::encode(&self.ciphertext), hex::encode(self.tag))
            }
        }
    }
}

impl FromStr for Suci {
    type Err = IdentityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| IdentityError::SuciFormat(format!("{why}: {s:?}"));
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 8 || parts[0] != "suci" || parts[1] != "0" || parts[4] != "0000" || parts[6] != "0" {
            return Err(bad("expected suci-0-<mcc>-<mnc>-0000-<scheme>-0-<output>"));
        }
        let (mcc, mnc) = (parts[2], parts[3]);
        check_digits("mcc", mcc, 3..=3, "3")?;
        check_digits("mnc", mnc, 2..=3, "2-3")?;
        let output = parts[7];
        match parts[5] {
            "0" => {
                check_digits("msin", output, 9..=10, "9-10")?;
                Ok(Suci {
                    scheme: ProtectionScheme::Null,
                    mcc: mcc.into(),
                    mnc: mnc.into(),
                    nonce: [0; 16],
                    ciphertext: output.as_bytes().to_vec(),
                    tag: [0; 16],
                })
            }
            "12" => {
                let raw = hex::decode(output).map_err(|_| bad("scheme output is not hex"))?;
                if raw.len() <= 32 {
                    return Err(bad("scheme output too short"));
                }
                let ct_end = raw.len() - 16;
                Ok(Suci {
                    scheme: ProtectionScheme::SymTest,
                    mcc: mcc.into(),
                    mnc: mnc.into(),
                    nonce: raw[..16].try_into().unwrap(),
                    ciphertext: raw[16..ct_end].to_vec(),
                    tag: raw[ct_end..].try_into().unwrap(),
                })
            }
            other => Err(IdentityError::UnsupportedScheme(other.to_string())),
        }
    }
}

fn suci_keystream(home_key: &[u8; 32], nonce: &[u8; 16], len: usize) -> Vec<u8> {
    let mut out = hmac_sha256(home_key, &[b"suci-ks", nonce]).to_vec();
    let mut counter = 1u8;
    while out.len() < len {
        out.extend_from_slice(&hmac_sha256(home_key, &[b"suci-ks", nonce, &[counter]]));
        counter = counter.wrapping_add(1);
    }
    out.truncate(len);
    out
}

fn suci_tag(home_key: &[u8; 32], nonce: &[u8; 16], ciphertext: &[u8]) -> [u8; 16] {
    hmac_sha256(home_key, &[b"suci-tag", nonce, ciphertext])[..16].try_into().unwrap()
}

pub fn conceal_supi(supi: &Supi, home_key: &[u8; 32], nonce: [u8; 16], scheme: ProtectionScheme) -> Suci {
    let msin = supi.msin().as_bytes();
    match scheme {
        ProtectionScheme::Null => Suci {
            scheme,
            mcc: supi.mcc.clone(),
            mnc: supi.mnc.clone(),
            nonce: [0; 16],
            ciphertext: msin.to_vec(),
            tag: [0; 16],
        },
        ProtectionScheme::SymTest => {
            let ks = suci_keystream(home_key, &nonce, msin.len());
            let ciphertext: Vec<u8> = msin.iter().zip(ks).map(|(m, k)| m ^ k).collect();
            let tag = suci_tag(home_key, &nonce, &ciphertext);
            Suci { scheme, mcc: supi.mcc.clone(), mnc: supi.mnc.clone(), nonce, ciphertext, tag }
        }
    }
}

pub fn deconceal_suci(suci: &Suci, home_key: &[u8; 32]) -> Result<Supi, IdentityError> {
    let msin = match suci.scheme {
        ProtectionScheme::Null => suci.ciphertext.clone(),
        ProtectionScheme::SymTest => {
            if !ct_eq(&suci_tag(home_key, &suci.nonce, &suci.ciphertext), &suci.tag) {
                return Err(IdentityError::Integrity);
            }
            let ks = suci_keystream(home_key, &suci.nonce, suci.ciphertext.len());
            suci.ciphertext.iter().zip(ks).map(|(c, k)| c ^ k).collect()
        }
    };
    let msin = String::from_utf8(msin).map_err(|e| IdentityError::InvalidDigits {
        field: "msin",
        expected: "9-10",
        value: String::from_utf8_lossy(e.as_bytes()).into_owned(),
    })?;
    Supi::new(&suci.mcc, &suci.mnc, &msin)
}

/// Serving network name and identifier bound into the key derivations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ServingNetworkContext {
    pub snn: String,
    pub snid: String,
}

pub fn derive_snn(mcc: &str, mnc: &str) -> Result<ServingNetworkContext, IdentityError> {
    check_digits("mcc", mcc, 1..=3, "1-3")?;
    check_digits("mnc", mnc, 1..=3, "1-3")?;
    let snid = format!("mnc{mnc:0>3}.mcc{mcc:0>3}");
    Ok(ServingNetworkContext { snn: format!("5G:{snid}{REALM_SUFFIX}"), snid })
}
