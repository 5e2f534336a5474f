//! Key hierarchy for EAP-AKA' and 5G-AKA.
//!
//! The USIM challenge functions are an HMAC-SHA-256 surrogate with one-byte
//! domain separation (0x01..0x05) standing in for MILENAGE. Everything above
//! that layer (CK'/IK' binding, PRF', the MK split, K_ausf, K_seaf and the
//! hashed responses) follows the usual EAP-AKA' / 5G structure, with SHA-256
//! as the only hash.
//!
//! All functions here are pure. The SQN counter is advanced only by the
//! caller that owns the subscriber record.

use hmac::{Hmac, KeyInit, Mac};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

type HmacSha256 = Hmac<Sha256>;

/// Largest representable sequence number (48 bits).
pub const SQN_MAX: u64 = (1 << 48) - 1;
/// Longest PRF' output: 255 HMAC-SHA-256 blocks.
pub const PRF_MAX_OUT: usize = 255 * 32;
/// Length of the EAP-AKA' master key.
pub const MK_LEN: usize = 208;
/// EAP method type carried at the front of the session identifier.
pub const EAP_AKA_PRIME_TYPE: u8 = 0x32;

const LABEL_CK_IK_PRIME: u8 = 0x20;
const LABEL_K_AUSF_5G: u8 = 0x6a;
const LABEL_K_SEAF: u8 = 0x6c;
const MK_LABEL: &[u8] = b"EAP-AKA'";
const AV_RAND_LABEL: &[u8] = b"AV-RAND";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("sequence number {0:#x} exceeds 48 bits")]
    SqnOutOfRange(u64),
    #[error("sequence number space exhausted")]
    SqnOverflow,
    #[error("requested {requested} bytes of PRF' output, limit is {PRF_MAX_OUT}")]
    OutputTooLong { requested: usize },
    #[error("AUTN MAC-A does not verify")]
    MacMismatch,
}

/// HMAC-SHA-256 over the concatenation of `parts`.
pub fn hmac_sha256(key: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    for p in parts {
        mac.update(p);
    }
    mac.finalize().into_bytes().into()
}

pub fn sha256(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

/// Constant-time equality for secrets of equal public length.
pub fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

fn truncate<const N: usize>(block: &[u8; 32]) -> [u8; N] {
    block[..N].try_into().expect("N <= 32")
}

fn xor<const N: usize>(a: &[u8; N], b: &[u8; N]) -> [u8; N] {
    std::array::from_fn(|i| a[i] ^ b[i])
}

/// 48-bit authentication sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Sqn(u64);

impl Sqn {
    pub fn new(value: u64) -> Result<Self, CryptoError> {
        if value > SQN_MAX {
            return Err(CryptoError::SqnOutOfRange(value));
        }
        Ok(Sqn(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn to_bytes(self) -> [u8; 6] {
        let b = self.0.to_be_bytes();
        b[2..].try_into().unwrap()
    }

    pub fn from_bytes(b: [u8; 6]) -> Self {
        let mut full = [0u8; 8];
        full[2..].copy_from_slice(&b);
        Sqn(u64::from_be_bytes(full))
    }

    pub fn next(self) -> Result<Sqn, CryptoError> {
        if self.0 == SQN_MAX {
            return Err(CryptoError::SqnOverflow);
        }
        Ok(Sqn(self.0 + 1))
    }
}

impl TryFrom<u64> for Sqn {
    type Error = CryptoError;
    fn try_from(v: u64) -> Result<Self, Self::Error> {
        Sqn::new(v)
    }
}

impl From<Sqn> for u64 {
    fn from(s: Sqn) -> u64 {
        s.0
    }
}

/// Long-term subscriber credential shared by the USIM and the UDM.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootCredential {
    #[serde(with = "crate::serde_hex")]
    pub k: [u8; 16],
    pub sqn: Sqn,
    #[serde(with = "crate::serde_hex")]
    pub amf_field: [u8; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsimOutput {
    pub mac_a: [u8; 8],
    pub xres: [u8; 8],
    pub ck: [u8; 16],
    pub ik: [u8; 16],
    pub ak: [u8; 6],
}

/// Challenge functions run inside the USIM and at the UDM.
///
/// Only the HMAC surrogate ships; a MILENAGE implementation would slot in here.
pub trait AkaFunctions {
    fn compute(&self, k: &[u8; 16], rand: &[u8; 16], sqn: Sqn, amf_field: &[u8; 2]) -> UsimOutput;
}

/// HMAC-SHA-256 keyed by K with a one-byte function selector.
#[derive(Debug, Clone, Copy, Default)]
pub struct HmacSurrogate;

impl AkaFunctions for HmacSurrogate {
    fn compute(&self, k: &[u8; 16], rand: &[u8; 16], sqn: Sqn, amf_field: &[u8; 2]) -> UsimOutput {
        let f = |sel: u8, extra: &[&[u8]]| {
            let mut parts: Vec<&[u8]> = vec![std::slice::from_ref(&sel), rand];
            parts.extend_from_slice(extra);
            hmac_sha256(k, &parts)
        };
        UsimOutput {
            mac_a: truncate(&f(0x01, &[&sqn.to_bytes(), amf_field])),
            xres: truncate(&f(0x02, &[])),
            ck: truncate(&f(0x03, &[])),
            ik: truncate(&f(0x04, &[])),
            ak: truncate(&f(0x05, &[])),
        }
    }
}

pub fn usim_functions(cred: &RootCredential, rand: &[u8; 16]) -> UsimOutput {
    HmacSurrogate.compute(&cred.k, rand, cred.sqn, &cred.amf_field)
}

/// AUTN = (SQN xor AK) || AMF || MAC-A.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Autn {
    pub sqn_xor_ak: [u8; 6],
    pub amf_field: [u8; 2],
    pub mac_a: [u8; 8],
}

impl Autn {
    pub const LEN: usize = 16;

    pub fn encode(&self) -> [u8; 16] {
        let mut out = [0u8; 16];
        out[..6].copy_from_slice(&self.sqn_xor_ak);
        out[6..8].copy_from_slice(&self.amf_field);
        out[8..].copy_from_slice(&self.mac_a);
        out
    }

    pub fn decode(raw: &[u8; 16]) -> Self {
        Autn {
            sqn_xor_ak: raw[..6].try_into().unwrap(),
            amf_field: raw[6..8].try_into().unwrap(),
            mac_a: raw[8..].try_into().unwrap(),
        }
    }
}

pub fn build_autn(sqn: Sqn, ak: &[u8; 6], amf_field: &[u8; 2], mac_a: &[u8; 8]) -> Autn {
    Autn { sqn_xor_ak: xor(&sqn.to_bytes(), ak), amf_field: *amf_field, mac_a: *mac_a }
}

pub fn recover_sqn(autn: &Autn, ak: &[u8; 6]) -> Sqn {
    Sqn::from_bytes(xor(&autn.sqn_xor_ak, ak))
}

/// UE-side AUTN check: recovers SQN with AK and recomputes MAC-A.
///
/// Returns the USIM outputs under the recovered SQN. Freshness of the SQN is
/// left to the caller.
pub fn verify_autn(k: &[u8; 16], rand: &[u8; 16], autn: &Autn) -> Result<(Sqn, UsimOutput), CryptoError> {
    // AK does not depend on SQN, so a probe with SQN 0 yields it.
    let ak = HmacSurrogate.compute(k, rand, Sqn(0), &autn.amf_field).ak;
    let sqn = recover_sqn(autn, &ak);
    let out = HmacSurrogate.compute(k, rand, sqn, &autn.amf_field);
    if !ct_eq(&out.mac_a, &autn.mac_a) {
        return Err(CryptoError::MacMismatch);
    }
    Ok((sqn, out))
}

/// Binds CK/IK to the serving network name.
pub fn derive_ck_ik_prime(ck: &[u8; 16], ik: &[u8; 16], snn: &str, sqn_xor_ak: &[u8; 6]) -> ([u8; 16], [u8; 16]) {
    debug_assert!(!snn.is_empty());
    let mut key = [0u8; 32];
    key[..16].copy_from_slice(ck);
    key[16..].copy_from_slice(ik);
    let out = hmac_sha256(&key, &[&[LABEL_CK_IK_PRIME], snn.as_bytes(), sqn_xor_ak]);
    (out[..16].try_into().unwrap(), out[16..].try_into().unwrap())
}

/// Counter-mode expansion: T_i = HMAC(key, T_{i-1} || label || i), T_0 empty.
pub fn prf_prime(key: &[u8], label: &[u8], out_len: usize) -> Result<Vec<u8>, CryptoError> {
    if out_len > PRF_MAX_OUT {
        return Err(CryptoError::OutputTooLong { requested: out_len });
    }
    let mut out = Vec::with_capacity(out_len + 32);
    let mut prev: Vec<u8> = Vec::new();
    let mut counter = 1u8;
    while out.len() < out_len {
        let block = hmac_sha256(key, &[&prev, label, &[counter]]);
        out.extend_from_slice(&block);
        prev = block.to_vec();
        counter = counter.wrapping_add(1);
    }
    out.truncate(out_len);
    Ok(out)
}

/// EAP-AKA' session keys. `k_seaf` is filled in once the serving network is known.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub mk: [u8; MK_LEN],
    pub k_encr: [u8; 16],
    pub k_aut: [u8; 32],
    pub k_re: [u8; 32],
    pub msk: [u8; 64],
    pub emsk: [u8; 64],
    pub k_ausf: [u8; 32],
    pub k_seaf: Option<[u8; 32]>,
    pub session_id: [u8; 33],
}

impl std::fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyMaterial")
            .field("k_ausf", &format_args!("{}..", hex::encode(&self.k_ausf[..4])))
            .field("session_id", &hex::encode(self.session_id))
            .finish_non_exhaustive()
    }
}

pub fn derive_master_keys(
    ck_prime: &[u8; 16],
    ik_prime: &[u8; 16],
    identity: &str,
    rand: &[u8; 16],
    autn: &Autn,
) -> KeyMaterial {
    let mut key = [0u8; 32];
    key[..16].copy_from_slice(ik_prime);
    key[16..].copy_from_slice(ck_prime);
    let mut label = MK_LABEL.to_vec();
    label.extend_from_slice(identity.as_bytes());
    let mk: [u8; MK_LEN] = prf_prime(&key, &label, MK_LEN).expect("MK_LEN within PRF' limit").try_into().unwrap();

    let mut session_id = [0u8; 33];
    session_id[0] = EAP_AKA_PRIME_TYPE;
    session_id[1..17].copy_from_slice(rand);
    session_id[17..].copy_from_slice(&autn.encode());

    let emsk: [u8; 64] = mk[144..208].try_into().unwrap();
    KeyMaterial {
        k_encr: mk[0..16].try_into().unwrap(),
        k_aut: mk[16..48].try_into().unwrap(),
        k_re: mk[48..80].try_into().unwrap(),
        msk: mk[80..144].try_into().unwrap(),
        k_ausf: emsk[..32].try_into().unwrap(),
        emsk,
        k_seaf: None,
        session_id,
        mk,
    }
}

pub fn derive_k_seaf(k_ausf: &[u8; 32], snn: &str) -> [u8; 32] {
    hmac_sha256(k_ausf, &[&[LABEL_K_SEAF], snn.as_bytes()])
}

/// K_ausf for the 5G-AKA flow, keyed by CK'||IK' from the shared AV.
pub fn derive_k_ausf_5g(ck_prime: &[u8; 16], ik_prime: &[u8; 16], snn: &str, sqn_xor_ak: &[u8; 6]) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..16].copy_from_slice(ck_prime);
    key[16..].copy_from_slice(ik_prime);
    hmac_sha256(&key, &[&[LABEL_K_AUSF_5G], snn.as_bytes(), sqn_xor_ak])
}

/// HXRES / HRES: first 16 bytes of SHA-256(RAND || RES).
pub fn hashed_response(rand: &[u8; 16], res: &[u8; 8]) -> [u8; 16] {
    truncate(&sha256(&[rand, res]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthenticationVector {
    pub rand: [u8; 16],
    pub autn: Autn,
    pub xres: [u8; 8],
    pub ck_prime: [u8; 16],
    pub ik_prime: [u8; 16],
}

/// Deterministic RAND for a given seed and SQN.
pub fn av_rand(rng_seed: &[u8], sqn: Sqn) -> [u8; 16] {
    truncate(&hmac_sha256(rng_seed, &[AV_RAND_LABEL, &sqn.to_bytes()]))
}

/// Builds one AV at the credential's current SQN and returns the SQN the
/// caller must persist for the next challenge.
pub fn generate_av(
    cred: &RootCredential,
    snn: &str,
    rng_seed: &[u8],
) -> Result<(AuthenticationVector, Sqn), CryptoError> {
    generate_av_with(&HmacSurrogate, cred, snn, rng_seed)
}

pub fn generate_av_with<F: AkaFunctions>(
    funcs: &F,
    cred: &RootCredential,
    snn: &str,
    rng_seed: &[u8],
) -> Result<(AuthenticationVector, Sqn), CryptoError> {
    let next = cred.sqn.next()?;
    let rand = av_rand(rng_seed, cred.sqn);
    let out = funcs.compute(&cred.k, &rand, cred.sqn, &cred.amf_field);
    let autn = build_autn(cred.sqn, &out.ak, &cred.amf_field, &out.mac_a);
    let (ck_prime, ik_prime) = derive_ck_ik_prime(&out.ck, &out.ik, snn, &autn.sqn_xor_ak);
    Ok((AuthenticationVector { rand, autn, xres: out.xres, ck_prime, ik_prime }, next))
}
