//! EAP packets carrying EAP-AKA' attributes.
//!
//! Layout:
//!
//! ```text
//! code(1) identifier(1) length(2, BE, whole packet)
//! [type=0x32(1) subtype(1) reserved(2)=0 attributes...]   Request/Response only
//! attribute: kind(1) units(1) value_len(2, BE) value zero-pad   units = total/4
//! ```
//!
//! The two bytes after the attribute header hold the value length in bytes
//! so that every attribute round-trips exactly. Padding is minimal and must
//! be zero; anything else is rejected on decode.

use std::ops::Range;

use thiserror::Error;

use crate::crypto::hmac_sha256;

pub const EAP_TYPE_AKA_PRIME: u8 = 0x32;
pub const MAC_LEN: usize = 16;
/// Largest value that fits a 255-unit attribute.
pub const MAX_ATTRIBUTE_VALUE: usize = 255 * 4 - 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EapError {
    #[error("packet shorter than the 4-byte EAP header")]
    TruncatedHeader,
    #[error("length field says {declared} bytes, buffer holds {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("{0} bytes follow the declared packet length")]
    TrailingBytes(usize),
    #[error("unknown EAP code {0}")]
    UnknownCode(u8),
    #[error("Success/Failure must be exactly 4 bytes, length field says {0}")]
    BodyOnSuccessOrFailure(usize),
    #[error("request/response without method header")]
    TruncatedMethodHeader,
    #[error("EAP type {0:#04x} is not EAP-AKA'")]
    UnsupportedType(u8),
    #[error("reserved bytes must be zero")]
    NonZeroReserved,
    #[error("attribute at offset {0} runs past the packet")]
    TruncatedAttribute(usize),
    #[error("attribute at offset {0} has a bad length")]
    BadAttributeLength(usize),
    #[error("attribute at offset {0} has non-canonical padding")]
    BadPadding(usize),
    #[error("AT_MAC value must be 16 bytes, got {0}")]
    MacLength(usize),
    #[error("{kind:?} value of {len} bytes exceeds the attribute limit")]
    AttributeTooLong { kind: AttributeKind, len: usize },
    #[error("packet of {0} bytes exceeds the 16-bit length field")]
    PacketTooLong(usize),
    #[error("{0:?} packet must carry a method body")]
    MissingBody(EapCode),
    #[error("{0:?} packet must not carry a method body")]
    UnexpectedBody(EapCode),
    #[error("packet has no AT_MAC attribute")]
    MissingMac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EapCode {
    Request = 1,
    Response = 2,
    Success = 3,
    Failure = 4,
}

impl EapCode {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            1 => EapCode::Request,
            2 => EapCode::Response,
            3 => EapCode::Success,
            4 => EapCode::Failure,
            _ => return None,
        })
    }

    fn has_body(self) -> bool {
        matches!(self, EapCode::Request | EapCode::Response)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subtype {
    Challenge,
    Identity,
    Other(u8),
}

impl Subtype {
    pub fn from_u8(v: u8) -> Self {
        match v {
            1 => Subtype::Challenge,
            5 => Subtype::Identity,
            o => Subtype::Other(o),
        }
    }

    pub fn to_u8(self) -> u8 {
        match self {
            Subtype::Challenge => 1,
            Subtype::Identity => 5,
            Subtype::Other(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributeKind {
    Rand,
    Autn,
    Res,
    Mac,
    Identity,
    KdfInput,
    Kdf,
    /// Preserved on decode; entity state machines reject it.
    Unknown(u8),
}

impl AttributeKind {
    pub const KNOWN: [AttributeKind; 7] = [
        AttributeKind::Rand,
        AttributeKind::Autn,
        AttributeKind::Res,
        AttributeKind::Mac,
        AttributeKind::Identity,
        AttributeKind::KdfInput,
        AttributeKind::Kdf,
    ];

    pub fn from_u8(v: u8) -> Self {
        match v {
            1 => AttributeKind::Rand,
            2 => AttributeKind::Autn,
            3 => AttributeKind::Res,
            11 => AttributeKind::Mac,
            14 => AttributeKind::Identity,
            23 => AttributeKind::KdfInput,
            24 => AttributeKind::Kdf,
            o => AttributeKind::Unknown(o),
        }
    }

    pub fn to_u8(self) -> u8 {
        match self {
            AttributeKind::Rand => 1,
            AttributeKind::Autn => 2,
            AttributeKind::Res => 3,
            AttributeKind::Mac => 11,
            AttributeKind::Identity => 14,
            AttributeKind::KdfInput => 23,
            AttributeKind::Kdf => 24,
            AttributeKind::Unknown(o) => o,
        }
    }

    pub fn name(self) -> String {
        match self {
            AttributeKind::Rand => "AT_RAND".into(),
            AttributeKind::Autn => "AT_AUTN".into(),
            AttributeKind::Res => "AT_RES".into(),
            AttributeKind::Mac => "AT_MAC".into(),
            AttributeKind::Identity => "AT_IDENTITY".into(),
            AttributeKind::KdfInput => "AT_KDF_INPUT".into(),
            AttributeKind::Kdf => "AT_KDF".into(),
            AttributeKind::Unknown(o) => format!("AT_{o}"),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::KNOWN.into_iter().find(|k| k.name() == name).or_else(|| {
            let n: u8 = name.strip_prefix("AT_")?.parse().ok()?;
            Some(AttributeKind::from_u8(n))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub kind: AttributeKind,
    pub value: Vec<u8>,
}

impl Attribute {
    pub fn new(kind: AttributeKind, value: impl Into<Vec<u8>>) -> Self {
        Attribute { kind, value: value.into() }
    }

    fn encoded_len(&self) -> usize {
        (4 + self.value.len()).div_ceil(4) * 4
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AkaBody {
    pub subtype: Subtype,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EapPacket {
    pub code: EapCode,
    pub identifier: u8,
    pub body: Option<AkaBody>,
}

impl EapPacket {
    pub fn success(identifier: u8) -> Self {
        EapPacket { code: EapCode::Success, identifier, body: None }
    }

    pub fn failure(identifier: u8) -> Self {
        EapPacket { code: EapCode::Failure, identifier, body: None }
    }

    pub fn request(identifier: u8, subtype: Subtype, attributes: Vec<Attribute>) -> Self {
        EapPacket { code: EapCode::Request, identifier, body: Some(AkaBody { subtype, attributes }) }
    }

    pub fn response(identifier: u8, subtype: Subtype, attributes: Vec<Attribute>) -> Self {
        EapPacket { code: EapCode::Response, identifier, body: Some(AkaBody { subtype, attributes }) }
    }

    pub fn attributes(&self) -> &[Attribute] {
        self.body.as_ref().map(|b| b.attributes.as_slice()).unwrap_or(&[])
    }

    /// First attribute of the given kind.
    pub fn attribute(&self, kind: AttributeKind) -> Option<&Attribute> {
        self.attributes().iter().find(|a| a.kind == kind)
    }

    pub fn subtype(&self) -> Option<Subtype> {
        self.body.as_ref().map(|b| b.subtype)
    }
}

pub fn encode_eap(p: &EapPacket) -> Result<Vec<u8>, EapError> {
    let mut out = vec![p.code as u8, p.identifier, 0, 0];
    match (&p.body, p.code.has_body()) {
        (None, false) => {}
        (Some(_), false) => return Err(EapError::UnexpectedBody(p.code)),
        (None, true) => return Err(EapError::MissingBody(p.code)),
        (Some(body), true) => {
            out.extend_from_slice(&[EAP_TYPE_AKA_PRIME, body.subtype.to_u8(), 0, 0]);
            for attr in &body.attributes {
                if attr.kind == AttributeKind::Mac && attr.value.len() != MAC_LEN {
                    return Err(EapError::MacLength(attr.value.len()));
                }
                if attr.value.len() > MAX_ATTRIBUTE_VALUE {
                    return Err(EapError::AttributeTooLong { kind: attr.kind, len: attr.value.len() });
                }
                let total = attr.encoded_len();
                out.push(attr.kind.to_u8());
                out.push((total / 4) as u8);
                out.extend_from_slice(&(attr.value.len() as u16).to_be_bytes());
                out.extend_from_slice(&attr.value);
                out.resize(out.len() + total - 4 - attr.value.len(), 0);
            }
        }
    }
    let len = u16::try_from(out.len()).map_err(|_| EapError::PacketTooLong(out.len()))?;
    out[2..4].copy_from_slice(&len.to_be_bytes());
    Ok(out)
}

/// Walks the attribute area, yielding (offset, kind, value range) per attribute.
fn walk_attributes(
    raw: &[u8],
    start: usize,
) -> impl Iterator<Item = Result<(AttributeKind, Range<usize>), EapError>> + '_ {
    let mut off = start;
    std::iter::from_fn(move || {
        if off >= raw.len() {
            return None;
        }
        let at = off;
        let item = (|| {
            if raw.len() - at < 4 {
                return Err(EapError::TruncatedAttribute(at));
            }
            let units = raw[at + 1] as usize;
            if units == 0 {
                return Err(EapError::BadAttributeLength(at));
            }
            let total = units * 4;
            if at + total > raw.len() {
                return Err(EapError::TruncatedAttribute(at));
            }
            let value_len = u16::from_be_bytes([raw[at + 2], raw[at + 3]]) as usize;
            if 4 + value_len > total {
                return Err(EapError::BadAttributeLength(at));
            }
            let pad = &raw[at + 4 + value_len..at + total];
            if pad.len() >= 4 || pad.iter().any(|&b| b != 0) {
                return Err(EapError::BadPadding(at));
            }
            Ok((AttributeKind::from_u8(raw[at]), at + 4..at + 4 + value_len, total))
        })();
        match item {
            Ok((kind, range, total)) => {
                off = at + total;
                Some(Ok((kind, range)))
            }
            Err(e) => {
                off = raw.len();
                Some(Err(e))
            }
        }
    })
}

pub fn decode_eap(raw: &[u8]) -> Result<EapPacket, EapError> {
    if raw.len() < 4 {
        return Err(EapError::TruncatedHeader);
    }
    let declared = u16::from_be_bytes([raw[2], raw[3]]) as usize;
    if declared > raw.len() || declared < 4 {
        return Err(EapError::LengthMismatch { declared, actual: raw.len() });
    }
    if declared < raw.len() {
        return Err(EapError::TrailingBytes(raw.len() - declared));
    }
    let code = EapCode::from_u8(raw[0]).ok_or(EapError::UnknownCode(raw[0]))?;
    let identifier = raw[1];
    if !code.has_body() {
        if declared != 4 {
            return Err(EapError::BodyOnSuccessOrFailure(declared));
        }
        return Ok(EapPacket { code, identifier, body: None });
    }
    if raw.len() < 8 {
        return Err(EapError::TruncatedMethodHeader);
    }
    if raw[4] != EAP_TYPE_AKA_PRIME {
        return Err(EapError::UnsupportedType(raw[4]));
    }
    if raw[6] != 0 || raw[7] != 0 {
        return Err(EapError::NonZeroReserved);
    }
    let mut attributes = Vec::new();
    for item in walk_attributes(raw, 8) {
        let (kind, range) = item?;
        if kind == AttributeKind::Mac && range.len() != MAC_LEN {
            return Err(EapError::MacLength(range.len()));
        }
        attributes.push(Attribute { kind, value: raw[range].to_vec() });
    }
    Ok(EapPacket { code, identifier, body: Some(AkaBody { subtype: Subtype::from_u8(raw[5]), attributes }) })
}

/// Byte range of the first `kind` attribute's value inside an encoded packet.
pub fn attribute_value_range(raw: &[u8], kind: AttributeKind) -> Option<Range<usize>> {
    if raw.len() < 8 || !EapCode::from_u8(raw[0]).is_some_and(EapCode::has_body) {
        return None;
    }
    walk_attributes(raw, 8).map_while(Result::ok).find(|(k, _)| *k == kind).map(|(_, r)| r)
}

fn mac_over(p: &EapPacket, k_aut: &[u8; 32]) -> Result<[u8; MAC_LEN], EapError> {
    let mut zeroed = p.clone();
    let body = zeroed.body.as_mut().ok_or(EapError::MissingMac)?;
    let mac = body.attributes.iter_mut().find(|a| a.kind == AttributeKind::Mac).ok_or(EapError::MissingMac)?;
    mac.value = vec![0; MAC_LEN];
    let bytes = encode_eap(&zeroed)?;
    Ok(hmac_sha256(k_aut, &[&bytes])[..MAC_LEN].try_into().unwrap())
}

/// Fills AT_MAC with HMAC-SHA-256(k_aut, packet with AT_MAC zeroed), truncated to 16 bytes.
pub fn seal_mac(p: &EapPacket, k_aut: &[u8; 32]) -> Result<EapPacket, EapError> {
    let mac = mac_over(p, k_aut)?;
    let mut sealed = p.clone();
    let attr = sealed
        .body
        .as_mut()
        .and_then(|b| b.attributes.iter_mut().find(|a| a.kind == AttributeKind::Mac))
        .ok_or(EapError::MissingMac)?;
    attr.value = mac.to_vec();
    Ok(sealed)
}

pub fn verify_mac(p: &EapPacket, k_aut: &[u8; 32]) -> bool {
    match (mac_over(p, k_aut), p.attribute(AttributeKind::Mac)) {
        (Ok(expected), Some(attr)) => crate::crypto::ct_eq(&expected, &attr.value),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn challenge_zero() -> EapPacket {
        EapPacket::request(
            1,
            Subtype::Challenge,
            vec![
                Attribute::new(AttributeKind::Rand, [0u8; 16]),
                Attribute::new(AttributeKind::Autn, [0u8; 16]),
                Attribute::new(AttributeKind::Kdf, [0u8, 1]),
                Attribute::new(AttributeKind::KdfInput, *b"5G:mnc001.mcc001.3gppnetwork.org"),
                Attribute::new(AttributeKind::Mac, [0u8; 16]),
            ],
        )
    }

    #[test]
    fn success_layout() {
        assert_eq!(encode_eap(&EapPacket::success(7)).unwrap(), [3, 7, 0, 4]);
        assert_eq!(decode_eap(&[3, 7, 0, 4]).unwrap(), EapPacket::success(7));
        assert_eq!(encode_eap(&EapPacket::failure(9)).unwrap(), [4, 9, 0, 4]);
    }

    #[test]
    fn rand_only_challenge_is_28_bytes() {
        let p = EapPacket::request(0, Subtype::Challenge, vec![Attribute::new(AttributeKind::Rand, [0u8; 16])]);
        let raw = encode_eap(&p).unwrap();
        assert_eq!(raw.len(), 28);
        assert_eq!(&raw[2..4], &[0x00, 0x1c]);
        assert_eq!(raw[9], 5);
    }

    #[test]
    fn decode_errors() {
        assert_eq!(decode_eap(&[3, 7, 0]), Err(EapError::TruncatedHeader));
        assert_eq!(decode_eap(&[3, 7, 0, 9]), Err(EapError::LengthMismatch { declared: 9, actual: 4 }));
        assert_eq!(decode_eap(&[3, 7, 0, 4, 0]), Err(EapError::TrailingBytes(1)));
        assert_eq!(decode_eap(&[9, 7, 0, 4]), Err(EapError::UnknownCode(9)));
        assert_eq!(decode_eap(&[3, 7, 0, 8, 0, 0, 0, 0]), Err(EapError::BodyOnSuccessOrFailure(8)));
        assert_eq!(decode_eap(&[1, 7, 0, 6, 0x32, 1]), Err(EapError::TruncatedMethodHeader));
        assert_eq!(decode_eap(&[1, 7, 0, 8, 0x17, 1, 0, 0]), Err(EapError::UnsupportedType(0x17)));
        assert_eq!(decode_eap(&[1, 7, 0, 8, 0x32, 1, 0, 1]), Err(EapError::NonZeroReserved));
    }

    #[test]
    fn non_canonical_padding_rejected() {
        let p = EapPacket::request(0, Subtype::Challenge, vec![Attribute::new(AttributeKind::Res, [1u8; 8])]);
        let mut raw = encode_eap(&p).unwrap();
        assert_eq!(raw.len(), 8 + 12);
        // declare two extra zero bytes of value padding by growing the unit count
        raw[9] = 4;
        raw.extend_from_slice(&[0; 4]);
        let len = raw.len() as u16;
        raw[2..4].copy_from_slice(&len.to_be_bytes());
        assert_eq!(decode_eap(&raw), Err(EapError::BadPadding(8)));

        let p = EapPacket::request(0, Subtype::Challenge, vec![Attribute::new(AttributeKind::Identity, *b"abc")]);
        let mut raw = encode_eap(&p).unwrap();
        *raw.last_mut().unwrap() = 0xff;
        assert_eq!(decode_eap(&raw), Err(EapError::BadPadding(8)));
    }

    #[test]
    fn attribute_length_errors() {
        let mut raw = encode_eap(&challenge_zero()).unwrap();
        raw[9] = 0;
        assert_eq!(decode_eap(&raw), Err(EapError::BadAttributeLength(8)));
        let mut raw = encode_eap(&challenge_zero()).unwrap();
        raw[9] = 60;
        assert_eq!(decode_eap(&raw), Err(EapError::TruncatedAttribute(8)));
    }

    #[test]
    fn unknown_attributes_survive() {
        let p =
            EapPacket::response(3, Subtype::Other(9), vec![Attribute::new(AttributeKind::Unknown(200), vec![1, 2, 3])]);
        assert_eq!(decode_eap(&encode_eap(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn encode_guards() {
        let p = EapPacket::request(0, Subtype::Challenge, vec![Attribute::new(AttributeKind::Mac, [0u8; 8])]);
        assert_eq!(encode_eap(&p), Err(EapError::MacLength(8)));
        let p = EapPacket::request(
            0,
            Subtype::Challenge,
            vec![Attribute::new(AttributeKind::Identity, vec![0; MAX_ATTRIBUTE_VALUE + 1])],
        );
        assert!(matches!(encode_eap(&p), Err(EapError::AttributeTooLong { .. })));
        let p = EapPacket::request(
            0,
            Subtype::Challenge,
            vec![Attribute::new(AttributeKind::Identity, vec![0; MAX_ATTRIBUTE_VALUE])],
        );
        assert_eq!(encode_eap(&p).unwrap().len(), 8 + 1020);
        let p = EapPacket {
            code: EapCode::Success,
            identifier: 0,
            body: Some(AkaBody { subtype: Subtype::Challenge, attributes: vec![] }),
        };
        assert_eq!(encode_eap(&p), Err(EapError::UnexpectedBody(EapCode::Success)));
    }

    #[test]
    fn zero_key_mac_matches_oracle() {
        let sealed = seal_mac(&challenge_zero(), &[0; 32]).unwrap();
        assert_eq!(
            hex::encode(&sealed.attribute(AttributeKind::Mac).unwrap().value),
            "fc682ca8942ea6c6b0bd88400cd43f6a"
        );
        let golden = include_str!("../../tests/golden/challenge_zero_unsealed.hex").trim();
        assert_eq!(hex::encode(encode_eap(&challenge_zero()).unwrap()), golden);
        assert!(verify_mac(&sealed, &[0; 32]));
        assert!(!verify_mac(&sealed, &[1; 32]));
    }

    #[test]
    fn seal_requires_mac() {
        let p = EapPacket::request(0, Subtype::Challenge, vec![]);
        assert_eq!(seal_mac(&p, &[0; 32]), Err(EapError::MissingMac));
        assert!(!verify_mac(&p, &[0; 32]));
        assert_eq!(seal_mac(&EapPacket::success(1), &[0; 32]), Err(EapError::MissingMac));
    }

    #[test]
    fn mac_detects_bit_flips() {
        let k = [0x42; 32];
        let sealed = seal_mac(&challenge_zero(), &k).unwrap();
        let raw = encode_eap(&sealed).unwrap();
        let mac_range = attribute_value_range(&raw, AttributeKind::Mac).unwrap();
        let mut flips = 0;
        for i in 0..raw.len() * 8 {
            let byte = (i * 13) % raw.len();
            let mut t = raw.clone();
            t[byte] ^= 1 << (i % 8);
            if let Ok(p) = decode_eap(&t) {
                if mac_range.contains(&byte) || p != sealed {
                    assert!(!verify_mac(&p, &k), "flip at byte {byte}");
                    flips += 1;
                }
            }
            if flips >= 64 {
                break;
            }
        }
        assert!(flips >= 64);
    }

    #[test]
    fn value_range_lookup() {
        let raw = encode_eap(&challenge_zero()).unwrap();
        assert_eq!(attribute_value_range(&raw, AttributeKind::Rand), Some(12..28));
        assert_eq!(attribute_value_range(&raw, AttributeKind::Res), None);
        assert_eq!(attribute_value_range(&[3, 1, 0, 4], AttributeKind::Rand), None);
    }

    #[test]
    fn kind_names() {
        for k in AttributeKind::KNOWN {
            assert_eq!(AttributeKind::from_name(&k.name()), Some(k));
            assert_eq!(AttributeKind::from_u8(k.to_u8()), k);
        }
        assert_eq!(AttributeKind::from_name("AT_200"), Some(AttributeKind::Unknown(200)));
    }
}
