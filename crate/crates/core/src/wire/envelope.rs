//! Typed messages exchanged between simulated entities.
//!
//! Only the EAP bytes inside a payload are wire-exact; the envelope itself is
//! a simulation value and serializes to JSON for inspection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eap::{attribute_value_range, AttributeKind};
use crate::entities::AuthMethod;
use crate::identity::Supi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Interface {
    #[serde(rename = "N1_UE_AMF")]
    N1UeAmf,
    #[serde(rename = "N12_AMF_AUSF")]
    N12AmfAusf,
    #[serde(rename = "N13_AUSF_UDM")]
    N13AusfUdm,
    #[serde(rename = "N6_DNAAA")]
    N6DnAaa,
}

impl Interface {
    pub const ALL: [Interface; 4] =
        [Interface::N1UeAmf, Interface::N12AmfAusf, Interface::N13AusfUdm, Interface::N6DnAaa];

    pub fn endpoints(self) -> (Entity, Entity) {
        match self {
            Interface::N1UeAmf => (Entity::Ue, Entity::Amf),
            Interface::N12AmfAusf => (Entity::Amf, Entity::Ausf),
            Interface::N13AusfUdm => (Entity::Ausf, Entity::Udm),
            Interface::N6DnAaa => (Entity::AaaProxy, Entity::DnAaa),
        }
    }
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interface::N1UeAmf => "N1_UE_AMF",
            Interface::N12AmfAusf => "N12_AMF_AUSF",
            Interface::N13AusfUdm => "N13_AUSF_UDM",
            Interface::N6DnAaa => "N6_DNAAA",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entity {
    #[serde(rename = "UE")]
    Ue,
    #[serde(rename = "AMF/SEAF")]
    Amf,
    #[serde(rename = "AUSF")]
    Ausf,
    #[serde(rename = "UDM")]
    Udm,
    /// RADIUS proxy that forwards federated requests towards the DN-AAA.
    #[serde(rename = "AAA-PROXY")]
    AaaProxy,
    #[serde(rename = "DN-AAA")]
    DnAaa,
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entity::Ue => "UE",
            Entity::Amf => "AMF/SEAF",
            Entity::Ausf => "AUSF",
            Entity::Udm => "UDM",
            Entity::AaaProxy => "AAA-PROXY",
            Entity::DnAaa => "DN-AAA",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SessionId(pub u64);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Why an authentication attempt ended without keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureReason {
    MacFailure,
    SqnFailure,
    HresMismatch,
    XresMismatch,
    MethodRejected,
    SubscriberNotFound,
    IdentityIntegrity,
    ProtocolViolation,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// Home-side key material the UDM hands to the AUSF with an AV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomeKeys {
    #[serde(with = "crate::serde_hex")]
    pub k_ausf: [u8; 32],
    /// Present for EAP-AKA' (needed to seal and check AT_MAC).
    #[serde(with = "crate::serde_hex::opt_array", default)]
    pub k_aut: Option<[u8; 32]>,
}

/// AV as carried on N13: AUTN in its 16-byte wire form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireAv {
    #[serde(with = "crate::serde_hex")]
    pub rand: [u8; 16],
    #[serde(with = "crate::serde_hex")]
    pub autn: [u8; 16],
    #[serde(with = "crate::serde_hex")]
    pub xres: [u8; 8],
    #[serde(with = "crate::serde_hex")]
    pub ck_prime: [u8; 16],
    #[serde(with = "crate::serde_hex")]
    pub ik_prime: [u8; 16],
}

impl From<&crate::crypto::AuthenticationVector> for WireAv {
    fn from(av: &crate::crypto::AuthenticationVector) -> Self {
        WireAv { rand: av.rand, autn: av.autn.encode(), xres: av.xres, ck_prime: av.ck_prime, ik_prime: av.ik_prime }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Payload {
    IdentityRequest,
    IdentityResponse {
        identity: String,
    },
    /// Identity concatenated with the serving network name.
    AuthRequest {
        identity: String,
        snn: String,
    },
    AuthInfoRequest {
        identity: String,
        snn: String,
    },
    AuthInfoResponse {
        av: WireAv,
        method: AuthMethod,
        keys: HomeKeys,
        supi: Supi,
    },
    /// AV towards the AMF: carries HXRES, never XRES.
    ChallengeForward {
        #[serde(with = "crate::serde_hex")]
        rand: [u8; 16],
        #[serde(with = "crate::serde_hex")]
        autn: [u8; 16],
        #[serde(with = "crate::serde_hex")]
        hxres: [u8; 16],
        #[serde(with = "crate::serde_hex::opt_vec", default)]
        eap: Option<Vec<u8>>,
    },
    /// Authentication request to the UE: RAND, AUTN and, for EAP-AKA', the EAP request.
    AuthChallenge {
        #[serde(with = "crate::serde_hex")]
        rand: [u8; 16],
        #[serde(with = "crate::serde_hex")]
        autn: [u8; 16],
        #[serde(with = "crate::serde_hex::opt_vec", default)]
        eap: Option<Vec<u8>>,
    },
    /// RES travels raw for 5G-AKA and inside AT_RES for EAP-AKA'.
    ChallengeResponse {
        #[serde(with = "crate::serde_hex::opt_array", default)]
        res: Option<[u8; 8]>,
        #[serde(with = "crate::serde_hex::opt_vec", default)]
        eap: Option<Vec<u8>>,
    },
    /// RES with the subscriber identifier (as presented by the UE) and SNN.
    ResVerifyRequest {
        #[serde(with = "crate::serde_hex")]
        res: [u8; 8],
        identity: String,
        snn: String,
        #[serde(with = "crate::serde_hex::opt_vec", default)]
        eap: Option<Vec<u8>>,
    },
    SuccessNotice {
        #[serde(with = "crate::serde_hex")]
        k_seaf: [u8; 32],
        #[serde(with = "crate::serde_hex::opt_vec", default)]
        eap: Option<Vec<u8>>,
    },
    /// Success forwarded to the UE; no key material.
    AuthSuccess {
        #[serde(with = "crate::serde_hex::opt_vec", default)]
        eap: Option<Vec<u8>>,
    },
    FailureNotice {
        reason: FailureReason,
        #[serde(with = "crate::serde_hex::opt_vec", default)]
        eap: Option<Vec<u8>>,
    },
    AccessRequest {
        nai: String,
        station_id: String,
    },
    AccessDecision {
        accept: bool,
        reason: String,
    },
}

impl Payload {
    pub fn name(&self) -> &'static str {
        match self {
            Payload::IdentityRequest => "IdentityRequest",
            Payload::IdentityResponse { .. } => "IdentityResponse",
            Payload::AuthRequest { .. } => "AuthRequest",
            Payload::AuthInfoRequest { .. } => "AuthInfoRequest",
            Payload::AuthInfoResponse { .. } => "AuthInfoResponse",
            Payload::ChallengeForward { .. } => "ChallengeForward",
            Payload::AuthChallenge { .. } => "AuthChallenge",
            Payload::ChallengeResponse { .. } => "ChallengeResponse",
            Payload::ResVerifyRequest { .. } => "ResVerifyRequest",
            Payload::SuccessNotice { .. } => "SuccessNotice",
            Payload::AuthSuccess { .. } => "AuthSuccess",
            Payload::FailureNotice { .. } => "FailureNotice",
            Payload::AccessRequest { .. } => "AccessRequest",
            Payload::AccessDecision { .. } => "AccessDecision",
        }
    }

    pub fn eap(&self) -> Option<&[u8]> {
        match self {
            Payload::ChallengeForward { eap, .. }
            | Payload::AuthChallenge { eap, .. }
            | Payload::ChallengeResponse { eap, .. }
            | Payload::ResVerifyRequest { eap, .. }
            | Payload::SuccessNotice { eap, .. }
            | Payload::AuthSuccess { eap }
            | Payload::FailureNotice { eap, .. } => eap.as_deref(),
            _ => None,
        }
    }

    fn eap_mut(&mut self) -> Option<&mut Vec<u8>> {
        match self {
            Payload::ChallengeForward { eap, .. }
            | Payload::AuthChallenge { eap, .. }
            | Payload::ChallengeResponse { eap, .. }
            | Payload::ResVerifyRequest { eap, .. }
            | Payload::SuccessNotice { eap, .. }
            | Payload::AuthSuccess { eap }
            | Payload::FailureNotice { eap, .. } => eap.as_mut(),
            _ => None,
        }
    }

    /// Bytes of payload data: binary fields at their length, text at its
    /// UTF-8 length, one byte per enum tag. Message-type framing is not counted.
    pub fn wire_len(&self) -> usize {
        let eap = self.eap().map_or(0, <[u8]>::len);
        eap + match self {
            Payload::IdentityRequest => 1,
            Payload::IdentityResponse { identity } => identity.len(),
            Payload::AuthRequest { identity, snn } | Payload::AuthInfoRequest { identity, snn } => {
                identity.len() + snn.len()
            }
            Payload::AuthInfoResponse { keys, supi, .. } => {
                72 + 1 + 32 + keys.k_aut.map_or(0, |_| 32) + supi.imsi().len()
            }
            Payload::ChallengeForward { .. } => 16 + 16 + 16,
            Payload::AuthChallenge { .. } => 16 + 16,
            Payload::ChallengeResponse { res, .. } => res.map_or(0, |_| 8),
            Payload::ResVerifyRequest { identity, snn, .. } => 8 + identity.len() + snn.len(),
            Payload::SuccessNotice { .. } => 32,
            Payload::AuthSuccess { .. } => 0,
            Payload::FailureNotice { .. } => 1,
            Payload::AccessRequest { nai, station_id } => nai.len() + station_id.len(),
            Payload::AccessDecision { reason, .. } => 1 + reason.len(),
        }
    }

    /// Applies `f` to the bytes named by `field`, if this payload has them.
    /// Returns false when the field is absent (the mutation is not applicable).
    pub fn mutate(&mut self, field: &FieldSelector, f: impl FnOnce(&mut [u8])) -> bool {
        let target: Option<&mut [u8]> = match (field, &mut *self) {
            (FieldSelector::Rand, Payload::ChallengeForward { rand, .. })
            | (FieldSelector::Rand, Payload::AuthChallenge { rand, .. }) => Some(rand),
            (FieldSelector::Autn, Payload::ChallengeForward { autn, .. })
            | (FieldSelector::Autn, Payload::AuthChallenge { autn, .. }) => Some(autn),
            (FieldSelector::Hxres, Payload::ChallengeForward { hxres, .. }) => Some(hxres),
            (FieldSelector::Res, Payload::ChallengeResponse { res: Some(res), .. })
            | (FieldSelector::Res, Payload::ResVerifyRequest { res, .. }) => Some(res),
            (FieldSelector::KSeaf, Payload::SuccessNotice { k_seaf, .. }) => Some(k_seaf),
            (FieldSelector::Eap, p) => p.eap_mut().map(|v| v.as_mut_slice()),
            (FieldSelector::EapAttribute(kind), p) => p.eap_mut().and_then(|v| {
                let range = attribute_value_range(v, *kind)?;
                Some(&mut v[range])
            }),
            _ => None,
        };
        match target {
            Some(bytes) => {
                f(bytes);
                true
            }
            None => false,
        }
    }

    fn legal(&self, from: Entity, to: Entity) -> bool {
        use Entity::*;
        use Payload::*;
        match (from, to) {
            (Amf, Ue) => {
                matches!(self, IdentityRequest | AuthChallenge { .. } | AuthSuccess { .. } | FailureNotice { .. })
            }
            (Ue, Amf) => matches!(self, IdentityResponse { .. } | ChallengeResponse { .. } | FailureNotice { .. }),
            (Amf, Ausf) => matches!(self, AuthRequest { .. } | ResVerifyRequest { .. }),
            (Ausf, Amf) => matches!(self, ChallengeForward { .. } | SuccessNotice { .. } | FailureNotice { .. }),
            (Ausf, Udm) => matches!(self, AuthInfoRequest { .. }),
            (Udm, Ausf) => matches!(self, AuthInfoResponse { .. } | FailureNotice { .. }),
            (AaaProxy, DnAaa) => matches!(self, AccessRequest { .. }),
            (DnAaa, AaaProxy) => matches!(self, AccessDecision { .. }),
            _ => false,
        }
    }
}

/// Names a byte field inside a payload for adversarial mutation.
///
/// Text form: `rand`, `autn`, `hxres`, `res`, `k_seaf`, `eap`, or
/// `eap.AT_<NAME>` for the value of one EAP attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSelector {
    Rand,
    Autn,
    Hxres,
    Res,
    KSeaf,
    Eap,
    EapAttribute(AttributeKind),
}

impl fmt::Display for FieldSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSelector::Rand => f.write_str("rand"),
            FieldSelector::Autn => f.write_str("autn"),
            FieldSelector::Hxres => f.write_str("hxres"),
            FieldSelector::Res => f.write_str("res"),
            FieldSelector::KSeaf => f.write_str("k_seaf"),
            FieldSelector::Eap => f.write_str("eap"),
            FieldSelector::EapAttribute(k) => write!(f, "eap.{}", k.name()),
        }
    }
}

impl FromStr for FieldSelector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "rand" => FieldSelector::Rand,
            "autn" => FieldSelector::Autn,
            "hxres" => FieldSelector::Hxres,
            "res" => FieldSelector::Res,
            "k_seaf" => FieldSelector::KSeaf,
            "eap" => FieldSelector::Eap,
            other => {
                let kind = other
                    .strip_prefix("eap.")
                    .and_then(AttributeKind::from_name)
                    .ok_or_else(|| format!("unknown field selector {other:?}"))?;
                FieldSelector::EapAttribute(kind)
            }
        })
    }
}

impl Serialize for FieldSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldSelector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvelopeError {
    #[error("{from} -> {to} is not an endpoint pair of {interface}")]
    WrongEndpoints { interface: Interface, from: Entity, to: Entity },
    #[error("{payload} may not travel {from} -> {to}")]
    IllegalPayload { payload: &'static str, from: Entity, to: Entity },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub session_id: SessionId,
    pub interface: Interface,
    pub from: Entity,
    pub to: Entity,
    pub payload: Payload,
}

impl Envelope {
    pub fn new(
        session_id: SessionId,
        interface: Interface,
        from: Entity,
        to: Entity,
        payload: Payload,
    ) -> Result<Self, EnvelopeError> {
        let (a, b) = interface.endpoints();
        if !((from, to) == (a, b) || (from, to) == (b, a)) {
            return Err(EnvelopeError::WrongEndpoints { interface, from, to });
        }
        if !payload.legal(from, to) {
            return Err(EnvelopeError::IllegalPayload { payload: payload.name(), from, to });
        }
        Ok(Envelope { session_id, interface, from, to, payload })
    }

    /// Builds an envelope on the interface joining `from` and `to`.
    pub fn between(session_id: SessionId, from: Entity, to: Entity, payload: Payload) -> Result<Self, EnvelopeError> {
        let interface = Interface::ALL
            .into_iter()
            .find(|i| {
                let (a, b) = i.endpoints();
                (a, b) == (from, to) || (b, a) == (from, to)
            })
            .ok_or(EnvelopeError::IllegalPayload { payload: payload.name(), from, to })?;
        Envelope::new(session_id, interface, from, to, payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: SessionId = SessionId(1);

    #[test]
    fn legality_enforced() {
        assert!(Envelope::new(S, Interface::N1UeAmf, Entity::Amf, Entity::Ue, Payload::IdentityRequest).is_ok());
        assert!(matches!(
            Envelope::new(S, Interface::N12AmfAusf, Entity::Amf, Entity::Ue, Payload::IdentityRequest),
            Err(EnvelopeError::WrongEndpoints { .. })
        ));
        let hx = Payload::ChallengeForward { rand: [0; 16], autn: [0; 16], hxres: [0; 16], eap: None };
        assert!(matches!(
            Envelope::new(S, Interface::N1UeAmf, Entity::Amf, Entity::Ue, hx.clone()),
            Err(EnvelopeError::IllegalPayload { .. })
        ));
        assert!(Envelope::between(S, Entity::Ausf, Entity::Amf, hx).is_ok());
        let seaf = Payload::SuccessNotice { k_seaf: [1; 32], eap: None };
        assert!(Envelope::between(S, Entity::Amf, Entity::Ue, seaf).is_err());
    }

    #[test]
    fn selectors_parse_and_print() {
        for s in ["rand", "autn", "hxres", "res", "k_seaf", "eap", "eap.AT_RES", "eap.AT_MAC", "eap.AT_99"] {
            assert_eq!(s.parse::<FieldSelector>().unwrap().to_string(), s);
        }
        assert!("eap.AT_BOGUS".parse::<FieldSelector>().is_err());
        assert!("nonce".parse::<FieldSelector>().is_err());
    }

    #[test]
    fn mutate_reports_applicability() {
        let mut p = Payload::AuthChallenge { rand: [0; 16], autn: [0; 16], eap: None };
        assert!(p.mutate(&FieldSelector::Autn, |b| b[0] ^= 1));
        assert!(!p.mutate(&FieldSelector::Eap, |b| b[0] ^= 1));
        assert!(!p.mutate(&FieldSelector::Hxres, |b| b[0] ^= 1));
        match p {
            Payload::AuthChallenge { autn, .. } => assert_eq!(autn[0], 1),
            _ => unreachable!(),
        }
    }

    #[test]
    fn json_shape() {
        let env = Envelope::between(
            S,
            Entity::Ue,
            Entity::Amf,
            Payload::ChallengeResponse { res: Some([0xab; 8]), eap: None },
        )
        .unwrap();
        let json = serde_json::to_string(&env).unwrap();
        assert!(json.contains("\"interface\":\"N1_UE_AMF\""));
        assert!(json.contains("\"res\":\"abababababababab\""));
        let back: Envelope = serde_json::from_str(&json).unwrap();
        assert_eq!(back, env);
        assert_eq!(FailureReason::HresMismatch.to_string(), "HRES_MISMATCH");
    }
}
