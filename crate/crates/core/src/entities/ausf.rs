use super::{envelope, violation, AuthMethod, Decision, EntityError, Reply};
use crate::crypto::{ct_eq, derive_k_seaf, hashed_response};
use crate::identity::Supi;
use crate::wire::{
    decode_eap, encode_eap, seal_mac, verify_mac, Attribute, AttributeKind, EapCode, EapPacket, Entity, Envelope,
    FailureReason, Payload, SessionId, Subtype,
};

/// Identifier of the single EAP request each session issues.
const EAP_IDENTIFIER: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AusfState {
    Idle,
    AwaitAv,
    AwaitRes,
    Done,
    Failed(FailureReason),
}

#[derive(Debug, Clone)]
pub struct AusfSession {
    session: SessionId,
    state: AusfState,
    identity: Option<String>,
    snn: Option<String>,
    method: Option<AuthMethod>,
    xres: Option<[u8; 8]>,
    k_ausf: Option<[u8; 32]>,
    k_aut: Option<[u8; 32]>,
    supi: Option<Supi>,
}

impl AusfSession {
    pub fn new(session: SessionId) -> Self {
        AusfSession {
            session,
            state: AusfState::Idle,
            identity: None,
            snn: None,
            method: None,
            xres: None,
            k_ausf: None,
            k_aut: None,
            supi: None,
        }
    }

    pub fn state(&self) -> AusfState {
        self.state
    }

    pub fn k_ausf(&self) -> Option<&[u8; 32]> {
        self.k_ausf.as_ref()
    }

    pub fn supi(&self) -> Option<&Supi> {
        self.supi.as_ref()
    }

    pub fn method(&self) -> Option<AuthMethod> {
        self.method
    }

    pub fn abort(&mut self, reason: FailureReason) {
        if !matches!(self.state, AusfState::Failed(_)) {
            self.state = AusfState::Failed(reason);
        }
    }

    fn to_amf(&self, payload: Payload) -> Envelope {
        envelope(self.session, Entity::Ausf, Entity::Amf, payload)
    }

    fn is_eap(&self) -> bool {
        self.method == Some(AuthMethod::EapAkaPrime)
    }

    pub fn handle(&mut self, env: &Envelope) -> Result<Reply, EntityError> {
        use AusfState::*;
        match (&env.payload, self.state) {
            (Payload::AuthRequest { identity, snn }, Idle) => {
                self.identity = Some(identity.clone());
                self.snn = Some(snn.clone());
                self.state = AwaitAv;
                Ok(Reply::send(envelope(
                    self.session,
                    Entity::Ausf,
                    Entity::Udm,
                    Payload::AuthInfoRequest { identity: identity.clone(), snn: snn.clone() },
                )))
            }
            (Payload::AuthInfoResponse { av, method, keys, supi }, AwaitAv) => {
                self.method = Some(*method);
                self.xres = Some(av.xres);
                self.k_ausf = Some(keys.k_ausf);
                self.k_aut = keys.k_aut;
                self.supi = Some(supi.clone());
                let hxres = hashed_response(&av.rand, &av.xres);
                let eap = if self.is_eap() {
                    let k_aut =
                        keys.k_aut.ok_or_else(|| EntityError::Validation("EAP-AKA' vector without K_aut".into()))?;
                    let snn = self.snn.clone().unwrap_or_default();
                    let req = EapPacket::request(
                        EAP_IDENTIFIER,
                        Subtype::Challenge,
                        vec![
                            Attribute::new(AttributeKind::Rand, av.rand),
                            Attribute::new(AttributeKind::Autn, av.autn),
                            Attribute::new(AttributeKind::Kdf, [0u8, 1]),
                            Attribute::new(AttributeKind::KdfInput, snn.into_bytes()),
                            Attribute::new(AttributeKind::Mac, [0u8; 16]),
                        ],
                    );
                    let sealed = seal_mac(&req, &k_aut)
                        .and_then(|p| encode_eap(&p))
                        .map_err(|e| EntityError::Validation(e.to_string()))?;
                    Some(sealed)
                } else {
                    None
                };
                self.state = AwaitRes;
                Ok(Reply::send(self.to_amf(Payload::ChallengeForward { rand: av.rand, autn: av.autn, hxres, eap }))
                    .with(Decision::XresStored))
            }
            (Payload::FailureNotice { reason, .. }, AwaitAv) if env.from == Entity::Udm => {
                self.state = Failed(*reason);
                Ok(Reply::send(self.to_amf(Payload::FailureNotice { reason: *reason, eap: None })))
            }
            (Payload::ResVerifyRequest { res, identity, snn, eap }, AwaitRes) => {
                self.verify_res(res, identity, snn, eap.as_deref())
            }
            _ => Err(violation(Entity::Ausf, self.state, env)),
        }
    }

    fn reject(&mut self, reason: FailureReason) -> Result<Reply, EntityError> {
        self.state = AusfState::Failed(reason);
        let eap = if self.is_eap() {
            Some(encode_eap(&EapPacket::failure(EAP_IDENTIFIER)).expect("bodiless packet"))
        } else {
            None
        };
        Ok(Reply::send(self.to_amf(Payload::FailureNotice { reason, eap })))
    }

    fn verify_res(
        &mut self,
        res: &[u8; 8],
        identity: &str,
        snn: &str,
        eap: Option<&[u8]>,
    ) -> Result<Reply, EntityError> {
        if Some(identity) != self.identity.as_deref() || Some(snn) != self.snn.as_deref() {
            return Err(EntityError::Validation("identity or SNN differs from the original request".into()));
        }
        if !ct_eq(res, &self.xres.expect("stored with AV")) {
            return self.reject(FailureReason::XresMismatch);
        }
        match (self.is_eap(), eap) {
            (true, Some(raw)) => {
                let pkt = decode_eap(raw).map_err(|e| EntityError::Validation(e.to_string()))?;
                if pkt.code != EapCode::Response || pkt.identifier != EAP_IDENTIFIER {
                    return Err(EntityError::Validation("EAP response does not answer the challenge".into()));
                }
                if !verify_mac(&pkt, &self.k_aut.expect("stored with AV")) {
                    return self.reject(FailureReason::MacFailure);
                }
                if !pkt.attribute(AttributeKind::Res).is_some_and(|a| a.value == res) {
                    return self.reject(FailureReason::XresMismatch);
                }
            }
            (false, None) => {}
            _ => return Err(EntityError::Validation("response encoding does not match the method".into())),
        }
        let k_seaf = derive_k_seaf(&self.k_ausf.expect("stored with AV"), snn);
        let eap = self.is_eap().then(|| encode_eap(&EapPacket::success(EAP_IDENTIFIER)).expect("bodiless packet"));
        self.state = AusfState::Done;
        Ok(Reply::send(self.to_amf(Payload::SuccessNotice { k_seaf, eap })).with(Decision::XresVerified))
    }
}
