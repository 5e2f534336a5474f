use super::{envelope, violation, Decision, EntityError, Reply};
use crate::crypto::{ct_eq, hashed_response};
use crate::identity::ServingNetworkContext;
use crate::wire::{decode_eap, AttributeKind, EapCode, Entity, Envelope, FailureReason, Payload, SessionId, Subtype};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmfState {
    Idle,
    AwaitIdentity,
    AwaitAv,
    AwaitUeResponse,
    AwaitAusfVerdict,
    Done,
    Failed(FailureReason),
}

/// Serving-network side: AMF with the co-located SEAF.
#[derive(Debug, Clone)]
pub struct AmfSession {
    session: SessionId,
    sn: ServingNetworkContext,
    state: AmfState,
    identity: Option<String>,
    rand: Option<[u8; 16]>,
    hxres: Option<[u8; 16]>,
    k_seaf: Option<[u8; 32]>,
}

impl AmfSession {
    pub fn new(session: SessionId, sn: ServingNetworkContext) -> Self {
        AmfSession { session, sn, state: AmfState::Idle, identity: None, rand: None, hxres: None, k_seaf: None }
    }

    pub fn state(&self) -> AmfState {
        self.state
    }

    /// K_SEAF delivered by the AUSF; kept here, never forwarded to the UE.
    pub fn k_seaf(&self) -> Option<&[u8; 32]> {
        self.k_seaf.as_ref()
    }

    /// Opens the run by asking the UE for its identity.
    pub fn start(&mut self) -> Result<Envelope, EntityError> {
        if self.state != AmfState::Idle {
            return Err(EntityError::ProtocolViolation {
                entity: Entity::Amf,
                state: format!("{:?}", self.state),
                message: "start",
            });
        }
        self.state = AmfState::AwaitIdentity;
        Ok(self.to_ue(Payload::IdentityRequest))
    }

    pub fn abort(&mut self, reason: FailureReason) {
        if !matches!(self.state, AmfState::Failed(_)) {
            self.state = AmfState::Failed(reason);
        }
    }

    fn to_ue(&self, payload: Payload) -> Envelope {
        envelope(self.session, Entity::Amf, Entity::Ue, payload)
    }

    fn to_ausf(&self, payload: Payload) -> Envelope {
        envelope(self.session, Entity::Amf, Entity::Ausf, payload)
    }

    pub fn handle(&mut self, env: &Envelope) -> Result<Reply, EntityError> {
        use AmfState::*;
        match (&env.payload, self.state) {
            (Payload::IdentityResponse { identity }, AwaitIdentity) => {
                if identity.is_empty() {
                    return Err(EntityError::Validation("empty identity".into()));
                }
                self.identity = Some(identity.clone());
                self.state = AwaitAv;
                Ok(Reply::send(
                    self.to_ausf(Payload::AuthRequest { identity: identity.clone(), snn: self.sn.snn.clone() }),
                ))
            }
            (Payload::ChallengeForward { rand, autn, hxres, eap }, AwaitAv) => {
                self.rand = Some(*rand);
                self.hxres = Some(*hxres);
                self.state = AwaitUeResponse;
                Ok(Reply::send(self.to_ue(Payload::AuthChallenge { rand: *rand, autn: *autn, eap: eap.clone() })))
            }
            (Payload::ChallengeResponse { res, eap }, AwaitUeResponse) => self.on_auth_response(*res, eap.as_deref()),
            (Payload::SuccessNotice { k_seaf, eap }, AwaitAusfVerdict) => {
                self.k_seaf = Some(*k_seaf);
                self.state = Done;
                Ok(Reply::send(self.to_ue(Payload::AuthSuccess { eap: eap.clone() })))
            }
            (Payload::FailureNotice { reason, eap }, AwaitAv | AwaitAusfVerdict) if env.from == Entity::Ausf => {
                self.state = Failed(*reason);
                Ok(Reply::send(self.to_ue(Payload::FailureNotice { reason: *reason, eap: eap.clone() })))
            }
            (Payload::FailureNotice { reason, .. }, s) if env.from == Entity::Ue && !matches!(s, Failed(_)) => {
                self.state = Failed(*reason);
                Ok(Reply::none())
            }
            _ => Err(violation(Entity::Amf, self.state, env)),
        }
    }

    fn on_auth_response(&mut self, res: Option<[u8; 8]>, eap: Option<&[u8]>) -> Result<Reply, EntityError> {
        let res: [u8; 8] = match (res, eap) {
            (_, Some(raw)) => {
                let pkt = decode_eap(raw).map_err(|e| EntityError::Validation(e.to_string()))?;
                if pkt.code != EapCode::Response || pkt.subtype() != Some(Subtype::Challenge) {
                    return Err(EntityError::Validation("expected an EAP-AKA' challenge response".into()));
                }
                let attr = pkt
                    .attribute(AttributeKind::Res)
                    .ok_or_else(|| EntityError::Validation("missing AT_RES".into()))?;
                attr.value
                    .as_slice()
                    .try_into()
                    .map_err(|_| EntityError::Validation(format!("AT_RES is {} bytes", attr.value.len())))?
            }
            (Some(res), None) => res,
            (None, None) => return Err(EntityError::Validation("response carries no RES".into())),
        };
        let (rand, hxres) = (self.rand.expect("set with challenge"), self.hxres.expect("set with challenge"));
        if !ct_eq(&hashed_response(&rand, &res), &hxres) {
            // Stops here: the home network is never asked about a RES that already failed.
            self.state = AmfState::Failed(FailureReason::HresMismatch);
            return Ok(Reply::send(
                self.to_ue(Payload::FailureNotice { reason: FailureReason::HresMismatch, eap: None }),
            ));
        }
        self.state = AmfState::AwaitAusfVerdict;
        Ok(Reply::send(self.to_ausf(Payload::ResVerifyRequest {
            res,
            identity: self.identity.clone().unwrap_or_default(),
            snn: self.sn.snn.clone(),
            eap: eap.map(<[u8]>::to_vec),
        }))
        .with(Decision::HresVerified))
    }
}
