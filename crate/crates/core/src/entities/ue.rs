use super::{envelope, violation, AuthMethod, EntityError, Reply, SubscriberRecord};
use crate::crypto::{
    derive_ck_ik_prime, derive_k_ausf_5g, derive_k_seaf, derive_master_keys, verify_autn, Autn, KeyMaterial, Sqn,
};
use crate::identity::{build_nai, conceal_supi, MethodHint, ProtectionScheme, ServingNetworkContext};
use crate::wire::{
    decode_eap, encode_eap, seal_mac, verify_mac, Attribute, AttributeKind, EapCode, EapPacket, Entity, Envelope,
    FailureReason, Payload, SessionId, Subtype,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UeState {
    Idle,
    AwaitChallenge,
    Authenticated,
    Failed(FailureReason),
}

/// Keys the UE holds after a successful run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKeys {
    pub method: AuthMethod,
    pub k_ausf: [u8; 32],
    pub k_seaf: [u8; 32],
    /// Full EAP-AKA' hierarchy; absent for 5G-AKA.
    pub eap: Option<KeyMaterial>,
}

#[derive(Debug, Clone)]
pub struct UeSession {
    session: SessionId,
    usim: SubscriberRecord,
    sn: ServingNetworkContext,
    suci_nonce: [u8; 16],
    state: UeState,
    identity: Option<String>,
    highest_sqn: Option<Sqn>,
    pending: Option<SessionKeys>,
    keys: Option<SessionKeys>,
}

impl UeSession {
    /// `highest_sqn` is the largest SQN the USIM has already accepted, if any.
    pub fn new(
        session: SessionId,
        usim: SubscriberRecord,
        sn: ServingNetworkContext,
        highest_sqn: Option<Sqn>,
        suci_nonce: [u8; 16],
    ) -> Self {
        UeSession {
            session,
            usim,
            sn,
            suci_nonce,
            state: UeState::Idle,
            identity: None,
            highest_sqn,
            pending: None,
            keys: None,
        }
    }

    pub fn state(&self) -> UeState {
        self.state
    }

    pub fn keys(&self) -> Option<&SessionKeys> {
        self.keys.as_ref()
    }

    pub fn identity(&self) -> Option<&str> {
        self.identity.as_deref()
    }

    pub fn handle(&mut self, env: &Envelope) -> Result<Reply, EntityError> {
        match &env.payload {
            Payload::IdentityRequest => self.on_identity_request(env),
            Payload::AuthChallenge { rand, autn, eap } => self.on_challenge(env, rand, autn, eap.as_deref()),
            Payload::AuthSuccess { eap } => self.on_success(env, eap.as_deref()),
            Payload::FailureNotice { reason, .. } => {
                if !matches!(self.state, UeState::Failed(_)) {
                    self.fail(*reason);
                }
                Ok(Reply::none())
            }
            _ => Err(violation(Entity::Ue, self.state, env)),
        }
    }

    /// Marks the session failed after an error the harness could not recover from.
    pub fn abort(&mut self, reason: FailureReason) {
        if !matches!(self.state, UeState::Failed(_)) {
            self.fail(reason);
        }
    }

    fn fail(&mut self, reason: FailureReason) -> EntityError {
        self.state = UeState::Failed(reason);
        self.pending = None;
        self.keys = None;
        EntityError::AuthReject(reason)
    }

    fn on_identity_request(&mut self, env: &Envelope) -> Result<Reply, EntityError> {
        if self.state != UeState::Idle {
            return Err(violation(Entity::Ue, self.state, env));
        }
        let identity = match self.usim.concealment.scheme {
            ProtectionScheme::Null => build_nai(&self.usim.supi, MethodHint::EapAkaPrime)
                .map_err(|e| EntityError::Validation(e.to_string()))?
                .to_string(),
            scheme => {
                conceal_supi(&self.usim.supi, &self.usim.concealment.home_key, self.suci_nonce, scheme).to_string()
            }
        };
        self.identity = Some(identity.clone());
        self.state = UeState::AwaitChallenge;
        Ok(Reply::send(envelope(self.session, Entity::Ue, Entity::Amf, Payload::IdentityResponse { identity })))
    }

    fn on_challenge(
        &mut self,
        env: &Envelope,
        rand: &[u8; 16],
        autn_raw: &[u8; 16],
        eap: Option<&[u8]>,
    ) -> Result<Reply, EntityError> {
        // A challenge after success is a re-authentication attempt.
        if !matches!(self.state, UeState::AwaitChallenge | UeState::Authenticated) {
            return Err(violation(Entity::Ue, self.state, env));
        }
        let autn = Autn::decode(autn_raw);
        let (sqn, out) =
            verify_autn(&self.usim.credential.k, rand, &autn).map_err(|_| self.fail(FailureReason::MacFailure))?;
        if self.highest_sqn.is_some_and(|h| sqn <= h) {
            return Err(self.fail(FailureReason::SqnFailure));
        }
        self.highest_sqn = Some(sqn);

        let snn = self.sn.snn.clone();
        let (ck_prime, ik_prime) = derive_ck_ik_prime(&out.ck, &out.ik, &snn, &autn.sqn_xor_ak);

        let (keys, payload) = match eap {
            Some(raw) => {
                let req = decode_eap(raw).map_err(|e| EntityError::Validation(e.to_string()))?;
                if req.code != EapCode::Request || req.subtype() != Some(Subtype::Challenge) {
                    return Err(EntityError::Validation("expected an EAP-AKA' challenge request".into()));
                }
                if let Some(a) = req.attributes().iter().find(|a| !AttributeKind::KNOWN.contains(&a.kind)) {
                    return Err(EntityError::Validation(format!("unknown attribute {}", a.kind.name())));
                }
                let kdf = req.attribute(AttributeKind::Kdf).map(|a| a.value.as_slice());
                if kdf != Some(&[0, 1][..]) {
                    return Err(EntityError::Validation("unsupported AT_KDF".into()));
                }
                let kdf_input = req.attribute(AttributeKind::KdfInput).map(|a| a.value.as_slice());
                if kdf_input != Some(snn.as_bytes()) {
                    return Err(EntityError::Validation("AT_KDF_INPUT does not name this network".into()));
                }
                let identity = self.identity.clone().unwrap_or_default();
                let mut km = derive_master_keys(&ck_prime, &ik_prime, &identity, rand, &autn);
                let bound = |k: AttributeKind, v: &[u8]| req.attribute(k).is_some_and(|a| a.value == v);
                if !verify_mac(&req, &km.k_aut)
                    || !bound(AttributeKind::Rand, rand)
                    || !bound(AttributeKind::Autn, autn_raw)
                {
                    return Err(self.fail(FailureReason::MacFailure));
                }
                let k_seaf = derive_k_seaf(&km.k_ausf, &snn);
                km.k_seaf = Some(k_seaf);
                let resp = EapPacket::response(
                    req.identifier,
                    Subtype::Challenge,
                    vec![Attribute::new(AttributeKind::Res, out.xres), Attribute::new(AttributeKind::Mac, [0u8; 16])],
                );
                let bytes = seal_mac(&resp, &km.k_aut)
                    .and_then(|p| encode_eap(&p))
                    .map_err(|e| EntityError::Validation(e.to_string()))?;
                let keys = SessionKeys { method: AuthMethod::EapAkaPrime, k_ausf: km.k_ausf, k_seaf, eap: Some(km) };
                (keys, Payload::ChallengeResponse { res: None, eap: Some(bytes) })
            }
            None => {
                let k_ausf = derive_k_ausf_5g(&ck_prime, &ik_prime, &snn, &autn.sqn_xor_ak);
                let keys = SessionKeys {
                    method: AuthMethod::FiveGAka,
                    k_ausf,
                    k_seaf: derive_k_seaf(&k_ausf, &snn),
                    eap: None,
                };
                (keys, Payload::ChallengeResponse { res: Some(out.xres), eap: None })
            }
        };
        self.pending = Some(keys);
        Ok(Reply::send(envelope(self.session, Entity::Ue, Entity::Amf, payload)))
    }

    fn on_success(&mut self, env: &Envelope, eap: Option<&[u8]>) -> Result<Reply, EntityError> {
        let Some(pending) = self.pending.take() else {
            return Err(violation(Entity::Ue, self.state, env));
        };
        let expects_eap = pending.method == AuthMethod::EapAkaPrime;
        let ok = match eap {
            Some(raw) => expects_eap && decode_eap(raw).is_ok_and(|p| p.code == EapCode::Success),
            None => !expects_eap,
        };
        if !ok {
            self.pending = Some(pending);
            return Err(EntityError::Validation("success indication does not match the method".into()));
        }
        self.keys = Some(pending);
        self.state = UeState::Authenticated;
        Ok(Reply::none())
    }
}
