use super::{envelope, violation, AuthMethod, Decision, EntityError, MethodPolicy, Reply, SubscriberStore};
use crate::crypto::{derive_k_ausf_5g, derive_master_keys, generate_av};
use crate::identity::{parse_nai, Suci, Supi};
use crate::wire::{Entity, Envelope, HomeKeys, Payload, WireAv};

/// Home subscriber data management. Stateless per session apart from the
/// SQN it advances in the store.
#[derive(Debug)]
pub struct Udm<'a> {
    store: &'a mut SubscriberStore,
    policy: MethodPolicy,
    rng_seed: [u8; 8],
}

impl<'a> Udm<'a> {
    pub fn new(store: &'a mut SubscriberStore, policy: MethodPolicy, rng_seed: u64) -> Self {
        Udm { store, policy, rng_seed: rng_seed.to_be_bytes() }
    }

    pub fn store(&self) -> &SubscriberStore {
        self.store
    }

    /// Maps a presented identity (NAI or SUCI) to a provisioned SUPI.
    pub fn resolve(&self, identity: &str) -> Result<Supi, EntityError> {
        let supi = if identity.starts_with("suci-") {
            let suci: Suci =
                identity.parse().map_err(|e: crate::identity::IdentityError| EntityError::Validation(e.to_string()))?;
            self.store.resolve_suci(&suci)?
        } else {
            parse_nai(identity).map_err(|e| EntityError::SubscriberNotFound(format!("{identity}: {e}")))?.supi
        };
        match self.store.get(&supi.imsi()) {
            Some(rec) if rec.supi == supi => Ok(supi),
            _ => Err(EntityError::SubscriberNotFound(supi.imsi())),
        }
    }

    pub fn handle(&mut self, env: &Envelope) -> Result<Reply, EntityError> {
        let Payload::AuthInfoRequest { identity, snn } = &env.payload else {
            return Err(violation(Entity::Udm, "Ready", env));
        };
        let supi = self.resolve(identity)?;
        let imsi = supi.imsi();
        let rec = self.store.get(&imsi).expect("resolved above").clone();

        let method = self.policy.select(&rec.allowed_methods)?;
        if !method.executable() {
            return Err(EntityError::MethodRejected(format!("{method} is not supported by this simulator")));
        }
        let (av, next) =
            generate_av(&rec.credential, snn, &self.rng_seed).map_err(|e| EntityError::Validation(e.to_string()))?;
        self.store.set_sqn(&imsi, next)?;

        let keys = match method {
            AuthMethod::EapAkaPrime => {
                let km = derive_master_keys(&av.ck_prime, &av.ik_prime, identity, &av.rand, &av.autn);
                HomeKeys { k_ausf: km.k_ausf, k_aut: Some(km.k_aut) }
            }
            _ => {
                HomeKeys { k_ausf: derive_k_ausf_5g(&av.ck_prime, &av.ik_prime, snn, &av.autn.sqn_xor_ak), k_aut: None }
            }
        };
        Ok(Reply::send(envelope(
            env.session_id,
            Entity::Udm,
            Entity::Ausf,
            Payload::AuthInfoResponse { av: WireAv::from(&av), method, keys, supi },
        ))
        .with(Decision::MethodSelected { method })
        .with(Decision::AvGenerated))
    }
}
