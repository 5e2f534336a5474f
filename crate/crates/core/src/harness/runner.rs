use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trace::TraceFlags;
use super::{ue_state_label, HarnessError, Outcome, Scenario, SimNetwork, TraceEvent};
use crate::crypto::sha256;
use crate::entities::{
    AmfSession, AusfSession, AuthMethod, EntityError, MethodPolicy, Reply, SubscriberStore, Udm, UeSession,
};
use crate::identity::derive_snn;
use crate::wire::{Entity, Envelope, FailureReason, Interface, Payload, SessionId, WireAv};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Tick of the last processed delivery.
    pub ticks: u64,
    /// Envelopes delivered to an entity.
    pub messages: u64,
    /// Payload bytes of delivered envelopes.
    pub bytes: u64,
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub pending: u64,
}

/// Keys as each side ended up holding them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyEvidence {
    #[serde(with = "crate::serde_hex::opt_array", default)]
    pub ue_k_ausf: Option<[u8; 32]>,
    #[serde(with = "crate::serde_hex::opt_array", default)]
    pub ue_k_seaf: Option<[u8; 32]>,
    #[serde(with = "crate::serde_hex::opt_array", default)]
    pub ausf_k_ausf: Option<[u8; 32]>,
    #[serde(with = "crate::serde_hex::opt_array", default)]
    pub amf_k_seaf: Option<[u8; 32]>,
}

impl KeyEvidence {
    /// Both sides hold K_ausf and K_seaf and they match byte for byte.
    pub fn agreed(&self) -> bool {
        self.ue_k_ausf.is_some()
            && self.ue_k_seaf.is_some()
            && self.ue_k_ausf == self.ausf_k_ausf
            && self.ue_k_seaf == self.amf_k_seaf
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub outcome: Outcome,
    pub trace: Vec<TraceEvent>,
    pub stats: RunStats,
    pub evidence: KeyEvidence,
    /// Vector issued by the UDM, if one was.
    pub av: Option<WireAv>,
    pub method: Option<AuthMethod>,
    /// Subscriber store after the run (SQNs advanced).
    pub store: SubscriberStore,
}

/// Interfaces a 5GC run declares.
pub const CORE_INTERFACES: [Interface; 3] = [Interface::N1UeAmf, Interface::N12AmfAusf, Interface::N13AusfUdm];

fn derive_u64(label: &[u8], seed: u64) -> u64 {
    let h = sha256(&[label, &seed.to_be_bytes()]);
    u64::from_be_bytes(h[..8].try_into().unwrap())
}

fn derive_nonce(seed: u64) -> [u8; 16] {
    sha256(&[b"suci-nonce", &seed.to_be_bytes()])[..16].try_into().unwrap()
}

/// Entity a failing entity notifies so the failure reaches the UE.
fn upstream(e: Entity) -> Entity {
    match e {
        Entity::Ue | Entity::Ausf => Entity::Amf,
        Entity::Amf => Entity::Ue,
        _ => Entity::Ausf,
    }
}

struct Run {
    session: SessionId,
    net: SimNetwork,
    trace: Vec<TraceEvent>,
    ue: UeSession,
    amf: AmfSession,
    ausf: AusfSession,
    store: SubscriberStore,
    policy: MethodPolicy,
    seed: u64,
    stats: RunStats,
    av: Option<WireAv>,
    method: Option<AuthMethod>,
}

impl Run {
    fn event(&self, tick: u64, env: &Envelope) -> TraceEvent {
        TraceEvent {
            tick,
            session: self.session,
            from: env.from,
            to: env.to,
            interface: Some(env.interface),
            event: env.payload.name().to_string(),
            digest: env.payload.eap().map(hex::encode),
            flags: TraceFlags::default(),
        }
    }

    fn send(&mut self, now: u64, env: Envelope) -> Result<(), HarnessError> {
        let mut ev = self.event(now, &env);
        let report = self.net.send(now, env)?;
        if report.dropped {
            ev.flags.dropped = true;
            ev.flags.mutated = report.mutated;
            self.trace.push(ev);
        }
        Ok(())
    }

    fn dispatch(&mut self, env: &Envelope) -> Result<Reply, EntityError> {
        match env.to {
            Entity::Ue => self.ue.handle(env),
            Entity::Amf => self.amf.handle(env),
            Entity::Ausf => {
                if let Payload::AuthInfoResponse { av, method, .. } = &env.payload {
                    self.av = Some(av.clone());
                    self.method = Some(*method);
                }
                self.ausf.handle(env)
            }
            _ => Udm::new(&mut self.store, self.policy.clone(), self.seed).handle(env),
        }
    }

    fn abort(&mut self, entity: Entity, reason: FailureReason) {
        match entity {
            Entity::Ue => self.ue.abort(reason),
            Entity::Amf => self.amf.abort(reason),
            Entity::Ausf => self.ausf.abort(reason),
            _ => {}
        }
    }

    fn deliver(&mut self, tick: u64, mutated: bool, replayed: bool, env: Envelope) -> Result<(), HarnessError> {
        self.stats.messages += 1;
        self.stats.bytes += env.payload.wire_len() as u64;
        let mut ev = self.event(tick, &env);
        ev.flags.mutated = mutated;
        ev.flags.replayed = replayed;
        let entity = env.to;
        let result = self.dispatch(&env);
        let reply = match result {
            Ok(reply) => reply,
            Err(e) => {
                ev.flags.error = Some(e.to_string());
                if !e.is_protocol_violation() {
                    let reason = e.reason();
                    self.abort(entity, reason);
                    let notice = Envelope::between(
                        self.session,
                        entity,
                        upstream(entity),
                        Payload::FailureNotice { reason, eap: None },
                    )
                    .expect("failure notices travel upstream");
                    Reply::send(notice)
                } else {
                    Reply::none()
                }
            }
        };
        if entity == Entity::Ue {
            ev.flags.ue_state = Some(ue_state_label(self.ue.state()));
        }
        self.trace.push(ev);
        for d in &reply.decisions {
            self.trace.push(TraceEvent {
                tick,
                session: self.session,
                from: entity,
                to: entity,
                interface: None,
                event: d.name().to_string(),
                digest: None,
                flags: TraceFlags::default(),
            });
        }
        for out in reply.out {
            self.send(tick, out)?;
        }
        Ok(())
    }
}

/// Runs one scenario against an in-memory subscriber store. The store is
/// cloned; the advanced copy is returned in the result.
pub fn run_scenario(sc: &Scenario, store: &SubscriberStore) -> Result<ScenarioResult, HarnessError> {
    let rec = match &sc.subscriber {
        Some(imsi) => store.get(imsi).ok_or_else(|| HarnessError::UnknownSubscriber(imsi.clone()))?,
        None => store.records().first().ok_or_else(|| HarnessError::Config("subscriber store is empty".into()))?,
    }
    .clone();
    let (sn, network_type) = match &sc.serving_network {
        Some(s) => (
            derive_snn(&s.mcc, &s.mnc).map_err(|e| HarnessError::Config(format!("serving network: {e}")))?,
            s.network_type,
        ),
        None => (derive_snn(rec.supi.mcc(), rec.supi.mnc()).expect("SUPI digits are valid"), Default::default()),
    };
    let mut links: BTreeMap<Interface, _> = CORE_INTERFACES.into_iter().map(|i| (i, Default::default())).collect();
    for (i, cfg) in &sc.links {
        if !CORE_INTERFACES.contains(i) {
            return Err(HarnessError::UnknownInterface(*i));
        }
        links.insert(*i, *cfg);
    }
    let mut net = SimNetwork::new(links, sc.rng_seed)?;
    for rule in &sc.adversary {
        net.inject(rule.clone())?;
    }

    let session = SessionId(derive_u64(b"session", sc.rng_seed));
    let highest = rec.credential.sqn.value().checked_sub(1).map(|v| crate::crypto::Sqn::new(v).expect("below max"));
    let mut run = Run {
        session,
        net,
        trace: Vec::new(),
        ue: UeSession::new(session, rec, sn.clone(), highest, derive_nonce(sc.rng_seed)),
        amf: AmfSession::new(session, sn),
        ausf: AusfSession::new(session),
        store: store.clone(),
        policy: MethodPolicy { network_type, requested: sc.method },
        seed: sc.rng_seed,
        stats: RunStats::default(),
        av: None,
        method: None,
    };

    let start = run.amf.start().expect("fresh AMF accepts start");
    run.send(0, start)?;
    while run.net.peek_tick().is_some_and(|t| t <= sc.tick_budget) {
        let d = run.net.next_delivery().expect("peeked");
        run.stats.ticks = d.tick;
        run.deliver(d.tick, d.mutated, d.replayed, d.envelope)?;
    }

    let net = run.net.stats();
    let stats = RunStats {
        sent: net.sent,
        delivered: net.delivered,
        dropped: net.dropped,
        pending: run.net.pending(),
        ..run.stats
    };
    let evidence = KeyEvidence {
        ue_k_ausf: run.ue.keys().map(|k| k.k_ausf),
        ue_k_seaf: run.ue.keys().map(|k| k.k_seaf),
        ausf_k_ausf: run.ausf.k_ausf().copied(),
        amf_k_seaf: run.amf.k_seaf().copied(),
    };
    Ok(ScenarioResult {
        outcome: Outcome::from_ue(run.ue.state()),
        trace: run.trace,
        stats,
        evidence,
        av: run.av,
        method: run.method,
        store: run.store,
    })
}

/// Loads the scenario's subscriber file and runs it.
pub fn run_scenario_file(sc: &Scenario) -> Result<ScenarioResult, HarnessError> {
    let store = SubscriberStore::load(&sc.subscribers)?;
    run_scenario(sc, &store)
}
