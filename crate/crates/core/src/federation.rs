//! Eduroam-style AAA decisions for 3GPP identities arriving over WiFi.
//!
//! A request is routed by realm to a policy, gated on the EAP method its
//! identity announces, and only then handed to a backend that runs a real
//! authentication. Every decision renders as a RADIUS-server style log line.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entities::{AuthMethod, SubscriberStore};
use crate::harness::{run_scenario, Outcome, Scenario, ServingNetwork, TraceEvent};
use crate::identity::{parse_nai, MethodHint, Nai};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FederatedMethod {
    EapSim,
    EapAka,
    EapAkaPrime,
    EapTls,
    EapTtls,
    Peap,
}

impl FederatedMethod {
    pub fn from_hint(hint: MethodHint) -> Option<Self> {
        match hint {
            MethodHint::EapSim => Some(FederatedMethod::EapSim),
            MethodHint::EapAka => Some(FederatedMethod::EapAka),
            MethodHint::EapAkaPrime => Some(FederatedMethod::EapAkaPrime),
            MethodHint::Unknown => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FederatedMethod::EapSim => "EAP-SIM",
            FederatedMethod::EapAka => "EAP-AKA",
            FederatedMethod::EapAkaPrime => "EAP-AKA'",
            FederatedMethod::EapTls => "EAP-TLS",
            FederatedMethod::EapTtls => "EAP-TTLS",
            FederatedMethod::Peap => "PEAP",
        }
    }
}

impl fmt::Display for FederatedMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Backend {
    /// Authenticate against the co-located 5G core.
    #[serde(rename = "LOCAL_5GC")]
    Local5gc,
    /// Forward to another AAA server by name.
    Proxy(String),
}

/// `pattern` is an exact realm, `*.suffix`, or `*` for any realm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealmPolicy {
    pub pattern: String,
    pub supported_methods: BTreeSet<FederatedMethod>,
    pub backend: Backend,
}

impl RealmPolicy {
    /// Match strength: exact matches beat any wildcard, longer suffixes beat shorter ones.
    fn score(&self, realm: &str) -> Option<(bool, usize)> {
        let realm = realm.to_ascii_lowercase();
        let pattern = self.pattern.to_ascii_lowercase();
        if pattern == "*" {
            return Some((false, 0));
        }
        match pattern.strip_prefix("*.") {
            Some(suffix) => {
                realm.strip_suffix(suffix).filter(|rest| rest.ends_with('.')).map(|_| (false, suffix.len()))
            }
            None => (realm == pattern).then_some((true, pattern.len())),
        }
    }

    /// Last label of the pattern, e.g. `org` for `*.3gppnetwork.org`.
    pub fn top_level_label(&self) -> &str {
        self.pattern.rsplit('.').next().unwrap_or(&self.pattern)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FederationError {
    #[error("identity has no realm")]
    MissingRealm,
    #[error("unknown realm")]
    NoRoute(String),
    #[error("invalid policy table: {0}")]
    InvalidTable(String),
    #[error("cannot read policy table: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyTable {
    pub policies: Vec<RealmPolicy>,
}

impl PolicyTable {
    pub fn new(policies: Vec<RealmPolicy>) -> Result<Self, FederationError> {
        if policies.is_empty() {
            return Err(FederationError::InvalidTable("at least one policy is required".into()));
        }
        let mut seen = BTreeSet::new();
        for p in &policies {
            if !seen.insert(p.pattern.to_ascii_lowercase()) {
                return Err(FederationError::InvalidTable(format!("duplicate pattern {}", p.pattern)));
            }
        }
        Ok(PolicyTable { policies })
    }

    pub fn from_json(text: &str) -> Result<Self, FederationError> {
        let raw: PolicyTable = serde_json::from_str(text).map_err(|e| FederationError::InvalidTable(e.to_string()))?;
        Self::new(raw.policies)
    }

    pub fn load(path: &Path) -> Result<Self, FederationError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| FederationError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn policy_mut(&mut self, pattern: &str) -> Option<&mut RealmPolicy> {
        self.policies.iter_mut().find(|p| p.pattern == pattern)
    }
}

/// Picks the policy for the realm of `nai` (text after the last `@`).
/// Longest suffix wins; ties go to the earlier policy.
pub fn route_request<'t>(nai: &str, table: &'t [RealmPolicy]) -> Result<&'t RealmPolicy, FederationError> {
    let (_, realm) = nai.rsplit_once('@').ok_or(FederationError::MissingRealm)?;
    if realm.is_empty() {
        return Err(FederationError::MissingRealm);
    }
    let mut best: Option<(&RealmPolicy, (bool, usize))> = None;
    for p in table {
        if let Some(score) = p.score(realm) {
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((p, score));
            }
        }
    }
    best.map(|(p, _)| p).ok_or_else(|| FederationError::NoRoute(realm.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessRequest {
    pub nai: String,
    /// Station MAC address, `aa-bb-cc-dd-ee-ff`.
    pub station_id: String,
    /// Name of the client or proxy the request came from.
    pub source: String,
    pub server: String,
    pub server_ip: String,
    /// Rendered in front of the log line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

pub fn is_station_id(s: &str) -> bool {
    let groups: Vec<&str> = s.split('-').collect();
    groups.len() == 6 && groups.iter().all(|g| g.len() == 2 && g.bytes().all(|b| b.is_ascii_hexdigit()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accept,
    Reject,
}

/// Result of an authentication run performed on behalf of the AAA layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendRun {
    pub outcome: Outcome,
    /// Both sides derived identical K_ausf and K_seaf.
    pub keys_agreed: bool,
    pub trace: Vec<TraceEvent>,
}

/// Performs the authentication behind a routed request. Each call owns its session state.
pub trait BackendRunner {
    fn authenticate(&self, nai: &Nai, backend: &Backend) -> Result<BackendRun, String>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessDecision {
    pub verdict: Verdict,
    /// Empty on accept, never empty on reject.
    pub reason: String,
    pub log_line: String,
    /// Present only if a backend was contacted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendRun>,
}

pub fn render_log_line(req: &AccessRequest, verdict: Verdict, reason: &str) -> String {
    let mut line = String::new();
    if let Some(ts) = &req.timestamp {
        line.push_str(ts);
        line.push_str(": ");
    }
    match verdict {
        Verdict::Reject => line.push_str(&format!(
            "Access-Reject for user {} stationid {} from {} ({}) to {} ({})",
            req.nai, req.station_id, req.source, reason, req.server, req.server_ip
        )),
        Verdict::Accept => line.push_str(&format!(
            "Access-Accept for user {} stationid {} from {} to {} ({})",
            req.nai, req.station_id, req.source, req.server, req.server_ip
        )),
    }
    line
}

fn decide(req: &AccessRequest, verdict: Verdict, reason: String, backend: Option<BackendRun>) -> AccessDecision {
    AccessDecision { log_line: render_log_line(req, verdict, &reason), verdict, reason, backend }
}

pub fn unsupported_method_reason(hint: &str, tld: &str) -> String {
    format!("Misconfigured client: Unsupported 3G {hint} client! Rejected by {tld}.")
}

pub fn authenticate_federated(req: &AccessRequest, table: &PolicyTable, runner: &dyn BackendRunner) -> AccessDecision {
    let reject = |reason: String| decide(req, Verdict::Reject, reason, None);
    if !is_station_id(&req.station_id) {
        return reject("malformed identity".into());
    }
    let Ok(nai) = parse_nai(&req.nai) else {
        return reject("malformed identity".into());
    };
    let policy = match route_request(&req.nai, &table.policies) {
        Ok(p) => p,
        Err(e) => return reject(e.to_string()),
    };
    let method = FederatedMethod::from_hint(nai.method_hint);
    if !method.is_some_and(|m| policy.supported_methods.contains(&m)) {
        return reject(unsupported_method_reason(&nai.method_hint.to_string(), policy.top_level_label()));
    }
    match runner.authenticate(&nai, &policy.backend) {
        Err(e) => reject(format!("backend error: {e}")),
        Ok(run) if run.outcome == Outcome::Success && run.keys_agreed => {
            decide(req, Verdict::Accept, String::new(), Some(run))
        }
        Ok(run) => {
            let reason = format!("authentication failed: {}", run.outcome);
            decide(req, Verdict::Reject, reason, Some(run))
        }
    }
}

/// Backend that runs EAP-AKA' against an in-process 5G core.
#[derive(Debug, Clone)]
pub struct LocalCore {
    pub store: SubscriberStore,
    pub rng_seed: u64,
    /// Defaults to the subscriber's home network.
    pub serving_network: Option<ServingNetwork>,
}

impl LocalCore {
    pub fn new(store: SubscriberStore, rng_seed: u64) -> Self {
        LocalCore { store, rng_seed, serving_network: None }
    }
}

impl BackendRunner for LocalCore {
    fn authenticate(&self, nai: &Nai, backend: &Backend) -> Result<BackendRun, String> {
        if let Backend::Proxy(target) = backend {
            return Err(format!("proxy target {target} is not reachable from this server"));
        }
        let imsi = nai.supi.imsi();
        if self.store.get(&imsi).is_none() {
            return Ok(BackendRun { outcome: Outcome::SubscriberNotFound, keys_agreed: false, trace: Vec::new() });
        }
        let mut sc = Scenario::new(format!("federated-{imsi}"), self.rng_seed);
        sc.subscriber = Some(imsi);
        sc.method = Some(AuthMethod::EapAkaPrime);
        sc.serving_network = self.serving_network.clone();
        let r = run_scenario(&sc, &self.store).map_err(|e| e.to_string())?;
        Ok(BackendRun { outcome: r.outcome, keys_agreed: r.evidence.agreed(), trace: r.trace })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy(pattern: &str, methods: &[FederatedMethod]) -> RealmPolicy {
        RealmPolicy {
            pattern: pattern.into(),
            supported_methods: methods.iter().copied().collect(),
            backend: Backend::Local5gc,
        }
    }

    const EDUROAM_NAI: &str = "6724313930974708@wlan.mnc031.mcc724.3gppnetwork.org";

    #[test]
    fn exact_beats_wildcard() {
        let table = [
            policy("*.3gppnetwork.org", &[]),
            policy("wlan.mnc031.mcc724.3gppnetwork.org", &[FederatedMethod::EapAkaPrime]),
            policy("*", &[]),
        ];
        assert_eq!(route_request(EDUROAM_NAI, &table).unwrap().pattern, "wlan.mnc031.mcc724.3gppnetwork.org");
        assert_eq!(route_request("x@wlan.mnc001.mcc001.3gppnetwork.org", &table).unwrap().pattern, "*.3gppnetwork.org");
        assert_eq!(route_request("x@ufpe.br", &table).unwrap().pattern, "*");
    }

    #[test]
    fn longest_suffix_then_declaration_order() {
        let table = [
            policy("*.org", &[]),
            policy("*.3gppnetwork.org", &[FederatedMethod::EapSim]),
            policy("*.3GPPNETWORK.org", &[FederatedMethod::EapAka]),
        ];
        let p = route_request(EDUROAM_NAI, &table).unwrap();
        assert_eq!(p.supported_methods, [FederatedMethod::EapSim].into());
    }

    #[test]
    fn wildcard_needs_a_label_boundary() {
        let table = [policy("*.network.org", &[])];
        assert!(matches!(route_request("a@3gppnetwork.org", &table), Err(FederationError::NoRoute(_))));
    }

    #[test]
    fn no_route_and_missing_realm() {
        assert!(matches!(route_request("user@nowhere.example", &[]), Err(FederationError::NoRoute(_))));
        assert_eq!(route_request("user", &[]), Err(FederationError::MissingRealm));
        assert_eq!(FederationError::NoRoute("x".into()).to_string(), "unknown realm");
    }

    #[test]
    fn table_validation() {
        assert!(PolicyTable::new(vec![]).is_err());
        assert!(PolicyTable::new(vec![policy("*", &[]), policy("*", &[])]).is_err());
        let t = PolicyTable::new(vec![policy("*.3gppnetwork.org", &[FederatedMethod::Peap])]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(PolicyTable::from_json(&json).unwrap(), t);
    }

    #[test]
    fn station_ids() {
        assert!(is_station_id("84-37-D5-B3-49-F1"));
        assert!(!is_station_id("not-a-mac"));
        assert!(!is_station_id("84:37:D5:B3:49:F1"));
        assert!(!is_station_id("84-37-D5-B3-49"));
    }

    #[test]
    fn backend_serde_forms() {
        assert_eq!(serde_json::to_string(&Backend::Local5gc).unwrap(), "\"LOCAL_5GC\"");
        assert_eq!(serde_json::to_string(&Backend::Proxy("etlr1".into())).unwrap(), r#"{"PROXY":"etlr1"}"#);
    }
}
