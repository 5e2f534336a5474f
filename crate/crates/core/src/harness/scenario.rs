use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AdversaryRule, HarnessError, LinkConfig};
use crate::entities::{AuthMethod, NetworkType, UeState};
use crate::wire::{FailureReason, Interface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Success,
    MacFailure,
    SqnFailure,
    HresMismatch,
    XresMismatch,
    MethodRejected,
    SubscriberNotFound,
    IdentityIntegrity,
    ProtocolViolation,
    Timeout,
}

impl From<FailureReason> for Outcome {
    fn from(r: FailureReason) -> Self {
        match r {
            FailureReason::MacFailure => Outcome::MacFailure,
            FailureReason::SqnFailure => Outcome::SqnFailure,
            FailureReason::HresMismatch => Outcome::HresMismatch,
            FailureReason::XresMismatch => Outcome::XresMismatch,
            FailureReason::MethodRejected => Outcome::MethodRejected,
            FailureReason::SubscriberNotFound => Outcome::SubscriberNotFound,
            FailureReason::IdentityIntegrity => Outcome::IdentityIntegrity,
            FailureReason::ProtocolViolation => Outcome::ProtocolViolation,
        }
    }
}

impl Outcome {
    pub fn from_ue(state: UeState) -> Self {
        match state {
            UeState::Authenticated => Outcome::Success,
            UeState::Failed(r) => r.into(),
            UeState::Idle | UeState::AwaitChallenge => Outcome::Timeout,
        }
    }

    /// Inverse of [`ue_state_label`].
    pub fn from_ue_state(label: &str) -> Self {
        match label.strip_prefix("FAILED:") {
            Some(reason) => reason.parse().unwrap_or(Outcome::ProtocolViolation),
            None if label == "AUTHENTICATED" => Outcome::Success,
            None => Outcome::Timeout,
        }
    }
}

pub fn ue_state_label(state: UeState) -> String {
    match state {
        UeState::Idle => "IDLE".into(),
        UeState::AwaitChallenge => "AWAIT_CHALLENGE".into(),
        UeState::Authenticated => "AUTHENTICATED".into(),
        UeState::Failed(r) => format!("FAILED:{r}"),
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant");
        f.write_str(v.as_str().expect("string"))
    }
}

impl FromStr for Outcome {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown outcome {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServingNetwork {
    pub mcc: String,
    pub mnc: String,
    #[serde(default)]
    pub network_type: NetworkType,
}

fn default_budget() -> u64 {
    1000
}

fn default_expected() -> Outcome {
    Outcome::Success
}

/// A single authentication run, as stored in a scenario JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Subscriber file, relative to the scenario file.
    pub subscribers: PathBuf,
    /// IMSI of the subscriber whose UE runs; the first record when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subscriber: Option<String>,
    /// Defaults to the subscriber's home network, PUBLIC.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serving_network: Option<ServingNetwork>,
    /// Method requested from the UDM; normal preference order when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<AuthMethod>,
    pub rng_seed: u64,
    /// Per-interface fault overrides; unlisted 5GC interfaces are faultless.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub links: BTreeMap<Interface, LinkConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adversary: Vec<AdversaryRule>,
    #[serde(default = "default_expected")]
    pub expected_outcome: Outcome,
    #[serde(default = "default_budget")]
    pub tick_budget: u64,
}

impl Scenario {
    pub fn new(name: impl Into<String>, rng_seed: u64) -> Self {
        Scenario {
            name: name.into(),
            subscribers: PathBuf::new(),
            subscriber: None,
            serving_network: None,
            method: None,
            rng_seed,
            links: BTreeMap::new(),
            adversary: Vec::new(),
            expected_outcome: Outcome::Success,
            tick_budget: default_budget(),
        }
    }

    /// Parses a scenario file and resolves its subscriber path against the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("cannot read {}: {e}", path.display())))?;
        let mut sc: Scenario =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        if sc.subscribers.is_relative() {
            if let Some(dir) = path.parent() {
                sc.subscribers = dir.join(&sc.subscribers);
            }
        }
        Ok(sc)
    }
}
