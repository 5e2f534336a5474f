//! Authentication method registry and the public-network gate.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EntityError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuthMethod {
    FiveGAka,
    EapAkaPrime,
    EapTls,
    EapTtls,
}

impl AuthMethod {
    /// Selection order when a subscriber allows several methods.
    pub const PREFERENCE: [AuthMethod; 4] =
        [AuthMethod::EapAkaPrime, AuthMethod::FiveGAka, AuthMethod::EapTls, AuthMethod::EapTtls];

    pub fn info(self) -> &'static MethodInfo {
        REGISTRY.iter().find(|m| m.method == self).expect("every method is registered")
    }

    /// Whether the simulator has a flow for this method.
    pub fn executable(self) -> bool {
        matches!(self, AuthMethod::FiveGAka | AuthMethod::EapAkaPrime)
    }
}

impl fmt::Display for AuthMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.info().name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MethodInfo {
    pub method: AuthMethod,
    pub name: &'static str,
    pub public_allowed: bool,
    pub credential: &'static str,
    pub defined_by: &'static str,
}

pub const REGISTRY: [MethodInfo; 4] = [
    MethodInfo {
        method: AuthMethod::FiveGAka,
        name: "5G-AKA",
        public_allowed: true,
        credential: "USIM long-term key",
        defined_by: "3GPP (no RFC, not an EAP method)",
    },
    MethodInfo {
        method: AuthMethod::EapAkaPrime,
        name: "EAP-AKA'",
        public_allowed: true,
        credential: "USIM long-term key",
        defined_by: "RFC 9048",
    },
    MethodInfo {
        method: AuthMethod::EapTls,
        name: "EAP-TLS",
        public_allowed: false,
        credential: "X.509 certificate",
        defined_by: "RFC 5216",
    },
    MethodInfo {
        method: AuthMethod::EapTtls,
        name: "EAP-TTLS",
        public_allowed: false,
        credential: "server certificate + tunneled inner credential",
        defined_by: "RFC 5281",
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NetworkType {
    #[default]
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MethodPolicy {
    pub network_type: NetworkType,
    /// Restricts selection to one method (a method request from the scenario).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested: Option<AuthMethod>,
}

impl MethodPolicy {
    pub fn new(network_type: NetworkType) -> Self {
        MethodPolicy { network_type, requested: None }
    }

    pub fn requesting(mut self, method: AuthMethod) -> Self {
        self.requested = Some(method);
        self
    }

    pub fn permits(&self, method: AuthMethod) -> bool {
        match self.network_type {
            NetworkType::Public => method.info().public_allowed,
            NetworkType::Private => true,
        }
    }

    /// Highest-preference method that the subscriber allows and the network permits.
    pub fn select(&self, allowed: &BTreeSet<AuthMethod>) -> Result<AuthMethod, EntityError> {
        let candidates: &[AuthMethod] = match &self.requested {
            Some(m) => std::slice::from_ref(m),
            None => &AuthMethod::PREFERENCE,
        };
        candidates.iter().copied().find(|m| allowed.contains(m) && self.permits(*m)).ok_or_else(|| {
            EntityError::MethodRejected(match self.requested {
                Some(m) if !self.permits(m) => {
                    format!("{m} is not valid on {:?} networks", self.network_type)
                }
                Some(m) => format!("{m} is not allowed for this subscriber"),
                None => "no permissible method for this subscriber".to_string(),
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ms: &[AuthMethod]) -> BTreeSet<AuthMethod> {
        ms.iter().copied().collect()
    }

    #[test]
    fn only_aka_methods_are_public() {
        let public: Vec<_> = REGISTRY.iter().filter(|m| m.public_allowed).map(|m| m.method).collect();
        assert_eq!(public, [AuthMethod::FiveGAka, AuthMethod::EapAkaPrime]);
    }

    #[test]
    fn public_selection() {
        let p = MethodPolicy::new(NetworkType::Public);
        assert_eq!(p.select(&set(&[AuthMethod::EapAkaPrime])).unwrap(), AuthMethod::EapAkaPrime);
        assert_eq!(p.select(&set(&[AuthMethod::FiveGAka])).unwrap(), AuthMethod::FiveGAka);
        assert_eq!(p.select(&set(&[AuthMethod::FiveGAka, AuthMethod::EapAkaPrime])).unwrap(), AuthMethod::EapAkaPrime);
        assert!(matches!(p.select(&set(&[AuthMethod::EapTls])), Err(EntityError::MethodRejected(_))));
    }

    #[test]
    fn private_networks_admit_other_methods() {
        let p = MethodPolicy::new(NetworkType::Private);
        assert_eq!(p.select(&set(&[AuthMethod::EapTls])).unwrap(), AuthMethod::EapTls);
        let p = MethodPolicy::new(NetworkType::Public).requesting(AuthMethod::EapTtls);
        assert!(p.select(&set(&[AuthMethod::EapTtls, AuthMethod::EapAkaPrime])).is_err());
    }

    #[test]
    fn requested_method_must_be_allowed() {
        let p = MethodPolicy::new(NetworkType::Public).requesting(AuthMethod::FiveGAka);
        assert!(p.select(&set(&[AuthMethod::EapAkaPrime])).is_err());
        assert_eq!(p.select(&set(&[AuthMethod::EapAkaPrime, AuthMethod::FiveGAka])).unwrap(), AuthMethod::FiveGAka);
    }
}
