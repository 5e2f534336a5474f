//! Simulated network and scenario runner.
//!
//! Virtual time advances in ticks; nothing here reads the wall clock, so a
//! scenario and its seed fully determine the trace.

mod network;
mod runner;
mod scenario;
pub mod trace;

use thiserror::Error;

pub use network::{AdversaryAction, AdversaryRule, Delivery, LinkConfig, NetStats, SendReport, SimNetwork};
pub use runner::{run_scenario, run_scenario_file, KeyEvidence, RunStats, ScenarioResult, CORE_INTERFACES};
pub use scenario::{ue_state_label, Outcome, Scenario, ServingNetwork};
pub use trace::{narrative, replay_verdict, TraceEvent, TraceFlags, AKA_PRIME_NARRATIVE};

use crate::entities::StoreError;
use crate::wire::Interface;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("interface {0} is not declared on this network")]
    UnknownInterface(Interface),
    #[error("subscriber {0} is not provisioned")]
    UnknownSubscriber(String),
}
