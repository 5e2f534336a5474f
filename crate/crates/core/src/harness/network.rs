//! Tick-driven network with per-link faults and declarative adversary rules.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::wire::{Envelope, FieldSelector, Interface};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Probability in [0, 1] that an envelope is lost.
    pub drop_prob: f64,
    /// Adds up to `latency_ticks` of random jitter so envelopes can overtake each other.
    pub reorder: bool,
    pub latency_ticks: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig { drop_prob: 0.0, reorder: false, latency_ticks: 1 }
    }
}

impl LinkConfig {
    fn validate(&self, interface: Interface) -> Result<(), HarnessError> {
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(HarnessError::Config(format!("{interface}: drop_prob {} outside [0, 1]", self.drop_prob)));
        }
        if self.latency_ticks == 0 {
            return Err(HarnessError::Config(format!("{interface}: latency_ticks must be at least 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversaryAction {
    /// XORs `1 << bit` into byte `byte` of the selected field.
    FlipBit {
        field: FieldSelector,
        byte: usize,
        bit: u8,
    },
    Drop,
    /// Delivers a copy again `delay_ticks` after the original.
    Replay {
        delay_ticks: u64,
    },
}

/// Matches envelopes by interface and message type; `occurrence` (1-based)
/// restricts the action to the n-th match, otherwise every match is hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryRule {
    pub interface: Interface,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occurrence: Option<u32>,
    pub action: AdversaryAction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub tick: u64,
    pub envelope: Envelope,
    pub mutated: bool,
    pub replayed: bool,
}

/// What happened to an envelope handed to [`SimNetwork::send`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SendReport {
    pub dropped: bool,
    pub mutated: bool,
    pub replay_scheduled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NetStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone)]
pub struct SimNetwork {
    links: BTreeMap<Interface, LinkConfig>,
    rules: Vec<(AdversaryRule, u32)>,
    queue: BTreeMap<(u64, u64), Delivery>,
    seq: u64,
    rng: ChaCha8Rng,
    stats: NetStats,
}

impl SimNetwork {
    /// Declares exactly the given interfaces; traffic on any other is refused.
    pub fn new(links: BTreeMap<Interface, LinkConfig>, seed: u64) -> Result<Self, HarnessError> {
        for (i, cfg) in &links {
            cfg.validate(*i)?;
        }
        Ok(SimNetwork {
            links,
            rules: Vec::new(),
            queue: BTreeMap::new(),
            seq: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: NetStats::default(),
        })
    }

    pub fn declares(&self, interface: Interface) -> bool {
        self.links.contains_key(&interface)
    }

    pub fn inject(&mut self, rule: AdversaryRule) -> Result<(), HarnessError> {
        if !self.declares(rule.interface) {
            return Err(HarnessError::UnknownInterface(rule.interface));
        }
        self.rules.push((rule, 0));
        Ok(())
    }

    pub fn stats(&self) -> NetStats {
        self.stats
    }

    pub fn pending(&self) -> u64 {
        self.queue.len() as u64
    }

    fn enqueue(&mut self, tick: u64, d: Delivery) {
        self.queue.insert((tick, self.seq), Delivery { tick, ..d });
        self.seq += 1;
        self.stats.sent += 1;
    }

    pub fn send(&mut self, now: u64, mut env: Envelope) -> Result<SendReport, HarnessError> {
        let cfg = *self.links.get(&env.interface).ok_or(HarnessError::UnknownInterface(env.interface))?;
        let mut report = SendReport::default();
        let mut replay_delay = None;

        for (rule, seen) in &mut self.rules {
            if rule.interface != env.interface || rule.message != env.payload.name() {
                continue;
            }
            *seen += 1;
            if rule.occurrence.is_some_and(|n| n != *seen) {
                continue;
            }
            match rule.action {
                AdversaryAction::FlipBit { field, byte, bit } => {
                    report.mutated |= env.payload.mutate(&field, |bytes| {
                        if let Some(b) = bytes.get_mut(byte) {
                            *b ^= 1 << (bit % 8);
                        }
                    });
                }
                AdversaryAction::Drop => report.dropped = true,
                AdversaryAction::Replay { delay_ticks } => replay_delay = Some(delay_ticks),
            }
        }

        // The RNG only advances on faulty links, so adding a fault to one link
        // leaves the others' behaviour unchanged.
        if !report.dropped && cfg.drop_prob > 0.0 && self.rng.gen::<f64>() < cfg.drop_prob {
            report.dropped = true;
        }
        let jitter = |rng: &mut ChaCha8Rng| if cfg.reorder { rng.gen_range(0..=cfg.latency_ticks) } else { 0 };

        if report.dropped {
            self.stats.sent += 1;
            self.stats.dropped += 1;
        } else {
            let at = now + cfg.latency_ticks + jitter(&mut self.rng);
            let d = Delivery { tick: at, envelope: env.clone(), mutated: report.mutated, replayed: false };
            self.enqueue(at, d);
        }
        if let Some(delay) = replay_delay {
            let at = now + cfg.latency_ticks + delay + jitter(&mut self.rng);
            self.enqueue(at, Delivery { tick: at, envelope: env, mutated: report.mutated, replayed: true });
            report.replay_scheduled = true;
        }
        Ok(report)
    }

    /// Removes and returns the earliest envelope; FIFO among equal ticks.
    pub fn next_delivery(&mut self) -> Option<Delivery> {
        let (_, d) = self.queue.pop_first()?;
        self.stats.delivered += 1;
        Some(d)
    }

    pub fn peek_tick(&self) -> Option<u64> {
        self.queue.keys().next().map(|(t, _)| *t)
    }
}
