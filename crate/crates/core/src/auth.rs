//! Admission by MAC allowlist with per-MAC consecutive-failure lockout.
//!
//! A MAC that fails [`FAILURE_THRESHOLD`] times in a row raises exactly one
//! [`AlertEvent`] and is locked for the configured duration. While locked,
//! attempts are answered with [`AuthOutcome::DeniedLocked`] and do not count.
//! When the lock expires the next attempt starts a fresh episode.
//!
//! The engine never reads ambient time; every call takes `now`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::clock::Timestamp;
use crate::model::MacAddress;

/// Consecutive failures that trigger the alert and lock.
pub const FAILURE_THRESHOLD: u32 = 3;

pub const DEFAULT_LOCK_SECS: u64 = 300;

/// Registered MACs and their labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Allowlist {
    entries: BTreeMap<MacAddress, String>,
}

impl Allowlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, mac: &MacAddress) -> bool {
        self.entries.contains_key(mac)
    }

    pub fn label(&self, mac: &MacAddress) -> Option<&str> {
        self.entries.get(mac).map(String::as_str)
    }

    /// Inserts or relabels; returns the previous label if the MAC was present.
    pub fn insert(&mut self, mac: MacAddress, label: impl Into<String>) -> Option<String> {
        self.entries.insert(mac, label.into())
    }

    pub fn remove(&mut self, mac: &MacAddress) -> Option<String> {
        self.entries.remove(mac)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending MAC byte order.
    pub fn iter(&self) -> impl Iterator<Item = (&MacAddress, &str)> {
        self.entries.iter().map(|(m, l)| (m, l.as_str()))
    }
}

impl FromIterator<(MacAddress, String)> for Allowlist {
    fn from_iter<I: IntoIterator<Item = (MacAddress, String)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthPolicy {
    pub lock_duration_ms: i64,
}

impl AuthPolicy {
    pub fn with_lock_secs(secs: u64) -> Self {
        Self {
            lock_duration_ms: (secs as i64).saturating_mul(1000),
        }
    }
}

impl Default for AuthPolicy {
    fn default() -> Self {
        Self::with_lock_secs(DEFAULT_LOCK_SECS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct AttemptRecord {
    pub consecutive_failures: u32,
    pub locked_until: Option<Timestamp>,
    pub alert_raised: bool,
}

/// Per-MAC failure ledger.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttemptState {
    records: HashMap<MacAddress, AttemptRecord>,
    grants: u64,
}

impl AttemptState {
    pub fn new() -> Self {
        Self::default()
    }

    /// The stored record; a MAC never seen has the all-zero record.
    pub fn record(&self, mac: &MacAddress) -> AttemptRecord {
        self.records.get(mac).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum AuthOutcome {
    /// `session_seed` is a per-engine grant serial, unique for each grant.
    Granted {
        session_seed: u64,
    },
    Denied {
        failures_so_far: u32,
    },
    DeniedLocked {
        locked_until: Timestamp,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlertEvent {
    pub mac: MacAddress,
    pub at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthDecision {
    pub outcome: AuthOutcome,
    pub alert: Option<AlertEvent>,
}

impl AuthDecision {
    pub fn is_granted(&self) -> bool {
        matches!(self.outcome, AuthOutcome::Granted { .. })
    }
}

pub fn authenticate(
    mac: MacAddress,
    allowlist: &Allowlist,
    state: &mut AttemptState,
    policy: &AuthPolicy,
    now: Timestamp,
) -> AuthDecision {
    let record = state.records.entry(mac).or_default();

    if let Some(until) = record.locked_until {
        if now < until {
            return AuthDecision {
                outcome: AuthOutcome::DeniedLocked {
                    locked_until: until,
                },
                alert: None,
            };
        }
        // Lock expired: new episode.
        *record = AttemptRecord::default();
    }

    if allowlist.contains(&mac) {
        state.records.remove(&mac);
        state.grants += 1;
        return AuthDecision {
            outcome: AuthOutcome::Granted {
                session_seed: state.grants,
            },
            alert: None,
        };
    }

    record.consecutive_failures += 1;
    let mut alert = None;
    if record.consecutive_failures == FAILURE_THRESHOLD && !record.alert_raised {
        record.alert_raised = true;
        record.locked_until = Some(now.plus_millis(policy.lock_duration_ms));
        alert = Some(AlertEvent { mac, at: now });
    }
    AuthDecision {
        outcome: AuthOutcome::Denied {
            failures_so_far: record.consecutive_failures,
        },
        alert,
    }
}

/// Clears the failure counter and any lock for `mac`.
pub fn record_success_reset(mac: &MacAddress, state: &mut AttemptState) {
    state.records.remove(mac);
}

pub fn is_locked(mac: &MacAddress, state: &AttemptState, now: Timestamp) -> bool {
    state
        .records
        .get(mac)
        .and_then(|r| r.locked_until)
        .is_some_and(|until| now < until)
}
