//! The auth engine against a hand-written ledger model.

use std::collections::HashMap;

use proptest::prelude::*;
use wia_core::{
    authenticate, is_locked, AlertEvent, Allowlist, AttemptState, AuthOutcome, AuthPolicy,
    MacAddress, Timestamp,
};

const LOCK_MS: i64 = 10_000;

#[derive(Default, Clone, Copy)]
struct Ledger {
    failures: u32,
    locked_until: Option<i64>,
}

#[derive(Debug, PartialEq)]
enum Expect {
    Granted,
    Denied(u32),
    Locked(i64),
}

/// Straight-line restatement of the lockout policy.
fn model_step(
    ledgers: &mut HashMap<u8, Ledger>,
    mac: u8,
    registered: bool,
    now: i64,
) -> (Expect, bool) {
    let l = ledgers.entry(mac).or_default();
    if let Some(until) = l.locked_until {
        if now < until {
            return (Expect::Locked(until), false);
        }
        *l = Ledger::default();
    }
    if registered {
        *l = Ledger::default();
        return (Expect::Granted, false);
    }
    let before = l.failures;
    l.failures += 1;
    let alert = before == 2 && l.failures == 3;
    if alert {
        l.locked_until = Some(now + LOCK_MS);
    }
    (Expect::Denied(l.failures), alert)
}

fn mac(i: u8) -> MacAddress {
    MacAddress::new([0x02, 0, 0, 0, 0, i])
}

#[derive(Debug, Clone)]
struct Step {
    mac: u8,
    registered: bool,
    dt: i64,
}

fn schedule() -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec(
        (
            0u8..4,
            prop::bool::weighted(0.2),
            prop_oneof![Just(0i64), 1i64..3_000, Just(LOCK_MS)],
        )
            .prop_map(|(mac, registered, dt)| Step {
                mac,
                registered,
                dt,
            }),
        1..60,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn engine_matches_ledger_model(steps in schedule()) {
        let policy = AuthPolicy { lock_duration_ms: LOCK_MS };
        let mut state = AttemptState::new();
        let mut ledgers = HashMap::new();
        let mut now = 0i64;
        let mut alerts_per_mac: HashMap<u8, usize> = HashMap::new();
        let mut transitions_per_mac: HashMap<u8, usize> = HashMap::new();

        for s in steps {
            now += s.dt;
            let mut allowlist = Allowlist::new();
            if s.registered {
                allowlist.insert(mac(s.mac), "");
            }
            let d = authenticate(mac(s.mac), &allowlist, &mut state, &policy, Timestamp::from_millis(now));
            let (expect, alert) = model_step(&mut ledgers, s.mac, s.registered, now);
            let got = match d.outcome {
                AuthOutcome::Granted { .. } => Expect::Granted,
                AuthOutcome::Denied { failures_so_far } => Expect::Denied(failures_so_far),
                AuthOutcome::DeniedLocked { locked_until } => Expect::Locked(locked_until.millis()),
            };
            let was_locked = matches!(got, Expect::Locked(_));
            prop_assert_eq!(got, expect);
            prop_assert_eq!(
                d.alert,
                alert.then(|| AlertEvent { mac: mac(s.mac), at: Timestamp::from_millis(now) })
            );
            if alert {
                *transitions_per_mac.entry(s.mac).or_default() += 1;
            }
            if d.alert.is_some() {
                *alerts_per_mac.entry(s.mac).or_default() += 1;
            }
            // Granted only if registered and not locked.
            prop_assert_eq!(d.is_granted(), s.registered && !was_locked);
            prop_assert_eq!(
                is_locked(&mac(s.mac), &state, Timestamp::from_millis(now)),
                ledgers[&s.mac].locked_until.is_some_and(|u| now < u)
            );
        }
        prop_assert_eq!(alerts_per_mac, transitions_per_mac);
    }

    #[test]
    fn decisions_are_deterministic(steps in schedule()) {
        let policy = AuthPolicy { lock_duration_ms: LOCK_MS };
        let run = || {
            let mut state = AttemptState::new();
            let mut now = 0;
            steps.iter().map(|s| {
                now += s.dt;
                let mut al = Allowlist::new();
                if s.registered {
                    al.insert(mac(s.mac), "");
                }
                authenticate(mac(s.mac), &al, &mut state, &policy, Timestamp::from_millis(now))
            }).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }
}
