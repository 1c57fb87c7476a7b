//! Scripted lossless run reproducing the reference serial transcripts.

use std::sync::Arc;

use crate::auth::Allowlist;
use crate::clock::{ManualClock, Timestamp};
use crate::gateway::BANNER;
use crate::model::MacAddress;
use crate::system::{System, SystemConfig, SystemError};

pub const DEMO_MAC: MacAddress = MacAddress::new([0x02, 0x57, 0x49, 0x41, 0x00, 0x01]);
pub const DEMO_LABEL: &str = "demo-controller";
pub const DEMO_SEED: u64 = 42;
pub const DEMO_SCRIPT: [&str; 4] = ["led1_on", "led2_on", "motor_on", "led1_off"];

pub const EXPECTED_TRANSMITTER: [&str; 5] = [
    BANNER,
    "Sending command: led1_on",
    "Sending command: led2_on",
    "Sending command: motor_on",
    "Sending command: led1_off",
];

pub const EXPECTED_RECEIVER: [&str; 8] = [
    "LED1 1", "11", "LED2 1", "21", "MOTOR 1", "31", "LED1 0", "10",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoReport {
    pub transmitter: Vec<String>,
    pub receiver: Vec<String>,
}

impl DemoReport {
    pub fn transmitter_matches(&self) -> bool {
        self.transmitter == EXPECTED_TRANSMITTER
    }

    pub fn receiver_matches(&self) -> bool {
        self.receiver == EXPECTED_RECEIVER
    }

    pub fn matches(&self) -> bool {
        self.transmitter_matches() && self.receiver_matches()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("demo controller was not admitted: {0}")]
    Denied(#[from] crate::gateway::SessionDenied),
    #[error("demo command rejected: {0}")]
    Rejected(#[from] crate::gateway::CommandRejected),
}

pub fn run_demo() -> Result<DemoReport, DemoError> {
    let mut config = SystemConfig::default();
    config.link.rng_seed = DEMO_SEED;
    config.allowlist = Allowlist::from_iter([(DEMO_MAC, DEMO_LABEL.to_string())]);
    let clock = ManualClock::new(Timestamp::from_millis(0));
    let mut system = System::build(config, Arc::new(clock))?;

    let session = system.gateway().open_session(DEMO_MAC)?;
    for token in DEMO_SCRIPT {
        system.gateway().submit_command(&session.token, token)?;
    }
    system.drain();

    let receiver = system
        .node()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .log_lines();
    Ok(DemoReport {
        transmitter: system.gateway().transmitter_log(),
        receiver,
    })
}
