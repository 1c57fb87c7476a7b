//! Application node: the receiver side that drives the LEDs and the motor.
//!
//! For each executed command the receiver log gains two lines, the device
//! echo (`LED1 1`) and the ack code (`11`).

use serde::{Deserialize, Serialize};

use crate::model::{ack_code, decode_command, AckCode, Action, Command, DeviceId};
use crate::textlog::{LineLog, LineSink};
use crate::wire::{decode_frame, dedup_receive, encode_frame, Frame, FrameKind, ReceiveAction};

pub const RECEIVER_LOG_CAPACITY: usize = 1000;

/// On/off state of every device. Starts all off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeviceBank {
    states: [bool; 3],
}

impl DeviceBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self, device: DeviceId) -> Action {
        Action::from_bit(self.states[slot(device)])
    }

    fn set(&mut self, device: DeviceId, action: Action) {
        self.states[slot(device)] = action == Action::On;
    }
}

fn slot(device: DeviceId) -> usize {
    usize::from(device.index() - 1)
}

/// Snapshot of the bank as state bits, serialized `{"led1":0,"led2":1,"motor":1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DeviceStates {
    pub led1: u8,
    pub led2: u8,
    pub motor: u8,
}

impl DeviceStates {
    pub fn get(&self, device: DeviceId) -> u8 {
        match device {
            DeviceId::Led1 => self.led1,
            DeviceId::Led2 => self.led2,
            DeviceId::Motor => self.motor,
        }
    }
}

/// Sets the target device and returns the ack code with the two log lines.
pub fn execute(cmd: Command, bank: &mut DeviceBank) -> (AckCode, [String; 2]) {
    bank.set(cmd.device, cmd.action);
    let code = ack_code(cmd);
    let lines = [
        format!("{} {}", cmd.device.display_name(), cmd.action.bit()),
        code.to_string(),
    ];
    (code, lines)
}

pub fn query_states(bank: &DeviceBank) -> DeviceStates {
    DeviceStates {
        led1: bank.state(DeviceId::Led1).bit(),
        led2: bank.state(DeviceId::Led2).bit(),
        motor: bank.state(DeviceId::Motor).bit(),
    }
}

#[derive(Debug)]
pub struct AppNode {
    bank: DeviceBank,
    last_seq: Option<u8>,
    last_ack: Option<Vec<u8>>,
    log: LineLog,
    executions: u64,
}

impl Default for AppNode {
    fn default() -> Self {
        Self::new()
    }
}

impl AppNode {
    pub fn new() -> Self {
        Self {
            bank: DeviceBank::new(),
            last_seq: None,
            last_ack: None,
            log: LineLog::ring(RECEIVER_LOG_CAPACITY),
            executions: 0,
        }
    }

    pub fn mirror_log_to(&mut self, sink: LineSink) {
        self.log.add_mirror(sink);
    }

    /// Handles one received frame and returns the ACK to send back, if any.
    ///
    /// Corrupt frames, ACK frames and unknown commands are dropped without
    /// a reply; the sender's timeout covers them.
    pub fn on_frame(&mut self, bytes: &[u8]) -> Option<Vec<u8>> {
        let frame = decode_frame(bytes).ok()?;
        if frame.kind != FrameKind::Cmd {
            return None;
        }
        match dedup_receive(&frame, self.last_seq) {
            ReceiveAction::DuplicateReAck => self.last_ack.clone(),
            ReceiveAction::Execute => {
                let cmd = decode_command(std::str::from_utf8(&frame.payload).ok()?).ok()?;
                let (code, lines) = execute(cmd, &mut self.bank);
                for line in lines {
                    self.log.push(line);
                }
                self.executions += 1;
                let ack = encode_frame(&Frame::ack(frame.seq, code.to_string()))
                    .expect("ack payload is two bytes");
                self.last_seq = Some(frame.seq);
                self.last_ack = Some(ack.clone());
                Some(ack)
            }
        }
    }

    pub fn bank(&self) -> &DeviceBank {
        &self.bank
    }

    pub fn states(&self) -> DeviceStates {
        query_states(&self.bank)
    }

    /// Most recent receiver log lines (up to [`RECEIVER_LOG_CAPACITY`]).
    pub fn log_lines(&self) -> Vec<String> {
        self.log.lines()
    }

    /// Number of commands executed since start.
    pub fn executions(&self) -> u64 {
        self.executions
    }
}
