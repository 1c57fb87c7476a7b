//! Stop-and-wait retransmission.
//!
//! The sender transmits one CMD frame and waits `ack_timeout_ms` for an ACK
//! carrying the same sequence number. On timeout it resends the same frame,
//! same seq, up to `max_retries` times. The receiver executes a given seq
//! once and re-acks duplicates, giving at-most-once execution.

use crate::link::{airtime_ms, LinkConfig};
use crate::model::{encode_command, AckCode, Command};

use super::frame::{decode_frame, encode_frame, Frame, FrameKind, MAX_FRAME_LEN};

pub const DEFAULT_MAX_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArqPolicy {
    pub ack_timeout_ms: f64,
    pub max_retries: u32,
}

impl ArqPolicy {
    /// Timeout covering one full round trip of two maximum-size frames,
    /// rounded up to the next millisecond.
    pub fn for_link(cfg: &LinkConfig) -> Self {
        let round_trip = 2.0 * (airtime_ms(MAX_FRAME_LEN, cfg) + cfg.propagation_delay_ms);
        Self {
            ack_timeout_ms: round_trip.ceil(),
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn max_attempts(&self) -> u32 {
        1 + self.max_retries
    }
}

impl Default for ArqPolicy {
    fn default() -> Self {
        Self::for_link(&LinkConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AckResult {
    Acked { code: AckCode, attempts: u32 },
    Failed { attempts: u32 },
}

impl AckResult {
    pub fn attempts(&self) -> u32 {
        match *self {
            AckResult::Acked { attempts, .. } | AckResult::Failed { attempts } => attempts,
        }
    }
}

/// The sender's view of a link: put a frame on air, then listen.
pub trait ArqChannel {
    /// Current time on the channel's clock, in milliseconds.
    fn now(&self) -> f64;

    /// Transmits at the current time. `false` if the link refused the
    /// frame; the attempt still counts.
    fn send_frame(&mut self, bytes: &[u8]) -> bool;

    /// Listens until `deadline`. Returns the next frame received before it,
    /// or `None` with the clock moved to the deadline.
    fn await_frame(&mut self, deadline: f64) -> Option<Vec<u8>>;
}

pub fn arq_send<C: ArqChannel + ?Sized>(
    cmd: Command,
    seq: u8,
    channel: &mut C,
    policy: &ArqPolicy,
) -> AckResult {
    let bytes =
        encode_frame(&Frame::cmd(seq, encode_command(cmd))).expect("command tokens fit in a frame");
    for attempt in 1..=policy.max_attempts() {
        channel.send_frame(&bytes);
        let deadline = channel.now() + policy.ack_timeout_ms;
        // Stale, corrupt or foreign frames are ignored until the deadline.
        while let Some(received) = channel.await_frame(deadline) {
            if let Some(code) = matching_ack(&received, seq) {
                return AckResult::Acked {
                    code,
                    attempts: attempt,
                };
            }
        }
    }
    AckResult::Failed {
        attempts: policy.max_attempts(),
    }
}

fn matching_ack(bytes: &[u8], seq: u8) -> Option<AckCode> {
    let frame = decode_frame(bytes).ok()?;
    if frame.kind != FrameKind::Ack || frame.seq != seq {
        return None;
    }
    std::str::from_utf8(&frame.payload).ok()?.parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiveAction {
    Execute,
    DuplicateReAck,
}

pub fn dedup_receive(frame: &Frame, last_seq_executed: Option<u8>) -> ReceiveAction {
    if last_seq_executed == Some(frame.seq) {
        ReceiveAction::DuplicateReAck
    } else {
        ReceiveAction::Execute
    }
}
