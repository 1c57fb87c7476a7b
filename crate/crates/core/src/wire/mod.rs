//! Frame format, CRC-16 and stop-and-wait ARQ between gateway and node.

pub mod arq;
pub mod crc;
pub mod frame;

pub use arq::{arq_send, dedup_receive, AckResult, ArqChannel, ArqPolicy, ReceiveAction};
pub use crc::crc16_ccitt_false;
pub use frame::{
    decode_frame, encode_frame, Frame, FrameError, FrameKind, MAX_FRAME_LEN, MAX_PAYLOAD,
    MIN_FRAME_LEN,
};
