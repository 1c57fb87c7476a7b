//! Authenticated device-control gateway over a simulated LoRa link.
//!
//! Clients are admitted by MAC-address allowlist. Authorized on/off commands
//! are framed, sent stop-and-wait across a lossy half-duplex link to an
//! application node that drives two LEDs and a motor and answers with a
//! two-digit ack code. Three consecutive failures from one MAC raise an
//! alert and lock that MAC out for a while.

pub mod auth;
pub mod clock;
pub mod demo;
pub mod gateway;
pub mod link;
pub mod model;
pub mod node;
pub mod radio;
pub mod store;
pub mod system;
pub mod textlog;
pub mod wire;

pub use auth::{
    authenticate, is_locked, record_success_reset, AlertEvent, Allowlist, AttemptState,
    AuthDecision, AuthOutcome, AuthPolicy, FAILURE_THRESHOLD,
};
pub use clock::{Clock, ManualClock, SystemClock, Timestamp};
pub use gateway::{CommandRejected, CommandTicket, Gateway, Session, SessionDenied, TicketStatus};
pub use link::{airtime_ms, DeliveryOutcome, LinkConfig, MediumState};
pub use model::{
    ack_code, decode_command, encode_command, format_mac, parse_mac, AckCode, Action, Command,
    DeviceId, MacAddress, ModelError,
};
pub use node::{AppNode, DeviceBank, DeviceStates};
pub use radio::SimRadio;
pub use store::{AuditFilter, AuditKind, AuditRecord};
pub use system::{RunningSystem, System, SystemConfig};
pub use wire::{AckResult, ArqPolicy, Frame, FrameError, FrameKind};
