//! Transmitter / control side.
//!
//! Admits clients through the auth engine, hands out bearer session tokens,
//! queues their commands and dispatches them one at a time over the radio
//! with stop-and-wait ARQ. All decisions and ticket transitions happen under
//! one lock, so they are totally ordered and audited in that order.
//!
//! The transmitter log carries exactly the startup banner and one
//! `Sending command: <token>` line per dispatched ticket.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;
use tokio::sync::broadcast;

use crate::auth::{self, Allowlist, AttemptRecord, AttemptState, AuthOutcome, AuthPolicy};
use crate::clock::{Clock, Timestamp};
use crate::model::{decode_command, AckCode, Command, MacAddress};
use crate::store::{
    is_valid_label, load_allowlist, save_allowlist, AllowlistError, AuditKind, AuditRecord,
    AuditWriter,
};
use crate::textlog::{LineLog, LineSink};
use crate::wire::{arq_send, AckResult, ArqChannel, ArqPolicy};

pub const BANNER: &str = "LoRa initialized successfully.";
pub const DEFAULT_SESSION_LIFETIME_SECS: i64 = 3600;
pub const EVENT_BUFFER: usize = 256;

pub fn sending_line(cmd: Command) -> String {
    format!("Sending command: {cmd}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    pub token: String,
    pub mac: MacAddress,
    pub created_at: Timestamp,
    pub expires_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TicketStatus {
    Queued,
    Sent,
    Acked { code: AckCode },
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandTicket {
    pub ticket_id: u64,
    pub command: Command,
    pub seq: u8,
    pub mac: MacAddress,
    pub status: TicketStatus,
    /// Transmissions used, once the exchange finished.
    pub attempts: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SessionDenied {
    #[error("access denied ({failures} consecutive failures)")]
    Denied { failures: u32 },
    #[error("access locked until {until}")]
    DeniedLocked { until: Timestamp },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandRejected {
    #[error("invalid or expired session")]
    InvalidSession,
    #[error("unknown command: {0}")]
    UnknownCommand(String),
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unknown ticket {0}")]
    UnknownTicket(u64),
    #[error("MAC {0} is not in the allowlist")]
    NotInAllowlist(MacAddress),
    #[error("invalid label")]
    InvalidLabel,
    #[error("no allowlist file configured")]
    NoAllowlistFile,
    #[error(transparent)]
    Allowlist(#[from] AllowlistError),
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub auth: AuthPolicy,
    pub arq: ArqPolicy,
    pub session_lifetime_ms: i64,
    /// When set, admin changes to the allowlist are saved here.
    pub allowlist_path: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            auth: AuthPolicy::default(),
            arq: ArqPolicy::default(),
            session_lifetime_ms: DEFAULT_SESSION_LIFETIME_SECS * 1000,
            allowlist_path: None,
        }
    }
}

/// Where audit records go: an optional file, an optional in-memory copy,
/// and the live event stream.
#[derive(Debug)]
pub struct AuditTrail {
    writer: Option<AuditWriter>,
    memory: Option<Vec<AuditRecord>>,
    events: broadcast::Sender<AuditRecord>,
    write_errors: u64,
}

impl AuditTrail {
    pub fn new(writer: Option<AuditWriter>, keep_in_memory: bool) -> Self {
        Self {
            writer,
            memory: keep_in_memory.then(Vec::new),
            events: broadcast::channel(EVENT_BUFFER).0,
            write_errors: 0,
        }
    }

    fn emit(&mut self, record: AuditRecord) {
        if let Some(w) = self.writer.as_mut() {
            if let Err(e) = w.append(&record) {
                self.write_errors += 1;
                eprintln!("audit write failed: {e}");
            }
        }
        if let Some(m) = self.memory.as_mut() {
            m.push(record.clone());
        }
        // No subscribers is fine.
        let _ = self.events.send(record);
    }
}

struct Core {
    allowlist: Allowlist,
    attempts: AttemptState,
    sessions: HashMap<String, Session>,
    tickets: BTreeMap<u64, CommandTicket>,
    queue: VecDeque<u64>,
    next_ticket: u64,
    next_seq: u8,
    in_flight: Option<u64>,
}

pub struct Gateway {
    core: Mutex<Core>,
    work: Condvar,
    audit: Mutex<AuditTrail>,
    tx_log: Mutex<LineLog>,
    clock: Arc<dyn Clock>,
    config: GatewayConfig,
    shutdown: AtomicBool,
    dispatched: AtomicU64,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Gateway {
    pub fn new(
        allowlist: Allowlist,
        config: GatewayConfig,
        audit: AuditTrail,
        clock: Arc<dyn Clock>,
    ) -> Self {
        Self {
            core: Mutex::new(Core {
                allowlist,
                attempts: AttemptState::new(),
                sessions: HashMap::new(),
                tickets: BTreeMap::new(),
                queue: VecDeque::new(),
                next_ticket: 1,
                next_seq: 0,
                in_flight: None,
            }),
            work: Condvar::new(),
            audit: Mutex::new(audit),
            tx_log: Mutex::new(LineLog::unbounded()),
            clock,
            config,
            shutdown: AtomicBool::new(false),
            dispatched: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn mirror_transmitter_log(&self, sink: LineSink) {
        lock(&self.tx_log).add_mirror(sink);
    }

    /// Writes the startup banner line. Called once the link is up.
    pub fn startup_banner(&self) {
        lock(&self.tx_log).push(BANNER);
    }

    pub fn transmitter_log(&self) -> Vec<String> {
        lock(&self.tx_log).lines()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<AuditRecord> {
        lock(&self.audit).events.subscribe()
    }

    /// Records kept in memory, if the trail was built with that option.
    pub fn audit_records(&self) -> Vec<AuditRecord> {
        lock(&self.audit).memory.clone().unwrap_or_default()
    }

    pub fn audit_write_errors(&self) -> u64 {
        lock(&self.audit).write_errors
    }

    fn audit(&self, kind: AuditKind, mac: Option<MacAddress>, detail: impl Into<String>) {
        let record = AuditRecord::new(self.clock.now(), kind, mac, detail);
        lock(&self.audit).emit(record);
    }

    pub fn open_session(&self, mac: MacAddress) -> Result<Session, SessionDenied> {
        let now = self.clock.now();
        let mut core = lock(&self.core);
        core.sessions.retain(|_, s| now < s.expires_at);
        let Core {
            allowlist,
            attempts,
            ..
        } = &mut *core;
        let decision = auth::authenticate(mac, allowlist, attempts, &self.config.auth, now);
        let result = match decision.outcome {
            AuthOutcome::Granted { .. } => {
                let label = core.allowlist.label(&mac).unwrap_or_default().to_string();
                let session = Session {
                    token: format!("{:032x}", rand::rng().random::<u128>()),
                    mac,
                    created_at: now,
                    expires_at: now.plus_millis(self.config.session_lifetime_ms),
                };
                core.sessions.insert(session.token.clone(), session.clone());
                self.audit(AuditKind::AuthGranted, Some(mac), label);
                Ok(session)
            }
            AuthOutcome::Denied { failures_so_far } => {
                self.audit(
                    AuditKind::AuthDenied,
                    Some(mac),
                    failures_so_far.to_string(),
                );
                Err(SessionDenied::Denied {
                    failures: failures_so_far,
                })
            }
            AuthOutcome::DeniedLocked { locked_until } => {
                self.audit(AuditKind::AuthDenied, Some(mac), "locked");
                Err(SessionDenied::DeniedLocked {
                    until: locked_until,
                })
            }
        };
        if let Some(alert) = decision.alert {
            self.audit(
                AuditKind::Alert,
                Some(alert.mac),
                auth::FAILURE_THRESHOLD.to_string(),
            );
        }
        result
    }

    /// The MAC behind a live session token.
    pub fn session_mac(&self, token: &str) -> Option<MacAddress> {
        let now = self.clock.now();
        lock(&self.core)
            .sessions
            .get(token)
            .filter(|s| now < s.expires_at)
            .map(|s| s.mac)
    }

    pub fn submit_command(
        &self,
        token: &str,
        command: &str,
    ) -> Result<CommandTicket, CommandRejected> {
        let now = self.clock.now();
        let mut core = lock(&self.core);
        let mac = core
            .sessions
            .get(token)
            .filter(|s| now < s.expires_at)
            .map(|s| s.mac)
            .ok_or(CommandRejected::InvalidSession)?;
        let command = decode_command(command)
            .map_err(|_| CommandRejected::UnknownCommand(command.to_string()))?;

        let ticket = CommandTicket {
            ticket_id: core.next_ticket,
            command,
            seq: core.next_seq,
            mac,
            status: TicketStatus::Queued,
            attempts: None,
        };
        core.next_ticket += 1;
        core.next_seq = core.next_seq.wrapping_add(1);
        core.tickets.insert(ticket.ticket_id, ticket.clone());
        core.queue.push_back(ticket.ticket_id);
        drop(core);
        self.work.notify_all();
        Ok(ticket)
    }

    pub fn poll_ticket(&self, ticket_id: u64) -> Result<CommandTicket, GatewayError> {
        lock(&self.core)
            .tickets
            .get(&ticket_id)
            .cloned()
            .ok_or(GatewayError::UnknownTicket(ticket_id))
    }

    /// Number of tickets currently in `Sent` state (0 or 1).
    pub fn tickets_in_flight(&self) -> usize {
        usize::from(lock(&self.core).in_flight.is_some())
    }

    pub fn queued(&self) -> usize {
        lock(&self.core).queue.len()
    }

    /// Runs the ticket at the head of the queue to completion. Returns
    /// `false` if the queue was empty.
    pub fn dispatch_one<C: ArqChannel + ?Sized>(&self, channel: &mut C) -> bool {
        let (id, command, seq, mac) = {
            let mut core = lock(&self.core);
            let Some(id) = core.queue.pop_front() else {
                return false;
            };
            core.in_flight = Some(id);
            let t = core.tickets.get_mut(&id).expect("queued tickets exist");
            t.status = TicketStatus::Sent;
            let snapshot = (id, t.command, t.seq, t.mac);
            lock(&self.tx_log).push(sending_line(snapshot.1));
            self.audit(
                AuditKind::CommandSent,
                Some(snapshot.3),
                snapshot.1.to_string(),
            );
            snapshot
        };

        let result = arq_send(command, seq, channel, &self.config.arq);

        let mut core = lock(&self.core);
        let t = core.tickets.get_mut(&id).expect("sent tickets exist");
        t.attempts = Some(result.attempts());
        match result {
            AckResult::Acked { code, .. } => {
                t.status = TicketStatus::Acked { code };
                self.audit(
                    AuditKind::CommandAcked,
                    Some(mac),
                    format!("{command}:{code}"),
                );
            }
            AckResult::Failed { .. } => {
                t.status = TicketStatus::Failed;
                self.audit(AuditKind::CommandFailed, Some(mac), command.to_string());
            }
        }
        core.in_flight = None;
        self.dispatched.fetch_add(1, Ordering::SeqCst);
        drop(core);
        self.work.notify_all();
        true
    }

    /// Dispatches until the queue is empty; returns how many tickets ran.
    pub fn drain<C: ArqChannel + ?Sized>(&self, channel: &mut C) -> usize {
        let mut n = 0;
        while self.dispatch_one(channel) {
            n += 1;
        }
        n
    }

    /// Dispatch loop for a dedicated thread. Returns after [`Gateway::shutdown`].
    pub fn run_dispatcher<C: ArqChannel + ?Sized>(&self, channel: &mut C) {
        loop {
            {
                let mut core = lock(&self.core);
                while core.queue.is_empty() && !self.shutdown.load(Ordering::SeqCst) {
                    core = self.work.wait(core).unwrap_or_else(|e| e.into_inner());
                }
                if self.shutdown.load(Ordering::SeqCst) {
                    return;
                }
            }
            self.dispatch_one(channel);
        }
    }

    pub fn shutdown(&self) {
        self.shutdown.store(true, Ordering::SeqCst);
        let _guard = lock(&self.core);
        self.work.notify_all();
    }

    /// Blocks until no ticket is queued or in flight.
    pub fn wait_idle(&self) {
        let mut core = lock(&self.core);
        while !core.queue.is_empty() || core.in_flight.is_some() {
            core = self.work.wait(core).unwrap_or_else(|e| e.into_inner());
        }
    }

    pub fn allowlist(&self) -> Allowlist {
        lock(&self.core).allowlist.clone()
    }

    pub fn attempt_record(&self, mac: &MacAddress) -> AttemptRecord {
        lock(&self.core).attempts.record(mac)
    }

    pub fn is_locked(&self, mac: &MacAddress) -> bool {
        auth::is_locked(mac, &lock(&self.core).attempts, self.clock.now())
    }

    /// Adds or relabels an allowlist entry and persists the list. Returns
    /// `true` if the MAC was new.
    pub fn admin_put(&self, mac: MacAddress, label: &str) -> Result<bool, GatewayError> {
        if !is_valid_label(label) {
            return Err(GatewayError::InvalidLabel);
        }
        let mut core = lock(&self.core);
        let mut next = core.allowlist.clone();
        let created = next.insert(mac, label).is_none();
        self.persist(&next)?;
        core.allowlist = next;
        self.audit(AuditKind::AdminAdd, Some(mac), label);
        Ok(created)
    }

    /// Removes an allowlist entry, persists the list and revokes the MAC's
    /// open sessions.
    pub fn admin_remove(&self, mac: MacAddress) -> Result<(), GatewayError> {
        let mut core = lock(&self.core);
        let mut next = core.allowlist.clone();
        let label = next.remove(&mac).ok_or(GatewayError::NotInAllowlist(mac))?;
        self.persist(&next)?;
        core.allowlist = next;
        core.sessions.retain(|_, s| s.mac != mac);
        self.audit(AuditKind::AdminRemove, Some(mac), label);
        Ok(())
    }

    /// Clears a MAC's failure counter and lock.
    pub fn admin_reset_attempts(&self, mac: &MacAddress) {
        auth::record_success_reset(mac, &mut lock(&self.core).attempts);
    }

    /// Re-reads the allowlist file.
    pub fn admin_reload(&self) -> Result<usize, GatewayError> {
        let path = self
            .config
            .allowlist_path
            .as_ref()
            .ok_or(GatewayError::NoAllowlistFile)?;
        let fresh = load_allowlist(path)?;
        let n = fresh.len();
        lock(&self.core).allowlist = fresh;
        Ok(n)
    }

    fn persist(&self, allowlist: &Allowlist) -> Result<(), GatewayError> {
        if let Some(path) = &self.config.allowlist_path {
            save_allowlist(allowlist, path)?;
        }
        Ok(())
    }
}
