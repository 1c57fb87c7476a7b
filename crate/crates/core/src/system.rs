//! Wires gateway, radio and application node into one process.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use thiserror::Error;

use crate::auth::{Allowlist, AuthPolicy};
use crate::clock::Clock;
use crate::gateway::{AuditTrail, Gateway, GatewayConfig, DEFAULT_SESSION_LIFETIME_SECS};
use crate::link::{LinkConfig, LinkError};
use crate::node::AppNode;
use crate::radio::{NodeHandle, SimRadio};
use crate::store::{AuditError, AuditWriter};
use crate::textlog::LineSink;
use crate::wire::ArqPolicy;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("invalid link configuration: {0}")]
    Link(#[from] LinkError),
    #[error("cannot open audit log: {0}")]
    Audit(#[from] AuditError),
}

pub struct SystemConfig {
    pub link: LinkConfig,
    /// Ack-leg settings; defaults to `link`.
    pub uplink: Option<LinkConfig>,
    /// Defaults to [`ArqPolicy::for_link`].
    pub arq: Option<ArqPolicy>,
    pub auth: AuthPolicy,
    pub session_lifetime_secs: i64,
    pub allowlist: Allowlist,
    pub allowlist_path: Option<PathBuf>,
    pub audit_path: Option<PathBuf>,
    pub keep_audit_in_memory: bool,
    pub transmitter_mirrors: Vec<LineSink>,
    pub receiver_mirrors: Vec<LineSink>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            link: LinkConfig::default(),
            uplink: None,
            arq: None,
            auth: AuthPolicy::default(),
            session_lifetime_secs: DEFAULT_SESSION_LIFETIME_SECS,
            allowlist: Allowlist::new(),
            allowlist_path: None,
            audit_path: None,
            keep_audit_in_memory: false,
            transmitter_mirrors: Vec::new(),
            receiver_mirrors: Vec::new(),
        }
    }
}

pub struct System {
    gateway: Arc<Gateway>,
    node: NodeHandle,
    radio: SimRadio,
}

impl System {
    /// Validates the link, brings everything up and writes the banner.
    pub fn build(config: SystemConfig, clock: Arc<dyn Clock>) -> Result<Self, SystemError> {
        let mut node = AppNode::new();
        for sink in config.receiver_mirrors {
            node.mirror_log_to(sink);
        }
        let node: NodeHandle = Arc::new(Mutex::new(node));
        let uplink = config.uplink.unwrap_or_else(|| config.link.clone());
        let arq = config
            .arq
            .unwrap_or_else(|| ArqPolicy::for_link(&config.link));
        let radio = SimRadio::with_uplink(config.link, uplink, node.clone())?;

        let writer = config
            .audit_path
            .as_deref()
            .map(AuditWriter::open)
            .transpose()?;
        let gateway = Gateway::new(
            config.allowlist,
            GatewayConfig {
                auth: config.auth,
                arq,
                session_lifetime_ms: config.session_lifetime_secs.saturating_mul(1000),
                allowlist_path: config.allowlist_path,
            },
            AuditTrail::new(writer, config.keep_audit_in_memory),
            clock,
        );
        for sink in config.transmitter_mirrors {
            gateway.mirror_transmitter_log(sink);
        }
        gateway.startup_banner();
        Ok(Self {
            gateway: Arc::new(gateway),
            node,
            radio,
        })
    }

    pub fn gateway(&self) -> &Arc<Gateway> {
        &self.gateway
    }

    pub fn node(&self) -> &NodeHandle {
        &self.node
    }

    pub fn radio(&self) -> &SimRadio {
        &self.radio
    }

    pub fn radio_mut(&mut self) -> &mut SimRadio {
        &mut self.radio
    }

    /// Dispatches every queued ticket on the calling thread.
    pub fn drain(&mut self) -> usize {
        self.gateway.drain(&mut self.radio)
    }

    /// Moves the radio onto a dispatcher thread.
    pub fn spawn(self) -> RunningSystem {
        let gateway = self.gateway.clone();
        let mut radio = self.radio;
        let worker = gateway.clone();
        let handle = std::thread::Builder::new()
            .name("wia-dispatch".into())
            .spawn(move || worker.run_dispatcher(&mut radio))
            .expect("spawn dispatcher thread");
        RunningSystem {
            gateway,
            node: self.node,
            dispatcher: Some(handle),
        }
    }
}

pub struct RunningSystem {
    gateway: Arc<Gateway>,
    node: NodeHandle,
    dispatcher: Option<JoinHandle<()>>,
}

impl RunningSystem {
    pub fn gateway(&self) -> &Arc<Gateway> {
        &self.gateway
    }

    pub fn node(&self) -> &NodeHandle {
        &self.node
    }

    pub fn stop(mut self) {
        self.halt();
    }

    fn halt(&mut self) {
        self.gateway.shutdown();
        if let Some(h) = self.dispatcher.take() {
            let _ = h.join();
        }
    }
}

impl Drop for RunningSystem {
    fn drop(&mut self) {
        self.halt();
    }
}
