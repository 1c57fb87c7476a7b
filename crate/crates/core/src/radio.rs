//! The simulated radio path between gateway and application node.
//!
//! [`SimRadio`] owns the half-duplex medium and delivers downlink frames to
//! the node, which answers on the same medium. It is the gateway's
//! [`ArqChannel`]: everything runs on the simulated clock, so an exchange
//! completes instantly in wall time.

use std::sync::{Arc, Mutex, MutexGuard};

use crate::link::{
    airtime_ms, DeliveryOutcome, LinkConfig, LinkError, MediumState, RejectReason, SimTime,
};
use crate::node::AppNode;
use crate::wire::ArqChannel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Gateway to node.
    Down,
    /// Node to gateway.
    Up,
}

/// One frame's use of the medium.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub direction: Direction,
    pub start: SimTime,
    pub end: SimTime,
    pub outcome: DeliveryOutcome,
}

pub type NodeHandle = Arc<Mutex<AppNode>>;

pub struct SimRadio {
    medium: MediumState,
    downlink: LinkConfig,
    uplink: LinkConfig,
    node: NodeHandle,
    in_flight: Option<Direction>,
    transcript: Option<Vec<Transmission>>,
}

impl SimRadio {
    /// Both directions share `cfg`, including its loss probability.
    pub fn new(cfg: LinkConfig, node: NodeHandle) -> Result<Self, LinkError> {
        Self::with_uplink(cfg.clone(), cfg, node)
    }

    /// Separate settings for the ack leg. The loss stream is seeded from
    /// the downlink's `rng_seed` and shared by both directions.
    pub fn with_uplink(
        downlink: LinkConfig,
        uplink: LinkConfig,
        node: NodeHandle,
    ) -> Result<Self, LinkError> {
        uplink.validate()?;
        Ok(Self {
            medium: MediumState::new(&downlink)?,
            downlink,
            uplink,
            node,
            in_flight: None,
            transcript: None,
        })
    }

    pub fn record_transcript(&mut self) {
        self.transcript.get_or_insert_with(Vec::new);
    }

    pub fn transcript(&self) -> &[Transmission] {
        self.transcript.as_deref().unwrap_or(&[])
    }

    pub fn node(&self) -> &NodeHandle {
        &self.node
    }

    pub fn downlink(&self) -> &LinkConfig {
        &self.downlink
    }

    fn lock_node(&self) -> MutexGuard<'_, AppNode> {
        self.node.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn advance(&mut self, to: SimTime) -> Option<Vec<u8>> {
        let to = to.max(self.medium.now());
        self.medium.advance(to).expect("advance never regresses")
    }

    fn put_on_air(&mut self, bytes: &[u8], direction: Direction) -> DeliveryOutcome {
        let start = self.medium.now();
        let cfg = match direction {
            Direction::Down => &self.downlink,
            Direction::Up => &self.uplink,
        };
        let outcome = self.medium.transmit(bytes, start, cfg);
        if !matches!(outcome, DeliveryOutcome::Rejected(_)) {
            let end = start + airtime_ms(bytes.len(), cfg);
            if let Some(t) = self.transcript.as_mut() {
                t.push(Transmission {
                    direction,
                    start,
                    end,
                    outcome,
                });
            }
        }
        if matches!(outcome, DeliveryOutcome::Delivered { .. }) {
            self.in_flight = Some(direction);
        }
        outcome
    }

    /// Delivers the in-flight frame. Node replies go straight back on air;
    /// uplink frames are returned to the caller.
    fn deliver_next(&mut self) -> Option<Vec<u8>> {
        let at = self.medium.in_flight_deadline()?;
        let bytes = self.advance(at)?;
        match self.in_flight.take()? {
            Direction::Up => Some(bytes),
            Direction::Down => {
                let reply = self.lock_node().on_frame(&bytes);
                if let Some(ack) = reply {
                    let idle_at = self.medium.busy_until();
                    self.advance(idle_at);
                    self.put_on_air(&ack, Direction::Up);
                }
                None
            }
        }
    }

    /// Runs the medium until nothing is on air. Uplink frames that arrive
    /// meanwhile are discarded.
    fn settle(&mut self) {
        while self.medium.in_flight_deadline().is_some() {
            self.deliver_next();
        }
        let idle_at = self.medium.busy_until();
        self.advance(idle_at);
    }
}

impl ArqChannel for SimRadio {
    fn now(&self) -> f64 {
        self.medium.now()
    }

    fn send_frame(&mut self, bytes: &[u8]) -> bool {
        self.settle();
        match self.put_on_air(bytes, Direction::Down) {
            DeliveryOutcome::Rejected(RejectReason::TooLong) => false,
            DeliveryOutcome::Rejected(RejectReason::Busy) => unreachable!("medium settled"),
            _ => true,
        }
    }

    fn await_frame(&mut self, deadline: f64) -> Option<Vec<u8>> {
        loop {
            match self.medium.in_flight_deadline() {
                Some(at) if at <= deadline => {
                    if let Some(frame) = self.deliver_next() {
                        return Some(frame);
                    }
                }
                _ => {
                    self.advance(deadline);
                    return None;
                }
            }
        }
    }
}
