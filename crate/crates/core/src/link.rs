//! Simulated LoRa point-to-point medium.
//!
//! Half-duplex, single channel, one frame in flight at a time. Loss is an
//! independent Bernoulli draw per frame from a ChaCha8 stream seeded with
//! `rng_seed`, so a given seed and call sequence always produces the same
//! outcomes. Time is a simulated millisecond clock owned by the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_BITRATE_BPS: u32 = 5470;
pub const DEFAULT_PREAMBLE_OVERHEAD_MS: f64 = 25.0;
pub const DEFAULT_MAX_PAYLOAD_BYTES: usize = 48;

/// Simulation time in milliseconds.
pub type SimTime = f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("loss probability must be within [0, 1], got {0}")]
    LossOutOfRange(f64),
    #[error("propagation delay must be a non-negative finite number, got {0}")]
    BadPropagationDelay(f64),
    #[error("preamble overhead must be a non-negative finite number, got {0}")]
    BadOverhead(f64),
    #[error("bitrate must be positive")]
    ZeroBitrate,
    #[error("max payload must be at least one byte")]
    ZeroMaxPayload,
    #[error("clock regression: {to} ms is before current time {now} ms")]
    ClockRegression { now: SimTime, to: SimTime },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub loss_probability: f64,
    pub propagation_delay_ms: f64,
    pub bitrate_bps: u32,
    pub preamble_overhead_ms: f64,
    pub max_payload_bytes: usize,
    pub rng_seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            loss_probability: 0.0,
            propagation_delay_ms: 0.0,
            bitrate_bps: DEFAULT_BITRATE_BPS,
            preamble_overhead_ms: DEFAULT_PREAMBLE_OVERHEAD_MS,
            max_payload_bytes: DEFAULT_MAX_PAYLOAD_BYTES,
            rng_seed: 0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), LinkError> {
        let p = self.loss_probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(LinkError::LossOutOfRange(p));
        }
        if !(self.propagation_delay_ms.is_finite() && self.propagation_delay_ms >= 0.0) {
            return Err(LinkError::BadPropagationDelay(self.propagation_delay_ms));
        }
        if !(self.preamble_overhead_ms.is_finite() && self.preamble_overhead_ms >= 0.0) {
            return Err(LinkError::BadOverhead(self.preamble_overhead_ms));
        }
        if self.bitrate_bps == 0 {
            return Err(LinkError::ZeroBitrate);
        }
        if self.max_payload_bytes == 0 {
            return Err(LinkError::ZeroMaxPayload);
        }
        Ok(())
    }
}

/// Time a frame of `frame_len_bytes` occupies the medium.
pub fn airtime_ms(frame_len_bytes: usize, cfg: &LinkConfig) -> f64 {
    cfg.preamble_overhead_ms + frame_len_bytes as f64 * 8000.0 / f64::from(cfg.bitrate_bps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Busy,
    TooLong,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeliveryOutcome {
    Delivered { at: SimTime },
    Lost,
    Rejected(RejectReason),
}

#[derive(Debug, Clone, PartialEq)]
struct InFlight {
    bytes: Vec<u8>,
    deliver_at: SimTime,
}

#[derive(Debug, Clone)]
pub struct MediumState {
    now: SimTime,
    busy_until: SimTime,
    rng: ChaCha8Rng,
    in_flight: Option<InFlight>,
}

impl MediumState {
    pub fn new(cfg: &LinkConfig) -> Result<Self, LinkError> {
        cfg.validate()?;
        Ok(Self {
            now: 0.0,
            busy_until: 0.0,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            in_flight: None,
        })
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }

    pub fn is_idle_at(&self, t: SimTime) -> bool {
        t >= self.busy_until && self.in_flight.is_none()
    }

    /// Delivery deadline of the frame currently in flight, if any.
    pub fn in_flight_deadline(&self) -> Option<SimTime> {
        self.in_flight.as_ref().map(|f| f.deliver_at)
    }

    /// Starts a transmission at `send_time`.
    ///
    /// The medium counts as busy while a previous frame's airtime has not
    /// elapsed, or while a delivered frame has not been collected with
    /// [`MediumState::advance`].
    pub fn transmit(
        &mut self,
        frame: &[u8],
        send_time: SimTime,
        cfg: &LinkConfig,
    ) -> DeliveryOutcome {
        if send_time < self.busy_until || self.in_flight.is_some() {
            return DeliveryOutcome::Rejected(RejectReason::Busy);
        }
        if frame.len() > cfg.max_payload_bytes {
            return DeliveryOutcome::Rejected(RejectReason::TooLong);
        }
        self.now = self.now.max(send_time);
        let airtime = airtime_ms(frame.len(), cfg);
        self.busy_until = send_time + airtime;
        let u: f64 = self.rng.random();
        if u < cfg.loss_probability {
            return DeliveryOutcome::Lost;
        }
        let at = send_time + airtime + cfg.propagation_delay_ms;
        self.in_flight = Some(InFlight {
            bytes: frame.to_vec(),
            deliver_at: at,
        });
        DeliveryOutcome::Delivered { at }
    }

    /// Moves the clock to `to`; hands over the in-flight frame if its
    /// deadline has passed. Each frame is returned exactly once.
    pub fn advance(&mut self, to: SimTime) -> Result<Option<Vec<u8>>, LinkError> {
        if to < self.now {
            return Err(LinkError::ClockRegression { now: self.now, to });
        }
        self.now = to;
        match &self.in_flight {
            Some(f) if f.deliver_at <= to => Ok(self.in_flight.take().map(|f| f.bytes)),
            _ => Ok(None),
        }
    }
}
