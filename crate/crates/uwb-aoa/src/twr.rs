//! Single-sided two-way-ranging timestamp model.
//!
//! Forward direction: true distance plus responder clock drift and antenna
//! delays produce a (round-trip, reply) timestamp pair. Inverse direction:
//! the standard SS-TWR estimate, using whatever antenna-delay calibration
//! the estimator believes in.

use crate::propagation::SPEED_OF_LIGHT;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TwrError {
    #[error("distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("reply time must be positive, got {0}")]
    NonPositiveReply(f64),
    #[error("responder drift {0} outside plausible range (|drift| < 1e-3)")]
    ImplausibleDrift(f64),
    #[error("malformed exchange: round-trip {round_trip} s shorter than reply {reply} s")]
    MalformedExchange { round_trip: f64, reply: f64 },
}

/// One SS-TWR frame exchange as logged by the initiator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwrExchange {
    /// Round-trip time measured on the initiator clock, seconds.
    pub round_trip_time: f64,
    /// Reply (turnaround) time reported by the responder, seconds.
    pub reply_time: f64,
    /// Responder clock drift relative to the initiator (dimensionless).
    pub responder_drift: f64,
    /// Per-device antenna delay baked into the timestamps, seconds.
    pub antenna_delay: f64,
}

impl TwrExchange {
    /// Timestamps rounded to integer multiples of `tick` seconds.
    /// Device-tick quantization is off by default in the synthesis path.
    pub fn quantized(&self, tick: f64) -> TwrExchange {
        assert!(tick > 0.0);
        TwrExchange {
            round_trip_time: (self.round_trip_time / tick).round() * tick,
            reply_time: (self.reply_time / tick).round() * tick,
            ..*self
        }
    }
}

/// Forward model: timestamps for a given true distance.
///
/// round_trip = 2·ToF + reply·(1 + drift) + 2·antenna_delay
pub fn synthesize_twr(
    true_distance: f64,
    reply_time: f64,
    drift: f64,
    antenna_delay: f64,
) -> Result<TwrExchange, TwrError> {
    if !(true_distance.is_finite() && true_distance >= 0.0) {
        return Err(TwrError::NegativeDistance(true_distance));
    }
    if !(reply_time.is_finite() && reply_time > 0.0) {
        return Err(TwrError::NonPositiveReply(reply_time));
    }
    if !(drift.is_finite() && drift.abs() < 1e-3) {
        return Err(TwrError::ImplausibleDrift(drift));
    }
    let tof = true_distance / SPEED_OF_LIGHT;
    Ok(TwrExchange {
        round_trip_time: 2.0 * tof + reply_time * (1.0 + drift) + 2.0 * antenna_delay,
        reply_time,
        responder_drift: drift,
        antenna_delay,
    })
}

/// Distance estimate with a validity note.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub meters: f64,
    /// Set when the estimate came out negative (miscalibration or noise);
    /// the value is returned as-is, filtering is the ingestion stage's job.
    pub negative: bool,
}

/// Standard SS-TWR inversion using the estimator's own antenna-delay
/// calibration, which may differ from the one baked into the exchange.
pub fn estimate_distance(
    exchange: &TwrExchange,
    antenna_delay_estimate: f64,
) -> Result<DistanceEstimate, TwrError> {
    if exchange.round_trip_time < exchange.reply_time {
        return Err(TwrError::MalformedExchange {
            round_trip: exchange.round_trip_time,
            reply: exchange.reply_time,
        });
    }
    let tof =
        (exchange.round_trip_time - exchange.reply_time - 2.0 * antenna_delay_estimate) / 2.0;
    let meters = tof * SPEED_OF_LIGHT;
    Ok(DistanceEstimate {
        meters,
        negative: meters < 0.0,
    })
}
