//! Dual-antenna UWB angle-of-arrival and ranging toolkit.
//!
//! A two-antenna UWB receiver measures the carrier phase difference of an
//! arriving frame and maps it to a planar angle of arrival; two-way ranging
//! timestamps give the distance. This crate models that measurement chain
//! end to end:
//!
//! - [`angle`] — canonical wrapped angles and circular statistics;
//! - [`propagation`] — far-field and near-field phase models, the arcsine
//!   angle estimator, wrap-around and front-back folding;
//! - [`twr`] — single-sided two-way-ranging timestamp synthesis/inversion;
//! - [`channel`] — synthetic measurement records with dual impulse
//!   responses, multipath echoes and calibrated noise;
//! - [`dataset`] — canonical dataset files, quality filters, train/test
//!   splits, and an import adapter for external captures;
//! - [`features`] — model inputs (scaled scalars plus windowed impulse response
//!   samples) and training targets (error sine/cosine, distance, zone);
//! - [`model`] — trainable correctors: a fully connected network, boosted
//!   regression trees, per-zone polynomials, plus a binary model container;
//! - [`metrics`] — wrap-safe evaluation metrics, stability experiments and
//!   report emission;
//! - [`config`] / [`commands`] — reproducible experiment pipeline used by
//!   the `uwb-aoa` binary (`simulate | import | train | evaluate | report`).
//!
//! Every randomized stage is seed-deterministic: rerunning a command with
//! the same configuration reproduces its outputs byte for byte.
//!
//! See the `examples/` directory for one runnable walkthrough per major
//! capability:
//!
//! ```bash
//! cargo run --release --example pdoa_sweep
//! cargo run --release --example train_mlp_correction
//! ```

pub mod angle;
pub mod channel;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod features;
pub mod metrics;
pub mod model;
pub mod propagation;
pub mod twr;

pub use angle::{angular_difference, circular_mean_std, wrap_degrees, Angle, CircularStats};
pub use channel::{ChannelProfile, Cir, MeasurementRecord, MultipathTap, QualityFlags};
pub use propagation::{
    aoa_from_pdoa, aoa_from_pdoa_clamped, pdoa_far_field, pdoa_near_field, uwb_pulse,
    AntennaGeometry, NearFieldSource, PropagationResult, SPEED_OF_LIGHT,
};
pub use twr::{estimate_distance, synthesize_twr, TwrExchange};
