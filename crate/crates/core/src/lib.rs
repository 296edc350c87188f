//! Multipath-assisted indoor navigation and tracking (MINT) with ultra-wideband signals.
//!
//! The crate simulates UWB channel responses in a 2D floor plan, extracts
//! multipath components, associates them with virtual anchors and tracks an
//! agent with an extended Kalman filter. Conventional ranging-based tracking
//! (ML and jump-back search-forward ranging) is provided for comparison,
//! together with Fisher-information bounds and an experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod bounds;
pub mod error;
pub mod estimation;
pub mod fft;
pub mod geometry;
pub mod harness;
pub mod tracking;
pub mod waveform;

pub use error::{MintError, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
