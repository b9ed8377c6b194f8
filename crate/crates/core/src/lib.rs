//! Microwave-network toolkit for superconducting resonator measurements.
//!
//! The crate covers the full reflection- and hanger-mode measurement chain:
//!
//! - [`rfnet`] — ABCD / S-parameter algebra, reference-impedance
//!   renormalization and three-port termination;
//! - [`circsim`] — synthesis of hanger and circulator-routed reflection
//!   circuits into complex frequency traces;
//! - [`onecal`] — one-port short-open-load error-adapter solving and
//!   de-embedding;
//! - [`resfit`] — resonance circle/phase fitting, diameter correction,
//!   and photon-number conversion;
//! - [`tlsloss`] — power-dependent two-level-system loss model and fits;
//! - [`ioformats`] — Touchstone, calibration-kit, error-term and
//!   power-sweep file I/O.

pub mod circsim;
pub mod consts;
pub mod error;
pub mod ioformats;
mod lm;
pub mod onecal;
pub mod resfit;
pub mod rfnet;
pub mod tlsloss;

pub use error::{Error, Result};
pub use rfnet::{ComplexTrace, FrequencyGrid};
