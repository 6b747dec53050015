//! Link-level simulation and analytical error-rate toolkit for fluid
//! reconfigurable intelligent surface (FRIS) receive index modulation.
//!
//! The surface picks, per beamforming mode, the `K_sel` strongest cascaded
//! links out of a dense candidate grid and phase-aligns them towards one
//! receive antenna. Information rides on the antenna index (RSSK) and
//! optionally on an M-ary symbol (RSM).
//!
//! Module map:
//! - [`numerics`]: Bessel functions, quadrature, root finding
//! - [`channel`]: grid geometry, Jakes correlation, correlated double-Rayleigh draws
//! - [`fris`]: per-mode element selection and phase configuration
//! - [`modem`]: bit mapping, constellations, ML / greedy / list detection
//! - [`analysis`]: post-selection statistics, MGFs, union bound
//! - [`harness`]: configuration, presets, seeded sweeps, CSV output

pub mod analysis;
pub mod channel;
mod error;
pub mod fris;
pub mod harness;
pub mod modem;
pub mod numerics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
