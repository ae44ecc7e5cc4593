//! Coverage and beam-management simulation for FR2 (26 GHz) 5G in an indoor
//! factory.
//!
//! The crate synthesizes per-SSB RSRP measurement campaigns over a two-hall
//! factory layout, runs the usual measurement analytics on them (grid
//! averaging, configuration comparison maps, cell coverage CDFs, beam
//! recovery gaps, route smoothing, beam dominance) and solves the beam
//! switch-off problem with a genetic algorithm, a DBSCAN heuristic and an
//! exhaustive reference solver.
//!
//! Module map:
//!
//! - [`layout`]: halls, transmitter pose, LoS/NLoS regions, grids and routes
//! - [`beams`]: SSB beam grids for TX configurations A and B
//! - [`propagation`]: slope-intercept path gain models, presets, shadowing, fitting
//! - [`link`]: link budget, SSB timing, RSRP synthesis and the campaign runner
//! - [`analysis`]: grid maps, coverage CDFs, beam gaps, smoothing, dominance
//! - [`switchoff`]: the beam switch-off objective and its solvers
//! - [`scenario`] / [`cli`]: scenario files, CSV I/O and the command layer

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod analysis;
pub mod beams;
pub mod cli;
pub mod error;
pub mod export;
pub mod layout;
pub mod link;
pub mod propagation;
pub mod scenario;
pub mod switchoff;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default FR2 carrier used throughout (n258).
pub const DEFAULT_CARRIER_HZ: f64 = 26.0e9;

/// Free-space wavelength in meters.
pub fn wavelength(freq_hz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_hz
}
