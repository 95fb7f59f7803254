//! Moving-object detection in multi-spectral push-broom imagery.
//!
//! A push-broom camera with one filter strip per band images the same patch
//! of ground in each band at a slightly different time. An object that moves
//! during that interval shows up displaced between bands, and as a
//! positive/negative pair in the difference of two band images. This crate
//! turns those pairs into cross-band tracks and the tracks into velocities:
//!
//! - [`imaging`]: sensor/orbit geometry and the inter-band acquisition delay.
//! - [`sim`]: a synthetic acquisition simulator that renders scripted movers
//!   through the strip-mosaic process, with per-row timing ground truth.
//! - [`detection`]: band differencing, thresholding, blob extraction, pairing
//!   and track linking.
//! - [`kinematics`]: velocities with mosaic time adjustments, error model,
//!   and the altitude/speed ambiguity of elevated objects.
//! - [`io`]: rasters, scene manifests, TLE and scene-id parsing, reports.

pub mod detection;
pub mod error;
pub mod figures;
pub mod imaging;
pub mod io;
pub mod kinematics;
pub mod pipeline;
pub mod scene;
pub mod sim;

pub use error::{Error, Result};
pub use imaging::{Band, BandInfo, BandLayout, OrbitSpec, SensorSpec, Timing};
pub use scene::{BandImage, MultiBandScene};

/// Two-vector used for positions (x = column / cross-track, y = row /
/// along-track) and velocities.
pub type Vec2 = nalgebra::Vector2<f64>;
