//! Seeded synthesis of camera and radar sensor failures.
//!
//! The crate is organised by sensor:
//!
//! * [`camera`] degrades 8-bit RGB images (blur, high/low exposure, additive grain).
//! * [`radar`] degrades radar sweeps in three stages: ghost points, RCS-ruled
//!   false negatives and accuracy-driven measurement shifts.
//! * [`io`] reads and writes the 18-field radar PCD format and images, and
//!   generates labeled datasets with a line-delimited manifest.
//! * [`validation`] measures the synthesizers against their analytic contracts;
//!   [`render`] draws bird-eye-view rasters and comparison strips.
//!
//! Every random draw comes from an [`RngStream`] substream keyed by sample
//! identity, so results do not depend on thread count or scheduling.

pub mod camera;
mod error;
pub mod geometry;
mod image_buffer;
pub mod io;
mod level;
pub mod radar;
mod radar_types;
pub mod render;
mod rng;
mod sensor;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::{from_polar, to_polar};
pub use image_buffer::ImageBuffer;
pub use level::{accuracy_scale, snr_scale, NoiseLevel};
pub use radar_types::{RadarFrame, RadarPoint};
pub use rng::{RngStream, StreamRng};
pub use sensor::{FovBracket, SensorModel};
