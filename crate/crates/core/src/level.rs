use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Degradation dial shared by both sensors.
///
/// The canonical value is a fraction `n >= 0` where `1.0` is the nominal
/// maximum (100 %). Values above one are allowed and simply extrapolate the
/// models; only the 0.0, 0.1, ..., 1.0 grid has a class label.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub const ZERO: NoiseLevel = NoiseLevel(0.0);
    pub const MAX: NoiseLevel = NoiseLevel(1.0);
    /// Number of labeled classes on the default grid.
    pub const CLASSES: u8 = 11;

    pub fn new(fraction: f64) -> Result<Self> {
        if fraction.is_finite() && fraction >= 0.0 {
            Ok(NoiseLevel(fraction))
        } else {
            Err(Error::InvalidLevel(fraction))
        }
    }

    pub fn from_percent(percent: f64) -> Result<Self> {
        Self::new(percent / 100.0).map_err(|_| Error::InvalidLevel(percent))
    }

    /// Level for grid class `class` (0..=10), i.e. `class / 10`.
    pub fn from_class(class: u8) -> Self {
        NoiseLevel(f64::from(class) / 10.0)
    }

    /// The default 11-level grid 0 %, 10 %, ..., 100 %.
    pub fn default_grid() -> Vec<NoiseLevel> {
        (0..Self::CLASSES).map(Self::from_class).collect()
    }

    #[inline]
    pub fn fraction(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn percent(self) -> f64 {
        100.0 * self.0
    }

    /// Class label when the level sits on the 0.1 grid inside `[0, 1]`.
    pub fn class_index(self) -> Option<u8> {
        let scaled = self.0 * 10.0;
        let class = scaled.round();
        if (scaled - class).abs() < 1e-9 && (0.0..=10.0).contains(&class) {
            Some(class as u8)
        } else {
            None
        }
    }
}

impl Default for NoiseLevel {
    fn default() -> Self {
        NoiseLevel::ZERO
    }
}

impl TryFrom<f64> for NoiseLevel {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        NoiseLevel::new(value)
    }
}

impl From<NoiseLevel> for f64 {
    fn from(level: NoiseLevel) -> f64 {
        level.0
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}%", self.percent())
    }
}

/// Linear SNR multiplier for a level: a level of `n` lowers the SNR by
/// `10·n` dB, so the factor is `10^(-n)` (0.1 at 100 %).
pub fn snr_scale(level: NoiseLevel) -> f64 {
    10f64.powf(-level.fraction())
}

/// Multiplier applied to every measurement accuracy. Accuracy goes as
/// `1/sqrt(SNR)`, giving `10^(n/2)`.
pub fn accuracy_scale(level: NoiseLevel) -> f64 {
    1.0 / snr_scale(level).sqrt()
}
