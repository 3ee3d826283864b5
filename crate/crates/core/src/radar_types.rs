use serde::{Deserialize, Serialize};

use crate::geometry;

/// One radar return with the full 18-field record of the sensor.
///
/// Float fields are held as `f64`; the on-disk format stores `f32`, which
/// widens exactly, so reading and re-writing a file is lossless.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadarPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub dyn_prop: i8,
    pub id: i16,
    /// Radar cross section, dBsm.
    pub rcs: f64,
    pub vx: f64,
    pub vy: f64,
    pub vx_comp: f64,
    pub vy_comp: f64,
    pub is_quality_valid: i8,
    pub ambig_state: i8,
    pub x_rms: i8,
    pub y_rms: i8,
    pub invalid_state: i8,
    pub pdh0: i8,
    pub vx_rms: i8,
    pub vy_rms: i8,
}

impl RadarPoint {
    pub fn at(x: f64, y: f64, rcs: f64) -> Self {
        RadarPoint {
            x,
            y,
            rcs,
            ..Default::default()
        }
    }

    #[inline]
    pub fn range(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Azimuth in degrees; `0` for a point at the origin.
    pub fn azimuth(&self) -> f64 {
        geometry::to_polar(self.x, self.y).map_or(0.0, |(_, t)| t)
    }

    /// RCS converted from dBsm to square meters.
    #[inline]
    pub fn rcs_linear(&self) -> f64 {
        rcs_linear(self.rcs)
    }

    /// Received-power proxy `σ / r⁴` with `σ` in square meters.
    #[inline]
    pub fn power_ratio(&self) -> f64 {
        // (x² + y²)² avoids the rounding of a square root
        let r2 = self.x * self.x + self.y * self.y;
        self.rcs_linear() / (r2 * r2)
    }
}

#[inline]
pub(crate) fn rcs_linear(dbsm: f64) -> f64 {
    10f64.powf(dbsm / 10.0)
}

/// One sweep of the radar.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RadarFrame {
    pub points: Vec<RadarPoint>,
    /// Ego velocity in m/s when known from metadata.
    pub ego_velocity: Option<[f64; 2]>,
}

impl RadarFrame {
    pub fn new(points: Vec<RadarPoint>) -> Self {
        RadarFrame {
            points,
            ego_velocity: None,
        }
    }

    pub fn with_ego_velocity(mut self, v: [f64; 2]) -> Self {
        self.ego_velocity = Some(v);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Range of the farthest point, `0` for an empty frame.
    pub fn r_max(&self) -> f64 {
        self.points
            .iter()
            .map(RadarPoint::range)
            .fold(0.0, f64::max)
    }

    /// Detection threshold of the frame: the smallest `σ/r⁴` over points
    /// with nonzero range. `None` when no such point exists.
    pub fn beta_min(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.range() > 0.0)
            .map(RadarPoint::power_ratio)
            .min_by(f64::total_cmp)
    }

    /// The frame's RCS values (dBsm), ascending.
    pub fn rcs_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|p| p.rcs).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest linear RCS in the frame.
    pub fn max_rcs_linear(&self) -> Option<f64> {
        self.points
            .iter()
            .map(RadarPoint::rcs_linear)
            .max_by(f64::total_cmp)
    }
}
