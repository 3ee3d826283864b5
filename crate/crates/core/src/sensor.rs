use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Azimuth coverage up to a range bound. `range_upper: None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovBracket {
    pub range_upper: Option<f64>,
    pub half_angle_deg: f64,
}

impl FovBracket {
    pub const fn new(range_upper: Option<f64>, half_angle_deg: f64) -> Self {
        FovBracket {
            range_upper,
            half_angle_deg,
        }
    }

    fn upper(&self) -> f64 {
        self.range_upper.unwrap_or(f64::INFINITY)
    }
}

/// Physical configuration of the radar being degraded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorModel {
    /// Minimum measurable range, meters.
    pub r_min: f64,
    /// Absolute maximum range, meters.
    pub r_abs_max: f64,
    /// Ghosts may appear up to this far beyond the frame's farthest point.
    pub ghost_margin: f64,
    /// Upper bound (inclusive) of the per-frame ghost count.
    pub ghost_count_max: u32,
    /// Sorted by ascending range bound.
    pub fov_brackets: Vec<FovBracket>,
    /// Manufacturer range accuracy, meters.
    pub acc_r: f64,
    /// Manufacturer azimuth accuracy, degrees.
    pub acc_theta: f64,
    /// Manufacturer velocity accuracy, m/s.
    pub acc_v: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            r_min: 0.2,
            r_abs_max: 250.0,
            ghost_margin: 10.0,
            ghost_count_max: 4,
            fov_brackets: vec![
                FovBracket::new(Some(10.0), 60.0),
                FovBracket::new(Some(100.0), 45.0),
                FovBracket::new(None, 9.0),
            ],
            acc_r: 0.1,
            acc_theta: 0.1,
            acc_v: 0.1,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSensorModel(msg));
        if !(self.r_min > 0.0 && self.r_min < self.r_abs_max) {
            return bad(format!(
                "need 0 < r_min < r_abs_max, got r_min={} r_abs_max={}",
                self.r_min, self.r_abs_max
            ));
        }
        if self.ghost_margin.is_nan() || self.ghost_margin < 0.0 {
            return bad(format!(
                "ghost_margin must be >= 0, got {}",
                self.ghost_margin
            ));
        }
        if self.fov_brackets.is_empty() {
            return bad("at least one FOV bracket is required".into());
        }
        for pair in self.fov_brackets.windows(2) {
            if pair[0].upper() >= pair[1].upper() {
                return bad("FOV brackets must have strictly ascending range bounds".into());
            }
        }
        for b in &self.fov_brackets {
            if !(b.half_angle_deg > 0.0 && b.half_angle_deg <= 90.0) {
                return bad(format!("half angle {} outside (0, 90]", b.half_angle_deg));
            }
        }
        for (name, v) in [
            ("acc_r", self.acc_r),
            ("acc_theta", self.acc_theta),
            ("acc_v", self.acc_v),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }

    /// Azimuth limits `(min, max)` in degrees at range `r`: the first bracket
    /// whose bound exceeds `r`, or the last bracket beyond all bounds.
    pub fn azimuth_bounds(&self, r: f64) -> (f64, f64) {
        let bracket = self
            .fov_brackets
            .iter()
            .find(|b| b.upper() > r)
            .or(self.fov_brackets.last())
            .expect("sensor model has no FOV brackets");
        (-bracket.half_angle_deg, bracket.half_angle_deg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_brackets() {
        let m = SensorModel::default();
        m.validate().unwrap();
        assert_eq!(m.azimuth_bounds(5.0), (-60.0, 60.0));
        assert_eq!(m.azimuth_bounds(50.0), (-45.0, 45.0));
        assert_eq!(m.azimuth_bounds(150.0), (-9.0, 9.0));
        // bounds are exclusive upper limits
        assert_eq!(m.azimuth_bounds(10.0), (-45.0, 45.0));
        assert_eq!(m.azimuth_bounds(100.0), (-9.0, 9.0));
        assert_eq!(m.azimuth_bounds(0.0), (-60.0, 60.0));
    }

    #[test]
    fn validation_errors() {
        let m = SensorModel {
            r_min: 0.0,
            ..Default::default()
        };
        assert!(m.validate().is_err());

        let mut m = SensorModel::default();
        m.fov_brackets.swap(0, 1);
        assert!(m.validate().is_err());

        let mut m = SensorModel::default();
        m.fov_brackets[0].half_angle_deg = 95.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn last_bracket_covers_overflow() {
        let m = SensorModel {
            fov_brackets: vec![FovBracket::new(Some(10.0), 30.0)],
            ..SensorModel::default()
        };
        assert_eq!(m.azimuth_bounds(20.0), (-30.0, 30.0));
    }

    #[test]
    fn serde_round_trip() {
        let m = SensorModel::default();
        let text = serde_json::to_string(&m).unwrap();
        let back: SensorModel = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }
}
