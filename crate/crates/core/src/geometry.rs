//! Sensor-frame polar geometry.
//!
//! Range is in meters; azimuth is in degrees, measured counter-clockwise
//! from the boresight (+x axis), so `+y` is at `+90°`.

use crate::{Error, Result};

pub fn to_polar(x: f64, y: f64) -> Result<(f64, f64)> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::PolarOrigin);
    }
    Ok((x.hypot(y), y.atan2(x).to_degrees()))
}

pub fn from_polar(r: f64, theta_deg: f64) -> (f64, f64) {
    let (s, c) = theta_deg.to_radians().sin_cos();
    (r * c, r * s)
}

/// Unit line-of-sight vector for an azimuth in degrees.
pub fn line_of_sight(theta_deg: f64) -> [f64; 2] {
    let (s, c) = theta_deg.to_radians().sin_cos();
    [c, s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_four_five() {
        let (r, t) = to_polar(3.0, 4.0).unwrap();
        assert_eq!(r, 5.0);
        assert!((t - 4f64.atan2(3.0).to_degrees()).abs() < 1e-12);
    }

    #[test]
    fn boresight_unit() {
        assert_eq!(from_polar(1.0, 0.0), (1.0, 0.0));
        let (x, y) = from_polar(2.0, 90.0);
        assert!(x.abs() < 1e-15 && (y - 2.0).abs() < 1e-15);
    }

    #[test]
    fn origin_rejected() {
        assert!(matches!(to_polar(0.0, 0.0), Err(Error::PolarOrigin)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip(x in -250.0f64..250.0, y in -250.0f64..250.0) {
            prop_assume!(x != 0.0 || y != 0.0);
            let (r, t) = to_polar(x, y).unwrap();
            let (bx, by) = from_polar(r, t);
            prop_assert!((bx - x).abs() < 1e-9 && (by - y).abs() < 1e-9);
        }
    }
}
