use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{compensated_radial_velocity, AccuracyReference, RadarNoiseConfig};
use crate::geometry::{from_polar, line_of_sight, to_polar};
use crate::radar_types::rcs_linear;
use crate::{accuracy_scale, NoiseLevel, RadarFrame, RadarPoint, SensorModel};

/// One-sigma measurement accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    /// meters
    pub r: f64,
    /// degrees
    pub theta: f64,
    /// m/s
    pub v: f64,
}

/// Perturbation applied to one surviving point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub index: usize,
    /// meters, after range clamping
    pub dr: f64,
    /// degrees
    pub dtheta: f64,
    /// m/s, change of the velocity magnitude
    pub dv: f64,
}

/// Linear RCS that receives exactly the manufacturer accuracy.
pub fn reference_rcs_linear(frame: &RadarFrame, reference: AccuracyReference) -> Option<f64> {
    match reference {
        AccuracyReference::FrameMax => frame.max_rcs_linear(),
        AccuracyReference::Absolute(dbsm) => Some(rcs_linear(dbsm)),
    }
}

/// Accuracy for one point: manufacturer accuracy × `sqrt(σ_ref/σ)` × `10^(n/2)`,
/// taking SNR proportional to RCS and accuracy to `1/sqrt(SNR)`.
pub fn per_point_accuracy(
    point: &RadarPoint,
    reference_rcs_linear: f64,
    model: &SensorModel,
    level: NoiseLevel,
) -> Accuracy {
    let factor = (reference_rcs_linear / point.rcs_linear()).sqrt() * accuracy_scale(level);
    Accuracy {
        r: model.acc_r * factor,
        theta: model.acc_theta * factor,
        v: model.acc_v * factor,
    }
}

fn normal(std: f64) -> Normal<f64> {
    Normal::new(0.0, std).expect("accuracy is finite and non-negative")
}

fn rescale_code(code: i8, factor: f64) -> i8 {
    (f64::from(code) * factor).round().clamp(0.0, 31.0) as i8
}

/// Adds Gaussian range, azimuth and speed errors to every point.
///
/// Range is clamped at the sensor minimum. Speed noise acts on the magnitude
/// of `(vx, vy)` and keeps its direction; a still point is pushed along the
/// (noisy) line of sight. The compensated radial velocity is rebuilt from the
/// noisy velocity and line of sight. `z` and the status fields are preserved.
pub fn apply_measurement_noise<R: Rng + ?Sized>(
    frame: &RadarFrame,
    model: &SensorModel,
    cfg: &RadarNoiseConfig,
    level: NoiseLevel,
    ego: [f64; 2],
    rng: &mut R,
) -> (RadarFrame, Vec<ShiftRecord>) {
    if frame.is_empty() || (cfg.skip_shift_at_zero && level.fraction() == 0.0) {
        return (frame.clone(), Vec::new());
    }
    let reference = reference_rcs_linear(frame, cfg.accuracy_reference)
        .expect("non-empty frame has a maximum RCS");
    let rms_factor = accuracy_scale(level);

    let mut records = Vec::with_capacity(frame.len());
    let points = frame
        .points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let acc = per_point_accuracy(p, reference, model, level);
            let w_r = normal(acc.r).sample(rng);
            let w_theta = normal(acc.theta).sample(rng);
            let w_v = normal(acc.v).sample(rng);

            let (r, theta) = to_polar(p.x, p.y).unwrap_or((0.0, 0.0));
            let r_new = (r + w_r).max(model.r_min);
            let theta_new = theta + w_theta;
            let (x, y) = from_polar(r_new, theta_new);
            let los = line_of_sight(theta_new);

            let speed = p.vx.hypot(p.vy);
            let velocity = if speed > 0.0 {
                let k = (speed + w_v) / speed;
                [p.vx * k, p.vy * k]
            } else {
                [w_v * los[0], w_v * los[1]]
            };
            let [vx_comp, vy_comp] = compensated_radial_velocity(velocity, los, ego);

            records.push(ShiftRecord {
                index,
                dr: r_new - r,
                dtheta: w_theta,
                dv: w_v,
            });
            let mut out = RadarPoint {
                x,
                y,
                vx: velocity[0],
                vy: velocity[1],
                vx_comp,
                vy_comp,
                ..*p
            };
            if cfg.rescale_rms {
                for code in [
                    &mut out.x_rms,
                    &mut out.y_rms,
                    &mut out.vx_rms,
                    &mut out.vy_rms,
                ] {
                    *code = rescale_code(*code, rms_factor);
                }
            }
            out
        })
        .collect();
    (
        RadarFrame {
            points,
            ego_velocity: frame.ego_velocity,
        },
        records,
    )
}
