use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{compensated_radial_velocity, estimate_ego_velocity, next_ghost_id, RadarNoiseConfig};
use crate::geometry::{from_polar, line_of_sight};
use crate::{RadarFrame, RadarPoint, SensorModel};

/// `invalid_state` codes written on ghost points, one per suspicious state
/// the sensor may report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhostStateTable {
    pub low_rcs: i8,
    pub high_child_probability: i8,
    pub artifact_50_deg: i8,
    pub artifact: i8,
    pub no_local_maximum: i8,
}

impl Default for GhostStateTable {
    fn default() -> Self {
        GhostStateTable {
            low_rcs: 0x04,
            high_child_probability: 0x09,
            artifact_50_deg: 0x0a,
            artifact: 0x0c,
            no_local_maximum: 0x0b,
        }
    }
}

impl GhostStateTable {
    pub fn codes(&self) -> [i8; 5] {
        [
            self.low_rcs,
            self.high_child_probability,
            self.artifact_50_deg,
            self.artifact,
            self.no_local_maximum,
        ]
    }

    pub fn is_valid(&self) -> bool {
        let c = self.codes();
        (0..c.len()).all(|i| (i + 1..c.len()).all(|j| c[i] != c[j]))
    }
}

/// Index into an ascending RCS list of length `len` for a half-Gaussian
/// draw; `|x| >= 1` maps to the last element.
pub(crate) fn rcs_rank(x: f64, len: usize) -> usize {
    ((x.abs() * len as f64).floor() as usize).min(len - 1)
}

/// Synthesizes 0..=`ghost_count_max` multipath ghosts for a frame.
///
/// Range is uniform between the sensor minimum and the farthest point plus
/// the margin, azimuth is uniform inside the FOV bracket of that range.
/// Velocity is borrowed from a random real point and re-projected on the
/// ghost's line of sight; RCS is picked from the frame's sorted RCS values
/// with a half-Gaussian rank, favouring weak returns.
pub fn generate_ghost_points<R: Rng + ?Sized>(
    frame: &RadarFrame,
    model: &SensorModel,
    cfg: &RadarNoiseConfig,
    rng: &mut R,
) -> Vec<RadarPoint> {
    if frame.is_empty() {
        return Vec::new();
    }
    let count = rng.random_range(0..=model.ghost_count_max);
    let rcs_sorted = frame.rcs_sorted();
    let (ego, _) = estimate_ego_velocity(frame, cfg);
    let r_hi = (frame.r_max() + model.ghost_margin).min(model.r_abs_max);
    let rank = Normal::new(0.0, 1.0 / 3.0).expect("valid normal");
    let states = cfg.ghost_states.codes();
    let first_id = next_ghost_id(&frame.points);

    (0..count)
        .map(|k| {
            let r = if r_hi > model.r_min {
                rng.random_range(model.r_min..=r_hi)
            } else {
                model.r_min
            };
            let (lo, hi) = model.azimuth_bounds(r);
            let theta = rng.random_range(lo..=hi);
            let donor = &frame.points[rng.random_range(0..frame.len())];
            let rcs = rcs_sorted[rcs_rank(rank.sample(rng), rcs_sorted.len())];
            let invalid_state = states[rng.random_range(0..states.len())];

            let (x, y) = from_polar(r, theta);
            let [vx_comp, vy_comp] =
                compensated_radial_velocity([donor.vx, donor.vy], line_of_sight(theta), ego);
            RadarPoint {
                x,
                y,
                z: 0.0,
                dyn_prop: donor.dyn_prop,
                id: first_id.saturating_add(k as i16),
                rcs,
                vx: donor.vx,
                vy: donor.vy,
                vx_comp,
                vy_comp,
                is_quality_valid: donor.is_quality_valid,
                ambig_state: donor.ambig_state,
                x_rms: donor.x_rms,
                y_rms: donor.y_rms,
                invalid_state,
                pdh0: cfg.ghost_pdh0,
                vx_rms: donor.vx_rms,
                vy_rms: donor.vy_rms,
            }
        })
        .collect()
}
