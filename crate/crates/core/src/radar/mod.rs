//! Three-stage radar degradation: ghost points, RCS-ruled false negatives
//! and accuracy-driven measurement shifts.
//!
//! Ghosts are inserted first and then go through the other two stages like
//! any physical echo. Each stage draws from its own substream.

mod dropout;
mod ghost;
mod shift;

use serde::{Deserialize, Serialize};

use crate::{NoiseLevel, RadarFrame, RadarPoint, RngStream, SensorModel};

pub use dropout::{apply_false_negatives, detection_coefficient};
pub use ghost::{generate_ghost_points, GhostStateTable};
pub use shift::{apply_measurement_noise, per_point_accuracy, Accuracy, ShiftRecord};

/// Substream labels used by [`degrade_frame`].
pub mod stage {
    pub const GHOST: &str = "radar/ghost";
    pub const DROPOUT: &str = "radar/dropout";
    pub const SHIFT: &str = "radar/shift";
}

/// Reference RCS that receives the manufacturer accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccuracyReference {
    /// Largest RCS present in the frame.
    FrameMax,
    /// Fixed RCS in dBsm.
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarNoiseConfig {
    pub ghost_states: GhostStateTable,
    /// `pdh0` written on ghosts (7 = highest false-alarm class).
    pub ghost_pdh0: i8,
    /// `dyn_prop` codes treated as stationary when estimating ego motion.
    pub stationary_dyn_props: Vec<i8>,
    pub accuracy_reference: AccuracyReference,
    /// Drop the `w` term of the detection coefficient.
    pub disable_w_noise: bool,
    /// Leave positions and velocities untouched at a zero level.
    pub skip_shift_at_zero: bool,
    /// Scale the rms status codes of shifted points by the accuracy factor.
    pub rescale_rms: bool,
}

impl Default for RadarNoiseConfig {
    fn default() -> Self {
        RadarNoiseConfig {
            ghost_states: GhostStateTable::default(),
            ghost_pdh0: 7,
            // stationary, stationary candidate, crossing stationary
            stationary_dyn_props: vec![1, 3, 5],
            accuracy_reference: AccuracyReference::FrameMax,
            disable_w_noise: false,
            skip_shift_at_zero: false,
            rescale_rms: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DegradeReport {
    pub n_input: usize,
    pub n_ghosts_added: usize,
    pub n_points_dropped: usize,
    pub n_output: usize,
    /// Ego velocity could not be determined and zero was used.
    pub ego_velocity_fallback: bool,
    pub shifts: Vec<ShiftRecord>,
}

impl DegradeReport {
    pub fn is_consistent(&self) -> bool {
        self.n_output + self.n_points_dropped == self.n_input + self.n_ghosts_added
            && self.shifts.len() <= self.n_output
    }
}

/// Ego velocity estimate and whether it fell back to zero.
///
/// Metadata wins; otherwise the static world is used: stationary returns move
/// at minus the ego velocity, so the negated component-wise median of their
/// relative velocities is returned.
pub fn estimate_ego_velocity(frame: &RadarFrame, cfg: &RadarNoiseConfig) -> ([f64; 2], bool) {
    if let Some(v) = frame.ego_velocity {
        return (v, false);
    }
    let (mut vx, mut vy): (Vec<f64>, Vec<f64>) = frame
        .points
        .iter()
        .filter(|p| cfg.stationary_dyn_props.contains(&p.dyn_prop))
        .map(|p| (p.vx, p.vy))
        .unzip();
    if vx.is_empty() {
        return ([0.0, 0.0], true);
    }
    ([-median(&mut vx), -median(&mut vy)], false)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Compensated radial velocity `(|V_r| − |V_ego|)·V̂_r`, where `V_r` is the
/// projection of `velocity` on the line of sight `los` (unit vector).
pub fn compensated_radial_velocity(velocity: [f64; 2], los: [f64; 2], ego: [f64; 2]) -> [f64; 2] {
    let along = velocity[0] * los[0] + velocity[1] * los[1];
    let dir = if along < 0.0 { [-los[0], -los[1]] } else { los };
    let magnitude = along.abs() - ego[0].hypot(ego[1]);
    [magnitude * dir[0], magnitude * dir[1]]
}

/// Runs ghosts, false negatives and shifts on one frame.
///
/// `frame_id` keys the random substreams; the same `(stream, frame_id)` pair
/// always yields the same output.
pub fn degrade_frame(
    frame: &RadarFrame,
    model: &SensorModel,
    cfg: &RadarNoiseConfig,
    level: NoiseLevel,
    stream: &RngStream,
    frame_id: &str,
) -> (RadarFrame, DegradeReport) {
    let mut report = DegradeReport {
        n_input: frame.len(),
        ..Default::default()
    };

    let ghosts = generate_ghost_points(
        frame,
        model,
        cfg,
        &mut stream.substream(frame_id, stage::GHOST),
    );
    report.n_ghosts_added = ghosts.len();
    let mut with_ghosts = frame.clone();
    with_ghosts.points.extend(ghosts);

    let (survivors, dropped) = apply_false_negatives(
        &with_ghosts,
        level,
        cfg,
        &mut stream.substream(frame_id, stage::DROPOUT),
    );
    report.n_points_dropped = dropped.len();

    let (ego, fallback) = estimate_ego_velocity(frame, cfg);
    report.ego_velocity_fallback = fallback;
    let (out, shifts) = apply_measurement_noise(
        &survivors,
        model,
        cfg,
        level,
        ego,
        &mut stream.substream(frame_id, stage::SHIFT),
    );
    report.shifts = shifts;
    report.n_output = out.len();
    (out, report)
}

pub(crate) fn next_ghost_id(points: &[RadarPoint]) -> i16 {
    points
        .iter()
        .map(|p| p.id)
        .max()
        .map_or(0, |m| m.saturating_add(1))
}
