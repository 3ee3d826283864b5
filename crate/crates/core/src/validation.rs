//! Statistical checks of the synthesizers against their analytic contracts.
//!
//! Every check is deterministic for a given master seed and sample size.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{additive_deltas, CameraConfig};
use crate::radar::{
    apply_false_negatives, apply_measurement_noise, generate_ghost_points, stage,
    AccuracyReference, RadarNoiseConfig,
};
use crate::{
    accuracy_scale, ImageBuffer, NoiseLevel, RadarFrame, RadarPoint, RngStream, SensorModel,
};

/// Relative tolerance on the additive-noise standard deviation.
pub const CAMERA_STD_TOLERANCE: f64 = 0.03;
/// Relative tolerance on shift standard deviations and their ratios.
pub const SHIFT_RATIO_TOLERANCE: f64 = 0.05;
/// Relative tolerance on a single shift standard deviation at the base level.
pub const SHIFT_STD_TOLERANCE: f64 = 0.02;
pub const MIN_CAMERA_SAMPLES: usize = 65_536;
pub const MIN_SHIFT_TRIALS: usize = 100_000;
pub const MIN_DROPOUT_SEEDS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub expected: f64,
    pub measured: f64,
    /// Absolute tolerance on `|measured − expected|`.
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn within(name: impl Into<String>, expected: f64, measured: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            expected,
            measured,
            tolerance,
            passed: (measured - expected).abs() <= tolerance,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: measured {:.6}, expected {:.6} ± {:.6}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.expected,
            self.tolerance
        )?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(
            f,
            "{}: {} checks, {} failed",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            failed
        )
    }
}

/// Sample mean and standard deviation (n − 1 denominator).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Standard deviation of the pre-clamp grain over at least `samples`
/// intensities of a mid-gray image, against `100·n`.
pub fn check_camera_noise_std(
    level: NoiseLevel,
    samples: usize,
    stream: &RngStream,
) -> CheckResult {
    let samples = samples.max(MIN_CAMERA_SAMPLES);
    let width = 256u32;
    let height = samples.div_ceil(width as usize * 3) as u32;
    let img = ImageBuffer::filled(width, height, [128, 128, 128]).unwrap();
    let id = format!("validation/camera_std/{}", level.fraction());
    let deltas = additive_deltas(
        &img,
        level,
        &mut stream.substream(&id, "additive"),
        &CameraConfig::default(),
    );
    let (_, std) = mean_std(&deltas);
    let expected = level.percent();
    CheckResult::within(
        format!("camera additive std at n={}", level.fraction()),
        expected,
        std,
        CAMERA_STD_TOLERANCE * expected,
    )
    .with_note(format!("{} samples", deltas.len()))
}

/// Mean number of points removed by the false-negative stage at each level.
///
/// Seed `s` uses the same substream at every level, so the levels are
/// compared on common random numbers.
pub fn dropout_means(
    frame: &RadarFrame,
    levels: &[NoiseLevel],
    seeds: usize,
    cfg: &RadarNoiseConfig,
    stream: &RngStream,
) -> Vec<f64> {
    levels
        .par_iter()
        .map(|&level| {
            let total: usize = (0..seeds)
                .map(|s| {
                    let mut rng =
                        stream.substream(&format!("validation/dropout/{s}"), stage::DROPOUT);
                    apply_false_negatives(frame, level, cfg, &mut rng).1.len()
                })
                .sum();
            total as f64 / seeds as f64
        })
        .collect()
}

/// Mean dropped count must not decrease from one level to the next.
/// `measured` is the largest decrease observed between consecutive levels.
pub fn check_dropout_monotonicity(
    frame: &RadarFrame,
    levels: &[NoiseLevel],
    seeds: usize,
    cfg: &RadarNoiseConfig,
    stream: &RngStream,
) -> CheckResult {
    let seeds = seeds.max(MIN_DROPOUT_SEEDS);
    let means = dropout_means(frame, levels, seeds, cfg, stream);
    let worst_drop = means
        .windows(2)
        .map(|w| (w[0] - w[1]).max(0.0))
        .fold(0.0, f64::max);
    let table = levels
        .iter()
        .zip(&means)
        .map(|(l, m)| format!("n={:.1}: {m:.2}", l.fraction()))
        .collect::<Vec<_>>()
        .join(", ");
    CheckResult::within(
        format!("dropout mean non-decreasing ({seeds} seeds)"),
        0.0,
        worst_drop,
        0.0,
    )
    .with_note(table)
}

/// Which measured quantity a shift check looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftComponent {
    Range,
    Azimuth,
    Velocity,
}

impl ShiftComponent {
    pub const ALL: [ShiftComponent; 3] = [
        ShiftComponent::Range,
        ShiftComponent::Azimuth,
        ShiftComponent::Velocity,
    ];

    fn name(self) -> &'static str {
        match self {
            ShiftComponent::Range => "range",
            ShiftComponent::Azimuth => "azimuth",
            ShiftComponent::Velocity => "velocity",
        }
    }
}

/// Standard deviations of Δr, Δθ and Δv for `point` over `trials` independent
/// shift draws. The accuracy reference is pinned to `reference_rcs` dBsm.
pub fn shift_stds(
    point: &RadarPoint,
    reference_rcs: f64,
    model: &SensorModel,
    level: NoiseLevel,
    trials: usize,
    stream: &RngStream,
) -> [f64; 3] {
    let cfg = RadarNoiseConfig {
        accuracy_reference: AccuracyReference::Absolute(reference_rcs),
        ..Default::default()
    };
    let frame = RadarFrame::new(vec![*point]);
    let mut rng = stream.substream(
        &format!("validation/shift/{}", level.fraction()),
        stage::SHIFT,
    );
    let mut dr = Vec::with_capacity(trials);
    let mut dt = Vec::with_capacity(trials);
    let mut dv = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (_, rec) = apply_measurement_noise(&frame, model, &cfg, level, [0.0, 0.0], &mut rng);
        dr.push(rec[0].dr);
        dt.push(rec[0].dtheta);
        dv.push(rec[0].dv);
    }
    [mean_std(&dr).1, mean_std(&dt).1, mean_std(&dv).1]
}

/// The point of `frame` with the largest RCS, shifted at `level`, against the
/// manufacturer accuracies scaled by `10^(n/2)`.
pub fn check_shift_std(
    frame: &RadarFrame,
    model: &SensorModel,
    level: NoiseLevel,
    trials: usize,
    stream: &RngStream,
) -> Vec<CheckResult> {
    let trials = trials.max(MIN_SHIFT_TRIALS);
    let point = strongest_point(frame);
    let stds = shift_stds(&point, point.rcs, model, level, trials, stream);
    let k = accuracy_scale(level);
    let expected = [model.acc_r * k, model.acc_theta * k, model.acc_v * k];
    ShiftComponent::ALL
        .iter()
        .enumerate()
        .map(|(i, c)| {
            CheckResult::within(
                format!("{} shift std at n={}", c.name(), level.fraction()),
                expected[i],
                stds[i],
                SHIFT_STD_TOLERANCE * expected[i],
            )
        })
        .collect()
}

/// Ratio of shift standard deviations between two levels against
/// `10^((n₂ − n₁)/2)`, for each component.
pub fn check_shift_scaling(
    frame: &RadarFrame,
    model: &SensorModel,
    from: NoiseLevel,
    to: NoiseLevel,
    trials: usize,
    stream: &RngStream,
) -> Vec<CheckResult> {
    let trials = trials.max(MIN_SHIFT_TRIALS);
    let point = strongest_point(frame);
    let reference = point.rcs;
    let a = shift_stds(&point, reference, model, from, trials, stream);
    let b = if to == from {
        a
    } else {
        shift_stds(&point, reference, model, to, trials, stream)
    };
    let expected = 10f64.powf((to.fraction() - from.fraction()) / 2.0);
    ShiftComponent::ALL
        .iter()
        .enumerate()
        .map(|(i, c)| {
            CheckResult::within(
                format!(
                    "{} shift std ratio n={} -> n={}",
                    c.name(),
                    from.fraction(),
                    to.fraction()
                ),
                expected,
                b[i] / a[i],
                SHIFT_RATIO_TOLERANCE * expected,
            )
        })
        .collect()
}

fn strongest_point(frame: &RadarFrame) -> RadarPoint {
    *frame
        .points
        .iter()
        .max_by(|a, b| a.rcs.total_cmp(&b.rcs))
        .expect("shift checks need a non-empty frame")
}

/// Counts of ghost-point contract violations over many frames.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GhostAudit {
    pub frames: usize,
    pub ghosts: usize,
    pub count_out_of_range: usize,
    pub outside_fov: usize,
    pub outside_range: usize,
    pub not_radial: usize,
    pub rcs_not_from_frame: usize,
    pub count_histogram: Vec<usize>,
}

impl GhostAudit {
    pub fn violations(&self) -> usize {
        self.count_out_of_range
            + self.outside_fov
            + self.outside_range
            + self.not_radial
            + self.rcs_not_from_frame
    }

    pub fn mean_count(&self) -> f64 {
        self.ghosts as f64 / self.frames as f64
    }
}

/// Generates ghosts on `frames` synthetic frames and audits every one of them.
pub fn audit_ghosts(frames: usize, model: &SensorModel, stream: &RngStream) -> GhostAudit {
    let cfg = RadarNoiseConfig::default();
    let mut audit = GhostAudit {
        count_histogram: vec![0; model.ghost_count_max as usize + 1],
        ..Default::default()
    };
    for f in 0..frames {
        let frame = synthetic_frame(
            stream,
            &format!("validation/ghost-frame/{f}"),
            20 + f % 80,
            model,
        );
        let rcs = frame.rcs_sorted();
        let r_hi = (frame.r_max() + model.ghost_margin).min(model.r_abs_max);
        let ghosts = generate_ghost_points(
            &frame,
            model,
            &cfg,
            &mut stream.substream(&format!("validation/ghost/{f}"), stage::GHOST),
        );
        audit.frames += 1;
        audit.ghosts += ghosts.len();
        match audit.count_histogram.get_mut(ghosts.len()) {
            Some(slot) => *slot += 1,
            None => audit.count_out_of_range += 1,
        }
        for g in &ghosts {
            let r = g.range();
            let (lo, hi) = model.azimuth_bounds(r);
            let theta = g.azimuth();
            if theta < lo - 1e-9 || theta > hi + 1e-9 {
                audit.outside_fov += 1;
            }
            if r < model.r_min - 1e-9 || r > r_hi + 1e-9 {
                audit.outside_range += 1;
            }
            let speed = g.vx_comp.hypot(g.vy_comp);
            let cross = g.x * g.vy_comp - g.y * g.vx_comp;
            if speed > 0.0 && cross.abs() >= 1e-9 * speed * r {
                audit.not_radial += 1;
            }
            if rcs.binary_search_by(|v| v.total_cmp(&g.rcs)).is_err() {
                audit.rcs_not_from_frame += 1;
            }
        }
    }
    audit
}

/// A reproducible synthetic sweep: `n` points inside the default FOV with
/// ranges 1–100 m, RCS −10…30 dBsm, a mix of moving and stationary returns
/// and an ego speed of about 8 m/s.
pub fn synthetic_frame(stream: &RngStream, id: &str, n: usize, model: &SensorModel) -> RadarFrame {
    let mut rng = stream.substream(id, "synthetic-frame");
    let ego = [8.0, 0.0];
    let points = (0..n)
        .map(|i| {
            let r: f64 = rng.random_range(1.0..100.0);
            let (lo, hi) = model.azimuth_bounds(r);
            let theta = rng.random_range(lo..=hi);
            let (x, y) = crate::from_polar(r, theta);
            let stationary = rng.random_bool(0.6);
            let (vx, vy) = if stationary {
                (-ego[0], -ego[1])
            } else {
                (rng.random_range(-15.0..15.0), rng.random_range(-3.0..3.0))
            };
            let los = crate::geometry::line_of_sight(theta);
            let [vx_comp, vy_comp] = crate::radar::compensated_radial_velocity([vx, vy], los, ego);
            RadarPoint {
                x,
                y,
                z: 0.0,
                dyn_prop: if stationary { 1 } else { 0 },
                id: i as i16,
                rcs: rng.random_range(-10.0..30.0),
                vx,
                vy,
                vx_comp,
                vy_comp,
                is_quality_valid: 1,
                ambig_state: 3,
                x_rms: rng.random_range(0..20),
                y_rms: rng.random_range(0..20),
                invalid_state: 0,
                pdh0: 1,
                vx_rms: rng.random_range(0..20),
                vy_rms: rng.random_range(0..20),
            }
        })
        .collect();
    RadarFrame::new(points)
}

/// Sizes of the default suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteSize {
    pub camera_samples: usize,
    pub dropout_seeds: usize,
    pub shift_trials: usize,
    pub ghost_frames: usize,
}

impl Default for SuiteSize {
    fn default() -> Self {
        SuiteSize {
            camera_samples: MIN_CAMERA_SAMPLES,
            dropout_seeds: MIN_DROPOUT_SEEDS,
            shift_trials: MIN_SHIFT_TRIALS,
            ghost_frames: 1000,
        }
    }
}

/// Runs every statistical check with the given master seed.
pub fn run_suite(seed: u64, model: &SensorModel, size: SuiteSize) -> ValidationReport {
    let stream = RngStream::new(seed);
    let mut report = ValidationReport::default();
    let lvl = |n: f64| NoiseLevel::new(n).unwrap();

    for n in [0.25, 0.5, 1.0] {
        report.push(check_camera_noise_std(lvl(n), size.camera_samples, &stream));
    }
    let zero = additive_deltas(
        &ImageBuffer::filled(16, 16, [128; 3]).unwrap(),
        NoiseLevel::ZERO,
        &mut stream.substream("validation/camera_zero", "additive"),
        &CameraConfig::default(),
    );
    report.push(CheckResult::within(
        "camera additive std at n=0",
        0.0,
        mean_std(&zero).1,
        0.0,
    ));

    let frame = synthetic_frame(&stream, "validation/frame100", 100, model);
    let grid: Vec<NoiseLevel> = (0..=5).map(|i| lvl(0.2 * f64::from(i))).collect();
    let no_w = RadarNoiseConfig {
        disable_w_noise: true,
        ..Default::default()
    };
    let zero_means = dropout_means(&frame, &[NoiseLevel::ZERO], 1, &no_w, &stream);
    report.push(CheckResult::within(
        "dropout at n=0 without w",
        0.0,
        zero_means[0],
        0.0,
    ));
    let mono = check_dropout_monotonicity(
        &frame,
        &grid,
        size.dropout_seeds,
        &RadarNoiseConfig::default(),
        &stream,
    );
    report.push(mono);

    report.checks.extend(check_shift_std(
        &frame,
        model,
        NoiseLevel::ZERO,
        size.shift_trials,
        &stream,
    ));
    report.checks.extend(check_shift_scaling(
        &frame,
        model,
        NoiseLevel::ZERO,
        NoiseLevel::MAX,
        size.shift_trials,
        &stream,
    ));

    let audit = audit_ghosts(size.ghost_frames, model, &stream);
    report.push(
        CheckResult::within(
            "ghost contract violations",
            0.0,
            audit.violations() as f64,
            0.0,
        )
        .with_note(format!(
            "{} ghosts over {} frames",
            audit.ghosts, audit.frames
        )),
    );
    let expected_mean = f64::from(model.ghost_count_max) / 2.0;
    report.push(CheckResult::within(
        "mean ghost count",
        expected_mean,
        audit.mean_count(),
        0.1,
    ));
    report
}
