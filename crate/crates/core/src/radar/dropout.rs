use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::RadarNoiseConfig;
use crate::{snr_scale, NoiseLevel, RadarFrame, RadarPoint};

/// Detection coefficient `α = (σ/r⁴)·10^(−n) + w`, `w ~ N(0, β_min)`.
///
/// `beta_min` is the frame threshold computed before any removal. Passing
/// `with_w = false` drops the random term and consumes no draws.
pub fn detection_coefficient<R: Rng + ?Sized>(
    point: &RadarPoint,
    beta_min: f64,
    level: NoiseLevel,
    with_w: bool,
    rng: &mut R,
) -> f64 {
    let alpha = point.power_ratio() * snr_scale(level);
    if with_w && beta_min > 0.0 {
        alpha
            + Normal::new(0.0, beta_min)
                .expect("finite beta_min")
                .sample(rng)
    } else {
        alpha
    }
}

/// Removes every point whose detection coefficient falls strictly below the
/// frame's `β_min`. Returns the survivors (in their original order) and the
/// indices of removed points.
pub fn apply_false_negatives<R: Rng + ?Sized>(
    frame: &RadarFrame,
    level: NoiseLevel,
    cfg: &RadarNoiseConfig,
    rng: &mut R,
) -> (RadarFrame, Vec<usize>) {
    let Some(beta_min) = frame.beta_min() else {
        return (frame.clone(), Vec::new());
    };
    let mut kept = Vec::with_capacity(frame.len());
    let mut dropped = Vec::new();
    for (i, p) in frame.points.iter().enumerate() {
        // points at the origin have no defined power ratio and are kept
        let alpha = if p.range() > 0.0 {
            detection_coefficient(p, beta_min, level, !cfg.disable_w_noise, rng)
        } else {
            f64::INFINITY
        };
        if alpha < beta_min {
            dropped.push(i);
        } else {
            kept.push(*p);
        }
    }
    (
        RadarFrame {
            points: kept,
            ego_velocity: frame.ego_velocity,
        },
        dropped,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;

    fn no_w() -> RadarNoiseConfig {
        RadarNoiseConfig {
            disable_w_noise: true,
            ..Default::default()
        }
    }

    /// Hand-built frame: (x, y, rcs dBsm).
    const POINTS: [(f64, f64, f64); 5] = [
        (10.0, 0.0, 5.0),
        (3.0, 4.0, -2.5),
        (40.0, -9.0, 12.0),
        (0.5, 0.5, -10.0),
        (75.0, 20.0, 20.0),
    ];

    fn frame() -> RadarFrame {
        RadarFrame::new(
            POINTS
                .iter()
                .map(|&(x, y, rcs)| RadarPoint::at(x, y, rcs))
                .collect(),
        )
    }

    #[test]
    fn coefficient_matches_oracle() {
        let f = frame();
        let beta = f.beta_min().unwrap();
        let mut rng = RngStream::new(0).substream("c", "d");
        for (p, &(x, y, rcs)) in f.points.iter().zip(&POINTS) {
            let r2: f64 = x * x + y * y;
            let sigma = 10f64.powf(rcs / 10.0);
            let n0 = detection_coefficient(p, beta, NoiseLevel::ZERO, false, &mut rng);
            assert_eq!(n0, sigma / (r2 * r2));
            let n1 = detection_coefficient(p, beta, NoiseLevel::MAX, false, &mut rng);
            assert_eq!(n1, sigma / (r2 * r2) * snr_scale(NoiseLevel::MAX));
        }
    }

    #[test]
    fn zero_level_without_w_keeps_everything() {
        let f = frame();
        let (out, dropped) = apply_false_negatives(
            &f,
            NoiseLevel::ZERO,
            &no_w(),
            &mut RngStream::new(1).substream("a", "b"),
        );
        assert!(dropped.is_empty());
        assert_eq!(out, f);
    }

    #[test]
    fn single_point_survives_strict_threshold() {
        let f = RadarFrame::new(vec![RadarPoint::at(12.0, 3.0, -4.0)]);
        let (out, dropped) = apply_false_negatives(
            &f,
            NoiseLevel::ZERO,
            &no_w(),
            &mut RngStream::new(1).substream("a", "b"),
        );
        assert!(dropped.is_empty());
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn full_level_drops_weak_points_in_order() {
        let f = frame();
        let beta = f.beta_min().unwrap();
        let (out, dropped) = apply_false_negatives(
            &f,
            NoiseLevel::MAX,
            &no_w(),
            &mut RngStream::new(1).substream("a", "b"),
        );
        let expected: Vec<usize> = f
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| 0.1 * p.power_ratio() < beta)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(dropped, expected);
        assert_eq!(out.len() + dropped.len(), f.len());
        let survivors: Vec<_> = (0..f.len())
            .filter(|i| !dropped.contains(i))
            .map(|i| f.points[i])
            .collect();
        assert_eq!(out.points, survivors);
    }

    #[test]
    fn empty_frame() {
        let (out, dropped) = apply_false_negatives(
            &RadarFrame::default(),
            NoiseLevel::MAX,
            &RadarNoiseConfig::default(),
            &mut RngStream::new(1).substream("a", "b"),
        );
        assert!(out.is_empty() && dropped.is_empty());
    }
}
