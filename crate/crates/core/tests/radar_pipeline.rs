use std::path::Path;

use noisesynth::io::{read_pcd, PcdFile};
use noisesynth::radar::{degrade_frame, generate_ghost_points, stage, RadarNoiseConfig};
use noisesynth::validation::dropout_means;
use noisesynth::{NoiseLevel, RadarFrame, RngStream, SensorModel};

fn fixture(name: &str) -> RadarFrame {
    read_pcd(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name),
    )
    .unwrap()
    .to_frame()
}

#[test]
fn report_counts_always_balance() {
    let model = SensorModel::default();
    let cfg = RadarNoiseConfig::default();
    for name in [
        "sweep_a.pcd",
        "sweep_b.pcd",
        "sweep_empty.pcd",
        "three_points.pcd",
    ] {
        let frame = fixture(name);
        for class in 0..=10 {
            for seed in 0..5 {
                let (out, report) = degrade_frame(
                    &frame,
                    &model,
                    &cfg,
                    NoiseLevel::from_class(class),
                    &RngStream::new(seed),
                    name,
                );
                assert!(report.is_consistent(), "{name} {class} {seed}: {report:?}");
                assert_eq!(report.n_input, frame.len());
                assert_eq!(report.n_output, out.len());
                assert_eq!(report.shifts.len(), out.len());
                assert!(out.points.iter().all(|p| p.z == 0.0));
            }
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    let frame = fixture("sweep_a.pcd");
    let run = |seed| {
        let (out, _) = degrade_frame(
            &frame,
            &SensorModel::default(),
            &RadarNoiseConfig::default(),
            NoiseLevel::new(0.7).unwrap(),
            &RngStream::new(seed),
            "sweep_a",
        );
        PcdFile::from_points(out.points).to_bytes()
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn zero_level_without_ghosts_or_shift_is_identity() {
    let frame = fixture("sweep_a.pcd");
    let model = SensorModel::default();
    let cfg = RadarNoiseConfig {
        disable_w_noise: true,
        skip_shift_at_zero: true,
        ..Default::default()
    };
    let stream = RngStream::new(17);
    // find a frame id whose ghost stream yields zero ghosts
    let id = (0..100)
        .map(|i| format!("frame-{i}"))
        .find(|id| {
            generate_ghost_points(
                &frame,
                &model,
                &cfg,
                &mut stream.substream(id, stage::GHOST),
            )
            .is_empty()
        })
        .expect("a zero-ghost stream within 100 ids");
    let (out, report) = degrade_frame(&frame, &model, &cfg, NoiseLevel::ZERO, &stream, &id);
    assert_eq!(report.n_ghosts_added, 0);
    assert_eq!(report.n_points_dropped, 0);
    assert_eq!(out, frame);

    // the accuracy floor still moves points when step (c) runs at n = 0
    let cfg = RadarNoiseConfig {
        skip_shift_at_zero: false,
        ..cfg
    };
    let (out, _) = degrade_frame(&frame, &model, &cfg, NoiseLevel::ZERO, &stream, &id);
    assert_eq!(out.len(), frame.len());
    assert_ne!(out, frame);
}

#[test]
fn fewer_points_and_larger_shifts_at_low_snr() {
    let frame = fixture("sweep_a.pcd");
    let model = SensorModel::default();
    let cfg = RadarNoiseConfig::default();
    let mut counts = Vec::new();
    let mut spreads = Vec::new();
    for n in [0.0, 0.3, 0.6, 1.0] {
        let level = NoiseLevel::new(n).unwrap();
        let mut count = 0usize;
        let mut dr2 = 0.0;
        let mut shifts = 0usize;
        for seed in 0..100 {
            let (out, report) =
                degrade_frame(&frame, &model, &cfg, level, &RngStream::new(seed), "a");
            count += out.len();
            dr2 += report.shifts.iter().map(|s| s.dr * s.dr).sum::<f64>();
            shifts += report.shifts.len();
        }
        counts.push(count as f64 / 100.0);
        spreads.push((dr2 / shifts as f64).sqrt());
    }
    assert!(counts.windows(2).all(|w| w[1] < w[0]), "{counts:?}");
    assert!(spreads.windows(2).all(|w| w[1] > w[0]), "{spreads:?}");
}

#[test]
fn fixture_dropout_is_monotone() {
    let frame = fixture("sweep_a.pcd");
    let levels: Vec<NoiseLevel> = (0..=5).map(|i| NoiseLevel::from_class(2 * i)).collect();
    let means = dropout_means(
        &frame,
        &levels,
        200,
        &RadarNoiseConfig::default(),
        &RngStream::new(1),
    );
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    assert!(means[5] > means[0]);
}

#[test]
fn ego_metadata_changes_compensated_velocity() {
    let frame = fixture("sweep_b.pcd");
    let model = SensorModel::default();
    let cfg = RadarNoiseConfig::default();
    let stream = RngStream::new(9);
    let (a, _) = degrade_frame(&frame, &model, &cfg, NoiseLevel::ZERO, &stream, "b");
    let (b, _) = degrade_frame(
        &frame.clone().with_ego_velocity([20.0, 0.0]),
        &model,
        &cfg,
        NoiseLevel::ZERO,
        &stream,
        "b",
    );
    assert_eq!(a.len(), b.len());
    assert!(a.points.iter().zip(&b.points).all(|(p, q)| p.x == q.x));
    assert!(a
        .points
        .iter()
        .zip(&b.points)
        .any(|(p, q)| p.vx_comp != q.vx_comp));
}
