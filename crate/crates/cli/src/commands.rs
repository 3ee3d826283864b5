use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail};
use noisesynth::camera::{degrade_image_with, CameraNoiseKind};
use noisesynth::io::{
    generate_dataset, read_image, read_pcd, sample_id, write_image, write_pcd, GenerateOptions,
    SampleKind, SensorSelection, MANIFEST_FILE,
};
use noisesynth::radar::degrade_frame;
use noisesynth::render::{camera_strip, radar_strip, strip_levels, BevBounds};
use noisesynth::validation::{run_suite, synthetic_frame, SuiteSize};
use noisesynth::{ImageBuffer, NoiseLevel, RngStream};

use crate::config::{parse_level, split_list, RunConfig};
use crate::{CameraArgs, CommonArgs, GenArgs, RadarArgs, RadarFlags, RenderArgs, ValidateArgs};

pub enum Outcome {
    Success,
    Failures(usize),
}

pub enum CommandError {
    /// Bad flags or configuration (exit 2).
    Config(anyhow::Error),
    /// The run itself could not proceed (exit 1).
    Run(anyhow::Error),
}

type CmdResult = Result<Outcome, CommandError>;

fn config_err(e: impl Into<anyhow::Error>) -> CommandError {
    CommandError::Config(e.into())
}

fn run_err(e: impl Into<anyhow::Error>) -> CommandError {
    CommandError::Run(e.into())
}

fn base_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn build_config(common: &CommonArgs, radar: Option<&RadarFlags>) -> anyhow::Result<RunConfig> {
    let mut cfg = base_config(common.config.as_deref())?;
    if let Some(v) = &common.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &common.output {
        cfg.output = Some(v.clone());
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = &common.levels {
        cfg.levels = split_list(v);
    }
    if let Some(v) = &common.kinds {
        cfg.kinds = split_list(v)
            .iter()
            .map(|k| k.parse::<CameraNoiseKind>().map_err(|e| anyhow!(e)))
            .collect::<anyhow::Result<_>>()?;
    }
    if let Some(v) = common.workers {
        cfg.workers = v;
    }
    if let Some(v) = &common.include {
        cfg.include = Some(v.clone());
    }
    cfg.resume |= common.resume;
    if let Some(r) = radar {
        if let Some(v) = &r.ego_metadata {
            cfg.ego_metadata = Some(v.clone());
        }
        cfg.radar.disable_w_noise |= r.no_w_noise;
        cfg.radar.skip_shift_at_zero |= r.skip_shift_at_zero;
        let m = &mut cfg.model;
        for (slot, flag) in [
            (&mut m.r_min, r.r_min),
            (&mut m.r_abs_max, r.r_max),
            (&mut m.ghost_margin, r.ghost_margin),
            (&mut m.acc_r, r.acc_r),
            (&mut m.acc_theta, r.acc_theta),
            (&mut m.acc_v, r.acc_v),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        if let Some(v) = r.ghost_max {
            m.ghost_count_max = v;
        }
    }
    Ok(cfg)
}

fn has_extension(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.contains(&e.to_ascii_lowercase().as_str()))
}

fn report_generation(output: &Path, opts: &GenerateOptions, input: &Path) -> CmdResult {
    let summary = generate_dataset(input, output, opts).map_err(run_err)?;
    if opts.dry_run {
        for r in &summary.records {
            println!("{}", output.join(&r.output_path).display());
        }
        println!("{} planned outputs (dry run)", summary.records.len());
        return Ok(Outcome::Success);
    }
    for r in summary.records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "{} -> {}: {}",
            r.source_path,
            r.output_path,
            r.error.as_deref().unwrap_or_default()
        );
    }
    let failed = summary.failures();
    println!(
        "{} outputs written, {} failed; manifest: {}",
        summary.records.len() - failed,
        failed,
        output.join(MANIFEST_FILE).display()
    );
    Ok(if failed == 0 {
        Outcome::Success
    } else {
        Outcome::Failures(failed)
    })
}

/// `file -> file` mode needs exactly one kind and one level.
fn single_target<T: Copy>(items: &[T], what: &str) -> anyhow::Result<T> {
    match items {
        [one] => Ok(*one),
        _ => bail!(
            "single-file mode needs exactly one {what}, got {}",
            items.len()
        ),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn camera(args: CameraArgs) -> CmdResult {
    let mut cfg = build_config(&args.common, None).map_err(config_err)?;
    cfg.sensors = SensorSelection {
        camera: true,
        radar: false,
    };
    let opts = cfg
        .generate_options(args.common.dry_run)
        .map_err(config_err)?;
    let input = cfg.input().map_err(config_err)?.to_path_buf();
    let output = cfg.output().map_err(config_err)?.to_path_buf();

    if input.is_file() && has_extension(&output, &["png", "jpg", "jpeg"]) {
        let kind = single_target(&opts.kinds, "kind").map_err(config_err)?;
        let level = single_target(&opts.levels, "level").map_err(config_err)?;
        if opts.dry_run {
            println!("{}", output.display());
            return Ok(Outcome::Success);
        }
        let result = read_image(&input).and_then(|img| {
            let id = sample_id(&file_name(&input), SampleKind::Camera(kind), level);
            let mut rng = RngStream::new(opts.master_seed).substream(&id, kind.as_str());
            write_image(
                &degrade_image_with(&img, kind, level, &mut rng, &opts.camera),
                &output,
            )
        });
        return single_result(result, &output);
    }
    report_generation(&output, &opts, &input)
}

fn single_result(result: noisesynth::Result<()>, output: &Path) -> CmdResult {
    match result {
        Ok(()) => {
            println!("wrote {}", output.display());
            Ok(Outcome::Success)
        }
        Err(e) => {
            eprintln!("{e}");
            Ok(Outcome::Failures(1))
        }
    }
}

pub fn radar(args: RadarArgs) -> CmdResult {
    let mut cfg = build_config(&args.common, Some(&args.radar)).map_err(config_err)?;
    cfg.sensors = SensorSelection {
        camera: false,
        radar: true,
    };
    let opts = cfg
        .generate_options(args.common.dry_run)
        .map_err(config_err)?;
    let input = cfg.input().map_err(config_err)?.to_path_buf();
    let output = cfg.output().map_err(config_err)?.to_path_buf();

    if input.is_file() && has_extension(&output, &["pcd"]) {
        let level = single_target(&opts.levels, "level").map_err(config_err)?;
        if opts.dry_run {
            println!("{}", output.display());
            return Ok(Outcome::Success);
        }
        let name = file_name(&input);
        let result = read_pcd(&input).and_then(|pcd| {
            let mut frame = pcd.to_frame();
            frame.ego_velocity = opts.ego_metadata.get(&name).copied();
            let id = sample_id(&name, SampleKind::Radar, level);
            let (out, report) = degrade_frame(
                &frame,
                &opts.model,
                &opts.radar,
                level,
                &RngStream::new(opts.master_seed),
                &id,
            );
            println!(
                "{name}: {} in, {} ghosts, {} dropped, {} out{}",
                report.n_input,
                report.n_ghosts_added,
                report.n_points_dropped,
                report.n_output,
                if report.ego_velocity_fallback {
                    " (no ego velocity: using zero)"
                } else {
                    ""
                }
            );
            write_pcd(&pcd.with_points(out.points), &output)
        });
        return single_result(result, &output);
    }
    report_generation(&output, &opts, &input)
}

pub fn gen_dataset(args: GenArgs) -> CmdResult {
    let mut cfg = build_config(&args.common, Some(&args.radar)).map_err(config_err)?;
    if args.camera_only {
        cfg.sensors = SensorSelection {
            camera: true,
            radar: false,
        };
    }
    if args.radar_only {
        cfg.sensors = SensorSelection {
            camera: false,
            radar: true,
        };
    }
    let opts = cfg
        .generate_options(args.common.dry_run)
        .map_err(config_err)?;
    let input = cfg.input().map_err(config_err)?.to_path_buf();
    let output = cfg.output().map_err(config_err)?.to_path_buf();
    if !input.exists() {
        return Err(config_err(anyhow!(
            "input {} does not exist",
            input.display()
        )));
    }
    report_generation(&output, &opts, &input)
}

pub fn validate(args: ValidateArgs) -> CmdResult {
    let mut cfg = base_config(args.config.as_deref()).map_err(config_err)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.model.validate().map_err(config_err)?;
    let size = SuiteSize::default();
    if args.dry_run {
        println!(
            "validation suite: seed {}, {} camera samples, {} dropout seeds, {} shift trials, {} ghost frames",
            cfg.seed, size.camera_samples, size.dropout_seeds, size.shift_trials, size.ghost_frames
        );
        return Ok(Outcome::Success);
    }
    let report = run_suite(cfg.seed, &cfg.model, size);
    println!("{report}");
    if let Some(path) = &args.output {
        let json = serde_json::to_string_pretty(&report).map_err(run_err)?;
        noisesynth::io::write_atomic(path, json.as_bytes()).map_err(run_err)?;
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    Ok(if failed == 0 {
        Outcome::Success
    } else {
        Outcome::Failures(failed)
    })
}

/// Procedural road scene with hard edges, used when no image is given.
pub fn test_scene(width: u32, height: u32) -> ImageBuffer {
    let mut img = ImageBuffer::filled(width, height, [0, 0, 0]).unwrap();
    let horizon = height * 2 / 5;
    for y in 0..height {
        for x in 0..width {
            let px = if y < horizon {
                let t = y as f64 / horizon as f64;
                [(110.0 + 60.0 * t) as u8, (150.0 + 50.0 * t) as u8, 230]
            } else {
                let depth = (y - horizon) as f64 / (height - horizon) as f64;
                let center = width as f64 / 2.0;
                let half_road = 0.05 * width as f64 + depth * 0.45 * width as f64;
                let dx = (x as f64 - center).abs();
                if dx < half_road {
                    let lane =
                        dx < 0.01 * width as f64 + depth * 0.01 * width as f64 && (y / 8) % 2 == 0;
                    if lane {
                        [235, 235, 210]
                    } else {
                        [70, 70, 75]
                    }
                } else {
                    [60, (110.0 + 40.0 * depth) as u8, 50]
                }
            };
            img.put(x, y, px);
        }
    }
    // a box-shaped vehicle and a signpost
    for y in horizon + height / 10..horizon + height / 4 {
        for x in width / 2 + width / 20..width / 2 + width / 6 {
            img.put(x, y, [180, 30, 30]);
        }
    }
    for y in horizon - height / 6..horizon + height / 8 {
        for x in width / 8..width / 8 + 3 {
            img.put(x, y, [200, 200, 200]);
        }
    }
    img
}

pub fn render(args: RenderArgs) -> CmdResult {
    let mut cfg = base_config(args.config.as_deref()).map_err(config_err)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.model.validate().map_err(config_err)?;
    if args.resolution.is_nan() || args.resolution <= 0.0 {
        return Err(config_err(anyhow!("--resolution must be positive")));
    }
    let levels: Vec<NoiseLevel> = match &args.levels {
        Some(s) => split_list(s)
            .iter()
            .map(|l| parse_level(l))
            .collect::<anyhow::Result<_>>()
            .map_err(config_err)?,
        None => strip_levels(),
    };
    if levels.is_empty() {
        return Err(config_err(anyhow!("no levels to render")));
    }

    let mut planned: Vec<PathBuf> = CameraNoiseKind::ALL
        .iter()
        .map(|k| args.output.join(format!("camera_{k}.png")))
        .collect();
    planned.push(args.output.join("radar_bev.png"));
    if args.dry_run {
        for p in &planned {
            println!("{}", p.display());
        }
        return Ok(Outcome::Success);
    }

    let stream = RngStream::new(cfg.seed);
    let mut failures = 0;

    let image = match &args.image {
        Some(p) => read_image(p).map(|img| (img, file_name(p))),
        None => Ok((test_scene(480, 270), "test_scene".to_string())),
    };
    match image {
        Ok((img, id)) => {
            for (kind, path) in CameraNoiseKind::ALL.iter().zip(&planned) {
                let strip = camera_strip(&img, *kind, &levels, &stream, &id, &cfg.camera);
                if let Err(e) = write_image(&strip, path) {
                    eprintln!("{e}");
                    failures += 1;
                } else {
                    println!("wrote {}", path.display());
                }
            }
        }
        Err(e) => {
            eprintln!("{e}");
            failures += CameraNoiseKind::ALL.len();
        }
    }

    let frame = match &args.pcd {
        Some(p) => read_pcd(p).map(|pcd| (pcd.to_frame(), file_name(p))),
        None => Ok((
            synthetic_frame(&stream, "render/synthetic", 120, &cfg.model),
            "synthetic".to_string(),
        )),
    };
    let bev_path = planned.last().unwrap();
    match frame.and_then(|(frame, id)| {
        let strip = radar_strip(
            &frame,
            &levels,
            &cfg.model,
            &cfg.radar,
            &stream,
            &id,
            &BevBounds::default(),
            args.resolution,
        );
        write_image(&strip, bev_path)
    }) {
        Ok(()) => println!("wrote {}", bev_path.display()),
        Err(e) => {
            eprintln!("{e}");
            failures += 1;
        }
    }
    Ok(if failures == 0 {
        Outcome::Success
    } else {
        Outcome::Failures(failures)
    })
}
