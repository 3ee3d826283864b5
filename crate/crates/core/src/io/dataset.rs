//! Labeled dataset generation over a directory tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_image, read_pcd, write_atomic, write_image, write_pcd};
use crate::camera::{degrade_image_with, CameraConfig, CameraNoiseKind};
use crate::radar::{degrade_frame, RadarNoiseConfig};
use crate::{Error, NoiseLevel, Result, RngStream, SensorModel};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];
const RADAR_EXTENSION: &str = "pcd";
/// `noise_kind` label of the composite radar pipeline.
pub const RADAR_KIND: &str = "radar";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    Camera,
    Radar,
}

/// What is applied to one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleKind {
    Camera(CameraNoiseKind),
    Radar,
}

impl SampleKind {
    pub fn sensor(self) -> SensorKind {
        match self {
            SampleKind::Camera(_) => SensorKind::Camera,
            SampleKind::Radar => SensorKind::Radar,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            SampleKind::Camera(_) => "png",
            SampleKind::Radar => RADAR_EXTENSION,
        }
    }
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleKind::Camera(k) => k.fmt(f),
            SampleKind::Radar => f.write_str(RADAR_KIND),
        }
    }
}

/// One line of the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Input path relative to the input root, `/`-separated.
    pub source_path: String,
    /// Output path relative to the output root, `/`-separated.
    pub output_path: String,
    pub sensor: SensorKind,
    pub noise_kind: String,
    /// 0..=10 on the default grid, `null` for off-grid levels.
    pub level_class: Option<u8>,
    pub level_fraction: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorSelection {
    pub camera: bool,
    pub radar: bool,
}

impl Default for SensorSelection {
    fn default() -> Self {
        SensorSelection {
            camera: true,
            radar: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub levels: Vec<NoiseLevel>,
    pub kinds: Vec<CameraNoiseKind>,
    pub sensors: SensorSelection,
    pub master_seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub model: SensorModel,
    pub radar: RadarNoiseConfig,
    pub camera: CameraConfig,
    /// Ego velocity per radar input, keyed by relative path.
    pub ego_metadata: BTreeMap<String, [f64; 2]>,
    /// Restrict processing to these relative paths (e.g. keyframes).
    pub include: Option<BTreeSet<String>>,
    /// Plan and return records without touching the output tree.
    pub dry_run: bool,
    /// Keep outputs that already exist instead of regenerating them.
    pub resume: bool,
    /// Write `manifest.jsonl` under the output root.
    pub write_manifest: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            levels: NoiseLevel::default_grid(),
            kinds: CameraNoiseKind::ALL.to_vec(),
            sensors: SensorSelection::default(),
            master_seed: 0,
            workers: 0,
            model: SensorModel::default(),
            radar: RadarNoiseConfig::default(),
            camera: CameraConfig::default(),
            ego_metadata: BTreeMap::new(),
            include: None,
            dry_run: false,
            resume: false,
            write_manifest: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenerateSummary {
    pub records: Vec<ManifestRecord>,
}

impl GenerateSummary {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

/// File-name label for a level: `030` for 30 %, `12p5` for 12.5 %.
pub fn level_label(level: NoiseLevel) -> String {
    let p = level.percent();
    if (p - p.round()).abs() < 1e-9 {
        format!("{:03}", p.round() as u64)
    } else {
        format!("{p}").replace('.', "p")
    }
}

/// `dir/stem.ext` → `dir/stem__<kind>_<level>.<png|pcd>`.
pub fn output_relative_path(source_rel: &str, kind: SampleKind, level: NoiseLevel) -> String {
    let (dir, file) = match source_rel.rfind('/') {
        Some(i) => (&source_rel[..=i], &source_rel[i + 1..]),
        None => ("", source_rel),
    };
    let stem = match file.rfind('.') {
        Some(i) if i > 0 => &file[..i],
        _ => file,
    };
    format!(
        "{dir}{stem}__{kind}_{}.{}",
        level_label(level),
        kind.extension()
    )
}

/// Random-stream key of one generated sample.
pub fn sample_id(source_rel: &str, kind: SampleKind, level: NoiseLevel) -> String {
    format!("{source_rel}|{kind}|{}", level_label(level))
}

#[derive(Debug, Clone)]
struct Input {
    rel: String,
    path: PathBuf,
    sensor: SensorKind,
}

fn classify(path: &Path) -> Option<SensorKind> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    if IMAGE_EXTENSIONS.contains(&ext.as_str()) {
        Some(SensorKind::Camera)
    } else if ext == RADAR_EXTENSION {
        Some(SensorKind::Radar)
    } else {
        None
    }
}

fn rel_string(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn discover(input_root: &Path, output_root: &Path, opts: &GenerateOptions) -> Result<Vec<Input>> {
    let wanted = |s: SensorKind| match s {
        SensorKind::Camera => opts.sensors.camera,
        SensorKind::Radar => opts.sensors.radar,
    };
    let mut inputs = Vec::new();
    if input_root.is_file() {
        if let Some(sensor) = classify(input_root).filter(|s| wanted(*s)) {
            let name = input_root.file_name().map(Path::new).unwrap_or(input_root);
            inputs.push(Input {
                rel: rel_string(name),
                path: input_root.to_path_buf(),
                sensor,
            });
        }
        return Ok(inputs);
    }
    for entry in walkdir::WalkDir::new(input_root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(input_root).to_path_buf();
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() || entry.path().starts_with(output_root) {
            continue;
        }
        let Some(sensor) = classify(entry.path()).filter(|s| wanted(*s)) else {
            continue;
        };
        let rel = rel_string(
            entry
                .path()
                .strip_prefix(input_root)
                .unwrap_or(entry.path()),
        );
        if opts.include.as_ref().is_some_and(|inc| !inc.contains(&rel)) {
            continue;
        }
        inputs.push(Input {
            rel,
            path: entry.path().to_path_buf(),
            sensor,
        });
    }
    Ok(inputs)
}

enum Loaded {
    Image(crate::ImageBuffer),
    Radar(super::PcdFile),
}

fn plan(input: &Input, opts: &GenerateOptions) -> Vec<(SampleKind, NoiseLevel)> {
    let kinds: Vec<SampleKind> = match input.sensor {
        SensorKind::Camera => opts.kinds.iter().copied().map(SampleKind::Camera).collect(),
        SensorKind::Radar => vec![SampleKind::Radar],
    };
    kinds
        .into_iter()
        .flat_map(|k| opts.levels.iter().map(move |&l| (k, l)))
        .collect()
}

fn run_job(
    input: &Input,
    loaded: &Loaded,
    kind: SampleKind,
    level: NoiseLevel,
    out_path: &Path,
    opts: &GenerateOptions,
) -> Result<()> {
    let stream = RngStream::new(opts.master_seed);
    let id = sample_id(&input.rel, kind, level);
    match (loaded, kind) {
        (Loaded::Image(img), SampleKind::Camera(k)) => {
            let mut rng = stream.substream(&id, k.as_str());
            let out = degrade_image_with(img, k, level, &mut rng, &opts.camera);
            write_image(&out, out_path)
        }
        (Loaded::Radar(pcd), SampleKind::Radar) => {
            let mut frame = pcd.to_frame();
            frame.ego_velocity = opts.ego_metadata.get(&input.rel).copied();
            let (out, _) = degrade_frame(&frame, &opts.model, &opts.radar, level, &stream, &id);
            write_pcd(&pcd.clone().with_points(out.points), out_path)
        }
        _ => unreachable!("sample kind always matches the input sensor"),
    }
}

fn process(input: &Input, output_root: &Path, opts: &GenerateOptions) -> Vec<ManifestRecord> {
    let jobs = plan(input, opts);
    let record = |kind: SampleKind, level: NoiseLevel, error: Option<String>| ManifestRecord {
        source_path: input.rel.clone(),
        output_path: output_relative_path(&input.rel, kind, level),
        sensor: input.sensor,
        noise_kind: kind.to_string(),
        level_class: level.class_index(),
        level_fraction: level.fraction(),
        seed: opts.master_seed,
        error,
    };
    if opts.dry_run {
        return jobs.into_iter().map(|(k, l)| record(k, l, None)).collect();
    }
    let loaded = match input.sensor {
        SensorKind::Camera => read_image(&input.path).map(Loaded::Image),
        SensorKind::Radar => read_pcd(&input.path).map(Loaded::Radar),
    };
    let loaded = match loaded {
        Ok(l) => l,
        Err(e) => {
            let msg = e.to_string();
            return jobs
                .into_iter()
                .map(|(k, l)| record(k, l, Some(msg.clone())))
                .collect();
        }
    };
    jobs.into_par_iter()
        .map(|(kind, level)| {
            let out_path = output_root.join(output_relative_path(&input.rel, kind, level));
            if opts.resume && out_path.is_file() {
                return record(kind, level, None);
            }
            let err = run_job(input, &loaded, kind, level, &out_path, opts)
                .err()
                .map(|e| e.to_string());
            record(kind, level, err)
        })
        .collect()
}

pub fn write_manifest(records: &[ManifestRecord], path: &Path) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Degrades every input under `input_root` at every grid point and writes
/// the results under a mirrored tree in `output_root`.
///
/// Per-sample failures are reported in the returned records (and the
/// manifest) instead of aborting the run. Output bytes depend only on the
/// inputs and options, not on `workers`.
pub fn generate_dataset(
    input_root: &Path,
    output_root: &Path,
    opts: &GenerateOptions,
) -> Result<GenerateSummary> {
    let inputs = discover(input_root, output_root, opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::io(output_root, std::io::Error::other(e)))?;
    let records: Vec<ManifestRecord> = pool.install(|| {
        inputs
            .par_iter()
            .map(|input| process(input, output_root, opts))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    if !opts.dry_run && opts.write_manifest {
        write_manifest(&records, &output_root.join(MANIFEST_FILE))?;
    }
    Ok(GenerateSummary { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_names() {
        let l = NoiseLevel::new(0.3).unwrap();
        assert_eq!(
            output_relative_path("a/b/cam.jpg", SampleKind::Camera(CameraNoiseKind::Blur), l),
            "a/b/cam__blur_030.png"
        );
        assert_eq!(
            output_relative_path("sweep.pcd", SampleKind::Radar, NoiseLevel::MAX),
            "sweep__radar_100.pcd"
        );
        assert_eq!(level_label(NoiseLevel::new(0.125).unwrap()), "12p5");
    }

    #[test]
    fn manifest_line_format() {
        let r = ManifestRecord {
            source_path: "a.png".into(),
            output_path: "a__blur_010.png".into(),
            sensor: SensorKind::Camera,
            noise_kind: "blur".into(),
            level_class: Some(1),
            level_fraction: 0.1,
            seed: 7,
            error: None,
        };
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(
            line,
            r#"{"source_path":"a.png","output_path":"a__blur_010.png","sensor":"camera","noise_kind":"blur","level_class":1,"level_fraction":0.1,"seed":7}"#
        );
        assert_eq!(serde_json::from_str::<ManifestRecord>(&line).unwrap(), r);
    }
}
