//! Bird-eye-view rasters and side-by-side comparison strips.

use serde::{Deserialize, Serialize};

use crate::camera::{degrade_image_with, CameraConfig, CameraNoiseKind};
use crate::io::{sample_id, SampleKind};
use crate::radar::{degrade_frame, RadarNoiseConfig};
use crate::{ImageBuffer, NoiseLevel, RadarFrame, RngStream, SensorModel};

/// Area covered by a BEV raster, sensor frame, meters. `x` points up the
/// image (forward), `y` points left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BevBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for BevBounds {
    fn default() -> Self {
        BevBounds {
            x_min: 0.0,
            x_max: 120.0,
            y_min: -60.0,
            y_max: 60.0,
        }
    }
}

const BACKGROUND: [u8; 3] = [16, 16, 16];
const SEPARATOR: [u8; 3] = [255, 255, 255];
const RCS_RANGE: (f64, f64) = (-20.0, 40.0);

/// Blue (weak) → red (strong) ramp over `RCS_RANGE` dBsm.
fn rcs_color(rcs: f64) -> [u8; 3] {
    let t = ((rcs - RCS_RANGE.0) / (RCS_RANGE.1 - RCS_RANGE.0)).clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs())).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    [r, g, b]
}

/// Raster size in pixels for the bounds at `resolution` meters per pixel.
pub fn bev_size(bounds: &BevBounds, resolution: f64) -> (u32, u32) {
    let w = ((bounds.y_max - bounds.y_min) / resolution).ceil().max(1.0) as u32;
    let h = ((bounds.x_max - bounds.x_min) / resolution).ceil().max(1.0) as u32;
    (w, h)
}

/// Pixel `(column, row)` of a sensor-frame position, if inside the raster.
pub fn bev_pixel(bounds: &BevBounds, resolution: f64, x: f64, y: f64) -> Option<(u32, u32)> {
    let (w, h) = bev_size(bounds, resolution);
    let col = ((bounds.y_max - y) / resolution).floor();
    let row = ((bounds.x_max - x) / resolution).floor();
    (col >= 0.0 && row >= 0.0 && col < f64::from(w) && row < f64::from(h))
        .then_some((col as u32, row as u32))
}

/// Top-down scatter of the frame; each point is a 3×3 marker colored by RCS.
pub fn render_bev(frame: &RadarFrame, bounds: &BevBounds, resolution: f64) -> ImageBuffer {
    let (w, h) = bev_size(bounds, resolution);
    let mut img = ImageBuffer::filled(w, h, BACKGROUND).expect("positive raster size");
    for p in &frame.points {
        let Some((col, row)) = bev_pixel(bounds, resolution, p.x, p.y) else {
            continue;
        };
        let color = rcs_color(p.rcs);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (c, r) = (i64::from(col) + dx, i64::from(row) + dy);
                if c >= 0 && r >= 0 && c < i64::from(w) && r < i64::from(h) {
                    img.put(c as u32, r as u32, color);
                }
            }
        }
    }
    img
}

/// Places images left to right with a `gap`-pixel white separator; shorter
/// images are padded at the bottom.
pub fn hstack(images: &[ImageBuffer], gap: u32) -> ImageBuffer {
    assert!(!images.is_empty(), "nothing to stack");
    let height = images.iter().map(ImageBuffer::height).max().unwrap();
    let width =
        images.iter().map(ImageBuffer::width).sum::<u32>() + gap * (images.len() as u32 - 1);
    let mut out = ImageBuffer::filled(width, height, SEPARATOR).unwrap();
    let mut x0 = 0;
    for img in images {
        for y in 0..height {
            for x in 0..img.width() {
                let px = if y < img.height() {
                    img.get(x, y)
                } else {
                    BACKGROUND
                };
                out.put(x0 + x, y, px);
            }
        }
        x0 += img.width() + gap;
    }
    out
}

/// Levels used by the comparison strips: 0, 30, 60 and 100 %.
pub fn strip_levels() -> Vec<NoiseLevel> {
    [0.0, 0.3, 0.6, 1.0]
        .into_iter()
        .map(|n| NoiseLevel::new(n).unwrap())
        .collect()
}

/// One degraded copy of `img` per level, side by side.
pub fn camera_strip(
    img: &ImageBuffer,
    kind: CameraNoiseKind,
    levels: &[NoiseLevel],
    stream: &RngStream,
    source_id: &str,
    cfg: &CameraConfig,
) -> ImageBuffer {
    let tiles: Vec<ImageBuffer> = levels
        .iter()
        .map(|&l| {
            let id = sample_id(source_id, SampleKind::Camera(kind), l);
            degrade_image_with(img, kind, l, &mut stream.substream(&id, kind.as_str()), cfg)
        })
        .collect();
    hstack(&tiles, 4)
}

/// BEV of the frame degraded at each level, side by side.
#[allow(clippy::too_many_arguments)]
pub fn radar_strip(
    frame: &RadarFrame,
    levels: &[NoiseLevel],
    model: &SensorModel,
    cfg: &RadarNoiseConfig,
    stream: &RngStream,
    source_id: &str,
    bounds: &BevBounds,
    resolution: f64,
) -> ImageBuffer {
    let tiles: Vec<ImageBuffer> = levels
        .iter()
        .map(|&l| {
            let id = sample_id(source_id, SampleKind::Radar, l);
            let (out, _) = degrade_frame(frame, model, cfg, l, stream, &id);
            render_bev(&out, bounds, resolution)
        })
        .collect();
    hstack(&tiles, 4)
}
