//! Image degradations: Gaussian blur, high/low exposure and additive grain.
//!
//! Each level conversion is local to its operation: the blur kernel size and
//! the grain σ read the level in percent, the exposure gain reads it as a
//! fraction (gain `1 + 3n`, so 1 to 4 over the nominal range).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, ImageBuffer, NoiseLevel, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraNoiseKind {
    Blur,
    HighExposure,
    LowExposure,
    Additive,
}

impl CameraNoiseKind {
    pub const ALL: [CameraNoiseKind; 4] = [
        CameraNoiseKind::Blur,
        CameraNoiseKind::HighExposure,
        CameraNoiseKind::LowExposure,
        CameraNoiseKind::Additive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CameraNoiseKind::Blur => "blur",
            CameraNoiseKind::HighExposure => "high_exposure",
            CameraNoiseKind::LowExposure => "low_exposure",
            CameraNoiseKind::Additive => "additive",
        }
    }
}

impl fmt::Display for CameraNoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CameraNoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CameraNoiseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown camera noise kind `{s}` (expected blur, high_exposure, low_exposure or additive)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExposureDirection {
    High,
    Low,
}

/// Tunables for the camera models.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    /// Fixed blur σ in pixels instead of the size-derived rule.
    pub blur_sigma: Option<f64>,
    /// Draw one grain value per pixel and add it to all three channels.
    pub shared_channel_noise: bool,
}

/// Square convolution kernel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) || weights.len() != size * size {
            return Err(Error::InvalidKernelSize(size as i64));
        }
        Ok(Kernel2D { size, weights })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.size + col]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.weights.iter_mut().for_each(|w| *w *= factor);
        self
    }
}

/// Blur kernel size `2·round(100·n) + 1`.
pub fn blur_kernel_size(level: NoiseLevel) -> usize {
    2 * level.percent().round() as usize + 1
}

/// σ used for a Gaussian kernel of the given size when none is configured.
pub fn default_sigma(size: usize) -> f64 {
    0.3 * ((size as f64 - 1.0) / 2.0 - 1.0) + 0.8
}

/// Normalized 1-D Gaussian taps.
fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    if size == 1 {
        return vec![1.0];
    }
    let half = (size / 2) as f64;
    let denom = 2.0 * sigma * sigma;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / denom).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn check_size(size: i64) -> Result<usize> {
    if size < 1 || size % 2 == 0 {
        Err(Error::InvalidKernelSize(size))
    } else {
        Ok(size as usize)
    }
}

/// Separable Gaussian kernel of the given odd size, normalized to sum 1.
pub fn gaussian_kernel(size: i64) -> Result<Kernel2D> {
    let size = check_size(size)?;
    gaussian_kernel_with_sigma(size as i64, default_sigma(size))
}

pub fn gaussian_kernel_with_sigma(size: i64, sigma: f64) -> Result<Kernel2D> {
    let size = check_size(size)?;
    let taps = gaussian_taps(size, sigma);
    let weights = taps
        .iter()
        .flat_map(|a| taps.iter().map(move |b| a * b))
        .collect();
    Kernel2D::new(size, weights)
}

/// Gain-adjusted 3×3 binomial kernel: `K·(1+3n)` for high exposure,
/// `K/(1+3n)` for low exposure.
pub fn exposure_kernel(level: NoiseLevel, direction: ExposureDirection) -> Kernel2D {
    const BASE: [f64; 9] = [1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0];
    let gain = 1.0 + 3.0 * level.fraction();
    let base = Kernel2D {
        size: 3,
        weights: BASE.iter().map(|w| w / 16.0).collect(),
    };
    match direction {
        ExposureDirection::High => base.scaled(gain),
        ExposureDirection::Low => base.scaled(1.0 / gain),
    }
}

/// Mirror index into `0..len` without repeating the edge sample
/// (`... 2 1 | 0 1 2 ... n-1 | n-2 ...`).
#[inline]
pub(crate) fn reflect(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    // f64::round is half-away-from-zero
    v.round().clamp(0.0, 255.0) as u8
}

/// Dense 2-D convolution with reflected borders.
pub fn convolve(img: &ImageBuffer, kernel: &Kernel2D) -> ImageBuffer {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let k = kernel.size();
    let half = (k / 2) as isize;
    let src = img.data();
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for ky in 0..k {
                let sy = reflect(y as isize + ky as isize - half, h);
                for kx in 0..k {
                    let sx = reflect(x as isize + kx as isize - half, w);
                    let wgt = kernel.at(ky, kx);
                    let base = (sy * w + sx) * 3;
                    for c in 0..3 {
                        acc[c] += wgt * f64::from(src[base + c]);
                    }
                }
            }
            let o = (y * w + x) * 3;
            for c in 0..3 {
                out[o + c] = to_u8(acc[c]);
            }
        }
    }
    ImageBuffer::new(img.width(), img.height(), out).expect("same shape as input")
}

/// Two-pass convolution with the outer product `taps ⊗ taps`.
fn convolve_separable(img: &ImageBuffer, taps: &[f64]) -> ImageBuffer {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let half = (taps.len() / 2) as isize;
    let src = img.data();

    // Border-reflected index tables, one per axis.
    let col_idx: Vec<Vec<usize>> = (0..w)
        .map(|x| {
            (0..taps.len())
                .map(|t| reflect(x as isize + t as isize - half, w))
                .collect()
        })
        .collect();
    let row_idx: Vec<Vec<usize>> = (0..h)
        .map(|y| {
            (0..taps.len())
                .map(|t| reflect(y as isize + t as isize - half, h))
                .collect()
        })
        .collect();

    let mut horiz = vec![0.0f64; src.len()];
    for y in 0..h {
        let row = &src[y * w * 3..(y + 1) * w * 3];
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for (t, &sx) in taps.iter().zip(&col_idx[x]) {
                for c in 0..3 {
                    acc[c] += t * f64::from(row[sx * 3 + c]);
                }
            }
            horiz[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&acc);
        }
    }

    let mut out = vec![0u8; src.len()];
    for (y, rows) in row_idx.iter().enumerate() {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for (t, &sy) in taps.iter().zip(rows) {
                let base = (sy * w + x) * 3;
                for c in 0..3 {
                    acc[c] += t * horiz[base + c];
                }
            }
            let o = (y * w + x) * 3;
            for c in 0..3 {
                out[o + c] = to_u8(acc[c]);
            }
        }
    }
    ImageBuffer::new(img.width(), img.height(), out).expect("same shape as input")
}

pub fn apply_blur(img: &ImageBuffer, level: NoiseLevel) -> ImageBuffer {
    apply_blur_with(img, level, &CameraConfig::default())
}

pub fn apply_blur_with(img: &ImageBuffer, level: NoiseLevel, cfg: &CameraConfig) -> ImageBuffer {
    let size = blur_kernel_size(level);
    if size == 1 {
        return img.clone();
    }
    let sigma = cfg.blur_sigma.unwrap_or_else(|| default_sigma(size));
    convolve_separable(img, &gaussian_taps(size, sigma))
}

pub fn apply_exposure(
    img: &ImageBuffer,
    level: NoiseLevel,
    direction: ExposureDirection,
) -> ImageBuffer {
    convolve(img, &exposure_kernel(level, direction))
}

/// Adds `Normal(0, 100·n)` grain, one draw per pixel and channel.
pub fn apply_additive_noise<R: Rng + ?Sized>(
    img: &ImageBuffer,
    level: NoiseLevel,
    rng: &mut R,
) -> ImageBuffer {
    apply_additive_noise_with(img, level, rng, &CameraConfig::default())
}

pub fn apply_additive_noise_with<R: Rng + ?Sized>(
    img: &ImageBuffer,
    level: NoiseLevel,
    rng: &mut R,
    cfg: &CameraConfig,
) -> ImageBuffer {
    if level.percent() == 0.0 {
        return img.clone();
    }
    let data = img
        .data()
        .iter()
        .zip(additive_deltas(img, level, rng, cfg))
        .map(|(&v, d)| (f64::from(v) + d).clamp(0.0, 255.0) as u8)
        .collect();
    ImageBuffer::new(img.width(), img.height(), data).expect("same shape as input")
}

/// Rounded intensity changes produced by the grain before clamping, one per
/// byte of `img`. [`apply_additive_noise_with`] clamps `img + delta`.
pub fn additive_deltas<R: Rng + ?Sized>(
    img: &ImageBuffer,
    level: NoiseLevel,
    rng: &mut R,
    cfg: &CameraConfig,
) -> Vec<f64> {
    let sigma = level.percent();
    if sigma == 0.0 {
        return vec![0.0; img.data().len()];
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let mut deltas = Vec::with_capacity(img.data().len());
    for px in img.data().chunks_exact(3) {
        let shared = cfg.shared_channel_noise.then(|| normal.sample(rng));
        for &v in px {
            let noise = shared.unwrap_or_else(|| normal.sample(rng));
            let v = f64::from(v);
            deltas.push((v + noise).round() - v);
        }
    }
    deltas
}

pub fn degrade_image<R: Rng + ?Sized>(
    img: &ImageBuffer,
    kind: CameraNoiseKind,
    level: NoiseLevel,
    rng: &mut R,
) -> ImageBuffer {
    degrade_image_with(img, kind, level, rng, &CameraConfig::default())
}

pub fn degrade_image_with<R: Rng + ?Sized>(
    img: &ImageBuffer,
    kind: CameraNoiseKind,
    level: NoiseLevel,
    rng: &mut R,
    cfg: &CameraConfig,
) -> ImageBuffer {
    match kind {
        CameraNoiseKind::Blur => apply_blur_with(img, level, cfg),
        CameraNoiseKind::HighExposure => apply_exposure(img, level, ExposureDirection::High),
        CameraNoiseKind::LowExposure => apply_exposure(img, level, ExposureDirection::Low),
        CameraNoiseKind::Additive => apply_additive_noise_with(img, level, rng, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn lvl(n: f64) -> NoiseLevel {
        NoiseLevel::new(n).unwrap()
    }

    fn random_image(w: u32, h: u32, seed: u64) -> ImageBuffer {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w * h * 3).map(|_| rng.random::<u8>()).collect();
        ImageBuffer::new(w, h, data).unwrap()
    }

    /// Unnormalized Gaussian evaluated directly, then normalized; written
    /// independently of `gaussian_taps`.
    fn oracle_kernel(size: usize) -> Vec<Vec<f64>> {
        let half = (size / 2) as i64;
        let sigma = 0.3 * ((size as f64 - 1.0) / 2.0 - 1.0) + 0.8;
        let mut k = vec![vec![0.0; size]; size];
        let mut total = 0.0;
        for (i, row) in k.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let dy = i as i64 - half;
                let dx = j as i64 - half;
                *v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                total += *v;
            }
        }
        for row in &mut k {
            for v in row {
                *v /= total;
            }
        }
        k
    }

    /// Naive O(W·H·k²) convolution with mirrored borders.
    fn oracle_convolve(img: &ImageBuffer, k: &[Vec<f64>]) -> ImageBuffer {
        let size = k.len() as i64;
        let half = size / 2;
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mirror = |i: i64, n: i64| -> i64 {
            let mut i = i;
            loop {
                if i < 0 {
                    i = -i;
                } else if i >= n {
                    i = 2 * (n - 1) - i;
                } else {
                    return i;
                }
            }
        };
        let mut out = img.clone();
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let mut acc = 0.0;
                    for i in 0..size {
                        for j in 0..size {
                            let sy = mirror(y + i - half, h);
                            let sx = mirror(x + j - half, w);
                            acc += k[i as usize][j as usize]
                                * f64::from(img.get(sx as u32, sy as u32)[c]);
                        }
                    }
                    let v = acc.round().clamp(0.0, 255.0) as u8;
                    let idx = out.index(x as u32, y as u32, c);
                    out.data_mut()[idx] = v;
                }
            }
        }
        out
    }

    #[test]
    fn kernel_size_law() {
        assert_eq!(blur_kernel_size(lvl(0.0)), 1);
        assert_eq!(blur_kernel_size(lvl(0.3)), 61);
        assert_eq!(blur_kernel_size(lvl(0.6)), 121);
        assert_eq!(blur_kernel_size(lvl(1.0)), 201);
        assert_eq!(blur_kernel_size(lvl(0.005)), 3);
    }

    #[test]
    fn gaussian_kernel_shapes() {
        let k1 = gaussian_kernel(1).unwrap();
        assert_eq!(k1.weights(), &[1.0]);

        let k3 = gaussian_kernel(3).unwrap();
        assert!((k3.sum() - 1.0).abs() < 1e-9);
        let c = k3.at(1, 1);
        assert!(k3.weights().iter().all(|&w| w <= c && w >= 0.0));
        let oracle = oracle_kernel(3);
        for (i, row) in oracle.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                assert!((k3.at(i, j) - w).abs() < 1e-15);
                assert_eq!(k3.at(i, j), k3.at(j, 2 - i));
            }
        }
    }

    #[test]
    fn gaussian_kernel_rejects_bad_sizes() {
        for s in [0, -1, 2, 4] {
            assert!(matches!(
                gaussian_kernel(s),
                Err(Error::InvalidKernelSize(_))
            ));
        }
    }

    #[test]
    fn reflect_indices() {
        let v: Vec<usize> = (-4..9).map(|i| reflect(i, 5)).collect();
        assert_eq!(v, vec![4, 3, 2, 1, 0, 1, 2, 3, 4, 3, 2, 1, 0]);
        assert_eq!(reflect(-7, 1), 0);
        assert_eq!(reflect(3, 2), 1);
    }

    #[test]
    fn blur_identity_and_constant() {
        let img = random_image(9, 7, 1);
        assert_eq!(apply_blur(&img, lvl(0.0)), img);
        let flat = ImageBuffer::filled(20, 11, [17, 128, 250]).unwrap();
        for n in [0.01, 0.1, 0.3, 1.0] {
            assert_eq!(apply_blur(&flat, lvl(n)), flat, "n={n}");
        }
    }

    #[test]
    fn blur_single_white_pixel() {
        let mut img = ImageBuffer::filled(5, 5, [0, 0, 0]).unwrap();
        img.put(2, 2, [255, 255, 255]);
        let out = apply_blur(&img, lvl(0.01));
        let k = oracle_kernel(3);
        for y in 0..5u32 {
            for x in 0..5u32 {
                let dx = x as i64 - 2;
                let dy = y as i64 - 2;
                let expected = if dx.abs() <= 1 && dy.abs() <= 1 {
                    (255.0 * k[(dy + 1) as usize][(dx + 1) as usize]).round() as u8
                } else {
                    0
                };
                assert_eq!(out.get(x, y), [expected; 3], "({x},{y})");
            }
        }
    }

    #[test]
    fn blur_matches_naive_convolution() {
        for seed in 0..20 {
            let img = random_image(8, 8, seed);
            for (n, size) in [(0.01, 3), (0.02, 5)] {
                let out = apply_blur(&img, lvl(n));
                assert_eq!(blur_kernel_size(lvl(n)), size);
                assert_eq!(out, oracle_convolve(&img, &oracle_kernel(size)));
            }
        }
    }

    #[test]
    fn blur_kernel_larger_than_image() {
        let img = random_image(3, 2, 5);
        let out = apply_blur(&img, lvl(1.0));
        assert_eq!((out.width(), out.height()), (3, 2));
    }

    #[test]
    fn exposure_kernels() {
        let base = exposure_kernel(lvl(0.0), ExposureDirection::High);
        let expected = [1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0].map(|w| w / 16.0);
        assert_eq!(base.weights(), &expected);
        assert_eq!(exposure_kernel(lvl(0.0), ExposureDirection::Low), base);
        assert!((exposure_kernel(lvl(1.0), ExposureDirection::High).sum() - 4.0).abs() < 1e-9);
        assert!((exposure_kernel(lvl(1.0), ExposureDirection::Low).sum() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn exposure_on_constant_image() {
        let flat = ImageBuffer::filled(6, 4, [64, 64, 64]).unwrap();
        let hi = apply_exposure(&flat, lvl(1.0), ExposureDirection::High);
        assert!(hi.data().iter().all(|&v| v == 255));
        let lo = apply_exposure(&flat, lvl(1.0), ExposureDirection::Low);
        assert!(lo.data().iter().all(|&v| v == 16));
        assert_eq!(
            apply_exposure(&flat, lvl(0.0), ExposureDirection::High),
            flat
        );
    }

    #[test]
    fn exposure_brightness_monotone() {
        let gray = ImageBuffer::filled(8, 8, [100, 100, 100]).unwrap();
        let mut prev_hi = 0.0;
        let mut prev_lo = f64::INFINITY;
        for c in 0..=10 {
            let l = NoiseLevel::from_class(c);
            let hi = apply_exposure(&gray, l, ExposureDirection::High).mean();
            let lo = apply_exposure(&gray, l, ExposureDirection::Low).mean();
            assert!(hi >= prev_hi && lo <= prev_lo);
            prev_hi = hi;
            prev_lo = lo;
        }
    }

    #[test]
    fn additive_zero_and_determinism() {
        let img = random_image(16, 16, 3);
        let s = RngStream::new(11);
        assert_eq!(
            apply_additive_noise(&img, lvl(0.0), &mut s.substream("a", "additive")),
            img
        );
        let a = apply_additive_noise(&img, lvl(0.4), &mut s.substream("a", "additive"));
        let b = apply_additive_noise(&img, lvl(0.4), &mut s.substream("a", "additive"));
        assert_eq!(a, b);
        assert_ne!(a, img);
    }

    #[test]
    fn additive_std_matches_sigma() {
        let img = ImageBuffer::filled(256, 256, [128, 128, 128]).unwrap();
        let mut rng = RngStream::new(5).substream("g", "additive");
        let deltas = additive_deltas(&img, lvl(0.5), &mut rng, &CameraConfig::default());
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        let var =
            deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (deltas.len() - 1) as f64;
        let std = var.sqrt();
        assert!((std - 50.0).abs() < 1.5, "std = {std}");
    }

    #[test]
    fn additive_output_is_clamped_deltas() {
        let img = random_image(32, 32, 8);
        let s = RngStream::new(5);
        let out = apply_additive_noise(&img, lvl(0.8), &mut s.substream("g", "a"));
        let deltas = additive_deltas(
            &img,
            lvl(0.8),
            &mut s.substream("g", "a"),
            &CameraConfig::default(),
        );
        for ((&o, &i), d) in out.data().iter().zip(img.data()).zip(deltas) {
            assert_eq!(f64::from(o), (f64::from(i) + d).clamp(0.0, 255.0));
        }
    }

    #[test]
    fn shared_channel_mode_adds_same_noise() {
        let img = ImageBuffer::filled(8, 8, [100, 100, 100]).unwrap();
        let cfg = CameraConfig {
            shared_channel_noise: true,
            ..Default::default()
        };
        let out = apply_additive_noise_with(
            &img,
            lvl(0.2),
            &mut RngStream::new(1).substream("s", "a"),
            &cfg,
        );
        for px in out.data().chunks_exact(3) {
            assert!(px[0] == px[1] && px[1] == px[2]);
        }
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let img = random_image(10, 6, 9);
        let s = RngStream::new(3);
        assert_eq!(
            degrade_image(
                &img,
                CameraNoiseKind::Blur,
                lvl(0.0),
                &mut s.substream("x", "y")
            ),
            img
        );
        assert_eq!(
            degrade_image(
                &img,
                CameraNoiseKind::Additive,
                lvl(0.3),
                &mut s.substream("x", "y")
            ),
            apply_additive_noise(&img, lvl(0.3), &mut s.substream("x", "y"))
        );
    }

    #[test]
    fn kind_names() {
        for k in CameraNoiseKind::ALL {
            assert_eq!(k.as_str().parse::<CameraNoiseKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.as_str())
            );
        }
        assert!("foggy".parse::<CameraNoiseKind>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn dims_preserved(w in 1u32..12, h in 1u32..12, kind in 0usize..4, class in 0u8..=10, seed in any::<u64>()) {
            let img = random_image(w, h, seed);
            let mut rng = RngStream::new(seed).substream("p", "q");
            let out = degrade_image(&img, CameraNoiseKind::ALL[kind], NoiseLevel::from_class(class), &mut rng);
            prop_assert_eq!((out.width(), out.height(), out.data().len()), (w, h, img.data().len()));
        }
    }
}
