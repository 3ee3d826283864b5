use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

use crate::{Error, ImageBuffer, Result};

/// Decodes any supported image into 8-bit RGB. Gray and alpha inputs are
/// converted (gray is copied to all three channels, alpha is dropped).
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = image::load_from_memory(&bytes).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    ImageBuffer::new(w, h, rgb.into_raw())
}

/// Encodes by file extension (PNG when there is none or it is unknown) and
/// writes atomically.
pub fn write_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path).unwrap_or(ImageFormat::Png);
    let rgb = RgbImage::from_raw(img.width(), img.height(), img.data().to_vec())
        .expect("buffer shape is validated on construction");
    let mut bytes = Vec::new();
    rgb.write_to(&mut Cursor::new(&mut bytes), format)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
    super::write_atomic(path, &bytes)
}
