//! File formats and dataset generation.

mod dataset;
mod image;
pub mod pcd;

use std::io::Write;
use std::path::Path;

pub use self::dataset::{
    generate_dataset, level_label, output_relative_path, read_manifest, sample_id, write_manifest,
    GenerateOptions, GenerateSummary, ManifestRecord, SampleKind, SensorKind, SensorSelection,
    MANIFEST_FILE, RADAR_KIND,
};
pub use self::image::{read_image, write_image};
pub use self::pcd::{read_pcd, write_pcd, PcdFile, PcdHeader};

use crate::{Error, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, creating parent directories as needed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    // Temp files are created owner-only; outputs should be ordinary files.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
