//! Headerless little-endian f32 files.

use std::fs;
use std::io::Write;
use std::path::Path;

use wildtwin_core::grid::{GridError, GridKind, ScalarGrid};

use crate::manifest::{ScenarioError, ScenarioManifest};

pub fn decode_f32(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}

pub fn encode_f32(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Reads a whole f32 file; a length that is not a multiple of 4 is an error.
pub fn read_f32_file(path: &Path) -> Result<Vec<f32>, ScenarioError> {
    let bytes = fs::read(path).map_err(|e| ScenarioError::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(ScenarioError::Length {
            field: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            path: path.to_path_buf(),
            expected: (bytes.len() as u64 / 4) * 4,
            actual: bytes.len() as u64,
        });
    }
    Ok(decode_f32(&bytes))
}

pub fn write_f32_file(path: &Path, values: &[f32]) -> Result<(), ScenarioError> {
    let mut f = fs::File::create(path).map_err(|e| ScenarioError::io(path, e))?;
    f.write_all(&encode_f32(values)).map_err(|e| ScenarioError::io(path, e))
}

pub fn write_grid(path: &Path, grid: &ScalarGrid) -> Result<(), ScenarioError> {
    write_f32_file(path, grid.values())
}

/// Loads one grid named by the manifest. `frame` is ignored for fuel kinds.
pub fn load_grid(manifest: &ScenarioManifest, kind: GridKind, frame: usize) -> Result<ScalarGrid, ScenarioError> {
    if kind.is_per_frame() && frame >= manifest.frame_count {
        return Err(ScenarioError::FrameOutOfRange {
            frame,
            frame_count: manifest.frame_count,
        });
    }
    let (path, field) = manifest.grid_path(kind, frame);
    let (w, h) = manifest.dims_of(kind);
    let bytes = fs::read(&path).map_err(|e| ScenarioError::io(&path, e))?;
    let expected = (w * h * 4) as u64;
    if bytes.len() as u64 != expected {
        return Err(ScenarioError::Length {
            field,
            path,
            expected,
            actual: bytes.len() as u64,
        });
    }
    ScalarGrid::new(w, h, kind, decode_f32(&bytes)).map_err(|e| match e {
        GridError::NonFinite { x, y, value } => ScenarioError::NonFinite { field, x, y, value },
        other => ScenarioError::Invalid {
            field,
            reason: other.to_string(),
        },
    })
}
