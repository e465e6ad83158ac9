//! Scenario manifest: one TOML document naming the grids of a scenario.
//!
//! Paths are relative to the manifest's directory. Per-frame files use a
//! `####` placeholder that expands to the zero-padded frame number.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wildtwin_core::geo::{GeoError, GeoReference, GeodeticPoint};
use wildtwin_core::grid::GridKind;

use crate::gridio;

pub const MANIFEST_FILE: &str = "scenario.toml";
const FRAME_PLACEHOLDER: &str = "####";

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed manifest: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("{field}: file {path} does not exist")]
    MissingFile { field: String, path: PathBuf },
    #[error("{field}: {path} is {actual} bytes, expected {expected}")]
    Length {
        field: String,
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("{field}: non-finite value {value} at ({x}, {y})")]
    NonFinite {
        field: String,
        x: usize,
        y: usize,
        value: f32,
    },
    #[error("frame {frame} out of range, scenario has {frame_count}")]
    FrameOutOfRange { frame: usize, frame_count: usize },
    #[error("{field}: {source}")]
    Geo {
        field: String,
        #[source]
        source: GeoError,
    },
}

impl ScenarioError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

fn default_lat() -> String {
    "lat.f32".into()
}
fn default_lon() -> String {
    "lon.f32".into()
}
fn default_elev() -> String {
    "elev.f32".into()
}
fn default_flux() -> String {
    "flux_####.f32".into()
}
fn default_temp() -> String {
    "temp_####.f32".into()
}
fn default_surface() -> String {
    "surface_fuel.f32".into()
}
fn default_canopy() -> String {
    "canopy_fuel.f32".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioManifest {
    pub name: String,
    pub grid_flux_w: usize,
    pub grid_flux_h: usize,
    pub grid_fuel_w: usize,
    pub grid_fuel_h: usize,
    pub frame_count: usize,
    pub frame_interval_s: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub origin_h: f64,
    pub seed: u64,
    #[serde(default = "default_lat")]
    pub lat: String,
    #[serde(default = "default_lon")]
    pub lon: String,
    #[serde(default = "default_elev")]
    pub elev: String,
    #[serde(default = "default_flux")]
    pub flux: String,
    #[serde(default = "default_temp")]
    pub temp: String,
    #[serde(default = "default_surface")]
    pub surface_fuel: String,
    #[serde(default = "default_canopy")]
    pub canopy_fuel: String,
    /// Axes of the fuel grid. When absent the fuel grid is taken to cover
    /// the flux grid's extent at its own resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel_lat: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel_lon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel_elev: Option<String>,
    /// Directory the relative paths resolve against.
    #[serde(skip)]
    pub root: PathBuf,
}

impl ScenarioManifest {
    pub fn flux_dims(&self) -> (usize, usize) {
        (self.grid_flux_w, self.grid_flux_h)
    }

    pub fn fuel_dims(&self) -> (usize, usize) {
        (self.grid_fuel_w, self.grid_fuel_h)
    }

    pub fn origin(&self) -> GeodeticPoint {
        GeodeticPoint::new(self.origin_lat, self.origin_lon, self.origin_h)
    }

    pub fn dims_of(&self, kind: GridKind) -> (usize, usize) {
        if kind.is_per_frame() {
            self.flux_dims()
        } else {
            self.fuel_dims()
        }
    }

    /// Absolute path and field label of a grid file. Frame is ignored for
    /// fuel kinds.
    pub fn grid_path(&self, kind: GridKind, frame: usize) -> (PathBuf, String) {
        match kind {
            GridKind::Flux => (self.root.join(expand(&self.flux, frame)), format!("flux[{frame:04}]")),
            GridKind::Temperature => (self.root.join(expand(&self.temp, frame)), format!("temp[{frame:04}]")),
            GridKind::SurfaceFuel => (self.root.join(&self.surface_fuel), "surface_fuel".into()),
            GridKind::CanopyFuel => (self.root.join(&self.canopy_fuel), "canopy_fuel".into()),
        }
    }

    fn has_fuel_axes(&self) -> bool {
        self.fuel_lat.is_some() || self.fuel_lon.is_some() || self.fuel_elev.is_some()
    }

    /// Files the manifest references, with their field label and expected
    /// byte length.
    pub fn referenced_files(&self) -> Vec<(String, PathBuf, u64)> {
        let (fw, fh) = self.flux_dims();
        let (gw, gh) = self.fuel_dims();
        let mut out = vec![
            ("lat".to_string(), self.root.join(&self.lat), bytes(fh)),
            ("lon".to_string(), self.root.join(&self.lon), bytes(fw)),
            ("elev".to_string(), self.root.join(&self.elev), bytes(fw * fh)),
        ];
        for frame in 0..self.frame_count {
            for kind in [GridKind::Flux, GridKind::Temperature] {
                let (path, field) = self.grid_path(kind, frame);
                out.push((field, path, bytes(fw * fh)));
            }
        }
        for kind in [GridKind::SurfaceFuel, GridKind::CanopyFuel] {
            let (path, field) = self.grid_path(kind, 0);
            out.push((field, path, bytes(gw * gh)));
        }
        let optional = [
            ("fuel_lat", &self.fuel_lat, gh),
            ("fuel_lon", &self.fuel_lon, gw),
            ("fuel_elev", &self.fuel_elev, gw * gh),
        ];
        for (field, rel, n) in optional {
            if let Some(rel) = rel {
                out.push((field.to_string(), self.root.join(rel), bytes(n)));
            }
        }
        out
    }

    fn validate_fields(&self) -> Result<(), ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(ScenarioError::invalid("name", "must not be empty"));
        }
        if self.frame_count == 0 {
            return Err(ScenarioError::invalid("frame_count", "must be at least 1"));
        }
        for (field, v) in [
            ("grid_flux_w", self.grid_flux_w),
            ("grid_flux_h", self.grid_flux_h),
            ("grid_fuel_w", self.grid_fuel_w),
            ("grid_fuel_h", self.grid_fuel_h),
        ] {
            if v == 0 {
                return Err(ScenarioError::invalid(field, "must be at least 1"));
            }
        }
        if !(self.frame_interval_s.is_finite() && self.frame_interval_s > 0.0) {
            return Err(ScenarioError::invalid("frame_interval_s", "must be a positive number"));
        }
        self.origin().validate().map_err(|source| ScenarioError::Geo {
            field: "origin".into(),
            source,
        })?;
        for (field, pattern) in [("flux", &self.flux), ("temp", &self.temp)] {
            if !pattern.contains(FRAME_PLACEHOLDER) {
                return Err(ScenarioError::invalid(field, "per-frame path needs a #### frame placeholder"));
            }
        }
        let axes = [&self.fuel_lat, &self.fuel_lon, &self.fuel_elev];
        if self.has_fuel_axes() && axes.iter().any(|a| a.is_none()) {
            return Err(ScenarioError::invalid(
                "fuel_lat",
                "fuel_lat, fuel_lon and fuel_elev must be given together",
            ));
        }
        if !self.has_fuel_axes() && self.fuel_dims() != self.flux_dims() && (self.grid_flux_w < 2 || self.grid_flux_h < 2) {
            return Err(ScenarioError::invalid(
                "grid_fuel_w",
                "fuel grid differs from flux grid but no fuel axes are given and the flux grid is too small to resample",
            ));
        }
        Ok(())
    }

    /// Geo-reference of the flux and temperature grids.
    pub fn load_georef(&self) -> Result<GeoReference, ScenarioError> {
        self.load_axes("lat", &self.lat, "lon", &self.lon, "elev", &self.elev)
    }

    /// Geo-reference of the fuel grids: explicit axes when the manifest has
    /// them, else the flux geo-reference resampled over the same extent.
    pub fn load_fuel_georef(&self, flux: &GeoReference) -> Result<GeoReference, ScenarioError> {
        match (&self.fuel_lat, &self.fuel_lon, &self.fuel_elev) {
            (Some(lat), Some(lon), Some(elev)) => self.load_axes("fuel_lat", lat, "fuel_lon", lon, "fuel_elev", elev),
            _ if self.fuel_dims() == flux.dims() => Ok(flux.clone()),
            _ => flux
                .resample(self.grid_fuel_w, self.grid_fuel_h)
                .map_err(|source| ScenarioError::Geo {
                    field: "grid_fuel_w".into(),
                    source,
                }),
        }
    }

    fn load_axes(
        &self,
        lat_field: &str,
        lat: &str,
        lon_field: &str,
        lon: &str,
        elev_field: &str,
        elev: &str,
    ) -> Result<GeoReference, ScenarioError> {
        let widen = |v: Vec<f32>| v.into_iter().map(f64::from).collect::<Vec<_>>();
        let lats = gridio::read_f32_file(&self.root.join(lat))?;
        let lons = gridio::read_f32_file(&self.root.join(lon))?;
        let elevs = gridio::read_f32_file(&self.root.join(elev))?;
        let w = lons.len();
        if let Some(i) = elevs.iter().position(|v| !v.is_finite()) {
            return Err(ScenarioError::NonFinite {
                field: elev_field.into(),
                x: i % w.max(1),
                y: i / w.max(1),
                value: elevs[i],
            });
        }
        GeoReference::new(widen(lats), widen(lons), widen(elevs), self.origin()).map_err(|source| {
            let field = match source {
                GeoError::LatitudeRange(_) => lat_field,
                GeoError::LongitudeRange(_) => lon_field,
                GeoError::AxisLength { axis, .. } | GeoError::NotMonotonic { axis, .. } => match axis {
                    "latitudes" => lat_field,
                    "longitudes" => lon_field,
                    _ => elev_field,
                },
                _ => elev_field,
            };
            ScenarioError::Geo {
                field: field.into(),
                source,
            }
        })
    }

    /// Writes the manifest as `scenario.toml` under `root`.
    pub fn save(&self) -> Result<PathBuf, ScenarioError> {
        let path = self.root.join(MANIFEST_FILE);
        let text = toml::to_string_pretty(self).map_err(|e| ScenarioError::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
        fs::write(&path, text).map_err(|e| ScenarioError::io(&path, e))?;
        Ok(path)
    }
}

fn bytes(n: usize) -> u64 {
    n as u64 * 4
}

fn expand(pattern: &str, frame: usize) -> String {
    pattern.replacen(FRAME_PLACEHOLDER, &format!("{frame:04}"), 1)
}

/// Resolves a scenario directory or manifest file to the manifest path.
pub fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

/// Parses and validates a manifest: field ranges, file presence and byte
/// lengths, and both geo-references.
pub fn load_manifest(path: &Path) -> Result<ScenarioManifest, ScenarioError> {
    let path = manifest_path(path);
    if !path.exists() {
        return Err(ScenarioError::MissingFile {
            field: "manifest".into(),
            path,
        });
    }
    let text = fs::read_to_string(&path).map_err(|e| ScenarioError::io(&path, e))?;
    let mut manifest: ScenarioManifest = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    manifest.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    manifest.validate_fields()?;
    for (field, file, expected) in manifest.referenced_files() {
        let meta = match fs::metadata(&file) {
            Ok(m) => m,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ScenarioError::MissingFile { field, path: file });
            }
            Err(e) => return Err(ScenarioError::io(&file, e)),
        };
        if meta.len() != expected {
            return Err(ScenarioError::Length {
                field,
                path: file,
                expected,
                actual: meta.len(),
            });
        }
    }
    let flux = manifest.load_georef()?;
    manifest.load_fuel_georef(&flux)?;
    Ok(manifest)
}
