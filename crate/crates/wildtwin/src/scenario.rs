//! A loaded scenario: validated manifest, both geo-references, and the
//! scenario-wide flux extrema.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wildtwin_core::emitter::{build_emitters, flux_extrema, EmitterConfig, EmitterSet};
use wildtwin_core::geo::GeoReference;
use wildtwin_core::grid::{GridKind, ScalarGrid};

use crate::gridio::load_grid;
use crate::manifest::{load_manifest, ScenarioError, ScenarioManifest};

pub const EXTREMA_FILE: &str = "extrema.toml";

/// Flux range over every positive cell of every frame, cached next to the
/// manifest by `ingest`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxExtrema {
    pub f_min: f64,
    pub f_max: f64,
    pub frame_count: usize,
    pub positive_cells: u64,
}

impl FluxExtrema {
    pub fn emitter_config(&self) -> EmitterConfig {
        EmitterConfig::with_extrema(self.f_min, self.f_max)
    }
}

/// Scans all flux frames. A scenario without any positive flux gets a
/// degenerate `(0, 0)` range, which yields no emitters.
pub fn compute_extrema(manifest: &ScenarioManifest) -> Result<FluxExtrema, ScenarioError> {
    let mut positive = 0u64;
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    // One frame at a time keeps memory flat on long scenarios.
    for frame in 0..manifest.frame_count {
        let g = load_grid(manifest, GridKind::Flux, frame)?;
        positive += g.values().iter().filter(|&&v| v > 0.0).count() as u64;
        if let Ok((a, b)) = flux_extrema(std::iter::once(&g)) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    let (f_min, f_max) = if lo <= hi { (f64::from(lo), f64::from(hi)) } else { (0.0, 0.0) };
    Ok(FluxExtrema {
        f_min,
        f_max,
        frame_count: manifest.frame_count,
        positive_cells: positive,
    })
}

pub fn extrema_path(manifest: &ScenarioManifest) -> PathBuf {
    manifest.root.join(EXTREMA_FILE)
}

pub fn write_extrema(manifest: &ScenarioManifest, extrema: &FluxExtrema) -> Result<PathBuf, ScenarioError> {
    let path = extrema_path(manifest);
    let text = toml::to_string_pretty(extrema).map_err(|e| ScenarioError::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&path, text).map_err(|e| ScenarioError::io(&path, e))?;
    Ok(path)
}

/// Reads the sidecar; `None` when it was never written or is stale (frame
/// count changed).
pub fn read_extrema(manifest: &ScenarioManifest) -> Result<Option<FluxExtrema>, ScenarioError> {
    let path = extrema_path(manifest);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| ScenarioError::io(&path, e))?;
    let ex: FluxExtrema = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok((ex.frame_count == manifest.frame_count).then_some(ex))
}

/// Validates the scenario and caches its flux extrema.
pub fn ingest(path: &Path) -> Result<(ScenarioManifest, FluxExtrema), ScenarioError> {
    let manifest = load_manifest(path)?;
    let extrema = compute_extrema(&manifest)?;
    write_extrema(&manifest, &extrema)?;
    Ok((manifest, extrema))
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub manifest: ScenarioManifest,
    pub georef: GeoReference,
    pub fuel_georef: GeoReference,
    pub extrema: FluxExtrema,
}

impl Scenario {
    /// Loads a scenario directory (or manifest path). Extrema come from the
    /// sidecar when present and are recomputed otherwise.
    pub fn open(path: &Path) -> Result<Scenario, ScenarioError> {
        let manifest = load_manifest(path)?;
        let georef = manifest.load_georef()?;
        let fuel_georef = manifest.load_fuel_georef(&georef)?;
        let extrema = match read_extrema(&manifest)? {
            Some(e) => e,
            None => compute_extrema(&manifest)?,
        };
        Ok(Scenario {
            manifest,
            georef,
            fuel_georef,
            extrema,
        })
    }

    pub fn name(&self) -> &str {
        &self.manifest.name
    }

    pub fn frame_count(&self) -> usize {
        self.manifest.frame_count
    }

    pub fn grid(&self, kind: GridKind, frame: usize) -> Result<ScalarGrid, ScenarioError> {
        load_grid(&self.manifest, kind, frame)
    }

    pub fn flux(&self, frame: usize) -> Result<ScalarGrid, ScenarioError> {
        self.grid(GridKind::Flux, frame)
    }

    pub fn emitter_config(&self) -> EmitterConfig {
        self.extrema.emitter_config()
    }

    pub fn emitters(&self, frame: usize) -> Result<EmitterSet, crate::Error> {
        let flux = self.flux(frame)?;
        Ok(build_emitters(&flux, &self.georef, &self.emitter_config())?)
    }
}
