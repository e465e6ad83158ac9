//! Files, services and tooling around `wildtwin-core`.
//!
//! * [`manifest`], [`gridio`], [`scenario`]: scenario manifests, raw f32
//!   grids, the flux-extrema sidecar written by `ingest`.
//! * [`synth`]: deterministic synthetic scenarios.
//! * [`parallel`]: rayon row-parallel emitter and forest builds.
//! * [`render`]: sensor rasters to PNG / PNM / PFM.
//! * [`export`]: structured-text dumps (JSON, forest CSV).
//! * [`stations_io`]: station fixture loader.
//! * [`bench`]: orbiting-camera scheduler benchmark.
//! * [`session`], [`service`]: playback session and its HTTP API.

pub mod bench;
pub mod export;
pub mod gridio;
pub mod manifest;
pub mod parallel;
pub mod render;
pub mod scenario;
pub mod service;
pub mod session;
pub mod stations_io;
pub mod synth;

use wildtwin_core::emitter::EmitterError;
use wildtwin_core::forest::ForestError;
use wildtwin_core::lod::LodError;
use wildtwin_core::playback::PlaybackError;
use wildtwin_core::raster::RasterError;

pub use manifest::{load_manifest, ScenarioError, ScenarioManifest};
pub use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("emitters: {0}")]
    Emitter(#[from] EmitterError),
    #[error("forest: {0}")]
    Forest(#[from] ForestError),
    #[error("scheduler: {0}")]
    Lod(#[from] LodError),
    #[error("raster: {0}")]
    Raster(#[from] RasterError),
    #[error("playback: {0}")]
    Playback(#[from] PlaybackError),
    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
    #[error("{0}")]
    Unsupported(&'static str),
}
