//! Core scene math for a headless wildfire digital twin.
//!
//! Everything here is pure computation over in-memory grids: no file IO, no
//! threads, no clocks. The crate is `no_std` and only needs `alloc`, so the
//! same code runs inside the service, the CLI, and embedded render workers.
//! Transcendental functions go through `libm` so results are bit-identical
//! across platforms.
//!
//! Module map:
//!
//! * [`grid`]: row-major scalar fields (flux, temperature, fuel).
//! * [`geo`]: geodetic ↔ local east-north-up conversion and grid geo-reference.
//! * [`emitter`]: flux grid → positioned, scaled fire emitters.
//! * [`lod`]: distance LOD tiers, nearest-first active-set selection, slot pool.
//! * [`forest`]: fuel-driven deterministic tree and grass placement.
//! * [`raster`]: colormaps, thermal fusion, heatmaps, heightfield depth.
//! * [`stations`]: fire-station registry queries and camera anchors.
//! * [`playback`]: playback clock state machine and scene snapshots.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod emitter;
pub mod forest;
pub mod geo;
pub mod grid;
pub mod lod;
mod math;
pub mod playback;
pub mod raster;
pub mod rng;
pub mod stations;

pub use emitter::{EmitterConfig, EmitterSet, FireEmitter, Vec3};
pub use forest::{ForestConfig, ForestSet, GrassInstance, TreeCategory, TreeInstance};
pub use geo::{GeoReference, GeodeticPoint, LocalPoint};
pub use grid::{GridKind, ScalarGrid};
pub use lod::{ActiveSet, CameraPose, LodTier, Scheduler, SchedulerConfig, SlotPool};
pub use playback::{PlaybackState, PlaybackStatus, SceneFrame};
pub use raster::{ColorRamp, Raster, Rgb};
