//! Flux grid → fire emitters.
//!
//! Every cell with strictly positive heat flux becomes one emitter placed at
//! the cell's geodetic position. Its visual intensity comes from a three-step
//! mapping:
//!
//! 1. linear normalization against dataset extrema, clamped to `[0, 1]`;
//! 2. a power curve (`exponent`, 1.5 by default) that lifts contrast;
//! 3. componentwise interpolation between a minimum and maximum scale vector,
//!    and likewise for the color intensity vector.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geo::{GeoReference, LocalPoint, TangentPlane};
use crate::grid::ScalarGrid;
use crate::lod::LodTier;
use crate::math::{clamp01, lerp, powf};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub fn lerp(lo: Vec3, hi: Vec3, t: f64) -> Vec3 {
        Vec3::new(lerp(lo.x, hi.x, t), lerp(lo.y, hi.y, t), lerp(lo.z, hi.z, t))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Vec3) -> bool {
        self.x <= other.x && self.y <= other.y && self.z <= other.z
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterConfig {
    /// Flux mapped to zero intensity, kW/m².
    pub f_min: f64,
    /// Flux mapped to full intensity, kW/m².
    pub f_max: f64,
    pub exponent: f64,
    pub scale_min: Vec3,
    pub scale_max: Vec3,
    pub color_min: Vec3,
    pub color_max: Vec3,
}

pub const DEFAULT_EXPONENT: f64 = 1.5;
pub const DEFAULT_SCALE_MIN: Vec3 = Vec3::splat(100.0);
pub const DEFAULT_SCALE_MAX: Vec3 = Vec3::splat(150.0);
pub const DEFAULT_COLOR_MIN: Vec3 = Vec3::splat(100.0);
pub const DEFAULT_COLOR_MAX: Vec3 = Vec3::splat(500.0);

impl EmitterConfig {
    /// Default curve and bounds with the given flux extrema.
    pub fn with_extrema(f_min: f64, f_max: f64) -> Self {
        Self {
            f_min,
            f_max,
            exponent: DEFAULT_EXPONENT,
            scale_min: DEFAULT_SCALE_MIN,
            scale_max: DEFAULT_SCALE_MAX,
            color_min: DEFAULT_COLOR_MIN,
            color_max: DEFAULT_COLOR_MAX,
        }
    }

    /// `f_max == f_min` is accepted: every positive flux then maps to full
    /// intensity.
    pub fn validate(&self) -> Result<(), EmitterError> {
        if !(self.f_min.is_finite() && self.f_max.is_finite()) || self.f_max < self.f_min {
            return Err(EmitterError::InvalidConfig("f_max must be >= f_min"));
        }
        if !(self.exponent.is_finite() && self.exponent > 0.0) {
            return Err(EmitterError::InvalidConfig("exponent must be > 0"));
        }
        if !(self.scale_min.is_finite() && self.scale_max.is_finite())
            || !self.scale_min.le(&self.scale_max)
        {
            return Err(EmitterError::InvalidConfig(
                "scale_max must be >= scale_min componentwise",
            ));
        }
        if !(self.color_min.is_finite() && self.color_max.is_finite()) {
            return Err(EmitterError::InvalidConfig("color bounds must be finite"));
        }
        Ok(())
    }
}

impl Default for EmitterConfig {
    fn default() -> Self {
        Self::with_extrema(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmitterError {
    InvalidConfig(&'static str),
    DimensionMismatch {
        flux: (usize, usize),
        georef: (usize, usize),
    },
    /// Extrema requested over frames that contain no burning cell.
    NoPositiveFlux,
}

impl fmt::Display for EmitterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmitterError::InvalidConfig(msg) => write!(f, "invalid emitter config: {msg}"),
            EmitterError::DimensionMismatch { flux, georef } => write!(
                f,
                "flux grid is {}x{} but geo-reference is {}x{}",
                flux.0, flux.1, georef.0, georef.1
            ),
            EmitterError::NoPositiveFlux => f.write_str("no positive flux in any frame"),
        }
    }
}

impl core::error::Error for EmitterError {}

/// One positioned, scaled fire source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireEmitter {
    /// Row-major cell index, `Y * width + X`.
    pub id: u32,
    pub cell: (u32, u32),
    pub position: LocalPoint,
    pub flux: f32,
    pub f_curved: f64,
    pub scale: Vec3,
    pub color_scale: Vec3,
    /// Set by the scheduler; `None` straight out of [`build_emitters`].
    pub lod: Option<LodTier>,
    pub particle_mult: Option<f64>,
    pub active: bool,
}

/// Normalizes flux into `[0, 1]` against the configured extrema.
pub fn normalize_flux(f: f64, cfg: &EmitterConfig) -> f64 {
    let span = cfg.f_max - cfg.f_min;
    if span <= 0.0 {
        return if f > 0.0 { 1.0 } else { 0.0 };
    }
    clamp01((f - cfg.f_min) / span)
}

/// Power-curve response, `f_norm ^ exponent`.
pub fn shape_response(f_norm: f64, exponent: f64) -> f64 {
    clamp01(powf(clamp01(f_norm), exponent))
}

/// Componentwise interpolation from `lo` (at 0) to `hi` (at 1).
pub fn map_scale(f_curved: f64, lo: Vec3, hi: Vec3) -> Vec3 {
    Vec3::lerp(lo, hi, clamp01(f_curved))
}

/// Emitter for cell `(x, y)`, or `None` when its flux is not positive.
///
/// `plane` must be the tangent plane of `georef`'s origin; it is passed in so
/// callers building many emitters compute it once.
pub fn emitter_at(
    flux: &ScalarGrid,
    georef: &GeoReference,
    plane: &TangentPlane,
    cfg: &EmitterConfig,
    x: usize,
    y: usize,
) -> Option<FireEmitter> {
    let value = flux.get(x, y)?;
    if value <= 0.0 {
        return None;
    }
    let geo = georef.cell_geodetic(x, y).ok()?;
    let f_curved = shape_response(normalize_flux(f64::from(value), cfg), cfg.exponent);
    Some(FireEmitter {
        id: flux.index(x, y) as u32,
        cell: (x as u32, y as u32),
        position: plane.to_local(&geo),
        flux: value,
        f_curved,
        scale: map_scale(f_curved, cfg.scale_min, cfg.scale_max),
        color_scale: map_scale(f_curved, cfg.color_min, cfg.color_max),
        lod: None,
        particle_mult: None,
        active: false,
    })
}

/// All emitters of one flux frame, sorted by id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmitterSet {
    pub width: usize,
    pub height: usize,
    pub emitters: Vec<FireEmitter>,
}

impl EmitterSet {
    pub fn len(&self) -> usize {
        self.emitters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emitters.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&FireEmitter> {
        self.emitters
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.emitters[i])
    }

    /// Copies LOD assignments from a schedule onto the emitters; everything
    /// not in `active` is marked inactive.
    pub fn apply_schedule(&mut self, active: &crate::lod::ActiveSet) {
        for e in &mut self.emitters {
            e.lod = None;
            e.particle_mult = None;
            e.active = false;
        }
        for entry in &active.entries {
            if let Ok(i) = self.emitters.binary_search_by_key(&entry.id, |e| e.id) {
                let e = &mut self.emitters[i];
                e.lod = Some(entry.lod);
                e.particle_mult = Some(entry.particle_mult);
                e.active = true;
            }
        }
    }
}

fn check_dims(flux: &ScalarGrid, georef: &GeoReference) -> Result<(), EmitterError> {
    if flux.dims() != georef.dims() {
        return Err(EmitterError::DimensionMismatch {
            flux: flux.dims(),
            georef: georef.dims(),
        });
    }
    Ok(())
}

/// Builds the emitters of one row; rows can be built independently and
/// concatenated in row order.
pub fn build_row(
    flux: &ScalarGrid,
    georef: &GeoReference,
    cfg: &EmitterConfig,
    y: usize,
) -> Result<Vec<FireEmitter>, EmitterError> {
    check_dims(flux, georef)?;
    cfg.validate()?;
    let plane = georef.plane();
    Ok((0..flux.width())
        .filter_map(|x| emitter_at(flux, georef, &plane, cfg, x, y))
        .collect())
}

/// One emitter per strictly positive flux cell, in row-major id order.
pub fn build_emitters(
    flux: &ScalarGrid,
    georef: &GeoReference,
    cfg: &EmitterConfig,
) -> Result<EmitterSet, EmitterError> {
    check_dims(flux, georef)?;
    cfg.validate()?;
    let plane = georef.plane();
    let mut emitters = Vec::new();
    for y in 0..flux.height() {
        for x in 0..flux.width() {
            if let Some(e) = emitter_at(flux, georef, &plane, cfg, x, y) {
                emitters.push(e);
            }
        }
    }
    Ok(EmitterSet {
        width: flux.width(),
        height: flux.height(),
        emitters,
    })
}

/// Minimum and maximum over the strictly positive values of all frames.
pub fn flux_extrema<'a>(
    frames: impl IntoIterator<Item = &'a ScalarGrid>,
) -> Result<(f32, f32), EmitterError> {
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for frame in frames {
        for &v in frame.values() {
            if v > 0.0 {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if lo > hi {
        return Err(EmitterError::NoPositiveFlux);
    }
    Ok((lo, hi))
}
