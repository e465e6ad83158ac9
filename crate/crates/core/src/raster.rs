//! 2D sensor rasters: colormaps, thermal fusion, heatmaps and heightfield depth.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geo::GeoReference;
use crate::grid::ScalarGrid;
use crate::lod::CameraPose;
use crate::math::{clamp01, cos, floor, lerp, round, sin, sqrt, tan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    /// Rec. 709 relative luminance on the 0..=255 scale.
    pub fn luminance(self) -> f64 {
        0.2126 * f64::from(self.r) + 0.7152 * f64::from(self.g) + 0.0722 * f64::from(self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RasterError {
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    LengthMismatch { expected: usize, actual: usize },
    InvalidRamp(&'static str),
    InvalidAlpha(f64),
    CameraBelowTerrain { camera_z: f64, terrain_z: f64 },
    InvalidCamera,
    ZeroResolution,
}

impl fmt::Display for RasterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RasterError::DimensionMismatch { left, right } => write!(
                f,
                "raster dimensions differ: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            RasterError::LengthMismatch { expected, actual } => {
                write!(f, "raster has {actual} pixels, expected {expected}")
            }
            RasterError::InvalidRamp(msg) => write!(f, "invalid color ramp: {msg}"),
            RasterError::InvalidAlpha(a) => write!(f, "blend alpha {a} outside [0, 1]"),
            RasterError::CameraBelowTerrain {
                camera_z,
                terrain_z,
            } => write!(f, "camera at z={camera_z} is below terrain at z={terrain_z}"),
            RasterError::InvalidCamera => f.write_str("camera pose is invalid"),
            RasterError::ZeroResolution => f.write_str("raster resolution must be at least 1x1"),
        }
    }
}

impl core::error::Error for RasterError {}

/// Row-major image of `P` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

impl<P: Copy> Raster<P> {
    pub fn new(width: usize, height: usize, data: Vec<P>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroResolution);
        }
        if data.len() != width * height {
            return Err(RasterError::LengthMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: P) -> Result<Self, RasterError> {
        Self::new(width, height, alloc::vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[P] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> Option<P> {
        (x < self.width && y < self.height).then(|| self.data[y * self.width + x])
    }

    pub fn map<Q: Copy>(&self, f: impl FnMut(&P) -> Q) -> Raster<Q> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Nearest-neighbor resize.
    pub fn resample_nearest(&self, width: usize, height: usize) -> Result<Raster<P>, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroResolution);
        }
        if (width, height) == self.dims() {
            return Ok(self.clone());
        }
        let mut data = Vec::with_capacity(width * height);
        for j in 0..height {
            let sy = (j * self.height) / height;
            for i in 0..width {
                let sx = (i * self.width) / width;
                data.push(self.data[sy * self.width + sx]);
            }
        }
        Raster::new(width, height, data)
    }
}

impl Raster<Rgb> {
    /// Interleaved RGB bytes.
    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|p| p.channels()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorStop {
    pub t: f64,
    pub color: Rgb,
}

impl ColorStop {
    pub const fn new(t: f64, color: Rgb) -> Self {
        Self { t, color }
    }
}

/// Piecewise-linear color ramp over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorRamp {
    stops: Vec<ColorStop>,
}

impl ColorRamp {
    /// Stops must be sorted by `t`, start at 0 and end at 1.
    pub fn new(stops: Vec<ColorStop>) -> Result<Self, RasterError> {
        if stops.len() < 2 {
            return Err(RasterError::InvalidRamp("need at least two stops"));
        }
        if stops[0].t != 0.0 || stops[stops.len() - 1].t != 1.0 {
            return Err(RasterError::InvalidRamp("stops must span [0, 1]"));
        }
        if stops.windows(2).any(|w| !(w[0].t < w[1].t)) {
            return Err(RasterError::InvalidRamp("stops must be strictly increasing"));
        }
        Ok(Self { stops })
    }

    pub fn stops(&self) -> &[ColorStop] {
        &self.stops
    }

    pub fn eval(&self, t: f64) -> Rgb {
        let t = clamp01(t);
        let i = self
            .stops
            .partition_point(|s| s.t <= t)
            .clamp(1, self.stops.len() - 1);
        let (a, b) = (self.stops[i - 1], self.stops[i]);
        let f = (t - a.t) / (b.t - a.t);
        let mix = |x: u8, y: u8| round(lerp(f64::from(x), f64::from(y), f)) as u8;
        Rgb::new(
            mix(a.color.r, b.color.r),
            mix(a.color.g, b.color.g),
            mix(a.color.b, b.color.b),
        )
    }
}

/// Ironbow-style thermal ramp: black, dark red, orange, yellow, white.
pub fn thermal_ramp() -> ColorRamp {
    ColorRamp::new(alloc::vec![
        ColorStop::new(0.0, Rgb::BLACK),
        ColorStop::new(0.25, Rgb::new(128, 0, 0)),
        ColorStop::new(0.5, Rgb::new(255, 128, 0)),
        ColorStop::new(0.75, Rgb::new(255, 255, 0)),
        ColorStop::new(1.0, Rgb::WHITE),
    ])
    .expect("static ramp")
}

/// Fire intensity ramp: light yellow (low), deep yellow, red (high).
pub fn intensity_ramp() -> ColorRamp {
    ColorRamp::new(alloc::vec![
        ColorStop::new(0.0, INTENSITY_LOW),
        ColorStop::new(0.5, Rgb::new(255, 204, 0)),
        ColorStop::new(1.0, INTENSITY_HIGH),
    ])
    .expect("static ramp")
}

pub const INTENSITY_LOW: Rgb = Rgb::new(255, 255, 153);
pub const INTENSITY_HIGH: Rgb = Rgb::new(255, 0, 0);
/// Pixels with no burning flux.
pub const INTENSITY_BACKGROUND: Rgb = Rgb::BLACK;

pub fn thermal_colormap(t_norm: f64) -> Rgb {
    thermal_ramp().eval(t_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    /// Temperature mapped to the cold end, K.
    pub ambient: f64,
    /// Temperature mapped to the hot end; `None` uses the grid maximum.
    pub t_max: Option<f64>,
    pub alpha: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            ambient: 300.0,
            t_max: None,
            alpha: 1.0,
        }
    }
}

/// Averages grid cells into a `width × height` raster footprint.
///
/// Output pixel `(i, j)` averages source columns `[i*W/w, (i+1)*W/w)` (at
/// least one) and the matching rows.
pub fn box_downsample(grid: &ScalarGrid, width: usize, height: usize) -> Result<Raster<f64>, RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::ZeroResolution);
    }
    let (w0, h0) = grid.dims();
    let span = |i: usize, out: usize, src: usize| {
        let a = (i * src) / out;
        let b = (((i + 1) * src) / out).max(a + 1).min(src);
        (a, b)
    };
    let mut data = Vec::with_capacity(width * height);
    for j in 0..height {
        let (y0, y1) = span(j, height, h0);
        for i in 0..width {
            let (x0, x1) = span(i, width, w0);
            let mut sum = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += f64::from(grid.values()[y * w0 + x]);
                }
            }
            data.push(sum / ((y1 - y0) * (x1 - x0)) as f64);
        }
    }
    Raster::new(width, height, data)
}

/// Thermal colormap of a temperature grid averaged to `width × height`.
pub fn render_thermal(
    temp: &ScalarGrid,
    width: usize,
    height: usize,
    cfg: &ThermalConfig,
) -> Result<Raster<Rgb>, RasterError> {
    let avg = box_downsample(temp, width, height)?;
    let t_max = cfg.t_max.unwrap_or_else(|| f64::from(temp.max()));
    let span = t_max - cfg.ambient;
    let ramp = thermal_ramp();
    Ok(avg.map(|&t| {
        let n = if span > 0.0 { (t - cfg.ambient) / span } else { 0.0 };
        ramp.eval(clamp01(n))
    }))
}

/// Additive fusion: `clamp(base/255 + alpha * thermal/255, 0, 1) * 255`.
pub fn blend_thermal(base: &Raster<Rgb>, thermal: &Raster<Rgb>, alpha: f64) -> Result<Raster<Rgb>, RasterError> {
    if base.dims() != thermal.dims() {
        return Err(RasterError::DimensionMismatch {
            left: base.dims(),
            right: thermal.dims(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(RasterError::InvalidAlpha(alpha));
    }
    let add = |b: u8, t: u8| {
        let v = clamp01(f64::from(b) / 255.0 + alpha * f64::from(t) / 255.0);
        round(v * 255.0) as u8
    };
    let data = base
        .pixels()
        .iter()
        .zip(thermal.pixels())
        .map(|(b, t)| Rgb::new(add(b.r, t.r), add(b.g, t.g), add(b.b, t.b)))
        .collect();
    Raster::new(base.width(), base.height(), data)
}

/// Fire intensity heatmap over flux normalized against `(f_min, f_max)`.
pub fn render_intensity(flux: &ScalarGrid, extrema: (f64, f64)) -> Raster<Rgb> {
    let ramp = intensity_ramp();
    let (lo, hi) = extrema;
    let data = flux
        .values()
        .iter()
        .map(|&f| {
            if f <= 0.0 {
                return INTENSITY_BACKGROUND;
            }
            let f = f64::from(f);
            let n = if hi > lo { clamp01((f - lo) / (hi - lo)) } else { 1.0 };
            ramp.eval(n)
        })
        .collect();
    Raster {
        width: flux.width(),
        height: flux.height(),
        data,
    }
}

/// Green-channel fuel density map normalized to the grid maximum.
pub fn render_fuel(canopy: &ScalarGrid) -> Raster<Rgb> {
    let max = f64::from(canopy.max());
    let data = canopy
        .values()
        .iter()
        .map(|&c| {
            let n = if max > 0.0 { clamp01(f64::from(c) / max) } else { 0.0 };
            Rgb::new(0, round(n * 255.0) as u8, 0)
        })
        .collect();
    Raster {
        width: canopy.width(),
        height: canopy.height(),
        data,
    }
}

/// Heightfield in scene coordinates sampled bilinearly from a geo-reference.
#[derive(Debug, Clone)]
pub struct Heightfield {
    xs: Vec<f64>,
    ys: Vec<f64>,
    z: Vec<f64>,
    max_z: f64,
    spacing: f64,
}

impl Heightfield {
    pub fn from_georef(georef: &GeoReference) -> Self {
        let origin_h = georef.origin().h;
        let z: Vec<f64> = georef.elevations().iter().map(|e| e - origin_h).collect();
        let max_z = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let xs = georef.column_x();
        let ys = georef.row_y();
        let gap = |a: &[f64]| {
            a.windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(f64::INFINITY, f64::min)
        };
        let spacing = gap(&xs).min(gap(&ys));
        Self {
            xs,
            ys,
            z,
            max_z,
            spacing: if spacing.is_finite() { spacing } else { 1.0 },
        }
    }

    /// Terrain height at scene `(x, y)`; beyond the grid the edge is extended.
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        let u = frac_index(&self.xs, x);
        let v = frac_index(&self.ys, y);
        let w = self.xs.len();
        let h = self.ys.len();
        let x0 = floor(u) as usize;
        let y0 = floor(v) as usize;
        let x1 = (x0 + 1).min(w - 1);
        let y1 = (y0 + 1).min(h - 1);
        let fx = u - x0 as f64;
        let fy = v - y0 as f64;
        let z = |i: usize, j: usize| self.z[j * w + i];
        let top = z(x0, y0) * (1.0 - fx) + z(x1, y0) * fx;
        let bottom = z(x0, y1) * (1.0 - fx) + z(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Fractional index of `v` in a strictly monotonic axis, clamped to its ends.
fn frac_index(axis: &[f64], v: f64) -> f64 {
    let n = axis.len();
    if n == 1 {
        return 0.0;
    }
    let increasing = axis[1] > axis[0];
    let k = if increasing {
        axis.partition_point(|&a| a <= v)
    } else {
        axis.partition_point(|&a| a >= v)
    };
    if k == 0 {
        return 0.0;
    }
    if k >= n {
        return (n - 1) as f64;
    }
    let (a, b) = (axis[k - 1], axis[k]);
    (k - 1) as f64 + (v - a) / (b - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthParams {
    pub width: usize,
    pub height: usize,
    /// Rays travelling farther than this without a hit are misses, meters.
    pub max_distance: f64,
}

impl Default for DepthParams {
    fn default() -> Self {
        Self {
            width: 129,
            height: 129,
            max_distance: 200_000.0,
        }
    }
}

/// Pixels whose ray never meets the terrain.
pub const DEPTH_MISS: f32 = f32::INFINITY;

/// Unit view ray through the center of pixel `(i, j)` for a pinhole camera.
pub fn pixel_ray(camera: &CameraPose, width: usize, height: usize, i: usize, j: usize) -> [f64; 3] {
    let (yaw, pitch) = (camera.yaw.to_radians(), camera.pitch.to_radians());
    let forward = [cos(pitch) * sin(yaw), cos(pitch) * cos(yaw), sin(pitch)];
    let right = [cos(yaw), -sin(yaw), 0.0];
    // up = right × forward
    let up = [
        right[1] * forward[2] - right[2] * forward[1],
        right[2] * forward[0] - right[0] * forward[2],
        right[0] * forward[1] - right[1] * forward[0],
    ];
    let half = tan(camera.fov.to_radians() * 0.5);
    let u = ((i as f64 + 0.5) / width as f64 * 2.0 - 1.0) * half;
    let v = (1.0 - (j as f64 + 0.5) / height as f64 * 2.0) * half * height as f64 / width as f64;
    let d = [
        forward[0] + right[0] * u + up[0] * v,
        forward[1] + right[1] * u + up[1] * v,
        forward[2] + right[2] * u + up[2] * v,
    ];
    let n = sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    [d[0] / n, d[1] / n, d[2] / n]
}

/// Distance along one ray to the heightfield, or `None` on a miss.
pub fn march_ray(field: &Heightfield, origin: [f64; 3], dir: [f64; 3], max_distance: f64) -> Option<f64> {
    let gap_at = |t: f64| {
        let z = origin[2] + dir[2] * t;
        z - field.height_at(origin[0] + dir[0] * t, origin[1] + dir[1] * t)
    };
    let min_step = field.spacing * 0.25;
    let max_step = field.spacing * 8.0;
    let mut t_prev = 0.0;
    let mut t = 0.0;
    let mut gap = gap_at(0.0);
    while gap > 0.0 {
        let z = origin[2] + dir[2] * t;
        if dir[2] >= 0.0 && z > field.max_z {
            return None;
        }
        if t > max_distance {
            return None;
        }
        t_prev = t;
        // Far above the terrain the remaining drop bounds the next step.
        let bound = if dir[2] < 0.0 && z > field.max_z {
            (z - field.max_z) / -dir[2]
        } else {
            0.0
        };
        t += bound.max((gap * 0.5).clamp(min_step, max_step));
        gap = gap_at(t);
    }
    // Bisect the bracket [t_prev, t].
    let (mut lo, mut hi) = (t_prev, t);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Per-pixel ray length to the terrain, meters; [`DEPTH_MISS`] where the ray
/// escapes.
pub fn render_depth(
    camera: &CameraPose,
    georef: &GeoReference,
    params: &DepthParams,
) -> Result<Raster<f32>, RasterError> {
    if params.width == 0 || params.height == 0 {
        return Err(RasterError::ZeroResolution);
    }
    camera.validate().map_err(|_| RasterError::InvalidCamera)?;
    let field = Heightfield::from_georef(georef);
    let p = camera.position;
    let ground = field.height_at(p.x, p.y);
    if p.z <= ground {
        return Err(RasterError::CameraBelowTerrain {
            camera_z: p.z,
            terrain_z: ground,
        });
    }
    let mut data = Vec::with_capacity(params.width * params.height);
    for j in 0..params.height {
        for i in 0..params.width {
            let dir = pixel_ray(camera, params.width, params.height, i, j);
            let d = march_ray(&field, [p.x, p.y, p.z], dir, params.max_distance);
            data.push(d.map_or(DEPTH_MISS, |d| d as f32));
        }
    }
    Raster::new(params.width, params.height, data)
}
