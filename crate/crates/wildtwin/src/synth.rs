//! Synthetic scenarios for tests and demos.
//!
//! Not a fire model. Fuel is smoothed keyed value noise; the burning region
//! is an ellipse growing linearly in time from one keyed ignition cell and
//! stretched downwind; flux inside it is a fuel- and front-weighted ramp;
//! temperature is an affine function of flux. Everything is a pure function
//! of [`SynthParams`], so reruns produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use wildtwin_core::geo::{GeoReference, GeodeticPoint, LocalPoint, TangentPlane};
use wildtwin_core::rng::{hash4, unit_f64, Channel};

use crate::gridio::write_f32_file;
use crate::manifest::{ScenarioError, ScenarioManifest};

/// Ambient temperature and flux-to-temperature gain of synthetic frames.
pub const AMBIENT_K: f32 = 300.0;
pub const KELVIN_PER_FLUX: f32 = 3.2;

/// Peak flux at the burning front, kW/m².
const PEAK_FLUX: f64 = 150.0;
/// Initial burning radius, in cells.
const IGNITION_RADIUS_CELLS: f64 = 2.5;
/// Head-fire elongation per m/s of wind.
const WIND_STRETCH: f64 = 0.12;

const NOISE_CANOPY: u64 = 0x100;
const NOISE_SURFACE: u64 = 0x200;
const NOISE_ELEVATION: u64 = 0x300;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    /// Flux grid width and height.
    pub dims: (usize, usize),
    pub frames: usize,
    /// Direction the wind blows toward (degrees clockwise from north) and
    /// its speed in m/s.
    pub wind: (f64, f64),
    /// Fuel grid resolution relative to the flux grid.
    pub fuel_factor: usize,
    /// Flux cell size, meters.
    pub cell_size: f64,
    pub frame_interval_s: f64,
    /// Front spread rate, m/s.
    pub spread_rate: f64,
    /// Geodetic position of the grid center.
    pub origin: GeodeticPoint,
}

impl SynthParams {
    pub fn new(seed: u64, dims: (usize, usize), frames: usize, wind: (f64, f64)) -> Self {
        Self {
            seed,
            dims,
            frames,
            wind,
            fuel_factor: 5,
            cell_size: 100.0,
            frame_interval_s: 60.0,
            spread_rate: 1.5,
            origin: GeodeticPoint::new(38.78, -120.6, 1200.0),
        }
    }

    pub fn fuel_dims(&self) -> (usize, usize) {
        (self.dims.0 * self.fuel_factor, self.dims.1 * self.fuel_factor)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |field: &str, reason: &str| ScenarioError::Invalid {
            field: field.into(),
            reason: reason.into(),
        };
        if self.dims.0 < 4 || self.dims.1 < 4 {
            return Err(bad("dims", "synthetic grids must be at least 4x4"));
        }
        if self.frames == 0 {
            return Err(bad("frames", "must be at least 1"));
        }
        if self.fuel_factor == 0 {
            return Err(bad("fuel_factor", "must be at least 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(bad("seed", "must fit in a signed 64-bit integer to round-trip through the manifest"));
        }
        for (field, v) in [
            ("cell_size", self.cell_size),
            ("frame_interval_s", self.frame_interval_s),
            ("spread_rate", self.spread_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(field, "must be a positive number"));
            }
        }
        if !(self.wind.0.is_finite() && self.wind.1.is_finite() && self.wind.1 >= 0.0) {
            return Err(bad("wind", "direction must be finite and speed non-negative"));
        }
        self.origin.validate().map_err(|source| ScenarioError::Geo {
            field: "origin".into(),
            source,
        })
    }

    /// Flux cell the fire starts in; always inside the central half of the grid.
    pub fn ignition_cell(&self) -> (usize, usize) {
        let (w, h) = self.dims;
        let pick = |n: usize, ch: u64| {
            let lo = n / 4;
            let span = (n - 2 * lo).max(1);
            lo + (unit_f64(hash4(self.seed, ch, 0, Channel::Ignition as u64)) * span as f64) as usize
        };
        (pick(w, 0).min(w - 1), pick(h, 1).min(h - 1))
    }

    /// Burning-region radius at `frame` with no wind, meters.
    pub fn radius_at(&self, frame: usize) -> f64 {
        IGNITION_RADIUS_CELLS * self.cell_size + self.spread_rate * self.frame_interval_s * frame as f64
    }
}

/// Value noise in flux-cell coordinates: bilinear-smoothstep blend of keyed
/// lattice values, two octaves, result in `[0, 1)`.
fn value_noise(seed: u64, tag: u64, u: f64, v: f64, period: f64) -> f64 {
    let octave = |period: f64, k: u64| {
        let (px, py) = (u / period, v / period);
        let (fx, fy) = (px.floor(), py.floor());
        let (tx, ty) = (smooth(px - fx), smooth(py - fy));
        let (ix, iy) = (fx as i64, fy as i64);
        let at = |dx: i64, dy: i64| unit_f64(hash4(seed, (ix + dx) as u64, (iy + dy) as u64, tag + k));
        let top = at(0, 0) + (at(1, 0) - at(0, 0)) * tx;
        let bottom = at(0, 1) + (at(1, 1) - at(0, 1)) * tx;
        top + (bottom - top) * ty
    };
    0.65 * octave(period, 0) + 0.35 * octave(period * 0.4, 1)
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn ramp_above(n: f64, cut: f64, top: f64) -> f64 {
    if n < cut {
        0.0
    } else {
        top * (n - cut) / (1.0 - cut)
    }
}

/// Canopy fuel, kg/m², at fractional flux-cell coordinates.
pub fn canopy_at(seed: u64, u: f64, v: f64) -> f64 {
    ramp_above(value_noise(seed, NOISE_CANOPY, u, v, 12.0), 0.3, 2.4)
}

/// Surface fuel, kg/m², at fractional flux-cell coordinates.
pub fn surface_at(seed: u64, u: f64, v: f64) -> f64 {
    ramp_above(value_noise(seed, NOISE_SURFACE, u, v, 9.0), 0.2, 1.2)
}

fn elevation_at(seed: u64, origin_h: f64, u: f64, v: f64) -> f64 {
    origin_h + 400.0 * (value_noise(seed, NOISE_ELEVATION, u, v, 30.0) - 0.5)
}

/// Flux of every flux cell at `frame`, row-major.
pub fn flux_frame(p: &SynthParams, frame: usize) -> Vec<f32> {
    let (w, h) = p.dims;
    let (ix, iy) = p.ignition_cell();
    let r = p.radius_at(frame);
    let (dir, speed) = p.wind;
    let theta = dir.to_radians();
    let (sx, sy) = (libm::sin(theta), libm::cos(theta));
    // Semi-axes along and across the wind; the back of the ellipse stays r
    // behind the ignition point.
    let a = r * (1.0 + WIND_STRETCH * speed);
    let b = r;
    let shift = a - r;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let ex = (x as f64 - ix as f64) * p.cell_size - shift * sx;
            let ny = (y as f64 - iy as f64) * p.cell_size - shift * sy;
            let along = ex * sx + ny * sy;
            let across = ex * sy - ny * sx;
            let q2 = (along / a) * (along / a) + (across / b) * (across / b);
            let fuel = canopy_at(p.seed, x as f64, y as f64) + surface_at(p.seed, x as f64, y as f64);
            let ignition = (x, y) == (ix, iy);
            if q2 > 1.0 || (fuel <= 0.0 && !ignition) {
                out.push(0.0);
                continue;
            }
            let q = libm::sqrt(q2);
            let fuel_weight = 0.3 + 0.7 * (fuel / 2.0).min(1.0);
            let front = 0.2 + 0.8 * q * q * q;
            let jitter = 0.9 + 0.2 * unit_f64(hash4(p.seed, x as u64, y as u64, (Channel::Noise as u64) << 32 | frame as u64));
            out.push((PEAK_FLUX * fuel_weight * front * jitter) as f32);
        }
    }
    out
}

pub fn temperature_from_flux(flux: &[f32]) -> Vec<f32> {
    flux.iter().map(|&f| AMBIENT_K + KELVIN_PER_FLUX * f).collect()
}

/// Flux-grid geo-reference: regular spacing on the origin's tangent plane,
/// latitude increasing with Y and longitude with X.
pub fn flux_georef(p: &SynthParams) -> Result<GeoReference, ScenarioError> {
    let (w, h) = p.dims;
    let plane = TangentPlane::new(p.origin);
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let lons = (0..w)
        .map(|x| plane.to_geo(&LocalPoint::new((x as f64 - cx) * p.cell_size, 0.0, 0.0)).lon)
        .collect();
    let lats = (0..h)
        .map(|y| plane.to_geo(&LocalPoint::new(0.0, (y as f64 - cy) * p.cell_size, 0.0)).lat)
        .collect();
    let mut elev = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            elev.push(elevation_at(p.seed, p.origin.h, x as f64, y as f64));
        }
    }
    GeoReference::new(lats, lons, elev, p.origin).map_err(|source| ScenarioError::Geo {
        field: "dims".into(),
        source,
    })
}

fn fuel_grid(p: &SynthParams, f: fn(u64, f64, f64) -> f64) -> Vec<f32> {
    let (w, h) = p.fuel_dims();
    let k = p.fuel_factor as f64;
    let mut out = Vec::with_capacity(w * h);
    for j in 0..h {
        let v = (j as f64 + 0.5) / k - 0.5;
        for i in 0..w {
            let u = (i as f64 + 0.5) / k - 0.5;
            out.push(f(p.seed, u, v) as f32);
        }
    }
    out
}

fn narrow(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

/// Writes a complete scenario (manifest plus every grid) into `out`.
pub fn generate_synthetic(out: &Path, p: &SynthParams) -> Result<ScenarioManifest, ScenarioError> {
    p.validate()?;
    fs::create_dir_all(out).map_err(|e| ScenarioError::io(out, e))?;
    let (w, h) = p.dims;
    let (fw, fh) = p.fuel_dims();
    let manifest = ScenarioManifest {
        name: format!("synthetic-{}", p.seed),
        grid_flux_w: w,
        grid_flux_h: h,
        grid_fuel_w: fw,
        grid_fuel_h: fh,
        frame_count: p.frames,
        frame_interval_s: p.frame_interval_s,
        origin_lat: p.origin.lat,
        origin_lon: p.origin.lon,
        origin_h: p.origin.h,
        seed: p.seed,
        lat: "lat.f32".into(),
        lon: "lon.f32".into(),
        elev: "elev.f32".into(),
        flux: "flux_####.f32".into(),
        temp: "temp_####.f32".into(),
        surface_fuel: "surface_fuel.f32".into(),
        canopy_fuel: "canopy_fuel.f32".into(),
        fuel_lat: Some("fuel_lat.f32".into()),
        fuel_lon: Some("fuel_lon.f32".into()),
        fuel_elev: Some("fuel_elev.f32".into()),
        root: out.to_path_buf(),
    };
    let file = |name: &str| -> PathBuf { out.join(name) };

    let geo = flux_georef(p)?;
    write_f32_file(&file("lat.f32"), &narrow(geo.latitudes()))?;
    write_f32_file(&file("lon.f32"), &narrow(geo.longitudes()))?;
    write_f32_file(&file("elev.f32"), &narrow(geo.elevations()))?;
    let fuel_geo = if (fw, fh) == (w, h) {
        geo.clone()
    } else {
        geo.resample(fw, fh).map_err(|source| ScenarioError::Geo {
            field: "fuel_factor".into(),
            source,
        })?
    };
    write_f32_file(&file("fuel_lat.f32"), &narrow(fuel_geo.latitudes()))?;
    write_f32_file(&file("fuel_lon.f32"), &narrow(fuel_geo.longitudes()))?;
    write_f32_file(&file("fuel_elev.f32"), &narrow(fuel_geo.elevations()))?;

    write_f32_file(&file("canopy_fuel.f32"), &fuel_grid(p, canopy_at))?;
    write_f32_file(&file("surface_fuel.f32"), &fuel_grid(p, surface_at))?;
    for frame in 0..p.frames {
        let flux = flux_frame(p, frame);
        write_f32_file(&file(&format!("flux_{frame:04}.f32")), &flux)?;
        write_f32_file(&file(&format!("temp_{frame:04}.f32")), &temperature_from_flux(&flux))?;
    }
    manifest.save()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ignition_is_central_and_keyed() {
        for seed in 0..50 {
            let p = SynthParams::new(seed, (40, 20), 1, (0.0, 0.0));
            let (x, y) = p.ignition_cell();
            assert!((10..30).contains(&x) && (5..15).contains(&y), "{x},{y}");
        }
        let a = SynthParams::new(1, (144, 144), 1, (0.0, 0.0)).ignition_cell();
        let b = SynthParams::new(2, (144, 144), 1, (0.0, 0.0)).ignition_cell();
        assert_ne!(a, b);
    }

    #[test]
    fn noise_is_bounded() {
        for i in 0..2000 {
            let u = i as f64 * 0.37 - 50.0;
            let n = value_noise(9, NOISE_CANOPY, u, u * 0.5, 12.0);
            assert!((0.0..1.0).contains(&n));
            assert!((0.0..=2.4).contains(&canopy_at(9, u, -u)));
        }
    }

    #[test]
    fn wind_stretches_downwind() {
        let calm = SynthParams::new(3, (64, 64), 6, (0.0, 0.0));
        let windy = SynthParams::new(3, (64, 64), 6, (90.0, 8.0));
        let extent = |p: &SynthParams| {
            let f = flux_frame(p, 5);
            let (ix, _) = p.ignition_cell();
            let xs: Vec<usize> = (0..f.len()).filter(|&i| f[i] > 0.0).map(|i| i % 64).collect();
            (ix - xs.iter().min().unwrap(), xs.iter().max().unwrap() - ix)
        };
        let (back_c, head_c) = extent(&calm);
        let (back_w, head_w) = extent(&windy);
        assert!(head_w > head_c, "{head_w} vs {head_c}");
        assert!(back_w <= back_c + 1);
    }
}
