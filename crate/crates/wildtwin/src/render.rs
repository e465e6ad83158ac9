//! Sensor rasters for a scenario frame and their file encodings.

use std::fmt;
use std::io::Cursor;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wildtwin_core::geo::LocalPoint;
use wildtwin_core::grid::GridKind;
use wildtwin_core::lod::CameraPose;
use wildtwin_core::raster::{
    blend_thermal, render_depth, render_fuel, render_intensity, render_thermal, DepthParams, Raster, Rgb,
    ThermalConfig,
};
use wildtwin_core::stations::fire_origin_pose;

use crate::scenario::Scenario;
use crate::Error;

/// Altitude of the default depth camera above the fire centroid, meters.
pub const DEFAULT_CAMERA_ALTITUDE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderKind {
    Thermal,
    Intensity,
    Fuel,
    Depth,
    /// Fuel base layer with the thermal layer added on top.
    Fused,
}

impl RenderKind {
    pub const ALL: [RenderKind; 5] = [
        RenderKind::Thermal,
        RenderKind::Intensity,
        RenderKind::Fuel,
        RenderKind::Depth,
        RenderKind::Fused,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RenderKind::Thermal => "thermal",
            RenderKind::Intensity => "intensity",
            RenderKind::Fuel => "fuel",
            RenderKind::Depth => "depth",
            RenderKind::Fused => "fused",
        }
    }
}

impl fmt::Display for RenderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RenderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RenderKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown render kind {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageFormat {
    #[default]
    Png,
    /// Binary PPM for color rasters, PGM for depth.
    Pnm,
    /// Little-endian PFM; depth only, misses stored as +inf.
    Pfm,
}

impl ImageFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ImageFormat::Png => "image/png",
            ImageFormat::Pnm => "image/x-portable-anymap",
            ImageFormat::Pfm => "application/octet-stream",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_extension(path: &std::path::Path) -> Option<ImageFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "png" => Some(ImageFormat::Png),
            "ppm" | "pgm" | "pnm" => Some(ImageFormat::Pnm),
            "pfm" => Some(ImageFormat::Pfm),
            _ => None,
        }
    }
}

impl FromStr for ImageFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "png" => Ok(ImageFormat::Png),
            "pnm" | "ppm" | "pgm" => Ok(ImageFormat::Pnm),
            "pfm" => Ok(ImageFormat::Pfm),
            _ => Err(format!("unknown image format {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    /// Output size; defaults to the source grid (depth: 129×129).
    pub size: Option<(usize, usize)>,
    pub thermal: ThermalConfig,
    /// Depth camera; defaults to a nadir view above the frame's fire centroid.
    pub camera: Option<CameraPose>,
    pub max_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rendered {
    Color(Raster<Rgb>),
    Depth(Raster<f32>),
}

impl Rendered {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Rendered::Color(r) => r.dims(),
            Rendered::Depth(r) => r.dims(),
        }
    }
}

/// Default depth camera: above the frame's fire centroid, or above the
/// origin when the frame has no fire.
pub fn default_camera(scenario: &Scenario, frame: usize) -> Result<CameraPose, Error> {
    let flux = scenario.flux(frame)?;
    Ok(fire_origin_pose(&flux, &scenario.georef, DEFAULT_CAMERA_ALTITUDE)
        .unwrap_or_else(|| CameraPose::nadir(LocalPoint::new(0.0, 0.0, DEFAULT_CAMERA_ALTITUDE))))
}

pub fn render(scenario: &Scenario, kind: RenderKind, frame: usize, opts: &RenderOptions) -> Result<Rendered, Error> {
    let resize = |r: Raster<Rgb>| -> Result<Raster<Rgb>, Error> {
        match opts.size {
            Some((w, h)) if (w, h) != r.dims() => Ok(r.resample_nearest(w, h)?),
            _ => Ok(r),
        }
    };
    let out = match kind {
        RenderKind::Thermal => {
            let temp = scenario.grid(GridKind::Temperature, frame)?;
            let (w, h) = opts.size.unwrap_or(temp.dims());
            Rendered::Color(render_thermal(&temp, w, h, &opts.thermal)?)
        }
        RenderKind::Intensity => {
            let flux = scenario.flux(frame)?;
            let ex = scenario.extrema;
            Rendered::Color(resize(render_intensity(&flux, (ex.f_min, ex.f_max)))?)
        }
        RenderKind::Fuel => {
            let canopy = scenario.grid(GridKind::CanopyFuel, 0)?;
            Rendered::Color(resize(render_fuel(&canopy))?)
        }
        RenderKind::Fused => {
            let canopy = scenario.grid(GridKind::CanopyFuel, 0)?;
            let base = resize(render_fuel(&canopy))?;
            let temp = scenario.grid(GridKind::Temperature, frame)?;
            let (w, h) = base.dims();
            let thermal = render_thermal(&temp, w, h, &opts.thermal)?;
            Rendered::Color(blend_thermal(&base, &thermal, opts.thermal.alpha)?)
        }
        RenderKind::Depth => {
            if frame >= scenario.frame_count() {
                return Err(crate::manifest::ScenarioError::FrameOutOfRange {
                    frame,
                    frame_count: scenario.frame_count(),
                }
                .into());
            }
            let camera = match opts.camera {
                Some(c) => c,
                None => default_camera(scenario, frame)?,
            };
            let mut params = DepthParams::default();
            if let Some((w, h)) = opts.size {
                params.width = w;
                params.height = h;
            }
            if let Some(d) = opts.max_distance {
                params.max_distance = d;
            }
            Rendered::Depth(render_depth(&camera, &scenario.georef, &params)?)
        }
    };
    Ok(out)
}

/// Depth as 8-bit gray: nearest hit white, farthest hit 1, misses black.
pub fn depth_to_gray(depth: &Raster<f32>) -> Vec<u8> {
    let finite = depth.pixels().iter().copied().filter(|d| d.is_finite());
    let (lo, hi) = finite.fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));
    let span = (hi - lo).max(f32::MIN_POSITIVE);
    depth
        .pixels()
        .iter()
        .map(|&d| {
            if !d.is_finite() {
                0
            } else {
                (255.0 - 254.0 * ((d - lo) / span)).round() as u8
            }
        })
        .collect()
}

fn pnm(magic: &str, w: usize, h: usize, body: &[u8]) -> Vec<u8> {
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(body);
    out
}

/// PFM rows run bottom to top.
fn pfm(depth: &Raster<f32>) -> Vec<u8> {
    let (w, h) = depth.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    for y in (0..h).rev() {
        for &d in &depth.pixels()[y * w..(y + 1) * w] {
            out.extend_from_slice(&d.to_le_bytes());
        }
    }
    out
}

fn png(w: usize, h: usize, color: image::ExtendedColorType, body: &[u8]) -> Result<Vec<u8>, Error> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(Cursor::new(&mut out)).write_image(body, w as u32, h as u32, color)?;
    Ok(out)
}

pub fn encode(rendered: &Rendered, format: ImageFormat) -> Result<Vec<u8>, Error> {
    let (w, h) = rendered.dims();
    match (rendered, format) {
        (Rendered::Color(r), ImageFormat::Png) => png(w, h, image::ExtendedColorType::Rgb8, &r.to_rgb_bytes()),
        (Rendered::Color(r), ImageFormat::Pnm) => Ok(pnm("P6", w, h, &r.to_rgb_bytes())),
        (Rendered::Color(_), ImageFormat::Pfm) => Err(Error::Unsupported("pfm output is for depth rasters only")),
        (Rendered::Depth(d), ImageFormat::Png) => png(w, h, image::ExtendedColorType::L8, &depth_to_gray(d)),
        (Rendered::Depth(d), ImageFormat::Pnm) => Ok(pnm("P5", w, h, &depth_to_gray(d))),
        (Rendered::Depth(d), ImageFormat::Pfm) => Ok(pfm(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_roundtrip() {
        for k in RenderKind::ALL {
            assert_eq!(k.as_str().parse::<RenderKind>().unwrap(), k);
        }
        assert!("sonar".parse::<RenderKind>().is_err());
    }

    #[test]
    fn pnm_and_pfm_layout() {
        let r = Raster::new(2, 1, vec![Rgb::new(1, 2, 3), Rgb::new(4, 5, 6)]).unwrap();
        let bytes = encode(&Rendered::Color(r), ImageFormat::Pnm).unwrap();
        assert_eq!(&bytes[..11], b"P6\n2 1\n255\n");
        assert_eq!(&bytes[11..], &[1, 2, 3, 4, 5, 6]);

        let d = Raster::new(1, 2, vec![1.0f32, 2.0]).unwrap();
        let bytes = encode(&Rendered::Depth(d), ImageFormat::Pfm).unwrap();
        let header = b"Pf\n1 2\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        // Bottom row first.
        assert_eq!(&bytes[header.len()..header.len() + 4], &2.0f32.to_le_bytes());
    }

    #[test]
    fn gray_depth_orders_near_bright() {
        let d = Raster::new(3, 1, vec![10.0f32, 20.0, f32::INFINITY]).unwrap();
        assert_eq!(depth_to_gray(&d), vec![255, 1, 0]);
    }
}
