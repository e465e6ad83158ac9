//! Geodetic ↔ local east-north-up conversion on a WGS84 tangent plane.
//!
//! The local frame is anchored at a scenario origin: `x` east, `y` north,
//! `z` up, all in meters. East and north offsets use the meridian and
//! prime-vertical radii of curvature evaluated once at the origin latitude,
//! which is accurate to well under a meter over a fire domain of a few tens of
//! kilometres and is exactly invertible.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::math::{cos, sin, sqrt};

/// WGS84 semi-major axis, meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// First eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPoint {
    /// Degrees, positive north.
    pub lat: f64,
    /// Degrees, positive east.
    pub lon: f64,
    /// Meters above the ellipsoid.
    pub h: f64,
}

impl GeodeticPoint {
    pub const fn new(lat: f64, lon: f64, h: f64) -> Self {
        Self { lat, lon, h }
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !(self.lat.is_finite() && self.lat.abs() <= 90.0) {
            return Err(GeoError::LatitudeRange(self.lat));
        }
        if !(self.lon.is_finite() && self.lon.abs() <= 180.0) {
            return Err(GeoError::LongitudeRange(self.lon));
        }
        if !self.h.is_finite() {
            return Err(GeoError::NonFiniteHeight(self.h));
        }
        Ok(())
    }
}

/// East-north-up meters relative to a scenario origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LocalPoint {
    pub const ORIGIN: LocalPoint = LocalPoint::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance_squared(&self, other: &LocalPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(&self, other: &LocalPoint) -> f64 {
        sqrt(self.distance_squared(other))
    }

    pub fn horizontal_distance(&self, other: &LocalPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        sqrt(dx * dx + dy * dy)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeoError {
    LatitudeRange(f64),
    LongitudeRange(f64),
    NonFiniteHeight(f64),
    /// An axis array has the wrong length for the grid it describes.
    AxisLength { axis: &'static str, expected: usize, actual: usize },
    /// Axis values must be strictly increasing or strictly decreasing.
    NotMonotonic { axis: &'static str, index: usize },
    CellOutOfRange { x: usize, y: usize, width: usize, height: usize },
    /// Resampling needs at least two samples along each axis.
    TooSmallToResample { width: usize, height: usize },
}

impl fmt::Display for GeoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeoError::LatitudeRange(v) => write!(f, "latitude {v} outside [-90, 90]"),
            GeoError::LongitudeRange(v) => write!(f, "longitude {v} outside [-180, 180]"),
            GeoError::NonFiniteHeight(v) => write!(f, "height {v} is not finite"),
            GeoError::AxisLength {
                axis,
                expected,
                actual,
            } => write!(f, "{axis} has {actual} entries, expected {expected}"),
            GeoError::NotMonotonic { axis, index } => {
                write!(f, "{axis} is not strictly monotonic at index {index}")
            }
            GeoError::CellOutOfRange {
                x,
                y,
                width,
                height,
            } => write!(f, "cell ({x}, {y}) outside {width}x{height} geo-reference"),
            GeoError::TooSmallToResample { width, height } => {
                write!(f, "cannot resample a {width}x{height} geo-reference")
            }
        }
    }
}

impl core::error::Error for GeoError {}

/// Meridian (north-south) and prime-vertical (east-west) radii of curvature at `lat_deg`.
pub fn radii_of_curvature(lat_deg: f64) -> (f64, f64) {
    let s = sin(lat_deg.to_radians());
    let w2 = 1.0 - WGS84_E2 * s * s;
    let w = sqrt(w2);
    let meridian = WGS84_A * (1.0 - WGS84_E2) / (w2 * w);
    let prime_vertical = WGS84_A / w;
    (meridian, prime_vertical)
}

/// Tangent-plane scale factors at an origin: meters per degree north and east.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPlane {
    origin: GeodeticPoint,
    m_per_deg_north: f64,
    m_per_deg_east: f64,
}

impl TangentPlane {
    pub fn new(origin: GeodeticPoint) -> Self {
        let (m, n) = radii_of_curvature(origin.lat);
        let rad = core::f64::consts::PI / 180.0;
        Self {
            origin,
            m_per_deg_north: m * rad,
            m_per_deg_east: n * cos(origin.lat.to_radians()) * rad,
        }
    }

    pub fn origin(&self) -> GeodeticPoint {
        self.origin
    }

    #[inline]
    pub fn east_of(&self, lon: f64) -> f64 {
        wrap_degrees(lon - self.origin.lon) * self.m_per_deg_east
    }

    #[inline]
    pub fn north_of(&self, lat: f64) -> f64 {
        (lat - self.origin.lat) * self.m_per_deg_north
    }

    #[inline]
    pub fn to_local(&self, p: &GeodeticPoint) -> LocalPoint {
        LocalPoint::new(self.east_of(p.lon), self.north_of(p.lat), p.h - self.origin.h)
    }

    #[inline]
    pub fn to_geo(&self, v: &LocalPoint) -> GeodeticPoint {
        GeodeticPoint::new(
            self.origin.lat + v.y / self.m_per_deg_north,
            wrap_degrees(self.origin.lon + v.x / self.m_per_deg_east),
            self.origin.h + v.z,
        )
    }
}

fn wrap_degrees(d: f64) -> f64 {
    if (-180.0..=180.0).contains(&d) {
        d
    } else {
        let r = (d + 180.0) % 360.0;
        if r < 0.0 {
            r + 180.0
        } else {
            r - 180.0
        }
    }
}

/// Projects `p` onto the east-north-up tangent plane at `origin`.
pub fn to_local(p: &GeodeticPoint, origin: &GeodeticPoint) -> LocalPoint {
    TangentPlane::new(*origin).to_local(p)
}

/// Inverse of [`to_local`].
pub fn to_geo(v: &LocalPoint, origin: &GeodeticPoint) -> GeodeticPoint {
    TangentPlane::new(*origin).to_geo(v)
}

/// Per-row latitudes, per-column longitudes and a row-major elevation raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoReference {
    latitudes: Vec<f64>,
    longitudes: Vec<f64>,
    elevations: Vec<f64>,
    origin: GeodeticPoint,
}

fn check_axis(axis: &'static str, values: &[f64], limit: f64) -> Result<(), GeoError> {
    if let Some(&v) = values.iter().find(|v| !(v.is_finite() && v.abs() <= limit)) {
        return Err(if limit == 90.0 {
            GeoError::LatitudeRange(v)
        } else {
            GeoError::LongitudeRange(v)
        });
    }
    if values.len() >= 2 {
        let increasing = values[1] > values[0];
        for i in 1..values.len() {
            let ok = if increasing {
                values[i] > values[i - 1]
            } else {
                values[i] < values[i - 1]
            };
            if !ok {
                return Err(GeoError::NotMonotonic { axis, index: i });
            }
        }
    }
    Ok(())
}

impl GeoReference {
    /// `latitudes` has one entry per row (grid height), `longitudes` one per
    /// column (grid width), `elevations` is row-major `width * height`.
    pub fn new(
        latitudes: Vec<f64>,
        longitudes: Vec<f64>,
        elevations: Vec<f64>,
        origin: GeodeticPoint,
    ) -> Result<Self, GeoError> {
        origin.validate()?;
        if latitudes.is_empty() {
            return Err(GeoError::AxisLength {
                axis: "latitudes",
                expected: 1,
                actual: 0,
            });
        }
        if longitudes.is_empty() {
            return Err(GeoError::AxisLength {
                axis: "longitudes",
                expected: 1,
                actual: 0,
            });
        }
        check_axis("latitudes", &latitudes, 90.0)?;
        check_axis("longitudes", &longitudes, 180.0)?;
        let expected = latitudes.len() * longitudes.len();
        if elevations.len() != expected {
            return Err(GeoError::AxisLength {
                axis: "elevations",
                expected,
                actual: elevations.len(),
            });
        }
        if let Some(v) = elevations.iter().find(|v| !v.is_finite()) {
            return Err(GeoError::NonFiniteHeight(*v));
        }
        Ok(Self {
            latitudes,
            longitudes,
            elevations,
            origin,
        })
    }

    pub fn width(&self) -> usize {
        self.longitudes.len()
    }

    pub fn height(&self) -> usize {
        self.latitudes.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    pub fn origin(&self) -> GeodeticPoint {
        self.origin
    }

    pub fn latitudes(&self) -> &[f64] {
        &self.latitudes
    }

    pub fn longitudes(&self) -> &[f64] {
        &self.longitudes
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    pub fn plane(&self) -> TangentPlane {
        TangentPlane::new(self.origin)
    }

    /// `(latitudes[Y], longitudes[X], elevations[Y * width + X])`.
    pub fn cell_geodetic(&self, x: usize, y: usize) -> Result<GeodeticPoint, GeoError> {
        let (width, height) = self.dims();
        if x >= width || y >= height {
            return Err(GeoError::CellOutOfRange {
                x,
                y,
                width,
                height,
            });
        }
        Ok(GeodeticPoint::new(
            self.latitudes[y],
            self.longitudes[x],
            self.elevations[y * width + x],
        ))
    }

    /// Cell center in the scene frame.
    pub fn cell_local(&self, x: usize, y: usize) -> Result<LocalPoint, GeoError> {
        Ok(self.plane().to_local(&self.cell_geodetic(x, y)?))
    }

    /// Scene-frame east coordinate of every column.
    pub fn column_x(&self) -> Vec<f64> {
        let plane = self.plane();
        self.longitudes.iter().map(|&lon| plane.east_of(lon)).collect()
    }

    /// Scene-frame north coordinate of every row.
    pub fn row_y(&self) -> Vec<f64> {
        let plane = self.plane();
        self.latitudes.iter().map(|&lat| plane.north_of(lat)).collect()
    }

    /// Distance in meters from a cell center to its nearest neighbor along x
    /// and along y. Zero along an axis with a single sample.
    pub fn cell_spacing(&self, x: usize, y: usize) -> Result<(f64, f64), GeoError> {
        let (width, height) = self.dims();
        if x >= width || y >= height {
            return Err(GeoError::CellOutOfRange {
                x,
                y,
                width,
                height,
            });
        }
        let plane = self.plane();
        let sx = nearest_gap(&self.longitudes, x, |lon| plane.east_of(lon));
        let sy = nearest_gap(&self.latitudes, y, |lat| plane.north_of(lat));
        Ok((sx, sy))
    }

    /// Geo-reference for a `width × height` grid covering the same extent,
    /// with cell centers placed by linear interpolation of the axes and
    /// bilinear interpolation of elevation.
    pub fn resample(&self, width: usize, height: usize) -> Result<GeoReference, GeoError> {
        let (w0, h0) = self.dims();
        if w0 < 2 || h0 < 2 || width == 0 || height == 0 {
            return Err(GeoError::TooSmallToResample {
                width: w0,
                height: h0,
            });
        }
        let us: Vec<f64> = (0..width).map(|j| fine_to_coarse(j, width, w0)).collect();
        let vs: Vec<f64> = (0..height).map(|i| fine_to_coarse(i, height, h0)).collect();
        let lons = us.iter().map(|&u| interp_axis(&self.longitudes, u)).collect();
        let lats = vs.iter().map(|&v| interp_axis(&self.latitudes, v)).collect();
        let mut elev = Vec::with_capacity(width * height);
        for &v in &vs {
            for &u in &us {
                elev.push(self.bilinear_elevation(u, v));
            }
        }
        GeoReference::new(lats, lons, elev, self.origin)
    }

    /// Elevation at fractional cell coordinates, clamped to the grid edge.
    pub fn bilinear_elevation(&self, u: f64, v: f64) -> f64 {
        let (w, h) = self.dims();
        let u = u.clamp(0.0, (w - 1) as f64);
        let v = v.clamp(0.0, (h - 1) as f64);
        let x0 = (u as usize).min(w.saturating_sub(2));
        let y0 = (v as usize).min(h.saturating_sub(2));
        let x1 = (x0 + 1).min(w - 1);
        let y1 = (y0 + 1).min(h - 1);
        let fx = u - x0 as f64;
        let fy = v - y0 as f64;
        let e = |x: usize, y: usize| self.elevations[y * w + x];
        let top = e(x0, y0) * (1.0 - fx) + e(x1, y0) * fx;
        let bottom = e(x0, y1) * (1.0 - fx) + e(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

fn nearest_gap(axis: &[f64], i: usize, project: impl Fn(f64) -> f64) -> f64 {
    let here = project(axis[i]);
    let prev = i.checked_sub(1).map(|j| (project(axis[j]) - here).abs());
    let next = axis.get(i + 1).map(|&a| (project(a) - here).abs());
    match (prev, next) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0.0,
    }
}

/// Center of fine cell `j` expressed in coarse index space.
fn fine_to_coarse(j: usize, fine: usize, coarse: usize) -> f64 {
    (j as f64 + 0.5) * coarse as f64 / fine as f64 - 0.5
}

/// Linear interpolation (with linear extrapolation past either end).
fn interp_axis(axis: &[f64], u: f64) -> f64 {
    let n = axis.len();
    let i = if u <= 0.0 {
        0
    } else {
        (u as usize).min(n - 2)
    };
    let t = u - i as f64;
    axis[i] + (axis[i + 1] - axis[i]) * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const ORIGIN: GeodeticPoint = GeodeticPoint::new(38.8, -120.6, 1200.0);

    #[test]
    fn identity_at_origin() {
        assert_eq!(to_local(&ORIGIN, &ORIGIN), LocalPoint::ORIGIN);
        assert_eq!(to_geo(&LocalPoint::ORIGIN, &ORIGIN), ORIGIN);
    }

    #[test]
    fn vertical_offsets_only_touch_z() {
        let up = GeodeticPoint::new(ORIGIN.lat, ORIGIN.lon, ORIGIN.h + 100.0);
        assert_eq!(to_local(&up, &ORIGIN), LocalPoint::new(0.0, 0.0, 100.0));
        let down = to_geo(&LocalPoint::new(0.0, 0.0, -70.0), &ORIGIN);
        assert_eq!(down, GeodeticPoint::new(ORIGIN.lat, ORIGIN.lon, ORIGIN.h - 70.0));
    }

    #[test]
    fn one_arcsecond_north() {
        // Meridian radius from the closed form with the textbook constants.
        let a = 6_378_137.0f64;
        let inv_f = 298.257_223_563f64;
        let f = 1.0 / inv_f;
        let e2 = 2.0 * f - f * f;
        let s = (38.8f64).to_radians().sin();
        let m = a * (1.0 - e2) / (1.0 - e2 * s * s).powf(1.5);
        let expected = m * (1.0f64 / 3600.0).to_radians();
        assert!((expected - 30.8).abs() < 0.05, "oracle sanity {expected}");

        let o = GeodeticPoint::new(38.8, -120.6, 0.0);
        let p = GeodeticPoint::new(38.8 + 1.0 / 3600.0, -120.6, 0.0);
        let v = to_local(&p, &o);
        assert!(v.x.abs() < 1e-12);
        assert!((v.y - expected).abs() < 1e-6, "{} vs {}", v.y, expected);
    }

    #[test]
    fn antimeridian_wrap() {
        let o = GeodeticPoint::new(0.0, 179.9, 0.0);
        let p = GeodeticPoint::new(0.0, -179.9, 0.0);
        let v = to_local(&p, &o);
        assert!(v.x > 0.0 && v.x < 30_000.0);
        let back = to_geo(&v, &o);
        assert!((back.lon - p.lon).abs() < 1e-9);
    }

    #[test]
    fn axes_are_decoupled() {
        let plane = TangentPlane::new(ORIGIN);
        let east = plane.to_local(&GeodeticPoint::new(ORIGIN.lat, ORIGIN.lon + 1e-6, ORIGIN.h));
        let north = plane.to_local(&GeodeticPoint::new(ORIGIN.lat + 1e-6, ORIGIN.lon, ORIGIN.h));
        assert!(east.x > 0.0 && east.y.abs() <= east.x * 1e-3);
        assert!(north.y > 0.0 && north.x.abs() <= north.y * 1e-3);
    }

    fn small_ref() -> GeoReference {
        GeoReference::new(
            vec![38.80, 38.81, 38.82],
            vec![-120.62, -120.61, -120.60, -120.59],
            (0..12).map(|i| 1000.0 + i as f64).collect(),
            ORIGIN,
        )
        .unwrap()
    }

    #[test]
    fn cell_geodetic_indexing() {
        let g = small_ref();
        assert_eq!(g.cell_geodetic(0, 0).unwrap(), GeodeticPoint::new(38.80, -120.62, 1000.0));
        assert!(matches!(
            g.cell_geodetic(4, 0),
            Err(GeoError::CellOutOfRange { .. })
        ));
        for y in 0..3 {
            for x in 0..4 {
                // 2D → 1D by enumeration order.
                let mut k = 0usize;
                'outer: for yy in 0..3 {
                    for xx in 0..4 {
                        if (xx, yy) == (x, y) {
                            break 'outer;
                        }
                        k += 1;
                    }
                }
                assert_eq!(g.cell_geodetic(x, y).unwrap().h, 1000.0 + k as f64);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(matches!(
            GeoReference::new(vec![1.0, 1.0], vec![0.0], vec![0.0, 0.0], ORIGIN),
            Err(GeoError::NotMonotonic { axis: "latitudes", index: 1 })
        ));
        assert!(matches!(
            GeoReference::new(vec![91.0], vec![0.0], vec![0.0], ORIGIN),
            Err(GeoError::LatitudeRange(_))
        ));
        assert!(matches!(
            GeoReference::new(vec![1.0], vec![0.0, 1.0], vec![0.0], ORIGIN),
            Err(GeoError::AxisLength { axis: "elevations", .. })
        ));
        // Decreasing axes are fine.
        assert!(GeoReference::new(vec![2.0, 1.0], vec![0.0], vec![0.0, 0.0], ORIGIN).is_ok());
    }

    #[test]
    fn resample_preserves_extent() {
        let g = small_ref();
        let fine = g.resample(8, 6).unwrap();
        assert_eq!(fine.dims(), (8, 6));
        // Fine cells straddle coarse cells symmetrically.
        let lo = fine.longitudes();
        assert!((lo[0] + lo[1] - 2.0 * g.longitudes()[0]).abs() < 1e-9);
        assert!(fine.elevations().iter().all(|e| (999.0..=1012.0).contains(e)));
    }

    #[test]
    fn spacing() {
        let g = small_ref();
        let (sx, sy) = g.cell_spacing(1, 1).unwrap();
        let plane = g.plane();
        assert!((sx - (plane.east_of(-120.61) - plane.east_of(-120.62))).abs() < 1e-6);
        assert!((sy - (plane.north_of(38.81) - plane.north_of(38.80))).abs() < 1e-6);
    }
}
