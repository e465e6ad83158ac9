//! Fire-station registry queries and named camera anchors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geo::{GeoReference, GeodeticPoint, LocalPoint, TangentPlane};
use crate::grid::ScalarGrid;
use crate::lod::CameraPose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationalMode {
    Ground,
    Aerial,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    Available,
    Deployed,
    Maintenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireAsset {
    pub name: String,
    /// Hectares.
    pub coverage_area: f64,
    pub budget: f64,
    /// Metric tons.
    pub tonnage: f64,
    pub operational_mode: OperationalMode,
    pub availability: Availability,
    pub personnel: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireStation {
    pub id: u32,
    pub name: String,
    pub location: GeodeticPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photo: Option<String>,
    #[serde(default)]
    pub assets: Vec<FireAsset>,
}

/// Where a validation failure sits: station index, optional asset index, field.
#[derive(Debug, Clone, PartialEq)]
pub struct StationError {
    pub station: usize,
    pub asset: Option<usize>,
    pub field: &'static str,
    pub reason: &'static str,
}

impl fmt::Display for StationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.asset {
            Some(a) => write!(
                f,
                "station #{} asset #{}: field `{}` {}",
                self.station, a, self.field, self.reason
            ),
            None => write!(f, "station #{}: field `{}` {}", self.station, self.field, self.reason),
        }
    }
}

impl core::error::Error for StationError {}

/// Checks ids are unique, locations valid and asset numbers nonnegative.
pub fn validate_stations(stations: &[FireStation]) -> Result<(), StationError> {
    let err = |station, asset, field, reason| StationError {
        station,
        asset,
        field,
        reason,
    };
    let mut seen = BTreeMap::new();
    for (i, s) in stations.iter().enumerate() {
        if seen.insert(s.id, i).is_some() {
            return Err(err(i, None, "id", "duplicates an earlier station"));
        }
        if s.location.validate().is_err() {
            return Err(err(i, None, "location", "is not a valid geodetic point"));
        }
        for (j, a) in s.assets.iter().enumerate() {
            for (field, v) in [
                ("coverage_area", a.coverage_area),
                ("budget", a.budget),
                ("tonnage", a.tonnage),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(err(i, Some(j), field, "must be a nonnegative number"));
                }
            }
        }
    }
    Ok(())
}

/// Conjunctive asset filter; unset fields match everything.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AssetQuery {
    pub min_coverage: Option<f64>,
    pub max_budget: Option<f64>,
    pub min_tonnage: Option<f64>,
    pub mode: Option<OperationalMode>,
    pub availability: Option<Availability>,
}

impl AssetQuery {
    pub fn matches(&self, a: &FireAsset) -> bool {
        self.min_coverage.is_none_or(|m| a.coverage_area >= m)
            && self.max_budget.is_none_or(|m| a.budget <= m)
            && self.min_tonnage.is_none_or(|m| a.tonnage >= m)
            && self.mode.is_none_or(|m| a.operational_mode == m)
            && self.availability.is_none_or(|m| a.availability == m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetHit {
    pub station_id: u32,
    pub station_name: String,
    pub asset: FireAsset,
}

/// Matching assets sorted by station id, then asset name.
pub fn search_assets(stations: &[FireStation], query: &AssetQuery) -> Vec<AssetHit> {
    let mut hits: Vec<AssetHit> = stations
        .iter()
        .flat_map(|s| {
            s.assets.iter().filter(|a| query.matches(a)).map(|a| AssetHit {
                station_id: s.id,
                station_name: s.name.clone(),
                asset: a.clone(),
            })
        })
        .collect();
    hits.sort_by(|a, b| {
        a.station_id
            .cmp(&b.station_id)
            .then_with(|| a.asset.name.cmp(&b.asset.name))
    });
    hits
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedStation {
    pub station_id: u32,
    pub name: String,
    /// Horizontal tangent-plane distance, meters.
    pub distance: f64,
}

/// The `k` stations closest to `point` on its tangent plane; ties by id.
pub fn nearest_stations(point: &GeodeticPoint, stations: &[FireStation], k: usize) -> Vec<RankedStation> {
    let plane = TangentPlane::new(*point);
    let mut ranked: Vec<RankedStation> = stations
        .iter()
        .map(|s| RankedStation {
            station_id: s.id,
            name: s.name.clone(),
            distance: plane.to_local(&s.location).horizontal_distance(&LocalPoint::ORIGIN),
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.station_id.cmp(&b.station_id))
    });
    ranked.truncate(k);
    ranked
}

/// Name of the built-in anchor above the first frame's fire.
pub const FIRE_ORIGIN_ANCHOR: &str = "fire-origin";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnchorError {
    Unknown(String),
    Duplicate(String),
    InvalidPose(String),
}

impl fmt::Display for AnchorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnchorError::Unknown(n) => write!(f, "unknown anchor `{n}`"),
            AnchorError::Duplicate(n) => write!(f, "anchor `{n}` already exists"),
            AnchorError::InvalidPose(n) => write!(f, "anchor `{n}` has an invalid camera pose"),
        }
    }
}

impl core::error::Error for AnchorError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportAnchor {
    pub name: String,
    pub pose: CameraPose,
}

/// Named camera poses, unique by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnchorRegistry {
    anchors: BTreeMap<String, CameraPose>,
}

impl AnchorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, pose: CameraPose) -> Result<(), AnchorError> {
        if pose.validate().is_err() {
            return Err(AnchorError::InvalidPose(name.into()));
        }
        if self.anchors.contains_key(name) {
            return Err(AnchorError::Duplicate(name.into()));
        }
        self.anchors.insert(name.into(), pose);
        Ok(())
    }

    pub fn resolve(&self, name: &str) -> Result<CameraPose, AnchorError> {
        self.anchors
            .get(name)
            .copied()
            .ok_or_else(|| AnchorError::Unknown(name.into()))
    }

    /// All anchors sorted by name.
    pub fn list(&self) -> Vec<TeleportAnchor> {
        self.anchors
            .iter()
            .map(|(name, pose)| TeleportAnchor {
                name: name.clone(),
                pose: *pose,
            })
            .collect()
    }
}

/// Downward-looking pose `altitude` meters above the centroid of the
/// positive-flux cells, or `None` when nothing burns.
pub fn fire_origin_pose(flux: &ScalarGrid, georef: &GeoReference, altitude: f64) -> Option<CameraPose> {
    if flux.dims() != georef.dims() {
        return None;
    }
    let plane = georef.plane();
    let (mut sx, mut sy, mut sz, mut n) = (0.0, 0.0, 0.0, 0usize);
    for y in 0..flux.height() {
        for x in 0..flux.width() {
            if flux.values()[flux.index(x, y)] > 0.0 {
                let p = plane.to_local(&georef.cell_geodetic(x, y).ok()?);
                sx += p.x;
                sy += p.y;
                sz += p.z;
                n += 1;
            }
        }
    }
    if n == 0 {
        return None;
    }
    let n = n as f64;
    Some(CameraPose::nadir(LocalPoint::new(sx / n, sy / n, sz / n + altitude)))
}
