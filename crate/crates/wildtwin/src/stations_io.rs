//! Station fixture loader.
//!
//! The fixture is TOML: an array of `[[station]]` tables, each with a flat
//! location (`lat`, `lon`, optional `h`) and an array of `[[station.asset]]`
//! tables. See `fixtures/stations.toml`. Errors carry the line of the
//! offending station or asset.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;
use wildtwin_core::geo::GeodeticPoint;
use wildtwin_core::stations::{validate_stations, FireAsset, FireStation};

/// Fixture shipped with the crate; the service falls back to it.
pub const BUNDLED_FIXTURE: &str = include_str!("../fixtures/stations.toml");

#[derive(Debug, thiserror::Error)]
#[error("{}:{line}: {message}", path.display())]
pub struct StationsError {
    pub path: PathBuf,
    /// 1-based; 0 when the position is unknown.
    pub line: usize,
    pub message: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixture {
    #[serde(default)]
    station: Vec<Spanned<RawStation>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStation {
    id: u32,
    name: String,
    lat: f64,
    lon: f64,
    #[serde(default)]
    h: f64,
    #[serde(default)]
    photo: Option<String>,
    #[serde(default)]
    asset: Vec<Spanned<FireAsset>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Parses fixture text; `path` is only used in error messages.
pub fn parse_stations(text: &str, path: &Path) -> Result<Vec<FireStation>, StationsError> {
    let err = |line, message: String| StationsError {
        path: path.to_path_buf(),
        line,
        message,
    };
    let raw: RawFixture = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        err(line, e.message().to_string())
    })?;
    let stations: Vec<FireStation> = raw
        .station
        .iter()
        .map(|s| {
            let s = s.get_ref();
            FireStation {
                id: s.id,
                name: s.name.clone(),
                location: GeodeticPoint::new(s.lat, s.lon, s.h),
                photo: s.photo.clone(),
                assets: s.asset.iter().map(|a| a.get_ref().clone()).collect(),
            }
        })
        .collect();
    validate_stations(&stations).map_err(|e| {
        let station = &raw.station[e.station];
        let span = match e.asset {
            Some(a) => station.get_ref().asset[a].span(),
            None => station.span(),
        };
        let who = match e.asset {
            Some(a) => format!("station {} asset {:?}", stations[e.station].id, stations[e.station].assets[a].name),
            None => format!("station {}", stations[e.station].id),
        };
        err(line_of(text, span.start), format!("{who}: field `{}` {}", e.field, e.reason))
    })?;
    Ok(stations)
}

pub fn load_stations(path: &Path) -> Result<Vec<FireStation>, StationsError> {
    let text = std::fs::read_to_string(path).map_err(|e| StationsError {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    parse_stations(&text, path)
}

pub fn bundled_stations() -> Vec<FireStation> {
    parse_stations(BUNDLED_FIXTURE, Path::new("fixtures/stations.toml")).expect("bundled fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixture_parses() {
        let s = bundled_stations();
        assert_eq!(s.len(), 4);
        assert_eq!(s.iter().map(|s| s.assets.len()).sum::<usize>(), 9);
        assert_eq!(s[1].photo, None);
    }

    #[test]
    fn errors_point_at_the_line() {
        let text = "[[station]]\nid = 1\nname = \"a\"\nlat = 1.0\nlon = 2.0\n\n[[station]]\nid = 1\nname = \"b\"\nlat = 1.0\nlon = 2.0\n";
        let e = parse_stations(text, Path::new("f.toml")).unwrap_err();
        assert!(e.message.contains("`id`"), "{e}");
        assert!(e.line >= 7, "{e}");

        let bad_asset = BUNDLED_FIXTURE.replacen("budget = 310000.0", "budget = -1.0", 1);
        let e = parse_stations(&bad_asset, Path::new("f.toml")).unwrap_err();
        assert!(e.message.contains("Water Tender 21") && e.message.contains("budget"), "{e}");
        let expected = BUNDLED_FIXTURE.lines().position(|l| l.contains("Water Tender 21")).unwrap();
        // The asset table starts one line above its name.
        assert!((expected..=expected + 1).contains(&e.line), "{} vs {}", e.line, expected + 1);

        let e = parse_stations("[[station]]\nid = \"x\"\n", Path::new("f.toml")).unwrap_err();
        assert_eq!(e.line, 2, "{e}");
    }
}
