//! Fuel-driven tree and grass placement.
//!
//! Each fuel cell is visited independently. Canopy fuel above a floor spawns
//! one tree whose size class follows fixed fuel thresholds; positive surface
//! fuel spawns one grass patch. All random choices come from a keyed
//! generator over `(seed, X, Y, channel)`, so a cell's instances depend only on
//! that cell's inputs and the result is identical in any traversal order.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::emitter::Vec3;
use crate::geo::{GeoReference, LocalPoint};
use crate::grid::ScalarGrid;
use crate::math::{clamp01, lerp};
use crate::rng::{mix64, CellRng, Channel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TreeCategory {
    Large,
    Medium,
    Small,
}

impl TreeCategory {
    pub const ALL: [TreeCategory; 3] = [TreeCategory::Large, TreeCategory::Medium, TreeCategory::Small];

    pub fn as_str(self) -> &'static str {
        match self {
            TreeCategory::Large => "LARGE",
            TreeCategory::Medium => "MEDIUM",
            TreeCategory::Small => "SMALL",
        }
    }
}

impl fmt::Display for TreeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    /// Canopy fuel must exceed this to spawn a tree.
    pub canopy_floor: f64,
    pub medium_threshold: f64,
    pub large_threshold: f64,
    pub scale_mult_large: (f64, f64),
    pub scale_mult_medium: (f64, f64),
    pub scale_mult_small: (f64, f64),
    /// Base scale at zero and at full normalized fuel.
    pub base_scale: (f64, f64),
    pub variation: (f64, f64),
    /// Jitter amplitude as a fraction of the cell spacing.
    pub jitter: f64,
    /// Normalization ceiling; `None` means the canopy grid maximum.
    pub max_fuel: Option<f64>,
    pub spawn_grass: bool,
    /// Model variants per category: large, medium, small.
    pub model_counts: [usize; 3],
    /// Grass sits this far below the tree location, scene units.
    pub grass_offset: f64,
    pub grass_scale: Vec3,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            canopy_floor: 0.01,
            medium_threshold: 0.8,
            large_threshold: 1.6,
            scale_mult_large: (1.1, 1.4),
            scale_mult_medium: (0.9, 1.2),
            scale_mult_small: (0.7, 1.0),
            base_scale: (6.0, 18.0),
            variation: (0.8, 1.2),
            jitter: 0.45,
            max_fuel: None,
            spawn_grass: true,
            model_counts: [2, 4, 4],
            grass_offset: 70.0,
            grass_scale: Vec3::splat(100.0),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForestError {
    InvalidConfig(&'static str),
    DimensionMismatch {
        canopy: (usize, usize),
        surface: (usize, usize),
        georef: (usize, usize),
    },
}

impl fmt::Display for ForestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForestError::InvalidConfig(msg) => write!(f, "invalid forest config: {msg}"),
            ForestError::DimensionMismatch {
                canopy,
                surface,
                georef,
            } => write!(
                f,
                "fuel grids {}x{} / {}x{} do not match geo-reference {}x{}",
                canopy.0, canopy.1, surface.0, surface.1, georef.0, georef.1
            ),
        }
    }
}

impl core::error::Error for ForestError {}

fn ordered(r: (f64, f64)) -> bool {
    r.0.is_finite() && r.1.is_finite() && r.0 <= r.1
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), ForestError> {
        if !(0.0 < self.canopy_floor
            && self.canopy_floor < self.medium_threshold
            && self.medium_threshold < self.large_threshold)
        {
            return Err(ForestError::InvalidConfig(
                "need 0 < canopy_floor < medium_threshold < large_threshold",
            ));
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(ForestError::InvalidConfig("jitter must be in [0, 0.5)"));
        }
        if ![
            self.scale_mult_large,
            self.scale_mult_medium,
            self.scale_mult_small,
            self.base_scale,
            self.variation,
        ]
        .into_iter()
        .all(ordered)
        {
            return Err(ForestError::InvalidConfig("ranges must be finite with lo <= hi"));
        }
        if self.model_counts.contains(&0) {
            return Err(ForestError::InvalidConfig("every category needs at least one model"));
        }
        if let Some(m) = self.max_fuel {
            if !(m.is_finite() && m > 0.0) {
                return Err(ForestError::InvalidConfig("max_fuel must be positive"));
            }
        }
        Ok(())
    }

    /// Fills `max_fuel` from the canopy grid when unset.
    pub fn resolved(&self, canopy: &ScalarGrid) -> ForestConfig {
        let mut cfg = *self;
        if cfg.max_fuel.is_none() {
            let m = f64::from(canopy.max());
            cfg.max_fuel = Some(if m > 0.0 { m } else { 1.0 });
        }
        cfg
    }

    fn scale_mult_range(&self, c: TreeCategory) -> (f64, f64) {
        match c {
            TreeCategory::Large => self.scale_mult_large,
            TreeCategory::Medium => self.scale_mult_medium,
            TreeCategory::Small => self.scale_mult_small,
        }
    }

    fn model_count(&self, c: TreeCategory) -> usize {
        self.model_counts[c as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeInstance {
    pub cell: (u32, u32),
    pub category: TreeCategory,
    pub model_index: u32,
    pub position: LocalPoint,
    /// Degrees in `[0, 360)`.
    pub yaw: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrassInstance {
    pub cell: (u32, u32),
    pub position: LocalPoint,
    pub yaw: f64,
    pub scale: Vec3,
}

/// Size class for a canopy fuel load, or `None` at or below the floor.
pub fn classify_fuel(canopy_fuel: f64, cfg: &ForestConfig) -> Option<TreeCategory> {
    if !(canopy_fuel > cfg.canopy_floor) {
        None
    } else if canopy_fuel >= cfg.large_threshold {
        Some(TreeCategory::Large)
    } else if canopy_fuel >= cfg.medium_threshold {
        Some(TreeCategory::Medium)
    } else {
        Some(TreeCategory::Small)
    }
}

/// Cell center with keyed horizontal jitter of up to `jitter × spacing`.
pub fn jittered_location(x: usize, y: usize, georef: &GeoReference, cfg: &ForestConfig) -> Option<LocalPoint> {
    let mut p = georef.cell_local(x, y).ok()?;
    let (sx, sy) = georef.cell_spacing(x, y).ok()?;
    let rng = CellRng::new(cfg.seed, x, y);
    p.x += (rng.unit(Channel::JitterX) * 2.0 - 1.0) * cfg.jitter * sx;
    p.y += (rng.unit(Channel::JitterY) * 2.0 - 1.0) * cfg.jitter * sy;
    Some(p)
}

fn tree_at(
    x: usize,
    y: usize,
    canopy_fuel: f64,
    location: LocalPoint,
    cfg: &ForestConfig,
) -> Option<TreeInstance> {
    let category = classify_fuel(canopy_fuel, cfg)?;
    let rng = CellRng::new(cfg.seed, x, y);
    let (lo, hi) = cfg.scale_mult_range(category);
    let scale_mult = rng.uniform(Channel::ScaleMult, lo, hi);
    let variation = rng.uniform(Channel::Variation, cfg.variation.0, cfg.variation.1);
    let max_fuel = cfg.max_fuel.unwrap_or(cfg.large_threshold);
    let norm_fuel = clamp01(canopy_fuel / max_fuel);
    let base = lerp(cfg.base_scale.0, cfg.base_scale.1, norm_fuel);
    Some(TreeInstance {
        cell: (x as u32, y as u32),
        category,
        model_index: rng.index(Channel::ModelIndex, cfg.model_count(category)) as u32,
        position: location,
        yaw: rng.unit(Channel::Yaw) * 360.0,
        scale: base * scale_mult * variation,
    })
}

/// Tree for one cell, or `None` when canopy fuel is at or below the floor.
///
/// Uses `cfg.max_fuel` as the normalization ceiling, falling back to the
/// large-tree threshold when it is unset.
pub fn place_tree(
    x: usize,
    y: usize,
    canopy_fuel: f64,
    georef: &GeoReference,
    cfg: &ForestConfig,
) -> Option<TreeInstance> {
    classify_fuel(canopy_fuel, cfg)?;
    let location = jittered_location(x, y, georef, cfg)?;
    tree_at(x, y, canopy_fuel, location, cfg)
}

/// Grass for one cell, or `None` when surface fuel is not positive or grass
/// is disabled.
pub fn place_grass(
    x: usize,
    y: usize,
    surface_fuel: f64,
    georef: &GeoReference,
    cfg: &ForestConfig,
) -> Option<GrassInstance> {
    if !(cfg.spawn_grass && surface_fuel > 0.0) {
        return None;
    }
    let location = jittered_location(x, y, georef, cfg)?;
    Some(grass_at(x, y, location, cfg))
}

fn grass_at(x: usize, y: usize, location: LocalPoint, cfg: &ForestConfig) -> GrassInstance {
    let rng = CellRng::new(cfg.seed, x, y);
    GrassInstance {
        cell: (x as u32, y as u32),
        position: LocalPoint::new(location.x, location.y, location.z - cfg.grass_offset),
        yaw: rng.unit(Channel::GrassYaw) * 360.0,
        scale: cfg.grass_scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub large: usize,
    pub medium: usize,
    pub small: usize,
}

impl CategoryCounts {
    pub fn total(&self) -> usize {
        self.large + self.medium + self.small
    }

    fn add(&mut self, c: TreeCategory) {
        match c {
            TreeCategory::Large => self.large += 1,
            TreeCategory::Medium => self.medium += 1,
            TreeCategory::Small => self.small += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ForestSet {
    pub trees: Vec<TreeInstance>,
    pub grass: Vec<GrassInstance>,
    pub counts: CategoryCounts,
}

impl ForestSet {
    /// Concatenates per-row results in the order given.
    pub fn from_rows(rows: impl IntoIterator<Item = ForestRow>) -> ForestSet {
        let mut set = ForestSet::default();
        for row in rows {
            for t in &row.trees {
                set.counts.add(t.category);
            }
            set.trees.extend(row.trees);
            set.grass.extend(row.grass);
        }
        set
    }
}

/// Instances of a single grid row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForestRow {
    pub trees: Vec<TreeInstance>,
    pub grass: Vec<GrassInstance>,
}

fn check_dims(canopy: &ScalarGrid, surface: &ScalarGrid, georef: &GeoReference) -> Result<(), ForestError> {
    if canopy.dims() != georef.dims() || surface.dims() != georef.dims() {
        return Err(ForestError::DimensionMismatch {
            canopy: canopy.dims(),
            surface: surface.dims(),
            georef: georef.dims(),
        });
    }
    Ok(())
}

/// Places row `y`. `cfg` should already be [`resolved`](ForestConfig::resolved)
/// so every row sees the same `max_fuel`.
pub fn forest_row(
    canopy: &ScalarGrid,
    surface: &ScalarGrid,
    georef: &GeoReference,
    cfg: &ForestConfig,
    y: usize,
) -> Result<ForestRow, ForestError> {
    check_dims(canopy, surface, georef)?;
    cfg.validate()?;
    let mut row = ForestRow::default();
    let plane = georef.plane();
    let (w, h) = georef.dims();
    if y >= h {
        return Ok(row);
    }
    let xs = georef.column_x();
    let row_y = georef.row_y();
    let sy = neighbor_gap(&row_y, y);
    for x in 0..w {
        let c = f64::from(canopy.values()[y * w + x]);
        let s = f64::from(surface.values()[y * w + x]);
        let wants_tree = classify_fuel(c, cfg).is_some();
        let wants_grass = cfg.spawn_grass && s > 0.0;
        if !(wants_tree || wants_grass) {
            continue;
        }
        // Same arithmetic as `jittered_location`, with the axes precomputed.
        let rng = CellRng::new(cfg.seed, x, y);
        let sx = neighbor_gap(&xs, x);
        let z = georef.elevations()[y * w + x] - plane.origin().h;
        let loc = LocalPoint::new(
            xs[x] + (rng.unit(Channel::JitterX) * 2.0 - 1.0) * cfg.jitter * sx,
            row_y[y] + (rng.unit(Channel::JitterY) * 2.0 - 1.0) * cfg.jitter * sy,
            z,
        );
        if wants_tree {
            row.trees.extend(tree_at(x, y, c, loc, cfg));
        }
        if wants_grass {
            row.grass.push(grass_at(x, y, loc, cfg));
        }
    }
    Ok(row)
}

fn neighbor_gap(axis: &[f64], i: usize) -> f64 {
    let prev = i.checked_sub(1).map(|j| (axis[j] - axis[i]).abs());
    let next = axis.get(i + 1).map(|a| (a - axis[i]).abs());
    match (prev, next) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0.0,
    }
}

/// Trees and grass for the whole fuel grid, in row-major cell order.
pub fn generate_forest(
    canopy: &ScalarGrid,
    surface: &ScalarGrid,
    georef: &GeoReference,
    cfg: &ForestConfig,
) -> Result<ForestSet, ForestError> {
    check_dims(canopy, surface, georef)?;
    cfg.validate()?;
    let cfg = cfg.resolved(canopy);
    let mut rows = Vec::with_capacity(canopy.height());
    for y in 0..canopy.height() {
        rows.push(forest_row(canopy, surface, georef, &cfg, y)?);
    }
    Ok(ForestSet::from_rows(rows))
}

/// Digest of a forest with no instances.
pub const EMPTY_FOREST_DIGEST: u64 = 0x03eb408a4920d61e;

struct Digest(u64);

impl Digest {
    fn new() -> Self {
        Digest(mix64(0x666f_7265_7374_7631))
    }

    fn word(&mut self, w: u64) {
        self.0 = mix64(self.0 ^ w);
    }

    fn f(&mut self, v: f64) {
        self.word(v.to_bits());
    }

    fn point(&mut self, p: &LocalPoint) {
        self.f(p.x);
        self.f(p.y);
        self.f(p.z);
    }
}

/// Order-independent 64-bit fingerprint of a forest.
///
/// Instances are canonicalized (trees by cell then category, grass by cell)
/// before hashing, so any traversal order yields the same digest.
pub fn forest_digest(forest: &ForestSet) -> u64 {
    let mut trees: Vec<&TreeInstance> = forest.trees.iter().collect();
    trees.sort_by_key(|t| (t.cell.1, t.cell.0, t.category));
    let mut grass: Vec<&GrassInstance> = forest.grass.iter().collect();
    grass.sort_by_key(|g| (g.cell.1, g.cell.0));

    let mut d = Digest::new();
    d.word(trees.len() as u64);
    for t in trees {
        d.word(u64::from(t.cell.0));
        d.word(u64::from(t.cell.1));
        d.word(t.category as u64);
        d.word(u64::from(t.model_index));
        d.point(&t.position);
        d.f(t.yaw);
        d.f(t.scale);
    }
    d.word(grass.len() as u64);
    for g in grass {
        d.word(u64::from(g.cell.0));
        d.word(u64::from(g.cell.1));
        d.point(&g.position);
        d.f(g.yaw);
        d.f(g.scale.x);
        d.f(g.scale.y);
        d.f(g.scale.z);
    }
    d.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeodeticPoint;
    use crate::grid::GridKind;
    use alloc::vec;

    fn georef(w: usize, h: usize) -> GeoReference {
        GeoReference::new(
            (0..h).map(|i| 38.7 + i as f64 * 0.0005).collect(),
            (0..w).map(|i| -120.7 + i as f64 * 0.0006).collect(),
            (0..w * h).map(|i| 1400.0 + (i % 13) as f64).collect(),
            GeodeticPoint::new(38.7, -120.7, 1400.0),
        )
        .unwrap()
    }

    #[test]
    fn classify_boundaries() {
        let c = ForestConfig::default();
        assert_eq!(classify_fuel(1.6, &c), Some(TreeCategory::Large));
        assert_eq!(classify_fuel(0.8, &c), Some(TreeCategory::Medium));
        assert_eq!(classify_fuel(0.79, &c), Some(TreeCategory::Small));
        assert_eq!(classify_fuel(0.01, &c), None);
        assert_eq!(classify_fuel(0.0100001, &c), Some(TreeCategory::Small));
        assert_eq!(classify_fuel(0.0, &c), None);
        assert_eq!(classify_fuel(f64::NAN, &c), None);
    }

    #[test]
    fn full_fuel_gives_top_base_scale() {
        let cfg = ForestConfig {
            max_fuel: Some(2.0),
            scale_mult_large: (1.0, 1.0),
            variation: (1.0, 1.0),
            ..Default::default()
        };
        let t = place_tree(3, 4, 2.0, &georef(8, 8), &cfg).unwrap();
        assert_eq!(t.category, TreeCategory::Large);
        assert_eq!(t.scale, 18.0);
        assert!(t.model_index < 2);
    }

    #[test]
    fn below_floor_is_empty() {
        assert!(place_tree(0, 0, 0.0, &georef(2, 2), &ForestConfig::default()).is_none());
    }

    #[test]
    fn placement_is_keyed() {
        let g = georef(6, 6);
        let cfg = ForestConfig {
            seed: 99,
            ..Default::default()
        };
        assert_eq!(place_tree(2, 5, 1.0, &g, &cfg), place_tree(2, 5, 1.0, &g, &cfg));
        let other = ForestConfig { seed: 100, ..cfg };
        assert_ne!(place_tree(2, 5, 1.0, &g, &cfg), place_tree(2, 5, 1.0, &g, &other));
    }

    #[test]
    fn row_path_matches_cell_path() {
        let g = georef(7, 5);
        let canopy = ScalarGrid::from_fn(7, 5, GridKind::CanopyFuel, |x, y| ((x * 3 + y * 5) % 9) as f32 * 0.25).unwrap();
        let surface = ScalarGrid::from_fn(7, 5, GridKind::SurfaceFuel, |x, _| (x % 2) as f32).unwrap();
        let cfg = ForestConfig {
            seed: 5,
            ..Default::default()
        }
        .resolved(&canopy);
        let set = generate_forest(&canopy, &surface, &g, &cfg).unwrap();
        let mut trees = vec![];
        let mut grass = vec![];
        for y in 0..5 {
            for x in 0..7 {
                trees.extend(place_tree(x, y, f64::from(canopy.get(x, y).unwrap()), &g, &cfg));
                grass.extend(place_grass(x, y, f64::from(surface.get(x, y).unwrap()), &g, &cfg));
            }
        }
        assert_eq!(set.trees.len(), trees.len());
        for (a, b) in set.trees.iter().zip(&trees) {
            assert_eq!(a.cell, b.cell);
            assert_eq!(a.category, b.category);
            assert_eq!(a.scale, b.scale);
            assert!((a.position.x - b.position.x).abs() < 1e-6);
            assert!((a.position.y - b.position.y).abs() < 1e-6);
            assert_eq!(a.position.z, b.position.z);
        }
        assert_eq!(set.grass.len(), grass.len());
        assert_eq!(set.counts.total(), set.trees.len());
    }

    #[test]
    fn grass_sits_below_ground() {
        let g = georef(3, 3);
        let cfg = ForestConfig::default();
        let grass = place_grass(1, 2, 0.4, &g, &cfg).unwrap();
        let ground = g.cell_local(1, 2).unwrap();
        assert_eq!(grass.position.z, ground.z - 70.0);
        assert_eq!(grass.scale, Vec3::splat(100.0));
        assert!((0.0..360.0).contains(&grass.yaw));
        assert!(place_grass(1, 2, 0.0, &g, &cfg).is_none());
        let off = ForestConfig {
            spawn_grass: false,
            ..cfg
        };
        assert!(place_grass(1, 2, 0.4, &g, &off).is_none());
    }

    #[test]
    fn empty_digest_constant() {
        assert_eq!(forest_digest(&ForestSet::default()), EMPTY_FOREST_DIGEST);
    }

    #[test]
    fn digest_ignores_order() {
        let g = georef(9, 9);
        let canopy = ScalarGrid::from_fn(9, 9, GridKind::CanopyFuel, |x, y| (x + y) as f32 * 0.2).unwrap();
        let surface = ScalarGrid::filled(9, 9, GridKind::SurfaceFuel, 0.3).unwrap();
        let mut set = generate_forest(&canopy, &surface, &g, &ForestConfig::default()).unwrap();
        let d = forest_digest(&set);
        set.trees.reverse();
        set.grass.rotate_left(5);
        assert_eq!(forest_digest(&set), d);
        set.trees[0].scale += 1e-9;
        assert_ne!(forest_digest(&set), d);
    }

    #[test]
    fn config_validation() {
        let bad = ForestConfig {
            jitter: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ForestConfig {
            medium_threshold: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ForestConfig {
            model_counts: [2, 0, 4],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
