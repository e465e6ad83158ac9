//! Structured-text exports. The JSON bodies are the same ones the service
//! sends, so golden files double as wire fixtures.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use wildtwin_core::forest::{forest_digest, CategoryCounts, ForestSet};

/// Counts and digest of a forest; the digest is hex so it survives JSON
/// consumers without 64-bit integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestSummary {
    pub trees: usize,
    pub grass: usize,
    pub counts: CategoryCounts,
    pub digest: String,
}

impl ForestSummary {
    pub fn of(forest: &ForestSet) -> Self {
        Self {
            trees: forest.trees.len(),
            grass: forest.grass.len(),
            counts: forest.counts,
            digest: format_digest(forest_digest(forest)),
        }
    }
}

pub fn format_digest(d: u64) -> String {
    format!("{d:016x}")
}

pub const FOREST_TABLE_HEADER: &str = "cell_x,cell_y,category,model_index,x,y,z,yaw,scale";

/// One CSV row per instance: trees first, then grass (category `GRASS`,
/// model index 0, scale = the uniform grass scale's x component).
pub fn forest_table(forest: &ForestSet) -> String {
    let mut out = String::with_capacity(64 * (forest.trees.len() + forest.grass.len() + 1));
    out.push_str(FOREST_TABLE_HEADER);
    out.push('\n');
    for t in &forest.trees {
        let p = t.position;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            t.cell.0,
            t.cell.1,
            t.category.as_str(),
            t.model_index,
            p.x,
            p.y,
            p.z,
            t.yaw,
            t.scale
        );
    }
    for g in &forest.grass {
        let p = g.position;
        let _ = writeln!(
            out,
            "{},{},GRASS,0,{},{},{},{},{}",
            g.cell.0, g.cell.1, p.x, p.y, p.z, g.yaw, g.scale.x
        );
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("export types serialize infallibly")
}
