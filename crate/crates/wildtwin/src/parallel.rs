//! Row-parallel builds. Rows are independent and concatenated in row order,
//! so results equal the sequential builds exactly.

use rayon::prelude::*;
use wildtwin_core::emitter::{build_row, EmitterConfig, EmitterError, EmitterSet, FireEmitter};
use wildtwin_core::forest::{forest_row, ForestConfig, ForestError, ForestRow, ForestSet};
use wildtwin_core::geo::GeoReference;
use wildtwin_core::grid::ScalarGrid;

pub fn build_emitters_par(
    flux: &ScalarGrid,
    georef: &GeoReference,
    cfg: &EmitterConfig,
) -> Result<EmitterSet, EmitterError> {
    let rows: Vec<Vec<FireEmitter>> = (0..flux.height())
        .into_par_iter()
        .map(|y| build_row(flux, georef, cfg, y))
        .collect::<Result<_, _>>()?;
    Ok(EmitterSet {
        width: flux.width(),
        height: flux.height(),
        emitters: rows.into_iter().flatten().collect(),
    })
}

pub fn generate_forest_par(
    canopy: &ScalarGrid,
    surface: &ScalarGrid,
    georef: &GeoReference,
    cfg: &ForestConfig,
) -> Result<ForestSet, ForestError> {
    cfg.validate()?;
    let cfg = cfg.resolved(canopy);
    let rows: Vec<ForestRow> = (0..canopy.height())
        .into_par_iter()
        .map(|y| forest_row(canopy, surface, georef, &cfg, y))
        .collect::<Result<_, _>>()?;
    Ok(ForestSet::from_rows(rows))
}
