use std::fs;
use std::path::Path;

use proptest::prelude::*;
use wildtwin::gridio::{load_grid, read_f32_file, write_f32_file, write_grid};
use wildtwin::manifest::{load_manifest, ScenarioError, MANIFEST_FILE};
use wildtwin::scenario::{ingest, read_extrema, Scenario};
use wildtwin::synth::{generate_synthetic, SynthParams};
use wildtwin_core::grid::{GridKind, ScalarGrid};

fn gen(dir: &Path, seed: u64, dims: (usize, usize), frames: usize, wind: (f64, f64)) -> SynthParams {
    let p = SynthParams::new(seed, dims, frames, wind);
    generate_synthetic(dir, &p).unwrap();
    p
}

fn edit_manifest(dir: &Path, from: &str, to: &str) {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains(from), "{from:?} not in manifest");
    fs::write(&path, text.replacen(from, to, 1)).unwrap();
}

#[test]
fn valid_144_manifest_loads() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 11, (144, 144), 2, (30.0, 3.0));
    let m = load_manifest(dir.path()).unwrap();
    assert_eq!(m.flux_dims(), (144, 144));
    assert_eq!(m.fuel_dims(), (720, 720));
    assert_eq!(m.frame_count, 2);
    // The manifest file path works as well as its directory.
    assert_eq!(load_manifest(&dir.path().join(MANIFEST_FILE)).unwrap(), m);
    for f in 0..2 {
        let len = fs::metadata(dir.path().join(format!("flux_{f:04}.f32"))).unwrap().len();
        assert_eq!(len, 82_944);
    }
    let canopy = load_grid(&m, GridKind::CanopyFuel, 0).unwrap();
    assert_eq!(canopy.dims(), (720, 720));
    // Frame is ignored for fuel kinds.
    assert_eq!(load_grid(&m, GridKind::CanopyFuel, 99).unwrap(), canopy);
}

#[test]
fn short_flux_file_is_a_length_error() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 1, (8, 6), 3, (0.0, 0.0));
    let f = dir.path().join("flux_0001.f32");
    let bytes = fs::read(&f).unwrap();
    fs::write(&f, &bytes[..bytes.len() - 1]).unwrap();
    match load_manifest(dir.path()) {
        Err(ScenarioError::Length { field, expected, actual, .. }) => {
            assert_eq!(field, "flux[0001]");
            assert_eq!((expected, actual), (192, 191));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn manifest_field_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 1, (8, 6), 1, (0.0, 0.0));
    edit_manifest(dir.path(), "frame_count = 1", "frame_count = 0");
    match load_manifest(dir.path()) {
        Err(ScenarioError::Invalid { field, .. }) => assert_eq!(field, "frame_count"),
        other => panic!("{other:?}"),
    }

    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 1, (8, 6), 1, (0.0, 0.0));
    fs::remove_file(dir.path().join("canopy_fuel.f32")).unwrap();
    match load_manifest(dir.path()) {
        Err(ScenarioError::MissingFile { field, .. }) => assert_eq!(field, "canopy_fuel"),
        other => panic!("{other:?}"),
    }

    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 1, (8, 6), 1, (0.0, 0.0));
    edit_manifest(dir.path(), "grid_flux_w = 8", "grid_flux_w = 9");
    match load_manifest(dir.path()) {
        Err(ScenarioError::Length { field, .. }) => assert_eq!(field, "lon"),
        other => panic!("{other:?}"),
    }

    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 1, (8, 6), 1, (0.0, 0.0));
    edit_manifest(dir.path(), "name = ", "nmae = ");
    assert!(matches!(load_manifest(dir.path()), Err(ScenarioError::Parse { .. })));

    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(load_manifest(empty.path()), Err(ScenarioError::MissingFile { .. })));
}

#[test]
fn non_monotonic_latitudes_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 1, (8, 6), 1, (0.0, 0.0));
    let lat = dir.path().join("lat.f32");
    let mut v = read_f32_file(&lat).unwrap();
    v.swap(2, 3);
    write_f32_file(&lat, &v).unwrap();
    match load_manifest(dir.path()) {
        Err(ScenarioError::Geo { field, .. }) => assert_eq!(field, "lat"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn load_grid_bounds_zeros_and_nan() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 5, (8, 6), 2, (0.0, 0.0));
    let m = load_manifest(dir.path()).unwrap();
    assert!(matches!(
        load_grid(&m, GridKind::Flux, 2),
        Err(ScenarioError::FrameOutOfRange { frame: 2, frame_count: 2 })
    ));
    assert!(load_grid(&m, GridKind::Temperature, 2).is_err());

    let zeros = ScalarGrid::filled(8, 6, GridKind::Flux, 0.0).unwrap();
    write_grid(&dir.path().join("flux_0001.f32"), &zeros).unwrap();
    let g = load_grid(&m, GridKind::Flux, 1).unwrap();
    assert!(g.values().iter().all(|&v| v == 0.0));

    let mut values = vec![1.0f32; 48];
    values[6 * 8 - 1 - 8 - 2] = f32::NAN; // (5, 4)
    write_f32_file(&dir.path().join("flux_0001.f32"), &values).unwrap();
    match load_grid(&m, GridKind::Flux, 1) {
        Err(ScenarioError::NonFinite { field, x, y, .. }) => assert_eq!((field.as_str(), x, y), ("flux[0001]", 5, 4)),
        other => panic!("{other:?}"),
    }

    // Truncated after the manifest was validated.
    fs::write(dir.path().join("flux_0000.f32"), [0u8; 7]).unwrap();
    assert!(matches!(load_grid(&m, GridKind::Flux, 0), Err(ScenarioError::Length { .. })));
}

#[test]
fn synthetic_output_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    gen(a.path(), 77, (24, 20), 4, (120.0, 6.0));
    gen(b.path(), 77, (24, 20), 4, (120.0, 6.0));
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4 * 2 + 3 + 3 + 2 + 1);
    for n in names {
        let x = fs::read(a.path().join(&n)).unwrap();
        let y = fs::read(b.path().join(&n)).unwrap();
        assert!(x == y, "{n:?} differs");
    }
    let c = tempfile::tempdir().unwrap();
    gen(c.path(), 78, (24, 20), 4, (120.0, 6.0));
    assert_ne!(fs::read(a.path().join("flux_0003.f32")).unwrap(), fs::read(c.path().join("flux_0003.f32")).unwrap());
}

#[test]
fn calm_ignition_frame_is_a_disc() {
    for seed in [1, 2, 3, 99] {
        let dir = tempfile::tempdir().unwrap();
        let p = gen(dir.path(), seed, (64, 64), 1, (0.0, 0.0));
        let m = load_manifest(dir.path()).unwrap();
        let flux = load_grid(&m, GridKind::Flux, 0).unwrap();
        let (ix, iy) = p.ignition_cell();
        assert!(flux.at(ix, iy).unwrap() > 0.0);
        let r_cells = p.radius_at(0) / p.cell_size;
        let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
        for y in 0..64 {
            for x in 0..64 {
                if flux.at(x, y).unwrap() > 0.0 {
                    let d = ((x as f64 - ix as f64).powi(2) + (y as f64 - iy as f64).powi(2)).sqrt();
                    assert!(d <= r_cells + 1e-9, "seed {seed}: ({x},{y}) at {d} cells");
                    (x0, x1, y0, y1) = (x0.min(x), x1.max(x), y0.min(y), y1.max(y));
                }
            }
        }
        // Bounding box of the positive region stays inside the disc's box.
        let r = r_cells.floor() as usize;
        assert!(x0 >= ix - r && x1 <= ix + r && y0 >= iy - r && y1 <= iy + r);
    }
}

#[test]
fn ingest_writes_sidecar_used_by_open() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), 3, (16, 16), 5, (0.0, 2.0));
    let m = load_manifest(dir.path()).unwrap();
    assert_eq!(read_extrema(&m).unwrap(), None);
    let (_, ex) = ingest(dir.path()).unwrap();
    assert!(ex.f_min > 0.0 && ex.f_max >= ex.f_min);
    assert_eq!(read_extrema(&m).unwrap(), Some(ex));
    let s = Scenario::open(dir.path()).unwrap();
    assert_eq!(s.extrema, ex);
    // Brute-force check against the raw frames.
    let mut lo = f32::INFINITY;
    let mut hi = 0.0f32;
    for f in 0..5 {
        for &v in load_grid(&m, GridKind::Flux, f).unwrap().values() {
            if v > 0.0 {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    assert_eq!((ex.f_min, ex.f_max), (f64::from(lo), f64::from(hi)));
}

#[test]
fn synthetic_rejects_tiny_grids() {
    let dir = tempfile::tempdir().unwrap();
    let p = SynthParams::new(1, (3, 10), 1, (0.0, 0.0));
    assert!(matches!(generate_synthetic(dir.path(), &p), Err(ScenarioError::Invalid { .. })));
    let p = SynthParams::new(1, (4, 4), 0, (0.0, 0.0));
    assert!(generate_synthetic(dir.path(), &p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_roundtrip_is_bit_exact(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let values: Vec<f32> = (0..w * h)
            .map(|i| {
                let bits = wildtwin_core::rng::hash4(seed, i as u64, 0, 0) as u32;
                let v = f32::from_bits(bits);
                if v.is_finite() { v } else { f32::from_bits(bits & 0x807f_ffff) }
            })
            .collect();
        let grid = ScalarGrid::new(w, h, GridKind::Temperature, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.f32");
        write_grid(&path, &grid).unwrap();
        let back = read_f32_file(&path).unwrap();
        prop_assert_eq!(back.len(), grid.values().len());
        for (a, b) in back.iter().zip(grid.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
