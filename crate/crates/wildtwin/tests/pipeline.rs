use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Stdio};

use wildtwin::export::{forest_table, ForestSummary, FOREST_TABLE_HEADER};
use wildtwin::parallel::{build_emitters_par, generate_forest_par};
use wildtwin::scenario::Scenario;
use wildtwin::synth::{generate_synthetic, SynthParams};
use wildtwin_core::emitter::build_emitters;
use wildtwin_core::forest::{forest_digest, generate_forest, ForestConfig};
use wildtwin_core::grid::GridKind;

const BIN: &str = env!("CARGO_BIN_EXE_wildtwin");

fn wildtwin(args: &[&str]) -> std::process::Output {
    let out = Command::new(BIN).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "wildtwin {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gen(dir: &Path, seed: &str) {
    wildtwin(&["gen", "--out", dir.to_str().unwrap(), "--seed", seed, "--width", "24", "--height", "20", "--frames", "4"]);
}

#[test]
fn parallel_builds_match_sequential() {
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(dir.path(), &SynthParams::new(8, (30, 26), 5, (200.0, 6.0))).unwrap();
    let s = Scenario::open(dir.path()).unwrap();
    for frame in 0..5 {
        let flux = s.flux(frame).unwrap();
        let cfg = s.emitter_config();
        assert_eq!(
            build_emitters(&flux, &s.georef, &cfg).unwrap(),
            build_emitters_par(&flux, &s.georef, &cfg).unwrap()
        );
    }
    let canopy = s.grid(GridKind::CanopyFuel, 0).unwrap();
    let surface = s.grid(GridKind::SurfaceFuel, 0).unwrap();
    let cfg = ForestConfig { seed: 3, ..ForestConfig::default() };
    let a = generate_forest(&canopy, &surface, &s.fuel_georef, &cfg).unwrap();
    let b = generate_forest_par(&canopy, &surface, &s.fuel_georef, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(forest_digest(&a), forest_digest(&b));

    let table = forest_table(&a);
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some(FOREST_TABLE_HEADER));
    assert_eq!(lines.count(), a.trees.len() + a.grass.len());
    let summary = ForestSummary::of(&a);
    assert_eq!(summary.trees, a.trees.len());
    assert_eq!(summary.digest.len(), 16);
}

#[test]
fn gen_is_reproducible_from_the_command_line() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    gen(a.path(), "77");
    gen(b.path(), "77");
    gen(c.path(), "78");
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 4 + 4 + 8);
    let mut differs = false;
    for n in &names {
        let x = std::fs::read(a.path().join(n)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(n)).unwrap(), "{n:?}");
        differs |= n.to_str().unwrap().starts_with("flux_") && x != std::fs::read(c.path().join(n)).unwrap();
    }
    assert!(differs, "seed has no effect on flux");

    let out = wildtwin(&["ingest", a.path().to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["f_max"].as_f64().unwrap() >= v["f_min"].as_f64().unwrap());
    assert!(a.path().join("extrema.toml").exists());
}

#[test]
fn cli_render_forest_and_emitters_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "5");
    let p = dir.path().to_str().unwrap();
    let png = dir.path().join("thermal.png");
    wildtwin(&["render", p, "--kind", "thermal", "--frame", "3", "--out", png.to_str().unwrap()]);
    assert_eq!(&std::fs::read(&png).unwrap()[..8], b"\x89PNG\r\n\x1a\n");

    let pfm = dir.path().join("depth.pfm");
    wildtwin(&[
        "render", p, "--kind", "depth", "--frame", "0", "--out", pfm.to_str().unwrap(), "--width", "40", "--height", "30",
    ]);
    let bytes = std::fs::read(&pfm).unwrap();
    assert!(bytes.starts_with(b"Pf\n40 30\n-1.0\n"));
    assert_eq!(bytes.len(), "Pf\n40 30\n-1.0\n".len() + 40 * 30 * 4);

    let csv = dir.path().join("forest.csv");
    let out = wildtwin(&["forest", p, "--out", csv.to_str().unwrap(), "--parallel"]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let seq: serde_json::Value = serde_json::from_slice(&wildtwin(&["forest", p]).stdout).unwrap();
    assert_eq!(summary, seq);
    let rows = std::fs::read_to_string(&csv).unwrap().lines().count() - 1;
    assert_eq!(rows as u64, summary["trees"].as_u64().unwrap() + summary["grass"].as_u64().unwrap());

    let out = wildtwin(&["emitters", p, "--frame", "2"]);
    let set: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let flux = Scenario::open(dir.path()).unwrap().flux(2).unwrap();
    let positive = flux.values().iter().filter(|&&v| v > 0.0).count();
    assert_eq!(set["emitters"].as_array().unwrap().len(), positive);

    let bad = Command::new(BIN).args(["render", p, "--kind", "thermal", "--frame", "9"]).output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn cli_serve_reports_its_address() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "6");
    let mut child = Command::new(BIN)
        .args(["serve", "--scenario", dir.path().to_str().unwrap(), "--addr", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").expect("address line").to_string();
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let result = rt.block_on(async {
        let health = reqwest::get(format!("{url}/health")).await?.status();
        let info: serde_json::Value = reqwest::get(format!("{url}/scenario")).await?.json().await?;
        Ok::<_, reqwest::Error>((health, info))
    });
    child.kill().unwrap();
    child.wait().unwrap();
    let (health, info) = result.unwrap();
    assert!(health.is_success());
    assert_eq!(info["frame_count"], 4);
}
