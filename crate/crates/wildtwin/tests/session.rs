use std::path::Path;
use std::sync::Arc;

use wildtwin::gridio::write_grid;
use wildtwin::scenario::{ingest, Scenario};
use wildtwin::service::AppState;
use wildtwin::session::{FrameFeed, ManualTime, Session, SessionConfig};
use wildtwin::stations_io::bundled_stations;
use wildtwin::synth::{generate_synthetic, SynthParams};
use wildtwin_core::geo::LocalPoint;
use wildtwin_core::grid::{GridKind, ScalarGrid};
use wildtwin_core::lod::{CameraPose, LodTier};
use wildtwin_core::playback::{PlaybackCommand, PlaybackStatus, SceneFrame};
use wildtwin_core::stations::FIRE_ORIGIN_ANCHOR;

fn scenario(dir: &Path, frames: usize) -> Scenario {
    generate_synthetic(dir, &SynthParams::new(5, (32, 32), frames, (90.0, 3.0))).unwrap();
    ingest(dir).unwrap();
    Scenario::open(dir).unwrap()
}

fn session(dir: &Path, frames: usize) -> (Session, Arc<ManualTime>) {
    let time = Arc::new(ManualTime::new(0.0));
    let s = Session::new(scenario(dir, frames), time.clone(), SessionConfig::default()).unwrap();
    (s, time)
}

fn overhead(z: f64) -> CameraPose {
    CameraPose::nadir(LocalPoint::new(0.0, 0.0, z))
}

#[test]
fn seek_clamps_to_last_frame() {
    let dir = tempfile::tempdir().unwrap();
    let (s, _) = session(dir.path(), 6);
    let st = s.control(PlaybackCommand::Seek { frame: 6 + 5 }).unwrap();
    assert_eq!(st.frame, 5);
    assert!(s.control(PlaybackCommand::Rate { rate: 0.0 }).is_err());
    assert!(s.control(PlaybackCommand::Rate { rate: -2.0 }).is_err());
}

#[test]
fn rate_two_for_one_second_advances_two_frames() {
    let dir = tempfile::tempdir().unwrap();
    let (s, time) = session(dir.path(), 20);
    s.control(PlaybackCommand::Rate { rate: 2.0 }).unwrap();
    s.control(PlaybackCommand::Play).unwrap();
    time.advance(1.0);
    let st = s.state();
    assert_eq!(st.frame, 2);
    assert_eq!(st.status, PlaybackStatus::Playing);
}

#[test]
fn paused_session_returns_identical_scenes() {
    let dir = tempfile::tempdir().unwrap();
    let (s, time) = session(dir.path(), 8);
    s.control(PlaybackCommand::Seek { frame: 4 }).unwrap();
    s.control(PlaybackCommand::Pause).unwrap();
    let cam = overhead(800.0);
    let a = s.scene(cam).unwrap();
    time.advance(30.0);
    let b = s.scene(cam).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.frame, 4);
    assert_eq!(serde_json::to_string(&*a).unwrap(), serde_json::to_string(&*b).unwrap());
    // No ticks while paused.
    assert_eq!(s.tick(), None);
}

#[test]
fn far_camera_puts_everything_in_the_far_tier() {
    let dir = tempfile::tempdir().unwrap();
    let (s, _) = session(dir.path(), 8);
    s.control(PlaybackCommand::Seek { frame: 7 }).unwrap();
    let scene = s.scene(overhead(50_000.0)).unwrap();
    assert!(!scene.emitters.is_empty());
    for e in &scene.emitters {
        assert_eq!(e.lod, LodTier::Far);
        assert_eq!(e.particle_mult, 0.4);
    }
}

#[test]
fn scene_is_a_consistent_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let (s, time) = session(dir.path(), 8);
    s.control(PlaybackCommand::Play).unwrap();
    time.advance(3.2);
    let scene = s.scene(overhead(500.0)).unwrap();
    assert_eq!(scene.frame, 3);
    let flux = s.scenario().flux(3).unwrap();
    for e in &scene.emitters {
        assert_eq!(flux.at(e.cell.0 as usize, e.cell.1 as usize).unwrap(), e.flux);
    }
    assert_eq!(scene.summary.total_emitters, flux.values().iter().filter(|&&v| v > 0.0).count());
    assert_eq!(scene.summary.active_count, scene.emitters.len());
    // The last reported camera is kept in the state.
    assert_eq!(s.state().camera, Some(overhead(500.0)));
}

#[test]
fn frame_without_fire_has_empty_active_set() {
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(dir.path(), &SynthParams::new(5, (16, 16), 3, (0.0, 0.0))).unwrap();
    let zeros = ScalarGrid::filled(16, 16, GridKind::Flux, 0.0).unwrap();
    write_grid(&dir.path().join("flux_0002.f32"), &zeros).unwrap();
    ingest(dir.path()).unwrap();
    let time = Arc::new(ManualTime::new(0.0));
    let s = Session::new(Scenario::open(dir.path()).unwrap(), time, SessionConfig::default()).unwrap();
    s.control(PlaybackCommand::Seek { frame: 2 }).unwrap();
    let scene = s.scene(overhead(100.0)).unwrap();
    assert!(scene.emitters.is_empty());
    assert_eq!(scene.summary.total_emitters, 0);
}

#[test]
fn emitter_cache_serves_the_same_set() {
    let dir = tempfile::tempdir().unwrap();
    let (s, _) = session(dir.path(), 4);
    let a = s.emitters(3).unwrap();
    let b = s.emitters(3).unwrap();
    assert!(Arc::ptr_eq(&a, &b));
    assert_eq!(*a, s.scenario().emitters(3).unwrap());
    assert!(s.emitters(4).is_err());
}

#[tokio::test]
async fn lagging_subscriber_gets_the_latest_frame() {
    let feed = FrameFeed::new();
    let mut slow = feed.subscribe();
    let mut fast = feed.subscribe();
    let scene = |frame| {
        Arc::new(SceneFrame {
            frame,
            camera: overhead(10.0),
            emitters: Vec::new(),
            summary: serde_json::from_value(serde_json::json!({
                "total_emitters": 0, "active_count": 0,
                "frame_stats": {"activated": 0, "deactivated": 0, "reused_slots": 0, "fresh_slots": 0},
                "pool": {"fresh": 0, "reuses": 0, "releases": 0}
            }))
            .unwrap(),
        })
    };
    let mut fast_seen = Vec::new();
    for f in 1..=4 {
        feed.publish(scene(f));
        fast_seen.push(fast.next().await.unwrap().frame);
    }
    assert_eq!(fast_seen, vec![1, 2, 3, 4]);
    // The slow one stalled for three ticks: it sees frame 4, no backlog.
    assert_eq!(slow.next().await.unwrap().frame, 4);
    feed.publish(scene(5));
    assert_eq!(slow.next().await.unwrap().frame, 5);
    drop(slow);
    assert_eq!(feed.subscriber_count(), 1);
    feed.publish(scene(6));
    assert_eq!(fast.next().await.unwrap().frame, 6);
}

#[tokio::test]
async fn ticks_publish_strictly_increasing_frames() {
    let dir = tempfile::tempdir().unwrap();
    scenario(dir.path(), 12);
    let time = Arc::new(ManualTime::new(100.0));
    let app = AppState::new(bundled_stations(), time.clone(), SessionConfig::default());
    app.load(dir.path()).unwrap();
    let mut a = app.feed().subscribe();
    let mut b = app.feed().subscribe();
    let session = app.session().unwrap();
    session.control(PlaybackCommand::Play).unwrap();
    let (mut seen_a, mut seen_b) = (Vec::new(), Vec::new());
    // rate 1 for 5 s, ticking every 0.25 s; subscriber b only reads every
    // fourth tick.
    for step in 1..=20 {
        time.advance(0.25);
        if app.tick().unwrap().is_some() {
            seen_a.push(a.next().await.unwrap().frame);
        }
        if step % 4 == 3 {
            if let Ok(Some(f)) = tokio::time::timeout(std::time::Duration::from_millis(1), b.next()).await {
                seen_b.push(f.frame);
            }
        }
    }
    assert_eq!(seen_a, vec![1, 2, 3, 4, 5]);
    assert!(seen_b.windows(2).all(|w| w[0] < w[1]));
    assert!(seen_b.iter().all(|f| seen_a.contains(f)));
    assert!(!seen_b.is_empty());
}

#[test]
fn fire_origin_anchor_is_above_the_ignition_cell() {
    let dir = tempfile::tempdir().unwrap();
    let p = SynthParams::new(21, (40, 40), 2, (0.0, 0.0));
    generate_synthetic(dir.path(), &p).unwrap();
    let time = Arc::new(ManualTime::new(0.0));
    let app = AppState::new(bundled_stations(), time, SessionConfig::default());
    app.load(dir.path()).unwrap();
    let pose = app.resolve_anchor(FIRE_ORIGIN_ANCHOR).unwrap();
    // Centroid oracle over frame 0's positive cells.
    let s = app.session().unwrap();
    let sc = s.scenario();
    let flux = sc.flux(0).unwrap();
    let plane = sc.georef.plane();
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for y in 0..40 {
        for x in 0..40 {
            if flux.at(x, y).unwrap() > 0.0 {
                let v = plane.to_local(&sc.georef.cell_geodetic(x, y).unwrap());
                sx += v.x;
                sy += v.y;
                n += 1.0;
            }
        }
    }
    assert!((pose.position.x - sx / n).abs() < 1e-6 && (pose.position.y - sy / n).abs() < 1e-6);
    // A calm disc is symmetric about the ignition cell unless fuel gaps cut
    // it, so the centroid lies within a cell of it.
    let (ix, iy) = p.ignition_cell();
    let ign = plane.to_local(&sc.georef.cell_geodetic(ix, iy).unwrap());
    assert!(pose.position.horizontal_distance(&ign) < 2.0 * p.cell_size);
    assert_eq!(pose.pitch, -90.0);

    assert!(app.register_anchor(FIRE_ORIGIN_ANCHOR, pose).is_err());
    app.register_anchor("ridge", overhead(900.0)).unwrap();
    assert_eq!(app.resolve_anchor("ridge").unwrap(), overhead(900.0));
    assert!(app.resolve_anchor("nowhere").is_err());
    let names: Vec<String> = app.anchors().into_iter().map(|a| a.name).collect();
    assert_eq!(names, vec![FIRE_ORIGIN_ANCHOR.to_string(), "ridge".to_string()]);
}
