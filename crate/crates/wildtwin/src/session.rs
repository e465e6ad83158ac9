//! Live playback session: clock, per-frame emitter cache, scheduler, and the
//! latest-frame feed.
//!
//! Locks guard only short copy-in/copy-out sections; emitter builds and
//! scheduling run without any lock held, so readers never wait on a build.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use lru::LruCache;
use tokio::sync::watch;
use wildtwin_core::emitter::EmitterSet;
use wildtwin_core::geo::LocalPoint;
use wildtwin_core::lod::{CameraPose, Scheduler, SchedulerConfig};
use wildtwin_core::playback::{PlaybackClock, PlaybackCommand, PlaybackState, SceneFrame};
use wildtwin_core::stations::fire_origin_pose;

use crate::scenario::Scenario;
use crate::Error;

/// Seconds since some fixed point. Injected so tests can drive time.
pub trait TimeSource: Send + Sync {
    fn now(&self) -> f64;
}

#[derive(Debug)]
pub struct SystemTime {
    start: Instant,
}

impl SystemTime {
    pub fn new() -> Self {
        Self { start: Instant::now() }
    }
}

impl Default for SystemTime {
    fn default() -> Self {
        Self::new()
    }
}

impl TimeSource for SystemTime {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Time that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualTime {
    bits: AtomicU64,
}

impl ManualTime {
    pub fn new(start: f64) -> Self {
        Self {
            bits: AtomicU64::new(start.to_bits()),
        }
    }

    pub fn set(&self, t: f64) {
        self.bits.store(t.to_bits(), Ordering::SeqCst);
    }

    pub fn advance(&self, dt: f64) {
        let _ = self
            .bits
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |b| Some((f64::from_bits(b) + dt).to_bits()));
    }
}

impl TimeSource for ManualTime {
    fn now(&self) -> f64 {
        f64::from_bits(self.bits.load(Ordering::SeqCst))
    }
}

/// Altitude of the built-in fire-origin anchor above the fire centroid.
pub const FIRE_ORIGIN_ALTITUDE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub scheduler: SchedulerConfig,
    /// Frames of emitters kept in the cache.
    pub cache_frames: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            scheduler: SchedulerConfig::default(),
            cache_frames: 16,
        }
    }
}

struct SceneMemo {
    scheduler: Scheduler,
    last: Option<Arc<SceneFrame>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // A panic elsewhere leaves the data consistent (every critical section
    // is a plain store), so poisoning is ignored.
    m.lock().unwrap_or_else(|p| p.into_inner())
}

pub struct Session {
    scenario: Arc<Scenario>,
    time: Arc<dyn TimeSource>,
    clock: Mutex<PlaybackClock>,
    memo: Mutex<SceneMemo>,
    cache: Mutex<LruCache<usize, Arc<EmitterSet>>>,
    fire_origin: Option<CameraPose>,
}

impl Session {
    pub fn new(scenario: Scenario, time: Arc<dyn TimeSource>, cfg: SessionConfig) -> Result<Session, Error> {
        let clock = PlaybackClock::new(scenario.name(), scenario.frame_count())?;
        let scheduler = Scheduler::new(cfg.scheduler)?;
        let frame0 = scenario.flux(0)?;
        let fire_origin = fire_origin_pose(&frame0, &scenario.georef, FIRE_ORIGIN_ALTITUDE);
        let cap = NonZeroUsize::new(cfg.cache_frames.max(1)).expect("max(1) is nonzero");
        Ok(Session {
            scenario: Arc::new(scenario),
            time,
            clock: Mutex::new(clock),
            memo: Mutex::new(SceneMemo { scheduler, last: None }),
            cache: Mutex::new(LruCache::new(cap)),
            fire_origin,
        })
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    /// Pose above the first frame's fire centroid; `None` if frame 0 has no fire.
    pub fn fire_origin(&self) -> Option<CameraPose> {
        self.fire_origin
    }

    /// Current state, after catching the clock up to now.
    pub fn state(&self) -> PlaybackState {
        let now = self.time.now();
        let mut clock = lock(&self.clock);
        clock.advance(now);
        clock.state().clone()
    }

    pub fn control(&self, cmd: PlaybackCommand) -> Result<PlaybackState, Error> {
        let now = self.time.now();
        let mut clock = lock(&self.clock);
        Ok(clock.apply(cmd, now)?.clone())
    }

    /// Advances the clock; returns the new frame when it moved.
    pub fn tick(&self) -> Option<usize> {
        let now = self.time.now();
        lock(&self.clock).advance(now)
    }

    /// Camera for pushed frames: the last one a client reported, else the
    /// fire-origin anchor, else high above the origin.
    pub fn stream_camera(&self) -> CameraPose {
        let reported = lock(&self.clock).state().camera;
        reported
            .or(self.fire_origin)
            .unwrap_or_else(|| CameraPose::nadir(LocalPoint::new(0.0, 0.0, FIRE_ORIGIN_ALTITUDE)))
    }

    /// Emitters of `frame`, built once and then served from the cache.
    pub fn emitters(&self, frame: usize) -> Result<Arc<EmitterSet>, Error> {
        if let Some(set) = lock(&self.cache).get(&frame) {
            return Ok(Arc::clone(set));
        }
        let set = Arc::new(self.scenario.emitters(frame)?);
        lock(&self.cache).put(frame, Arc::clone(&set));
        Ok(set)
    }

    /// Schedules the current frame against `camera` and records the camera
    /// as the last reported one.
    pub fn scene(&self, camera: CameraPose) -> Result<Arc<SceneFrame>, Error> {
        camera.validate()?;
        let now = self.time.now();
        let frame = {
            let mut clock = lock(&self.clock);
            clock.advance(now);
            clock.set_camera(camera);
            clock.frame()
        };
        self.scene_at(frame, camera)
    }

    /// Scene of a given frame. Repeating the previous `(frame, camera)`
    /// returns the same snapshot instead of rescheduling.
    pub fn scene_at(&self, frame: usize, camera: CameraPose) -> Result<Arc<SceneFrame>, Error> {
        let set = self.emitters(frame)?;
        let mut scheduler = {
            let memo = lock(&self.memo);
            if let Some(last) = &memo.last {
                if last.frame == frame && last.camera == camera {
                    return Ok(Arc::clone(last));
                }
            }
            memo.scheduler.clone()
        };
        let active = scheduler.schedule(&set.emitters, &camera);
        let scene = Arc::new(SceneFrame::compose(frame, camera, &set, &active, scheduler.pool().stats()));
        let mut memo = lock(&self.memo);
        memo.scheduler = scheduler;
        memo.last = Some(Arc::clone(&scene));
        Ok(scene)
    }
}

/// Latest-value channel of scene frames. A subscriber that falls behind
/// skips straight to the newest frame; nothing is queued or reordered.
#[derive(Debug, Clone)]
pub struct FrameFeed {
    tx: watch::Sender<Option<Arc<SceneFrame>>>,
}

impl Default for FrameFeed {
    fn default() -> Self {
        Self::new()
    }
}

impl FrameFeed {
    pub fn new() -> Self {
        let (tx, _) = watch::channel(None);
        Self { tx }
    }

    pub fn publish(&self, scene: Arc<SceneFrame>) {
        self.tx.send_replace(Some(scene));
    }

    pub fn subscribe(&self) -> FrameSubscription {
        let mut rx = self.tx.subscribe();
        // Only frames published after subscribing are delivered.
        rx.mark_unchanged();
        FrameSubscription { rx }
    }

    pub fn subscriber_count(&self) -> usize {
        self.tx.receiver_count()
    }
}

#[derive(Debug)]
pub struct FrameSubscription {
    rx: watch::Receiver<Option<Arc<SceneFrame>>>,
}

impl FrameSubscription {
    /// Waits for a frame newer than the last one returned. `None` once the
    /// feed is gone.
    pub async fn next(&mut self) -> Option<Arc<SceneFrame>> {
        loop {
            self.rx.changed().await.ok()?;
            if let Some(scene) = self.rx.borrow_and_update().clone() {
                return Some(scene);
            }
        }
    }
}
