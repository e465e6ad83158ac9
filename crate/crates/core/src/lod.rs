//! Camera-relative level of detail, nearest-first activation and slot pooling.
//!
//! Each frame the scheduler keeps the `max_active` emitters closest to the
//! camera (3D Euclidean distance, ties by ascending id), tags each with a LOD
//! tier and particle multiplier, and hands out pool slots:
//!
//! * an emitter that stays active keeps its slot;
//! * slots of emitters that dropped out go back to the pool first;
//! * newly active emitters take recycled slots (lowest first) before the pool
//!   grows.
//!
//! The pool never grows past `pool_capacity`, and since at most `max_active`
//! slots are held at once it never grows past `max_active` either.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::emitter::FireEmitter;
use crate::geo::LocalPoint;
use crate::math::sqrt;

/// Distance tier: 0 near, 1 mid, 2 far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum LodTier {
    Near = 0,
    Mid = 1,
    Far = 2,
}

impl LodTier {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn particle_multiplier(self) -> f64 {
        match self {
            LodTier::Near => 1.0,
            LodTier::Mid => 0.7,
            LodTier::Far => 0.4,
        }
    }
}

impl From<LodTier> for u8 {
    fn from(t: LodTier) -> u8 {
        t as u8
    }
}

impl TryFrom<u8> for LodTier {
    type Error = LodError;

    fn try_from(v: u8) -> Result<Self, LodError> {
        match v {
            0 => Ok(LodTier::Near),
            1 => Ok(LodTier::Mid),
            2 => Ok(LodTier::Far),
            other => Err(LodError::InvalidTier(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LodError {
    InvalidTier(u8),
    InvalidConfig(&'static str),
    InvalidCamera(&'static str),
}

impl fmt::Display for LodError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LodError::InvalidTier(t) => write!(f, "invalid LOD tier {t}, expected 0, 1 or 2"),
            LodError::InvalidConfig(msg) => write!(f, "invalid scheduler config: {msg}"),
            LodError::InvalidCamera(msg) => write!(f, "invalid camera pose: {msg}"),
        }
    }
}

impl core::error::Error for LodError {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: LocalPoint,
    /// Heading in degrees clockwise from north.
    pub yaw: f64,
    /// Degrees above the horizon; -90 looks straight down.
    pub pitch: f64,
    /// Horizontal field of view, degrees.
    pub fov: f64,
}

impl CameraPose {
    pub fn new(position: LocalPoint, yaw: f64, pitch: f64, fov: f64) -> Self {
        Self {
            position,
            yaw,
            pitch,
            fov,
        }
    }

    /// Looking straight down from `position`.
    pub fn nadir(position: LocalPoint) -> Self {
        Self::new(position, 0.0, -90.0, 60.0)
    }

    pub fn validate(&self) -> Result<(), LodError> {
        if !(self.position.is_finite() && self.yaw.is_finite() && self.pitch.is_finite()) {
            return Err(LodError::InvalidCamera("non-finite component"));
        }
        if !(self.fov > 10.0 && self.fov < 170.0) {
            return Err(LodError::InvalidCamera("fov must be within (10, 170) degrees"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    /// Upper bound (inclusive) of the near tier, meters.
    pub lod1_dist: f64,
    /// Upper bound (inclusive) of the mid tier, meters.
    pub lod2_dist: f64,
    pub max_active: usize,
    pub pool_capacity: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            lod1_dist: 1500.0,
            lod2_dist: 3500.0,
            max_active: 4096,
            pool_capacity: 4096,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<(), LodError> {
        if !(self.lod1_dist >= 0.0 && self.lod1_dist < self.lod2_dist && self.lod2_dist.is_finite())
        {
            return Err(LodError::InvalidConfig("need 0 <= lod1_dist < lod2_dist"));
        }
        if self.max_active > self.pool_capacity {
            return Err(LodError::InvalidConfig("max_active exceeds pool_capacity"));
        }
        if self.pool_capacity > u32::MAX as usize {
            return Err(LodError::InvalidConfig("pool_capacity exceeds u32 range"));
        }
        Ok(())
    }
}

/// Tier for a camera distance `d >= 0` (boundaries belong to the nearer tier).
pub fn lod_for_distance(d: f64, cfg: &SchedulerConfig) -> LodTier {
    if d <= cfg.lod1_dist {
        LodTier::Near
    } else if d <= cfg.lod2_dist {
        LodTier::Mid
    } else {
        LodTier::Far
    }
}

/// Particle density multiplier for a raw tier index.
pub fn particle_multiplier(tier: u8) -> Result<f64, LodError> {
    LodTier::try_from(tier).map(LodTier::particle_multiplier)
}

/// Cumulative pool counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PoolStats {
    /// Slots created from scratch.
    pub fresh: u64,
    /// Acquisitions served from released slots.
    pub reuses: u64,
    pub releases: u64,
}

/// Fixed-capacity pool of integer slots.
#[derive(Debug, Clone)]
pub struct SlotPool {
    capacity: u32,
    next_fresh: u32,
    free: BinaryHeap<Reverse<u32>>,
    stats: PoolStats,
}

impl SlotPool {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.min(u32::MAX as usize) as u32,
            next_fresh: 0,
            free: BinaryHeap::new(),
            stats: PoolStats::default(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity as usize
    }

    /// Slots currently handed out.
    pub fn in_use(&self) -> usize {
        self.next_fresh as usize - self.free.len()
    }

    /// Lowest released slot if any, else a fresh one; `None` when exhausted.
    pub fn acquire(&mut self) -> Option<(u32, bool)> {
        if let Some(Reverse(slot)) = self.free.pop() {
            self.stats.reuses += 1;
            return Some((slot, false));
        }
        if self.next_fresh < self.capacity {
            let slot = self.next_fresh;
            self.next_fresh += 1;
            self.stats.fresh += 1;
            return Some((slot, true));
        }
        None
    }

    pub fn release(&mut self, slot: u32) {
        debug_assert!(slot < self.next_fresh);
        self.free.push(Reverse(slot));
        self.stats.releases += 1;
    }

    pub fn stats(&self) -> PoolStats {
        self.stats
    }
}

/// Cumulative counters of `pool`.
pub fn pool_stats(pool: &SlotPool) -> PoolStats {
    pool.stats()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveEntry {
    pub id: u32,
    pub lod: LodTier,
    pub particle_mult: f64,
    pub slot: u32,
    /// Camera distance, meters.
    pub distance: f64,
}

/// Per-frame transition counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrameStats {
    pub activated: usize,
    pub deactivated: usize,
    /// Active entries whose slot already existed before this frame.
    pub reused_slots: usize,
    /// Slots created this frame.
    pub fresh_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActiveSet {
    /// Sorted by distance, then id.
    pub entries: Vec<ActiveEntry>,
    pub stats: FrameStats,
}

#[derive(Clone, Copy)]
struct Candidate {
    d2: f64,
    id: u32,
}

fn by_distance(a: &Candidate, b: &Candidate) -> Ordering {
    a.d2.total_cmp(&b.d2).then(a.id.cmp(&b.id))
}

/// Stateful per-session scheduler: remembers last frame's slots.
#[derive(Debug, Clone)]
pub struct Scheduler {
    cfg: SchedulerConfig,
    pool: SlotPool,
    /// `(id, slot)` of the previous frame, sorted by id.
    held: Vec<(u32, u32)>,
}

impl Scheduler {
    pub fn new(cfg: SchedulerConfig) -> Result<Self, LodError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            pool: SlotPool::new(cfg.pool_capacity),
            held: Vec::new(),
        })
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.cfg
    }

    pub fn pool(&self) -> &SlotPool {
        &self.pool
    }

    /// `(id, slot)` pairs held since the last call, sorted by id.
    pub fn held(&self) -> &[(u32, u32)] {
        &self.held
    }

    /// Selects, tiers and slots the active emitters for one frame.
    ///
    /// `emitters` must have unique ids.
    pub fn schedule(&mut self, emitters: &[FireEmitter], camera: &CameraPose) -> ActiveSet {
        let cam = camera.position;
        let mut candidates: Vec<Candidate> = emitters
            .iter()
            .map(|e| Candidate {
                d2: e.position.distance_squared(&cam),
                id: e.id,
            })
            .collect();
        let k = self.cfg.max_active.min(candidates.len());
        if k < candidates.len() {
            if k > 0 {
                candidates.select_nth_unstable_by(k - 1, by_distance);
            }
            candidates.truncate(k);
        }
        candidates.sort_unstable_by(by_distance);

        let mut entries: Vec<ActiveEntry> = candidates
            .iter()
            .map(|c| {
                let distance = sqrt(c.d2);
                let lod = lod_for_distance(distance, &self.cfg);
                ActiveEntry {
                    id: c.id,
                    lod,
                    particle_mult: lod.particle_multiplier(),
                    slot: u32::MAX,
                    distance,
                }
            })
            .collect();

        // Entry positions ordered by id, to merge against the held list.
        let mut by_id: Vec<usize> = (0..entries.len()).collect();
        by_id.sort_unstable_by_key(|&i| entries[i].id);

        let mut stats = FrameStats::default();
        let mut newcomers = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < by_id.len() || j < self.held.len() {
            let next_new = by_id.get(i).map(|&p| entries[p].id);
            let next_old = self.held.get(j).copied();
            match (next_new, next_old) {
                (Some(n), Some((o, slot))) if n == o => {
                    entries[by_id[i]].slot = slot;
                    stats.reused_slots += 1;
                    i += 1;
                    j += 1;
                }
                (Some(n), Some((o, slot))) if o < n => {
                    self.pool.release(slot);
                    stats.deactivated += 1;
                    j += 1;
                }
                (None, Some((_, slot))) => {
                    self.pool.release(slot);
                    stats.deactivated += 1;
                    j += 1;
                }
                (Some(_), _) => {
                    newcomers.push(by_id[i]);
                    i += 1;
                }
                (None, None) => unreachable!(),
            }
        }

        // Nearest newcomers pick first.
        newcomers.sort_unstable();
        for p in newcomers {
            let (slot, fresh) = self
                .pool
                .acquire()
                .expect("pool_capacity >= max_active bounds concurrent slots");
            entries[p].slot = slot;
            stats.activated += 1;
            if fresh {
                stats.fresh_slots += 1;
            } else {
                stats.reused_slots += 1;
            }
        }

        self.held = by_id
            .iter()
            .map(|&p| (entries[p].id, entries[p].slot))
            .collect();

        // Entries were built in distance order, so `entries` is already sorted.
        ActiveSet { entries, stats }
    }

    /// Releases every held slot, as if the next frame had no emitters.
    pub fn clear(&mut self) {
        for (_, slot) in self.held.drain(..) {
            self.pool.release(slot);
        }
    }
}
