//! Scheduler benchmark: an orbiting camera over a fixed emitter set,
//! recording per-frame schedule time and pool counters.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use wildtwin_core::emitter::EmitterSet;
use wildtwin_core::geo::LocalPoint;
use wildtwin_core::lod::{CameraPose, LodError, LodTier, PoolStats, Scheduler, SchedulerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub frames: usize,
    /// Horizontal orbit radius around the emitter centroid, meters.
    pub radius: f64,
    /// Camera height above the centroid, meters.
    pub altitude: f64,
    /// Orbits completed over the run.
    pub turns: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            frames: 1000,
            radius: 4000.0,
            altitude: 800.0,
            turns: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub frame: usize,
    pub schedule_us: f64,
    pub active: usize,
    pub near: usize,
    pub mid: usize,
    pub far: usize,
    pub activated: usize,
    pub deactivated: usize,
    pub fresh_slots: usize,
    pub reused_slots: usize,
    pub pool: PoolStats,
    pub in_use: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub frames: usize,
    pub emitters: usize,
    pub max_active: usize,
    pub pool_capacity: usize,
    pub median_us: f64,
    pub p95_us: f64,
    pub max_us: f64,
    pub pool: PoolStats,
    pub max_in_use: usize,
}

pub fn centroid(set: &EmitterSet) -> LocalPoint {
    if set.is_empty() {
        return LocalPoint::ORIGIN;
    }
    let n = set.len() as f64;
    let (x, y, z) = set.emitters.iter().fold((0.0, 0.0, 0.0), |(x, y, z), e| {
        (x + e.position.x, y + e.position.y, z + e.position.z)
    });
    LocalPoint::new(x / n, y / n, z / n)
}

/// Camera at step `i` of the orbit, looking at the center.
pub fn orbit_camera(i: usize, orbit: &OrbitConfig, center: LocalPoint) -> CameraPose {
    let frames = orbit.frames.max(1) as f64;
    let angle = orbit.turns * std::f64::consts::TAU * i as f64 / frames;
    let position = LocalPoint::new(
        center.x + orbit.radius * angle.sin(),
        center.y + orbit.radius * angle.cos(),
        center.z + orbit.altitude,
    );
    // Yaw points back at the center; pitch down the line of sight.
    let yaw = (angle.to_degrees() + 180.0).rem_euclid(360.0);
    let pitch = -(orbit.altitude.atan2(orbit.radius)).to_degrees();
    CameraPose::new(position, yaw, pitch, 60.0)
}

pub fn median(values: &mut [f64]) -> f64 {
    percentile(values, 0.5)
}

/// Nearest-rank percentile; sorts `values` in place.
pub fn percentile(values: &mut [f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

pub fn run_orbit(
    set: &EmitterSet,
    sched: SchedulerConfig,
    orbit: &OrbitConfig,
) -> Result<(Vec<BenchRecord>, BenchSummary), LodError> {
    let mut scheduler = Scheduler::new(sched)?;
    let center = centroid(set);
    let mut records = Vec::with_capacity(orbit.frames);
    for i in 0..orbit.frames {
        let camera = orbit_camera(i, orbit, center);
        let t = Instant::now();
        let active = scheduler.schedule(&set.emitters, &camera);
        let us = t.elapsed().as_secs_f64() * 1e6;
        let tier = |t: LodTier| active.entries.iter().filter(|e| e.lod == t).count();
        records.push(BenchRecord {
            frame: i,
            schedule_us: us,
            active: active.entries.len(),
            near: tier(LodTier::Near),
            mid: tier(LodTier::Mid),
            far: tier(LodTier::Far),
            activated: active.stats.activated,
            deactivated: active.stats.deactivated,
            fresh_slots: active.stats.fresh_slots,
            reused_slots: active.stats.reused_slots,
            pool: scheduler.pool().stats(),
            in_use: scheduler.pool().in_use(),
        });
    }
    let mut times: Vec<f64> = records.iter().map(|r| r.schedule_us).collect();
    let summary = BenchSummary {
        frames: orbit.frames,
        emitters: set.len(),
        max_active: sched.max_active,
        pool_capacity: sched.pool_capacity,
        median_us: median(&mut times),
        p95_us: percentile(&mut times, 0.95),
        max_us: times.last().copied().unwrap_or(0.0),
        pool: scheduler.pool().stats(),
        max_in_use: records.iter().map(|r| r.in_use).max().unwrap_or(0),
    };
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let mut v = vec![5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(median(&mut v), 3.0);
        assert_eq!(percentile(&mut v, 1.0), 5.0);
        assert_eq!(percentile(&mut [], 0.5), 0.0);
    }

    #[test]
    fn orbit_keeps_radius_and_faces_center() {
        let orbit = OrbitConfig {
            frames: 8,
            radius: 100.0,
            altitude: 100.0,
            turns: 1.0,
        };
        let c = LocalPoint::new(10.0, 20.0, 5.0);
        for i in 0..8 {
            let cam = orbit_camera(i, &orbit, c);
            assert!((cam.position.horizontal_distance(&c) - 100.0).abs() < 1e-9);
            assert!((cam.pitch + 45.0).abs() < 1e-9);
            let (sy, cy) = cam.yaw.to_radians().sin_cos();
            let to_center = ((c.x - cam.position.x) / 100.0, (c.y - cam.position.y) / 100.0);
            assert!((sy - to_center.0).abs() < 1e-9 && (cy - to_center.1).abs() < 1e-9);
        }
    }
}
