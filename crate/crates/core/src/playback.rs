//! Playback clock and scene snapshots.
//!
//! The clock never reads time itself: callers pass "now" in seconds from
//! whatever source they own, which keeps every transition reproducible.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::emitter::{EmitterSet, Vec3};
use crate::geo::LocalPoint;
use crate::lod::{ActiveSet, CameraPose, FrameStats, LodTier, PoolStats};
use crate::math::floor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaybackStatus {
    Playing,
    Paused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaybackState {
    pub scenario: String,
    pub frame: usize,
    pub frame_count: usize,
    /// Frames per second of wall time.
    pub rate: f64,
    pub status: PlaybackStatus,
    /// Last camera reported by a client.
    pub camera: Option<CameraPose>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum PlaybackCommand {
    Play,
    Pause,
    Seek { frame: usize },
    Rate { rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlaybackError {
    InvalidRate(f64),
    NoFrames,
}

impl fmt::Display for PlaybackError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaybackError::InvalidRate(r) => write!(f, "playback rate {r} must be > 0"),
            PlaybackError::NoFrames => f.write_str("scenario has no frames"),
        }
    }
}

impl core::error::Error for PlaybackError {}

/// Playback state plus the time anchor the frame is derived from.
#[derive(Debug, Clone)]
pub struct PlaybackClock {
    state: PlaybackState,
    anchor_time: f64,
    anchor_frame: usize,
}

impl PlaybackClock {
    /// Paused at frame 0, one frame per second.
    pub fn new(scenario: impl Into<String>, frame_count: usize) -> Result<Self, PlaybackError> {
        if frame_count == 0 {
            return Err(PlaybackError::NoFrames);
        }
        Ok(Self {
            state: PlaybackState {
                scenario: scenario.into(),
                frame: 0,
                frame_count,
                rate: 1.0,
                status: PlaybackStatus::Paused,
                camera: None,
            },
            anchor_time: 0.0,
            anchor_frame: 0,
        })
    }

    pub fn state(&self) -> &PlaybackState {
        &self.state
    }

    pub fn frame(&self) -> usize {
        self.state.frame
    }

    pub fn set_camera(&mut self, camera: CameraPose) {
        self.state.camera = Some(camera);
    }

    fn reanchor(&mut self, now: f64) {
        self.anchor_time = now;
        self.anchor_frame = self.state.frame;
    }

    /// Applies a control command at time `now` (seconds).
    pub fn apply(&mut self, cmd: PlaybackCommand, now: f64) -> Result<&PlaybackState, PlaybackError> {
        self.advance(now);
        match cmd {
            PlaybackCommand::Play => {
                self.state.status = PlaybackStatus::Playing;
            }
            PlaybackCommand::Pause => {
                self.state.status = PlaybackStatus::Paused;
            }
            PlaybackCommand::Seek { frame } => {
                self.state.frame = frame.min(self.state.frame_count - 1);
            }
            PlaybackCommand::Rate { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(PlaybackError::InvalidRate(rate));
                }
                self.state.rate = rate;
            }
        }
        self.reanchor(now);
        Ok(&self.state)
    }

    /// Moves the frame forward to match `now`. Returns the new frame when it
    /// changed. Playback stops on the last frame.
    pub fn advance(&mut self, now: f64) -> Option<usize> {
        if self.state.status != PlaybackStatus::Playing {
            return None;
        }
        let elapsed = (now - self.anchor_time).max(0.0);
        let ticks = floor(elapsed * self.state.rate) as usize;
        let last = self.state.frame_count - 1;
        let target = self.anchor_frame.saturating_add(ticks).min(last);
        let moved = target != self.state.frame;
        self.state.frame = target;
        if target == last {
            self.state.status = PlaybackStatus::Paused;
            self.reanchor(now);
        }
        moved.then_some(target)
    }
}

/// One active emitter as sent to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEmitter {
    pub id: u32,
    pub cell: (u32, u32),
    pub position: LocalPoint,
    pub flux: f32,
    pub f_curved: f64,
    pub scale: Vec3,
    pub color_scale: Vec3,
    pub lod: LodTier,
    pub particle_mult: f64,
    pub slot: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub total_emitters: usize,
    pub active_count: usize,
    pub frame_stats: FrameStats,
    pub pool: PoolStats,
}

/// Scheduled emitters of a single frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFrame {
    pub frame: usize,
    pub camera: CameraPose,
    /// In the scheduler's order: nearest first.
    pub emitters: Vec<SceneEmitter>,
    pub summary: SceneSummary,
}

impl SceneFrame {
    /// Joins a schedule with the emitter set it was computed from.
    pub fn compose(
        frame: usize,
        camera: CameraPose,
        set: &EmitterSet,
        active: &ActiveSet,
        pool: PoolStats,
    ) -> SceneFrame {
        let emitters = active
            .entries
            .iter()
            .filter_map(|a| {
                let e = set.get(a.id)?;
                Some(SceneEmitter {
                    id: e.id,
                    cell: e.cell,
                    position: e.position,
                    flux: e.flux,
                    f_curved: e.f_curved,
                    scale: e.scale,
                    color_scale: e.color_scale,
                    lod: a.lod,
                    particle_mult: a.particle_mult,
                    slot: a.slot,
                    distance: a.distance,
                })
            })
            .collect::<Vec<_>>();
        SceneFrame {
            frame,
            camera,
            summary: SceneSummary {
                total_emitters: set.len(),
                active_count: emitters.len(),
                frame_stats: active.stats,
                pool,
            },
            emitters,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seek_clamps() {
        let mut c = PlaybackClock::new("s", 10).unwrap();
        assert_eq!(c.apply(PlaybackCommand::Seek { frame: 15 }, 0.0).unwrap().frame, 9);
        assert_eq!(c.apply(PlaybackCommand::Seek { frame: 3 }, 0.0).unwrap().frame, 3);
    }

    #[test]
    fn rate_must_be_positive() {
        let mut c = PlaybackClock::new("s", 10).unwrap();
        assert_eq!(
            c.apply(PlaybackCommand::Rate { rate: 0.0 }, 0.0).unwrap_err(),
            PlaybackError::InvalidRate(0.0)
        );
        assert!(c.apply(PlaybackCommand::Rate { rate: -1.0 }, 0.0).is_err());
        assert!(PlaybackClock::new("s", 0).is_err());
    }

    #[test]
    fn plays_at_rate() {
        let mut c = PlaybackClock::new("s", 100).unwrap();
        c.apply(PlaybackCommand::Rate { rate: 2.0 }, 0.0).unwrap();
        c.apply(PlaybackCommand::Play, 10.0).unwrap();
        assert_eq!(c.advance(10.4), None);
        assert_eq!(c.advance(10.5), Some(1));
        assert_eq!(c.advance(11.0), Some(2));
    }

    #[test]
    fn paused_does_not_move() {
        let mut c = PlaybackClock::new("s", 100).unwrap();
        c.apply(PlaybackCommand::Play, 0.0).unwrap();
        c.advance(3.0);
        c.apply(PlaybackCommand::Pause, 3.5).unwrap();
        assert_eq!(c.frame(), 3);
        assert_eq!(c.advance(100.0), None);
        assert_eq!(c.frame(), 3);
        // Resuming continues from the paused frame, not from the old anchor.
        c.apply(PlaybackCommand::Play, 200.0).unwrap();
        assert_eq!(c.advance(201.0), Some(4));
    }

    #[test]
    fn stops_on_last_frame() {
        let mut c = PlaybackClock::new("s", 5).unwrap();
        c.apply(PlaybackCommand::Play, 0.0).unwrap();
        assert_eq!(c.advance(60.0), Some(4));
        assert_eq!(c.state().status, PlaybackStatus::Paused);
    }
}
