//! Counter-based random draws keyed by `(seed, x, y, channel)`.
//!
//! No generator state is carried between cells, so any cell can be evaluated
//! in isolation and in any order with identical results.

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a seed and three counters.
#[inline]
pub fn hash4(seed: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ b.rotate_left(21));
    mix64(h ^ c.rotate_left(42))
}

/// Maps the top 53 bits to `[0, 1)`.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Independent random streams per placement decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    JitterX = 1,
    JitterY = 2,
    Yaw = 3,
    ScaleMult = 4,
    Variation = 5,
    ModelIndex = 6,
    GrassYaw = 7,
    Noise = 8,
    Ignition = 9,
}

/// Keyed generator for one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellRng {
    seed: u64,
    x: u64,
    y: u64,
}

impl CellRng {
    pub fn new(seed: u64, x: usize, y: usize) -> Self {
        Self {
            seed,
            x: x as u64,
            y: y as u64,
        }
    }

    #[inline]
    pub fn bits(&self, channel: Channel) -> u64 {
        hash4(self.seed, self.x, self.y, channel as u64)
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn unit(&self, channel: Channel) -> f64 {
        unit_f64(self.bits(channel))
    }

    /// Uniform in `[lo, hi]`; returns `lo` when the range is empty.
    #[inline]
    pub fn uniform(&self, channel: Channel, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        (lo + (hi - lo) * self.unit(channel)).min(hi)
    }

    /// Uniform integer in `0..n` (`n >= 1`).
    #[inline]
    pub fn index(&self, channel: Channel, n: usize) -> usize {
        ((self.unit(channel) * n as f64) as usize).min(n.saturating_sub(1))
    }
}
