//! Row-major scalar fields.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// What a [`ScalarGrid`] holds. Units are declared, never converted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Heat flux, kW/m².
    Flux,
    /// Temperature, K.
    Temperature,
    /// Surface fuel mass, kg/m².
    SurfaceFuel,
    /// Canopy fuel mass, kg/m².
    CanopyFuel,
}

impl GridKind {
    pub const ALL: [GridKind; 4] = [
        GridKind::Flux,
        GridKind::Temperature,
        GridKind::SurfaceFuel,
        GridKind::CanopyFuel,
    ];

    /// Flux and temperature come one grid per frame; fuel is static.
    pub fn is_per_frame(self) -> bool {
        matches!(self, GridKind::Flux | GridKind::Temperature)
    }

    pub fn unit(self) -> &'static str {
        match self {
            GridKind::Flux => "kW/m^2",
            GridKind::Temperature => "K",
            GridKind::SurfaceFuel | GridKind::CanopyFuel => "kg/m^2",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Flux => "flux",
            GridKind::Temperature => "temperature",
            GridKind::SurfaceFuel => "surface_fuel",
            GridKind::CanopyFuel => "canopy_fuel",
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// `values.len()` disagrees with `width * height`.
    LengthMismatch { expected: usize, actual: usize },
    ZeroDimension { width: usize, height: usize },
    /// First non-finite value in row-major order.
    NonFinite { x: usize, y: usize, value: f32 },
    OutOfBounds { x: usize, y: usize, width: usize, height: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::LengthMismatch { expected, actual } => {
                write!(f, "grid has {actual} values, expected {expected}")
            }
            GridError::ZeroDimension { width, height } => {
                write!(f, "grid dimensions {width}x{height} must both be at least 1")
            }
            GridError::NonFinite { x, y, value } => {
                write!(f, "non-finite value {value} at X={x}, Y={y}")
            }
            GridError::OutOfBounds { x, y, width, height } => {
                write!(f, "cell ({x}, {y}) outside {width}x{height} grid")
            }
        }
    }
}

impl core::error::Error for GridError {}

/// A `width × height` field of 32-bit floats, index `Y * width + X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    width: usize,
    height: usize,
    kind: GridKind,
    values: Vec<f32>,
}

impl ScalarGrid {
    /// Builds a grid and rejects bad lengths and any NaN/Inf.
    pub fn new(
        width: usize,
        height: usize,
        kind: GridKind,
        values: Vec<f32>,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::ZeroDimension { width, height });
        }
        let expected = width * height;
        if values.len() != expected {
            return Err(GridError::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite {
                x: i % width,
                y: i / width,
                value: values[i],
            });
        }
        Ok(Self {
            width,
            height,
            kind,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, kind: GridKind, value: f32) -> Result<Self, GridError> {
        Self::new(width, height, kind, alloc::vec![value; width * height])
    }

    /// Builds a grid by evaluating `f(x, y)` for every cell.
    pub fn from_fn(
        width: usize,
        height: usize,
        kind: GridKind,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self, GridError> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, kind, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        (x < self.width && y < self.height).then(|| self.values[self.index(x, y)])
    }

    /// Like [`get`](Self::get) but reports the offending cell.
    pub fn at(&self, x: usize, y: usize) -> Result<f32, GridError> {
        self.get(x, y).ok_or(GridError::OutOfBounds {
            x,
            y,
            width: self.width,
            height: self.height,
        })
    }

    pub fn max(&self) -> f32 {
        self.values.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min(&self) -> f32 {
        self.values.iter().copied().fold(f32::INFINITY, f32::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_nan_with_position() {
        let mut v = vec![0.0f32; 12];
        v[7] = f32::NAN;
        let err = ScalarGrid::new(4, 3, GridKind::Flux, v).unwrap_err();
        assert!(matches!(err, GridError::NonFinite { x: 3, y: 1, .. }));
    }

    #[test]
    fn rejects_inf() {
        let mut v = vec![1.0f32; 4];
        v[0] = f32::INFINITY;
        assert!(matches!(
            ScalarGrid::new(2, 2, GridKind::Temperature, v),
            Err(GridError::NonFinite { x: 0, y: 0, .. })
        ));
    }

    #[test]
    fn rejects_length_mismatch() {
        assert_eq!(
            ScalarGrid::new(3, 3, GridKind::Flux, vec![0.0; 8]).unwrap_err(),
            GridError::LengthMismatch {
                expected: 9,
                actual: 8
            }
        );
        assert!(matches!(
            ScalarGrid::new(0, 3, GridKind::Flux, vec![]),
            Err(GridError::ZeroDimension { .. })
        ));
    }

    #[test]
    fn row_major_indexing() {
        let g = ScalarGrid::from_fn(5, 4, GridKind::Flux, |x, y| (y * 10 + x) as f32).unwrap();
        assert_eq!(g.get(3, 2), Some(23.0));
        assert_eq!(g.values()[g.index(3, 2)], 23.0);
        assert_eq!(g.get(5, 0), None);
        assert!(g.at(0, 4).is_err());
    }
}
