//! Uniform periodic grids on the line and on the time-frequency plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether a coordinate lies on a grid node.
const ON_GRID_TOL: f64 = 1e-9;

/// Uniform grid of `count` samples on `[-length/2, length/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    count: usize,
}

impl Grid1D {
    pub fn new(length: f64, count: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if count < 8 {
            return Err(Error::InvalidGrid(format!("count must be at least 8, got {count}")));
        }
        if !count.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("count must be even, got {count}")));
        }
        Ok(Self { length, count })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.count as f64
    }

    /// Spacing of the dual (frequency) grid, `1 / length`.
    pub fn dual_spacing(&self) -> f64 {
        1.0 / self.length
    }

    pub fn point(&self, k: usize) -> f64 {
        -0.5 * self.length + k as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.point(k))
    }

    /// Grid on which the centered Fourier transform of a signal on `self` lives.
    pub fn dual(&self) -> Grid1D {
        Grid1D { length: self.count as f64 / self.length, count: self.count }
    }

    /// Largest representable frequency magnitude, `1 / (2 * spacing)`.
    pub fn nyquist(&self) -> f64 {
        0.5 / self.spacing()
    }

    /// Number of whole spacings in `value`, or an error if `value` is off-grid.
    pub fn steps(&self, what: &'static str, value: f64) -> Result<i64> {
        steps_of(what, value, self.spacing())
    }

    /// Node index of coordinate `x`, if it lies on the grid (no wrapping).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = (x + 0.5 * self.length) / self.spacing();
        let r = s.round();
        if (s - r).abs() <= ON_GRID_TOL * s.abs().max(1.0) && r >= 0.0 && (r as usize) < self.count {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Index of the node at `x = 0`.
    pub fn origin(&self) -> usize {
        self.count / 2
    }

    /// Same node set up to floating-point rounding of the extent.
    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.count == other.count && (self.length - other.length).abs() <= ON_GRID_TOL * self.length.max(other.length)
    }
}

pub(crate) fn steps_of(what: &'static str, value: f64, spacing: f64) -> Result<i64> {
    let s = value / spacing;
    let r = s.round();
    if !value.is_finite() || (s - r).abs() > ON_GRID_TOL * s.abs().max(1.0) {
        return Err(Error::OffGrid { what, value, spacing });
    }
    Ok(r as i64)
}

/// Product grid of a time axis and a frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TFGrid {
    pub x: Grid1D,
    pub omega: Grid1D,
}

impl TFGrid {
    pub fn new(x: Grid1D, omega: Grid1D) -> Self {
        Self { x, omega }
    }

    /// Square grid with identical axes.
    pub fn square(length: f64, count: usize) -> Result<Self> {
        let axis = Grid1D::new(length, count)?;
        Ok(Self { x: axis, omega: axis })
    }

    /// Time-frequency grid sampled by an STFT of signals on `signal`: the
    /// frequency axis is the dual of `signal`, the time axis covers
    /// `[-x_length/2, x_length/2)` with every `x_stride`-th signal node.
    pub fn for_signal(signal: &Grid1D, x_length: f64, x_stride: usize) -> Result<Self> {
        if x_stride == 0 {
            return Err(Error::InvalidGrid("x stride must be positive".into()));
        }
        if x_length > signal.length() * (1.0 + ON_GRID_TOL) {
            return Err(Error::InvalidGrid(format!(
                "time axis length {x_length} exceeds signal window {}",
                signal.length()
            )));
        }
        let step = signal.spacing() * x_stride as f64;
        let count = steps_of("time axis length", x_length, step)?;
        let x = Grid1D::new(x_length, count as usize)?;
        signal.steps("time axis start", -0.5 * x_length)?;
        Ok(Self { x, omega: signal.dual() })
    }

    /// Full-resolution grid: every signal node is a time node.
    pub fn full(signal: &Grid1D) -> Self {
        Self { x: *signal, omega: signal.dual() }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.count(), self.omega.count())
    }

    pub fn len(&self) -> usize {
        self.x.count() * self.omega.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.x.spacing() * self.omega.spacing()
    }

    pub fn index(&self, ix: usize, iw: usize) -> usize {
        ix * self.omega.count() + iw
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let n = self.omega.count();
        (self.x.point(idx / n), self.omega.point(idx % n))
    }

    /// True when both axes coincide, so the 2D Fourier transform maps the grid onto itself.
    pub fn is_self_dual(&self) -> bool {
        self.x.same_as(&self.omega) && self.x.same_as(&self.x.dual())
    }

    pub fn same_as(&self, other: &TFGrid) -> bool {
        self.x.same_as(&other.x) && self.omega.same_as(&other.omega)
    }

    pub fn dual(&self) -> TFGrid {
        TFGrid { x: self.x.dual(), omega: self.omega.dual() }
    }

    /// Largest radial frequency that fits along some axis.
    pub fn nyquist_max(&self) -> f64 {
        self.x.nyquist().max(self.omega.nyquist())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacings() {
        let g = Grid1D::new(16.0, 16).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.dual_spacing(), 1.0 / 16.0);
        let g = Grid1D::new(32.0, 256).unwrap();
        assert_eq!(g.spacing(), 0.125);
        assert_eq!(g.point(0), -16.0);
        assert_eq!(g.point(g.origin()), 0.0);
        assert!((g.spacing() * g.dual_spacing() * g.count() as f64 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(16.0, 15).is_err());
        assert!(Grid1D::new(16.0, 4).is_err());
        assert!(Grid1D::new(0.0, 16).is_err());
        assert!(Grid1D::new(-1.0, 16).is_err());
    }

    #[test]
    fn dual_is_involutive() {
        let g = Grid1D::new(12.0, 96).unwrap();
        let d = g.dual().dual();
        assert!((d.length() - g.length()).abs() < 1e-12);
        assert_eq!(d.count(), g.count());
    }

    #[test]
    fn for_signal_axes() {
        let s = Grid1D::new(16.0, 256).unwrap();
        let tf = TFGrid::for_signal(&s, 8.0, 4).unwrap();
        assert_eq!(tf.x.count(), 32);
        assert_eq!(tf.x.spacing(), 0.25);
        assert_eq!(tf.omega.count(), 256);
        assert!(TFGrid::for_signal(&s, 32.0, 1).is_err());
        assert!(TFGrid::full(&s).is_self_dual());
        assert!(!TFGrid::full(&Grid1D::new(8.0, 256).unwrap()).is_self_dual());
    }

    #[test]
    fn off_grid_detection() {
        let g = Grid1D::new(8.0, 64).unwrap();
        assert_eq!(g.steps("u", 0.25).unwrap(), 2);
        assert!(g.steps("u", 0.3).is_err());
        assert_eq!(g.index_of(0.0), Some(32));
        assert_eq!(g.index_of(0.01), None);
    }
}
