use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::TFField;
use crate::grid::TFGrid;

use super::contour::{isocontour, weighted_length, Segment};

/// Set of grid nodes on a time-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: TFGrid,
    inside: Vec<bool>,
}

/// Summary of a mask for reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MaskSummary {
    pub nodes: usize,
    pub area: f64,
    pub boundary_length: f64,
}

impl DomainMask {
    pub fn new(grid: TFGrid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::IncompatibleGrids(format!("mask has {} cells, grid has {}", inside.len(), grid.len())));
        }
        Ok(Self { grid, inside })
    }

    pub fn full(grid: TFGrid) -> Self {
        Self { grid, inside: vec![true; grid.len()] }
    }

    pub fn empty(grid: TFGrid) -> Self {
        Self { grid, inside: vec![false; grid.len()] }
    }

    pub fn from_fn(grid: TFGrid, f: impl Fn(f64, f64) -> bool) -> Self {
        let inside = (0..grid.len())
            .map(|i| {
                let (x, w) = grid.coords(i);
                f(x, w)
            })
            .collect();
        Self { grid, inside }
    }

    /// Closed disk `|z - c| <= r`.
    pub fn disk(grid: TFGrid, centre: (f64, f64), radius: f64) -> Self {
        Self::from_fn(grid, |x, w| (x - centre.0).hypot(w - centre.1) <= radius)
    }

    /// Half-plane `x cos(theta) + w sin(theta) >= offset`.
    pub fn half_plane(grid: TFGrid, theta: f64, offset: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        Self::from_fn(grid, |x, w| x * c + w * s >= offset)
    }

    pub fn grid(&self) -> &TFGrid {
        &self.grid
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn contains(&self, i: usize) -> bool {
        self.inside[i]
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.grid.cell_area()
    }

    fn check(&self, other: &DomainMask) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids("masks on different grids".into()))
        }
    }

    fn combine(&self, other: &DomainMask, f: impl Fn(bool, bool) -> bool) -> Result<DomainMask> {
        self.check(other)?;
        let inside = self.inside.iter().zip(&other.inside).map(|(&a, &b)| f(a, b)).collect();
        Ok(DomainMask { grid: self.grid, inside })
    }

    pub fn union(&self, other: &DomainMask) -> Result<DomainMask> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &DomainMask) -> Result<DomainMask> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &DomainMask) -> Result<DomainMask> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> DomainMask {
        DomainMask { grid: self.grid, inside: self.inside.iter().map(|b| !b).collect() }
    }

    /// Marching-squares boundary of the indicator at level 1/2. The outer
    /// frame of the grid is not part of the boundary.
    pub fn boundary(&self) -> Vec<Segment> {
        let v: Vec<f64> = self.inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        isocontour(&self.grid, &v, 0.5)
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary().iter().map(Segment::length).sum()
    }

    /// `sum over boundary segments of W * length` with `W` interpolated bilinearly.
    pub fn boundary_integral(&self, w: &[f64]) -> f64 {
        weighted_length(&self.grid, w, &self.boundary())
    }

    /// Riemann sum of `w` over the mask.
    pub fn integral(&self, w: &[f64]) -> f64 {
        let s: f64 = self.inside.iter().zip(w).filter(|(&b, _)| b).map(|(_, v)| v).sum();
        s * self.grid.cell_area()
    }

    /// `(sum over the mask of |F|^2 dA)^{1/2}`.
    pub fn l2_norm(&self, f: &TFField) -> Result<f64> {
        if !self.grid.same_as(f.grid()) {
            return Err(Error::IncompatibleGrids("field and mask on different grids".into()));
        }
        let w: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
        Ok(self.integral(&w).sqrt())
    }

    pub fn summary(&self) -> MaskSummary {
        MaskSummary { nodes: self.count(), area: self.area(), boundary_length: self.boundary_length() }
    }

    /// Number of 4-connected components of the mask.
    pub fn components(&self) -> usize {
        let (nx, nw) = self.grid.shape();
        let mut seen = vec![false; self.inside.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.inside.len() {
            if !self.inside[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (ix, iw) = (i / nw, i % nw);
                let mut visit = |j: usize| {
                    if self.inside[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if ix > 0 {
                    visit(i - nw);
                }
                if ix + 1 < nx {
                    visit(i + nw);
                }
                if iw > 0 {
                    visit(i - 1);
                }
                if iw + 1 < nw {
                    visit(i + 1);
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn full_grid_has_no_boundary() {
        let g = TFGrid::square(4.0, 32).unwrap();
        assert_eq!(DomainMask::full(g).boundary_length(), 0.0);
        assert!(DomainMask::empty(g).is_empty());
    }

    #[test]
    fn disk_boundary_and_area() {
        let g = TFGrid::square(4.0, 256).unwrap();
        let d = DomainMask::disk(g, (0.0, 0.0), 1.0);
        assert!((d.area() - PI).abs() < 0.02);
        // The 0.5-contour of an indicator is a chamfered staircase, about 6% long on a circle.
        let ratio = d.boundary_length() / (2.0 * PI);
        assert!((1.0..1.08).contains(&ratio), "{ratio}");
        assert_eq!(d.components(), 1);
    }

    #[test]
    fn set_algebra_and_components() {
        let g = TFGrid::square(4.0, 64).unwrap();
        let a = DomainMask::disk(g, (-1.0, 0.0), 0.5);
        let b = DomainMask::disk(g, (1.0, 0.0), 0.5);
        let u = a.union(&b).unwrap();
        assert_eq!(u.components(), 2);
        assert_eq!(u.count(), a.count() + b.count());
        assert!(a.intersection(&b).unwrap().is_empty());
        assert_eq!(u.difference(&b).unwrap(), a);
        assert_eq!(u.complement().complement(), u);
    }

    #[test]
    fn half_plane_boundary_is_straight() {
        let g = TFGrid::square(4.0, 64).unwrap();
        let h = DomainMask::half_plane(g, 0.0, 0.03);
        let span = g.omega.point(63) - g.omega.point(0);
        assert!((h.boundary_length() - span).abs() < 1e-12);
    }
}
