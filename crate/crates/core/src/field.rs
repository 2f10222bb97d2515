//! Complex fields sampled on a time-frequency grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::TFGrid;
use crate::signal::lp_norm;

/// Row-major `N_x x N_omega` samples: `values[ix * N_omega + iw]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TFField {
    grid: TFGrid,
    values: Vec<Complex64>,
}

impl TFField {
    pub fn new(grid: TFGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Precondition("field values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: TFGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TFGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: TFGrid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let (x, w) = grid.coords(i);
                f(x, w)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn from_real(grid: TFGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &TFGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, ix: usize, iw: usize) -> Complex64 {
        self.values[self.grid.index(ix, iw)]
    }

    pub fn shape(&self) -> (usize, usize) {
        self.grid.shape()
    }

    pub fn norm(&self, p: f64) -> f64 {
        lp_norm(self.values.iter().map(|v| v.norm()), p, self.grid.cell_area())
    }

    pub fn norm_sq(&self) -> f64 {
        let n = self.norm(2.0);
        n * n
    }

    /// `sum F conj(G) dx domega`.
    pub fn inner(&self, other: &TFField) -> Result<Complex64> {
        self.check_same(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell_area())
    }

    pub fn check_same(&self, other: &TFField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> TFField {
        TFField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn map_indexed(&self, f: impl Fn(f64, f64, Complex64) -> Complex64) -> TFField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (x, w) = self.grid.coords(i);
                f(x, w, v)
            })
            .collect();
        TFField { grid: self.grid, values }
    }

    pub fn scale(&self, c: Complex64) -> TFField {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &TFField) -> Result<TFField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TFField) -> Result<TFField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &TFField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<TFField> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(TFField { grid: self.grid, values })
    }

    pub fn modulus(&self) -> TFField {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    /// Real parts as a plain vector.
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Circular shift `G(x, w) = F(x - a, w - b)`; both shifts must be on-grid.
    pub fn shift(&self, a: f64, b: f64) -> Result<TFField> {
        let (nx, nw) = self.shape();
        let sx = self.grid.x.steps("time shift", a)?.rem_euclid(nx as i64) as usize;
        let sw = self.grid.omega.steps("frequency shift", b)?.rem_euclid(nw as i64) as usize;
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for ix in 0..nx {
            let src = (ix + nx - sx) % nx;
            for iw in 0..nw {
                values[ix * nw + iw] = self.values[src * nw + (iw + nw - sw) % nw];
            }
        }
        Ok(TFField { grid: self.grid, values })
    }

    /// Centered 2D Fourier transform with kernel `e^{-2 pi i (x a + w b)}`,
    /// sampled on the dual grid.
    pub fn fourier_2d(&self) -> TFField {
        let (nx, nw) = self.shape();
        let mut values = self.values.clone();
        fft::centered_2d(&mut values, nx, nw, self.grid.x.spacing(), self.grid.omega.spacing(), false);
        TFField { grid: self.grid.dual(), values }
    }

    /// Inverse of [`TFField::fourier_2d`].
    pub fn inverse_fourier_2d(&self) -> TFField {
        let (nx, nw) = self.shape();
        let out = self.grid.dual();
        let mut values = self.values.clone();
        fft::centered_2d(&mut values, nx, nw, out.x.spacing(), out.omega.spacing(), true);
        TFField { grid: out, values }
    }

    /// Largest modulus and its flat index (smallest index on ties).
    pub fn max_modulus(&self) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, v) in self.values.iter().enumerate() {
            let a = v.norm();
            if a > best.0 {
                best = (a, i);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn shift_is_exact_permutation() {
        let g = TFGrid::square(8.0, 32).unwrap();
        let f = TFField::from_fn(g, |x, w| Complex64::new(x, w * w)).unwrap();
        let s = f.shift(0.5, -0.25).unwrap();
        assert_eq!(s.norm(3.0), f.norm(3.0));
        assert_eq!(s.get(2, 0), f.get(0, 1));
        assert!(f.shift(0.3, 0.0).is_err());
    }

    #[test]
    fn gaussian_2d_transform() {
        let g = TFGrid::square(8.0, 64).unwrap();
        let f = TFField::from_fn(g, |x, w| Complex64::new((-PI * (x * x + w * w)).exp(), 0.0)).unwrap();
        let fh = f.fourier_2d();
        let want = TFField::from_fn(*fh.grid(), |a, b| Complex64::new((-PI * (a * a + b * b)).exp(), 0.0)).unwrap();
        assert!(fh.sub(&want).unwrap().norm(f64::INFINITY) < 1e-12);
        let back = fh.inverse_fourier_2d();
        assert!(back.sub(&f).unwrap().norm(f64::INFINITY) < 1e-14);
    }
}
